"""Exception hierarchy shared by all stages."""


class HybridCTError(Exception):
    """Base class for toolkit errors."""


class ContractViolation(HybridCTError, ValueError):
    """An argument broke an operation's precondition (shape, range, grid)."""


class ConfigurationError(HybridCTError, ValueError):
    pass


class InvalidPhantomError(HybridCTError, ValueError):
    pass


class SingularMotionError(HybridCTError, ArithmeticError):
    pass


class DegenerateMotionError(HybridCTError, ArithmeticError):
    """h(theta) vanishes, so the dynamic inversion formula does not apply."""


class DegenerateLandmarksError(HybridCTError, ValueError):
    pass


class ZeroDirectionError(HybridCTError, ArithmeticError):
    pass


class NoObjectError(HybridCTError, ValueError):
    pass


class ObjectTooSmallError(HybridCTError, ValueError):
    pass


class FormatError(HybridCTError, ValueError):
    """Malformed file header or payload."""


class KindMismatchError(FormatError):
    pass


class TruncationError(FormatError):
    pass
