"""Affine motion with constant speed and its estimation from landmarks.

A motion ``Gamma_t x = C(t) x + b(t)`` with ``C(t) = I + t/(N-1) (A - I)`` and
``b(t) = t/(N-1) b`` for time indices ``t = 0..N-1``.  Time index ``t`` is the
scanning-angle index, so the motion also depends on the angle ``phi`` through
``t(phi) = phi / (pi/p)``.

The dynamic data model integrates ``f(Gamma_t x)`` along static lines; the object
at time ``t`` is therefore ``f o Gamma_t``, which is the object moved by
``Gamma_t^{-1}``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, ContractViolation, DegenerateLandmarksError,
                     DegenerateMotionError, SingularMotionError)

DET_TOL = 1e-12
FD_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class AffineMotion:
    A: np.ndarray
    b: np.ndarray
    N: int

    def __post_init__(self):
        A = np.array(self.A, dtype=float).reshape(2, 2)
        b = np.array(self.b, dtype=float).reshape(2)
        if int(self.N) != self.N or self.N < 2:
            raise ConfigurationError(f"motion needs N >= 2 time points, got {self.N}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        # det C(t) is quadratic in t; check every integer time
        t = np.arange(self.N) / (self.N - 1)
        C = np.eye(2)[None] + t[:, None, None] * (A - np.eye(2))[None]
        dets = C[:, 0, 0] * C[:, 1, 1] - C[:, 0, 1] * C[:, 1, 0]
        bad = np.flatnonzero(np.abs(dets) <= DET_TOL)
        if bad.size:
            raise SingularMotionError(f"det C(t) vanishes at t={int(bad[0])}")

    @classmethod
    def identity(cls, N: int) -> "AffineMotion":
        return cls(np.eye(2), np.zeros(2), N)

    @classmethod
    def shift(cls, b, N: int) -> "AffineMotion":
        return cls(np.eye(2), b, N)

    @property
    def is_identity(self) -> bool:
        return bool(np.all(self.A == np.eye(2)) and np.all(self.b == 0.0))

    def matrix_at(self, t: float) -> np.ndarray:
        """C(t) for real-valued t (linear extension used for derivatives)."""
        return np.eye(2) + (t / (self.N - 1)) * (self.A - np.eye(2))

    def shift_at(self, t: float) -> np.ndarray:
        return (t / (self.N - 1)) * self.b

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist(), "N": int(self.N)}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineMotion":
        return cls(np.asarray(d["A"]), np.asarray(d["b"]), int(d["N"]))


def motion_at_time(m: AffineMotion, t: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= t <= m.N - 1:
        raise ContractViolation(f"time index {t} outside 0..{m.N - 1}")
    if t == 0:
        return np.eye(2), np.zeros(2)
    if t == m.N - 1:
        return m.A.copy(), m.b.copy()
    return m.matrix_at(t), m.shift_at(t)


def motion_apply(m: AffineMotion, t: int, x) -> np.ndarray:
    C, b = motion_at_time(m, t)
    return np.asarray(x, dtype=float) @ C.T + b


def motion_inverse_apply(m: AffineMotion, t: int, y) -> np.ndarray:
    """Gamma_t^{-1}(y) = C(t)^{-1} (y - b(t)); ``y`` may be (2,) or (..., 2)."""
    C, b = motion_at_time(m, t)
    if abs(np.linalg.det(C)) <= DET_TOL:
        raise SingularMotionError(f"C({t}) is singular")
    y = np.asarray(y, dtype=float)
    return np.linalg.solve(C, (y - b).reshape(-1, 2).T).T.reshape(y.shape)


def _inv_transpose_theta(m: AffineMotion, phi: float, dphi: float) -> np.ndarray:
    C = m.matrix_at(phi / dphi)
    return np.linalg.solve(C.T, np.array([np.cos(phi), np.sin(phi)]))


def h_of_theta(m: AffineMotion, i: int, geom) -> float:
    """Angular Jacobian ``h = w1 dw2/dphi - w2 dw1/dphi`` for ``w(phi) = C(t(phi))^{-T} theta(phi)``.

    The derivative is a central difference with step 1e-6 in phi; the motion is
    extended linearly to real-valued times for that purpose.
    """
    if not 0 <= i < geom.p:
        raise ContractViolation(f"angle index {i} outside 0..{geom.p - 1}")
    dphi = np.pi / geom.p
    phi = i * dphi
    try:
        w = _inv_transpose_theta(m, phi, dphi)
        dw = (_inv_transpose_theta(m, phi + FD_STEP, dphi)
              - _inv_transpose_theta(m, phi - FD_STEP, dphi)) / (2 * FD_STEP)
    except np.linalg.LinAlgError as exc:
        raise SingularMotionError(f"C(t) singular near angle index {i}") from exc
    h = w[0] * dw[1] - w[1] * dw[0]
    if abs(h) < 1e-12:
        raise DegenerateMotionError(f"h(theta) = {h:.3e} vanishes at angle index {i}")
    return float(h)


@dataclass(frozen=True)
class MotionEstimate:
    A: np.ndarray
    b: np.ndarray
    residual: float

    def as_motion(self, N: int) -> AffineMotion:
        return AffineMotion(self.A, self.b, N)


def estimate_affine_motion(start_corners, end_corners) -> MotionEstimate:
    """Least-squares (A, b) with ``end_k ~ A start_k + b`` over 4 correspondences.

    Overdetermined for four corners. ``residual`` is the Euclidean norm of the
    stacked coordinate residuals.
    """
    start = np.asarray(start_corners, dtype=float).reshape(-1, 2)
    end = np.asarray(end_corners, dtype=float).reshape(-1, 2)
    if start.shape != end.shape or start.shape[0] < 3:
        raise ContractViolation("need matching lists of at least 3 corners")
    # both output coordinates share the design matrix [x1 x2 1]
    design = np.column_stack([start, np.ones(len(start))])
    sv = np.linalg.svd(design, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1.0):
        raise DegenerateLandmarksError("start corners are collinear or coincide")
    sol, *_ = np.linalg.lstsq(design, end, rcond=None)
    A = sol[:2].T
    b = sol[2]
    residual = float(np.linalg.norm(design @ sol - end))
    return MotionEstimate(A, b, residual)


def invert_affine(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of ``x -> A x + b``."""
    Ainv = np.linalg.inv(A)
    return Ainv, -Ainv @ b
