"""Dynamic forward operator, synthetic noise and per-ray inexactness maps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ConfigurationError, ContractViolation, SingularMotionError
from .geometry import Image
from .motion import DET_TOL, AffineMotion, motion_at_time
from .radon import ScanGeometry, Sinogram, _check_same_geometry


@dataclass(frozen=True, eq=False)
class InexactnessMap:
    """Per-ray model-error bounds ``eta`` and noise bounds ``delta``, plus the
    solution-ball radius ``rho``."""
    geometry: ScanGeometry
    eta: np.ndarray = field(repr=False)
    delta: np.ndarray = field(repr=False)
    rho: float = 1.0

    def __post_init__(self):
        shape = self.geometry.shape
        eta = np.ascontiguousarray(np.broadcast_to(np.asarray(self.eta, dtype=float), shape))
        delta = np.ascontiguousarray(np.broadcast_to(np.asarray(self.delta, dtype=float), shape))
        if np.any(eta < 0) or np.any(delta < 0):
            raise ContractViolation("eta and delta must be nonnegative")
        if not self.rho > 0:
            raise ContractViolation(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def exact(cls, geometry: ScanGeometry) -> "InexactnessMap":
        return cls(geometry, np.zeros(geometry.shape), np.zeros(geometry.shape))


@numba.njit(cache=True)
def _bilinear(f, n, y1, y2):
    h = 2.0 / n
    r = (1.0 - y1) / h - 0.5
    c = (y2 + 1.0) / h - 0.5
    i0 = int(np.floor(r))
    j0 = int(np.floor(c))
    tr = r - i0
    tc = c - j0
    acc = 0.0
    for di in range(2):
        ii = i0 + di
        if ii < 0 or ii >= n:
            continue
        wr = tr if di == 1 else 1.0 - tr
        if wr == 0.0:
            continue
        for dj in range(2):
            jj = j0 + dj
            if jj < 0 or jj >= n:
                continue
            wc = tc if dj == 1 else 1.0 - tc
            if wc == 0.0:
                continue
            acc += wr * wc * f[ii, jj]
    return acc


@numba.njit(cache=True)
def _dynamic_ray(f, n, c, s_, off, C, b):
    # samples sit where the static line crosses the dominant-axis pixel lines,
    # so the identity motion reproduces the Joseph row exactly
    h = 2.0 / n
    acc = 0.0
    if abs(c) >= abs(s_):
        step = h / abs(c)
        for j in range(n):
            x2 = -1.0 + h * (j + 0.5)
            x1 = (off - x2 * s_) / c
            y1 = C[0, 0] * x1 + C[0, 1] * x2 + b[0]
            y2 = C[1, 0] * x1 + C[1, 1] * x2 + b[1]
            acc += _bilinear(f, n, y1, y2)
    else:
        step = h / abs(s_)
        for i in range(n):
            x1 = 1.0 - h * (i + 0.5)
            x2 = (off - x1 * c) / s_
            y1 = C[0, 0] * x1 + C[0, 1] * x2 + b[0]
            y2 = C[1, 0] * x1 + C[1, 1] * x2 + b[1]
            acc += _bilinear(f, n, y1, y2)
    return acc * step


@numba.njit(cache=True)
def _forward_dynamic_kernel(f, n, cosv, sinv, offs, Cs, bs):
    p = cosv.shape[0]
    m = offs.shape[0]
    out = np.zeros((p, m))
    for a in range(p):
        for k in range(m):
            out[a, k] = _dynamic_ray(f, n, cosv[a], sinv[a], offs[k], Cs[a], bs[a])
    return out


def _checked_motion(m: AffineMotion, t: int) -> tuple[np.ndarray, np.ndarray]:
    C, b = motion_at_time(m, t)
    if abs(np.linalg.det(C)) <= DET_TOL:
        raise SingularMotionError(f"C({t}) is singular")
    return C, b


def dynamic_ray_integral(image: Image, m: AffineMotion, i: int, k: int,
                         geom: ScanGeometry) -> float:
    """Line integral of ``x -> f(Gamma_i x)`` along the static ray (phi_i, s_k)."""
    if not (0 <= i < geom.p and 0 <= k < geom.n_offsets):
        raise ContractViolation(f"ray index ({i}, {k}) outside geometry {geom.shape}")
    C, b = _checked_motion(m, i)
    phi = geom.angles[i]
    return float(_dynamic_ray(image.values, image.grid.n_pix, np.cos(phi), np.sin(phi),
                              geom.offsets[k], C, b))


def forward_dynamic(image: Image, m: AffineMotion, geom: ScanGeometry) -> Sinogram:
    if geom.p != m.N:
        raise ConfigurationError(f"one time point per angle required: p={geom.p}, N={m.N}")
    Cs = np.empty((geom.p, 2, 2))
    bs = np.empty((geom.p, 2))
    for t in range(geom.p):
        Cs[t], bs[t] = _checked_motion(m, t)
    ang = geom.angles
    vals = _forward_dynamic_kernel(image.values, image.grid.n_pix, np.cos(ang), np.sin(ang),
                                   geom.offsets, Cs, bs)
    return Sinogram(geom, vals)


def compute_inexactness(dyn: Sinogram, static_ref: Sinogram, noise_bound: float,
                        rho: float = 1.0) -> InexactnessMap:
    """eta = |dyn - static_ref| per ray, delta = noise_bound everywhere."""
    _check_same_geometry(dyn.geometry, static_ref.geometry)
    if noise_bound < 0:
        raise ContractViolation("noise bound must be nonnegative")
    eta = np.abs(dyn.values - static_ref.values)
    return InexactnessMap(dyn.geometry, eta, np.full(dyn.geometry.shape, float(noise_bound)), rho)


def add_uniform_noise(s: Sinogram, amplitude: float, seed: int) -> Sinogram:
    if amplitude < 0:
        raise ContractViolation("noise amplitude must be nonnegative")
    if amplitude == 0:
        return s
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=s.values.shape)
    return Sinogram(s.geometry, s.values + noise)


def noise_level_from_blank(s: Sinogram, columns: slice) -> float:
    """Mean absolute value over a blank (object-free) band of offset columns."""
    band = s.values[:, columns]
    if band.size == 0:
        raise ContractViolation("blank region is empty")
    return float(np.mean(np.abs(band)))


def forward_deformed(image: Image, C, b, geom: ScanGeometry) -> Sinogram:
    """Static sinogram of the frozen state ``x -> f(C x + b)`` (same tracer as the dynamic model)."""
    C = np.asarray(C, dtype=float).reshape(2, 2)
    if abs(np.linalg.det(C)) <= DET_TOL:
        raise SingularMotionError("deformation matrix is singular")
    Cs = np.broadcast_to(C, (geom.p, 2, 2)).copy()
    bs = np.broadcast_to(np.asarray(b, dtype=float).reshape(2), (geom.p, 2)).copy()
    ang = geom.angles
    vals = _forward_dynamic_kernel(image.values, image.grid.n_pix, np.cos(ang), np.sin(ang),
                                   geom.offsets, Cs, bs)
    return Sinogram(geom, vals)
