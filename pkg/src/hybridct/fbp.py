"""Dynamic filtered backprojection for affine motions with a Gaussian mollifier.

The reconstruction kernel for time index ``i`` (angle ``theta_i``) is

    psi_i(s) = |det C| |h| / (4 pi^2 gamma^2 |w|^2)
               * (1 - sqrt(2) z / (gamma |w|) * D(z / (sqrt(2) gamma |w|))),
    z = s + (C^{-1} b) . theta_i,   w = C^{-T} theta_i,

with D the Dawson integral.  The smoothed density is
``f_gamma(x) = sum_i 2pi/p * h_s * sum_j g_ij psi_i(s_j - (C_i^{-1} x) . theta_i)``,
evaluated as a filtering step followed by an interpolated backprojection.
Static FBP is the identity-motion case.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ContractViolation
from .geometry import Image, ImageGrid
from .motion import AffineMotion, h_of_theta, motion_at_time
from .radon import ScanGeometry, Sinogram
from .special import dawson

DEFAULT_GAMMA_FACTOR = 1.5


@dataclass(frozen=True)
class FbpConfig:
    """``gamma`` is the mollifier width in unit lengths; None means 1.5 offset spacings."""
    gamma: float | None = None
    n_pix_out: int = 487

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ContractViolation(f"gamma must be positive, got {self.gamma}")
        if self.n_pix_out <= 0:
            raise ContractViolation("n_pix_out must be positive")

    def resolve_gamma(self, geom: ScanGeometry) -> float:
        return self.gamma if self.gamma is not None else DEFAULT_GAMMA_FACTOR * geom.h


@dataclass(frozen=True)
class _AngleTerms:
    prefactor: float
    shift: float
    wnorm: float


def _angle_terms(m: AffineMotion, i: int, geom: ScanGeometry, gamma: float,
                 h_theta: float | None = None) -> _AngleTerms:
    C, b = motion_at_time(m, i)
    phi = geom.angles[i]
    theta = np.array([np.cos(phi), np.sin(phi)])
    w = np.linalg.solve(C.T, theta)
    wn = float(np.hypot(w[0], w[1]))
    shift = float(np.linalg.solve(C, b) @ theta)
    if h_theta is None:
        h_theta = h_of_theta(m, i, geom)
    pref = abs(np.linalg.det(C)) * abs(h_theta) / (4 * np.pi ** 2 * gamma ** 2 * wn ** 2)
    return _AngleTerms(float(pref), shift, wn)


def _psi(terms: _AngleTerms, s, gamma: float):
    z = np.asarray(s, dtype=float) + terms.shift
    scale = gamma * terms.wnorm
    return terms.prefactor * (1.0 - np.sqrt(2.0) * z / scale * dawson(z / (np.sqrt(2.0) * scale)))


def kernel_value(m: AffineMotion, i: int, s: float, cfg: FbpConfig, geom: ScanGeometry) -> float:
    gamma = cfg.resolve_gamma(geom)
    return float(_psi(_angle_terms(m, i, geom, gamma), s, gamma))


def kernel_table(m: AffineMotion, cfg: FbpConfig, geom: ScanGeometry) -> np.ndarray:
    """psi_i at every offset lag ``(-2q..2q) * h``; shape (p, 4q+1)."""
    _check_motion(m, geom)
    gamma = cfg.resolve_gamma(geom)
    q = geom.q
    lags = np.arange(-2 * q, 2 * q + 1) * geom.h
    # h(theta) is x-independent: one evaluation per angle
    return np.stack([_psi(_angle_terms(m, i, geom, gamma), lags, gamma) for i in range(geom.p)])


def filter_sinogram(s: Sinogram, m: AffineMotion, cfg: FbpConfig) -> np.ndarray:
    """v[i, k] = h * sum_j psi_i(s_j - s_k) g[i, j]  (direct summation).

    The kernel is not even once the motion shifts it, so the lag is the data
    offset minus the evaluation offset.
    """
    geom = s.geometry
    table = kernel_table(m, cfg, geom)
    q = geom.q
    k = np.arange(2 * q + 1)
    lag_index = (k[None, :] - k[:, None]) + 2 * q  # [k, j] -> (j - k) + 2q
    v = np.empty(geom.shape)
    for i in range(geom.p):
        v[i] = geom.h * (table[i][lag_index] @ s.values[i])
    return v


@numba.njit(cache=True)
def _backproject_kernel(v, n_out, q, W):
    p = W.shape[0]
    m = v.shape[1]
    hpx = 2.0 / n_out
    out = np.zeros((n_out, n_out))
    for i in range(n_out):
        x1 = 1.0 - hpx * (i + 0.5)
        for j in range(n_out):
            x2 = -1.0 + hpx * (j + 0.5)
            if x1 * x1 + x2 * x2 > 1.0:
                continue
            acc = 0.0
            for l in range(p):
                s = W[l, 0] * x1 + W[l, 1] * x2
                if s < -1.0 or s > 1.0:
                    continue
                sq = s * q
                k = int(np.floor(sq)) + q
                mu = sq - k + q
                val = (1.0 - mu) * v[l, k]
                if k + 1 < m:
                    val += mu * v[l, k + 1]
                acc += val
            out[i, j] = acc
    return out


def backproject_filtered(v: np.ndarray, m: AffineMotion, cfg: FbpConfig,
                         geom: ScanGeometry) -> Image:
    """Interpolated backprojection at ``s = (C_l^{-1} x) . theta_l``, scaled by 2pi/p.

    Pixels outside the unit disk stay 0; offsets outside [-1, 1] contribute 0.
    """
    v = np.ascontiguousarray(v, dtype=float)
    if v.shape != geom.shape:
        raise ContractViolation(f"filtered data shape {v.shape} != {geom.shape}")
    _check_motion(m, geom)
    W = np.empty((geom.p, 2))
    for l, phi in enumerate(geom.angles):
        C, _ = motion_at_time(m, l)
        # (C^{-1} x) . theta = x . (C^{-T} theta)
        W[l] = np.linalg.solve(C.T, np.array([np.cos(phi), np.sin(phi)]))
    out = _backproject_kernel(v, cfg.n_pix_out, geom.q, W)
    return Image(ImageGrid(cfg.n_pix_out), out * (2 * np.pi / geom.p))


def dynamic_fbp(sino: Sinogram, m: AffineMotion, cfg: FbpConfig = FbpConfig()) -> Image:
    return backproject_filtered(filter_sinogram(sino, m, cfg), m, cfg, sino.geometry)


def static_fbp(sino: Sinogram, cfg: FbpConfig = FbpConfig()) -> Image:
    return dynamic_fbp(sino, AffineMotion.identity(sino.geometry.p), cfg)


def _check_motion(m: AffineMotion, geom: ScanGeometry) -> None:
    if m.N != geom.p:
        raise ContractViolation(f"motion has N={m.N} time points but geometry has p={geom.p}")
