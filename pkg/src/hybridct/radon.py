"""Static parallel-beam Radon transform with a Joseph interpolating projector.

A ray is the line ``{x : x . theta(phi) = s}`` with ``theta = (cos phi, sin phi)``.
The tracer marches over the pixel lines of the dominant axis and linearly
interpolates across the other axis (zero outside the grid); each sample is
weighted by the chord length per step, ``h / max(|cos|, |sin|)``.  The adjoint is
the exact transpose of these rows under the Euclidean inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ContractViolation
from .geometry import Image, ImageGrid


@dataclass(frozen=True)
class ScanGeometry:
    p: int
    q: int

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ContractViolation(f"p and q must be positive, got p={self.p}, q={self.q}")

    @property
    def h(self) -> float:
        return 1.0 / self.q

    @property
    def n_offsets(self) -> int:
        return 2 * self.q + 1

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.p) * np.pi / self.p

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.q, self.q + 1) / self.q

    @property
    def shape(self) -> tuple[int, int]:
        return self.p, self.n_offsets


@dataclass(frozen=True, eq=False)
class Sinogram:
    geometry: ScanGeometry
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != self.geometry.shape:
            if v.size != self.geometry.p * self.geometry.n_offsets:
                raise ContractViolation(
                    f"sinogram shape {v.shape} does not match geometry {self.geometry.shape}")
            v = v.reshape(self.geometry.shape)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other: "Sinogram") -> "Sinogram":
        _check_same_geometry(self.geometry, other.geometry)
        return Sinogram(self.geometry, self.values + other.values)

    def __sub__(self, other: "Sinogram") -> "Sinogram":
        _check_same_geometry(self.geometry, other.geometry)
        return Sinogram(self.geometry, self.values - other.values)

    def __mul__(self, c: float) -> "Sinogram":
        return Sinogram(self.geometry, self.values * c)

    __rmul__ = __mul__


def _check_same_geometry(a: ScanGeometry, b: ScanGeometry) -> None:
    if a != b:
        raise ContractViolation(f"geometry mismatch: {a} vs {b}")


# --- numba kernels ---------------------------------------------------------

@numba.njit(cache=True)
def ray_row_kernel(n, c, s_, off, idx, w):
    """Fill ``idx``/``w`` (capacity >= 2n) with the flat pixel indices and weights
    of one ray. Returns the number of entries written."""
    h = 2.0 / n
    cnt = 0
    if abs(c) >= abs(s_):
        step = h / abs(c)
        for j in range(n):
            x2 = -1.0 + h * (j + 0.5)
            x1 = (off - x2 * s_) / c
            r = (1.0 - x1) / h - 0.5
            i0 = int(np.floor(r))
            t = r - i0
            if 0 <= i0 < n and t < 1.0:
                idx[cnt] = i0 * n + j
                w[cnt] = (1.0 - t) * step
                cnt += 1
            if 0 <= i0 + 1 < n and t > 0.0:
                idx[cnt] = (i0 + 1) * n + j
                w[cnt] = t * step
                cnt += 1
    else:
        step = h / abs(s_)
        for i in range(n):
            x1 = 1.0 - h * (i + 0.5)
            x2 = (off - x1 * c) / s_
            r = (x2 + 1.0) / h - 0.5
            j0 = int(np.floor(r))
            t = r - j0
            if 0 <= j0 < n and t < 1.0:
                idx[cnt] = i * n + j0
                w[cnt] = (1.0 - t) * step
                cnt += 1
            if 0 <= j0 + 1 < n and t > 0.0:
                idx[cnt] = i * n + j0 + 1
                w[cnt] = t * step
                cnt += 1
    return cnt


@numba.njit(cache=True)
def _forward_kernel(f, n, cosv, sinv, offs):
    p = cosv.shape[0]
    m = offs.shape[0]
    out = np.zeros((p, m))
    idx = np.empty(2 * n, dtype=np.int64)
    w = np.empty(2 * n)
    for a in range(p):
        for k in range(m):
            cnt = ray_row_kernel(n, cosv[a], sinv[a], offs[k], idx, w)
            acc = 0.0
            for e in range(cnt):
                acc += f[idx[e]] * w[e]
            out[a, k] = acc
    return out


@numba.njit(cache=True)
def _adjoint_kernel(g, n, cosv, sinv, offs):
    p = cosv.shape[0]
    m = offs.shape[0]
    out = np.zeros(n * n)
    idx = np.empty(2 * n, dtype=np.int64)
    w = np.empty(2 * n)
    for a in range(p):
        for k in range(m):
            gv = g[a, k]
            if gv == 0.0:
                continue
            cnt = ray_row_kernel(n, cosv[a], sinv[a], offs[k], idx, w)
            for e in range(cnt):
                out[idx[e]] += gv * w[e]
    return out


# --- public API -------------------------------------------------------------

def ray_row(grid: ImageGrid, phi: float, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Sparse discrete row of one ray as (flat pixel indices, weights)."""
    n = grid.n_pix
    idx = np.empty(2 * n, dtype=np.int64)
    w = np.empty(2 * n)
    cnt = ray_row_kernel(n, np.cos(phi), np.sin(phi), float(s), idx, w)
    return idx[:cnt], w[:cnt]


def ray_integral(image: Image, phi: float, s: float) -> float:
    if abs(s) > 1.0:
        raise ContractViolation(f"offset {s} outside [-1, 1]")
    idx, w = ray_row(image.grid, phi, s)
    return float(np.dot(image.values.ravel()[idx], w))


def forward_static(image: Image, geom: ScanGeometry) -> Sinogram:
    ang = geom.angles
    vals = _forward_kernel(image.values.ravel(), image.grid.n_pix,
                           np.cos(ang), np.sin(ang), geom.offsets)
    return Sinogram(geom, vals)


def backproject_static(sino: Sinogram, grid: ImageGrid) -> Image:
    """Full transpose R^T g of :func:`forward_static`."""
    ang = sino.geometry.angles
    vals = _adjoint_kernel(sino.values, grid.n_pix, np.cos(ang), np.sin(ang),
                           sino.geometry.offsets)
    return Image(grid, vals)


def adjoint_row_apply(geom: ScanGeometry, grid: ImageGrid, phi: float, s: float,
                      weight: float) -> Image:
    out = np.zeros(grid.n_pix * grid.n_pix)
    if weight != 0.0:
        idx, w = ray_row(grid, phi, s)
        out[idx] = weight * w
    return Image(grid, out)


def ray_row_norm(geom: ScanGeometry, grid: ImageGrid, phi: float, s: float) -> float:
    _, w = ray_row(grid, phi, s)
    return float(np.sqrt(np.dot(w, w)))
