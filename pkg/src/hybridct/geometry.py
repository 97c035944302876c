"""Pixel grids over [-1, 1]^2, phantoms with known corners, image metrics.

Index convention (shared by phantoms, projectors and backprojection):
row ``i`` runs along x1 *decreasing* from the top, column ``j`` along x2
increasing, i.e. ``x1 = 1 - (2/n)(i + 1/2)`` and ``x2 = -1 + (2/n)(j + 1/2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, InvalidPhantomError


@dataclass(frozen=True)
class ImageGrid:
    n_pix: int

    def __post_init__(self):
        if int(self.n_pix) != self.n_pix or self.n_pix <= 0:
            raise ContractViolation(f"n_pix must be a positive integer, got {self.n_pix!r}")

    @property
    def spacing(self) -> float:
        return 2.0 / self.n_pix

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (x1, x2) pixel-center coordinate arrays of shape (n, n)."""
        idx = np.arange(self.n_pix) + 0.5
        x1 = 1.0 - self.spacing * idx
        x2 = -1.0 + self.spacing * idx
        return np.meshgrid(x1, x2, indexing="ij")

    def disk_mask(self) -> np.ndarray:
        x1, x2 = self.coordinates()
        return x1 * x1 + x2 * x2 <= 1.0


@dataclass(frozen=True, eq=False)
class Image:
    grid: ImageGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        n = self.grid.n_pix
        if v.size != n * n:
            raise ContractViolation(f"expected {n * n} pixel values, got {v.size}")
        v = v.reshape(n, n)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: ImageGrid) -> "Image":
        return cls(grid, np.zeros((grid.n_pix, grid.n_pix)))

    def __add__(self, other: "Image") -> "Image":
        _check_same_grid(self, other)
        return Image(self.grid, self.values + other.values)

    def __sub__(self, other: "Image") -> "Image":
        _check_same_grid(self, other)
        return Image(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Image":
        return Image(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class RectanglePhantom:
    center: tuple[float, float] = (0.0, 0.0)
    half_extents: tuple[float, float] = (0.25, 0.25)
    rotation: float = 0.0
    intensity: float = 1.0

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise InvalidPhantomError("half extents must be positive")
        if not 0.0 < self.intensity <= 1.0:
            raise InvalidPhantomError(f"intensity {self.intensity} outside (0, 1]")

    def corners(self) -> np.ndarray:
        """Corners (4, 2), counterclockwise from the smallest polar angle about the center."""
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        a, b = self.half_extents
        local = np.array([[a, b], [-a, b], [-a, -b], [a, -b]], dtype=float)
        pts = local @ rot.T + np.asarray(self.center, dtype=float)
        return order_counterclockwise(pts, np.asarray(self.center, dtype=float))


def order_counterclockwise(points: np.ndarray, center: np.ndarray | None = None) -> np.ndarray:
    """Sort points by polar angle in [0, 2*pi) about ``center`` (default: mean)."""
    points = np.asarray(points, dtype=float)
    if center is None:
        center = points.mean(axis=0)
    d = points - center
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
    return points[np.argsort(ang, kind="stable")]


def pixel_center(grid: ImageGrid, i: int, j: int) -> tuple[float, float]:
    n = grid.n_pix
    if not (0 <= i < n and 0 <= j < n):
        raise ContractViolation(f"pixel index ({i}, {j}) outside 0..{n - 1}")
    h = 2.0 / n
    return 1.0 - h * (i + 0.5), -1.0 + h * (j + 0.5)


def unit_to_pixel(grid: ImageGrid, x: np.ndarray) -> np.ndarray:
    """Map unit coordinates (..., 2) to fractional (row, col) indices; inverse of pixel_center."""
    x = np.asarray(x, dtype=float)
    h = grid.spacing
    return np.stack([(1.0 - x[..., 0]) / h - 0.5, (x[..., 1] + 1.0) / h - 0.5], axis=-1)


def make_rectangle_phantom(grid: ImageGrid, spec: RectanglePhantom) -> tuple[Image, np.ndarray]:
    corners = spec.corners()
    if np.any(np.hypot(corners[:, 0], corners[:, 1]) > 1.0):
        raise InvalidPhantomError(f"rectangle corners leave the unit disk: {corners.tolist()}")
    x1, x2 = grid.coordinates()
    c, s = np.cos(spec.rotation), np.sin(spec.rotation)
    d1 = x1 - spec.center[0]
    d2 = x2 - spec.center[1]
    # coordinates in the rectangle's own frame
    u = c * d1 + s * d2
    v = -s * d1 + c * d2
    inside = (np.abs(u) <= spec.half_extents[0]) & (np.abs(v) <= spec.half_extents[1])
    return Image(grid, np.where(inside, spec.intensity, 0.0)), corners


def make_disk_phantom(grid: ImageGrid, radius: float = 1.0, intensity: float = 1.0,
                      center: tuple[float, float] = (0.0, 0.0)) -> Image:
    x1, x2 = grid.coordinates()
    inside = (x1 - center[0]) ** 2 + (x2 - center[1]) ** 2 <= radius * radius
    return Image(grid, np.where(inside & grid.disk_mask(), intensity, 0.0))


def relative_l2_error(a: Image, b: Image, mask: np.ndarray | None = None) -> float:
    """||a - b|| / ||b|| over all pixels (or ``mask``); ||a|| when b vanishes."""
    _check_same_grid(a, b)
    av, bv = a.values, b.values
    if mask is not None:
        av, bv = av[mask], bv[mask]
    nb = float(np.linalg.norm(bv))
    if nb == 0.0:
        return float(np.linalg.norm(av))
    return float(np.linalg.norm(av - bv)) / nb


def _check_same_grid(a: Image, b: Image) -> None:
    if a.grid != b.grid:
        raise ContractViolation(f"grid mismatch: {a.grid} vs {b.grid}")
