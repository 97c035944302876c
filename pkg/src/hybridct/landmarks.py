"""Classical four-corner detection for a single bright rectangle.

Threshold -> largest 4-connected component -> minimum-area enclosing rectangle
of the component (rotating calipers over its convex hull) -> corners in unit
coordinates, counterclockwise from the smallest polar angle about the centroid.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from .errors import NoObjectError, ObjectTooSmallError
from .geometry import Image, order_counterclockwise

MIN_COMPONENT_PIXELS = 16


def foreground_mask(image: Image) -> np.ndarray:
    lo, hi = np.percentile(image.values, [10, 99])
    return image.values > 0.5 * (lo + hi)


def largest_component(mask: np.ndarray) -> np.ndarray:
    labels, count = ndimage.label(mask)  # default structure is 4-connected in 2D
    if count == 0:
        raise NoObjectError("no foreground pixels after thresholding")
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1
    if sizes[keep - 1] < MIN_COMPONENT_PIXELS:
        raise ObjectTooSmallError(
            f"largest component has {sizes[keep - 1]} pixels (< {MIN_COMPONENT_PIXELS})")
    return labels == keep


def min_area_rectangle(points: np.ndarray) -> np.ndarray:
    """Minimum-area enclosing rectangle of a 2D point set, as 4 corners.

    One side of the optimal rectangle is collinear with a hull edge, so every
    hull edge direction is tried.
    """
    hull = points[ConvexHull(points).vertices]
    edges = np.roll(hull, -1, axis=0) - hull
    angles = np.unique(np.mod(np.arctan2(edges[:, 1], edges[:, 0]), np.pi / 2))
    c, s = np.cos(angles), np.sin(angles)
    # rows: rotation by -angle, so the candidate edge becomes axis-aligned
    rx = hull[None, :, 0] * c[:, None] + hull[None, :, 1] * s[:, None]
    ry = -hull[None, :, 0] * s[:, None] + hull[None, :, 1] * c[:, None]
    xmin, xmax = rx.min(axis=1), rx.max(axis=1)
    ymin, ymax = ry.min(axis=1), ry.max(axis=1)
    best = int(np.argmin((xmax - xmin) * (ymax - ymin)))
    cb, sb = c[best], s[best]
    local = np.array([[xmax[best], ymax[best]], [xmin[best], ymax[best]],
                      [xmin[best], ymin[best]], [xmax[best], ymin[best]]])
    return np.column_stack([local[:, 0] * cb - local[:, 1] * sb,
                            local[:, 0] * sb + local[:, 1] * cb])


def detect_rectangle_corners(image: Image) -> np.ndarray:
    """Four rectangle corners (4, 2) in unit coordinates."""
    mask = foreground_mask(image)
    if not mask.any():
        raise NoObjectError("no foreground pixels after thresholding")
    comp = largest_component(mask)
    rows, cols = np.nonzero(comp)
    h = image.grid.spacing
    # pixel squares, not centers, so the rectangle hugs the rasterized edge
    offs = np.array([[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [0.5, 0.5]])
    r = (rows[:, None] + 0.5 + offs[None, :, 0]).ravel()
    c = (cols[:, None] + 0.5 + offs[None, :, 1]).ravel()
    pts = np.unique(np.column_stack([1.0 - h * r, -1.0 + h * c]), axis=0)
    corners = min_area_rectangle(pts)
    centroid = np.array([np.mean(1.0 - h * (rows + 0.5)), np.mean(-1.0 + h * (cols + 0.5))])
    return order_counterclockwise(corners, centroid)


def match_corner_correspondence(start, end) -> np.ndarray:
    """Cyclic shift of ``end`` closest (sum of squared distances) to ``start``."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    costs = [np.sum((np.roll(end, -k, axis=0) - start) ** 2) for k in range(len(end))]
    return np.roll(end, -int(np.argmin(costs)), axis=0)
