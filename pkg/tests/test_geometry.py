import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridct.errors import ContractViolation, InvalidPhantomError
from hybridct.geometry import (Image, ImageGrid, RectanglePhantom, make_disk_phantom,
                               make_rectangle_phantom, pixel_center, relative_l2_error)


@pytest.mark.parametrize("n,i,j,expected", [
    (2, 0, 0, (0.5, -0.5)),
    (2, 1, 1, (-0.5, 0.5)),
    (128, 63, 64, (0.0078125, 0.0078125)),
])
def test_pixel_center_values(n, i, j, expected):
    assert pixel_center(ImageGrid(n), i, j) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("i,j", [(-1, 0), (0, 4), (4, 4)])
def test_pixel_center_out_of_range(i, j):
    with pytest.raises(ContractViolation):
        pixel_center(ImageGrid(4), i, j)


@given(st.integers(1, 64))
def test_pixel_lattice_spacing(n):
    x1, x2 = ImageGrid(n).coordinates()
    h = 2.0 / n
    if n > 1:
        assert np.allclose(np.diff(x1, axis=0), -h, atol=1e-14)
        assert np.allclose(np.diff(x2, axis=1), h, atol=1e-14)
    pts = set(zip(np.round(x1.ravel() / h, 6), np.round(x2.ravel() / h, 6)))
    assert len(pts) == n * n


def test_square_phantom_corners_order():
    _, corners = make_rectangle_phantom(ImageGrid(64), RectanglePhantom((0, 0), (0.25, 0.25)))
    expected = [(0.25, 0.25), (-0.25, 0.25), (-0.25, -0.25), (0.25, -0.25)]
    assert np.allclose(corners, expected, atol=1e-15)


def test_square_phantom_area():
    grid = ImageGrid(128)
    img, _ = make_rectangle_phantom(grid, RectanglePhantom((0, 0), (0.25, 0.25)))
    area = img.values.sum() * grid.spacing ** 2
    assert abs(area - 0.25) <= 2 * 2.0 * grid.spacing


def test_rotation_quarter_turn_swaps_extents():
    grid = ImageGrid(96)
    a, _ = make_rectangle_phantom(grid, RectanglePhantom((0.05, -0.1), (0.3, 0.15), np.pi / 2))
    b, _ = make_rectangle_phantom(grid, RectanglePhantom((0.05, -0.1), (0.15, 0.3)))
    # pixel centres exactly on an edge may flip under rounding of cos(pi/2)
    assert np.sum(a.values != b.values) <= 2 * 96 * 0.02


def test_rotation_periodicity():
    grid = ImageGrid(64)
    a, _ = make_rectangle_phantom(grid, RectanglePhantom((0.1, 0.0), (0.3, 0.2), 0.4))
    b, _ = make_rectangle_phantom(grid, RectanglePhantom((0.1, 0.0), (0.3, 0.2), 0.4 + 2 * np.pi))
    assert np.array_equal(a.values, b.values)


def test_phantom_outside_disk_rejected():
    with pytest.raises(InvalidPhantomError):
        make_rectangle_phantom(ImageGrid(32), RectanglePhantom((0.5, 0.5), (0.4, 0.4)))


def test_phantom_intensity_values():
    img, _ = make_rectangle_phantom(ImageGrid(32), RectanglePhantom((0, 0), (0.3, 0.3), 0.0, 0.7))
    assert set(np.unique(img.values)) == {0.0, 0.7}


def test_disk_phantom_inside_disk():
    grid = ImageGrid(32)
    img = make_disk_phantom(grid)
    assert np.array_equal(img.values > 0, grid.disk_mask())


def test_relative_error_examples():
    grid = ImageGrid(8)
    b = Image(grid, np.zeros((8, 8)) + np.eye(8) / np.sqrt(8))
    assert relative_l2_error(b, b) == 0.0
    assert relative_l2_error(Image.zeros(grid), b) == pytest.approx(1.0)
    assert relative_l2_error(b * 2.0, b) == pytest.approx(1.0)


def test_relative_error_zero_reference():
    grid = ImageGrid(4)
    a = Image(grid, np.full((4, 4), 0.5))
    assert relative_l2_error(a, Image.zeros(grid)) == pytest.approx(2.0)


def test_relative_error_grid_mismatch():
    with pytest.raises(ContractViolation):
        relative_l2_error(Image.zeros(ImageGrid(4)), Image.zeros(ImageGrid(5)))


@given(st.lists(st.floats(-5, 5), min_size=16, max_size=16))
def test_relative_error_zero_iff_equal(vals):
    grid = ImageGrid(4)
    a = Image(grid, np.reshape(vals, (4, 4)))
    b = Image(grid, np.reshape(vals, (4, 4)) + np.eye(4) * 1e-3)
    assert relative_l2_error(a, a) == 0.0
    assert relative_l2_error(b, a) > 0.0


def test_image_is_read_only():
    img = Image.zeros(ImageGrid(4))
    with pytest.raises(ValueError):
        img.values[0, 0] = 1.0
