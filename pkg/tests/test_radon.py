import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridct.errors import ContractViolation
from hybridct.geometry import Image, ImageGrid, RectanglePhantom, make_disk_phantom, make_rectangle_phantom
from hybridct.radon import (ScanGeometry, Sinogram, adjoint_row_apply, backproject_static,
                            forward_static, ray_integral, ray_row_norm)


def dense_row(grid, phi, s):
    """Oracle: evaluate the ray on every canonical basis image."""
    n = grid.n_pix
    row = np.zeros(n * n)
    for idx in range(n * n):
        e = np.zeros(n * n)
        e[idx] = 1.0
        row[idx] = ray_integral(Image(grid, e.reshape(n, n)), phi, s)
    return row.reshape(n, n)


def test_geometry_grid():
    g = ScanGeometry(6, 4)
    assert g.n_offsets == 9 and g.shape == (6, 9) and g.h == 0.25
    assert np.allclose(g.offsets, -g.offsets[::-1])
    assert g.offsets[0] == -1.0 and g.offsets[-1] == 1.0
    assert np.all((g.angles >= 0) & (g.angles < np.pi))


def test_sinogram_shape_checked():
    with pytest.raises(ContractViolation):
        Sinogram(ScanGeometry(3, 2), np.zeros((3, 4)))


@pytest.mark.parametrize("phi", [0.0, 0.3, np.pi / 4, 1.2, np.pi / 2, 2.5])
def test_disk_chords(phi):
    grid = ImageGrid(128)
    disk = make_disk_phantom(grid)
    assert abs(ray_integral(disk, phi, 0.0) - 2.0) <= 2 * grid.spacing
    assert abs(ray_integral(disk, phi, 0.6) - 1.6) <= 2 * grid.spacing


def test_zero_image_and_offset_contract():
    z = Image.zeros(ImageGrid(16))
    assert ray_integral(z, 0.7, 0.1) == 0.0
    with pytest.raises(ContractViolation):
        ray_integral(z, 0.0, 1.5)


def test_centered_square_axis_chord():
    grid = ImageGrid(128)
    img, _ = make_rectangle_phantom(grid, RectanglePhantom((0, 0), (0.25, 0.25)))
    sino = forward_static(img, ScanGeometry(4, 10))
    assert abs(sino.values[0, 10] - 0.5) <= grid.spacing


def test_forward_matches_ray_integral(rng):
    grid = ImageGrid(20)
    img = Image(grid, rng.random((20, 20)))
    geom = ScanGeometry(7, 5)
    sino = forward_static(img, geom)
    for i in range(geom.p):
        for k in range(geom.n_offsets):
            assert sino.values[i, k] == pytest.approx(
                ray_integral(img, geom.angles[i], geom.offsets[k]), rel=1e-13, abs=1e-14)


def test_row_adjoint_against_dense_oracle(rng):
    grid = ImageGrid(32)
    geom = ScanGeometry(24, 16)
    for _ in range(50):
        phi = rng.uniform(0, np.pi)
        s = rng.uniform(-1, 1)
        w = rng.normal()
        f = rng.normal(size=(32, 32))
        row = dense_row(grid, phi, s)
        lhs = np.vdot(row, f) * w
        rhs = np.vdot(f, adjoint_row_apply(geom, grid, phi, s, w).values)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(f) * np.linalg.norm(row) * abs(w) + 1e-300


def test_row_norm_against_dense_oracle(rng):
    grid = ImageGrid(24)
    geom = ScanGeometry(8, 8)
    for _ in range(10):
        phi, s = rng.uniform(0, np.pi), rng.uniform(-1, 1)
        oracle = np.linalg.norm(dense_row(grid, phi, s))
        assert ray_row_norm(geom, grid, phi, s) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("phi", [0.0, 0.5, np.pi / 4, 2.0])
def test_row_norm_misses_support(phi):
    geom, grid = ScanGeometry(4, 4), ImageGrid(16)
    assert ray_row_norm(geom, grid, phi, np.sqrt(2) + 0.01) == 0.0
    assert ray_row_norm(geom, grid, phi, 0.0) > 0.0


def test_row_support_local():
    grid = ImageGrid(40)
    phi, s = 0.77, 0.21
    row = adjoint_row_apply(ScanGeometry(4, 4), grid, phi, s, 1.0).values
    x1, x2 = grid.coordinates()
    dist = np.abs(x1 * np.cos(phi) + x2 * np.sin(phi) - s)
    assert np.all(dist[row != 0] <= np.sqrt(2) * grid.spacing + 1e-12)


def test_weight_zero_gives_zero():
    assert not adjoint_row_apply(ScanGeometry(4, 4), ImageGrid(8), 0.4, 0.1, 0.0).values.any()


@given(st.floats(0, np.pi), st.floats(-0.99, 0.99))
def test_row_norm_same_line_symmetry(phi, s):
    geom, grid = ScanGeometry(4, 4), ImageGrid(16)
    a = ray_row_norm(geom, grid, phi, s)
    b = ray_row_norm(geom, grid, phi + np.pi, -s)
    assert abs(a - b) <= 1e-12 * max(a, 1.0)


def test_full_adjoint(rng):
    grid, geom = ImageGrid(32), ScanGeometry(24, 16)
    for _ in range(50):
        f = Image(grid, rng.normal(size=(32, 32)))
        g = Sinogram(geom, rng.normal(size=geom.shape))
        lhs = np.vdot(forward_static(f, geom).values, g.values)
        rhs = np.vdot(f.values, backproject_static(g, grid).values)
        assert abs(lhs - rhs) / (np.linalg.norm(f.values) * np.linalg.norm(g.values)) <= 1e-10


def test_linearity(rng):
    grid, geom = ImageGrid(24), ScanGeometry(10, 8)
    f = Image(grid, rng.random((24, 24)))
    g = Image(grid, rng.random((24, 24)))
    lhs = forward_static(f * 2.5 + g * -1.5, geom).values
    rhs = 2.5 * forward_static(f, geom).values - 1.5 * forward_static(g, geom).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(rhs).max())


@given(st.integers(0, 2 ** 31 - 1))
def test_nonnegative_image_nonnegative_sinogram(seed):
    r = np.random.default_rng(seed)
    sino = forward_static(Image(ImageGrid(12), r.random((12, 12))), ScanGeometry(6, 5))
    assert sino.values.min() >= 0.0
