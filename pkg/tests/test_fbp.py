import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridct.dynamic import forward_dynamic
from hybridct.errors import ConfigurationError, ContractViolation
from hybridct.fbp import (FbpConfig, backproject_filtered, dynamic_fbp, filter_sinogram, kernel_table,
                          kernel_value, static_fbp)
from hybridct.geometry import ImageGrid, RectanglePhantom, make_disk_phantom, make_rectangle_phantom, relative_l2_error
from hybridct.motion import AffineMotion
from hybridct.radon import ScanGeometry, Sinogram, forward_static
from hybridct.special import dawson


def static_psi(s, gamma):
    return (1 - np.sqrt(2) * s / gamma * dawson(s / (np.sqrt(2) * gamma))) / (4 * np.pi ** 2 * gamma ** 2)


@pytest.fixture(scope="module")
def disk_case():
    grid = ImageGrid(256)
    return make_disk_phantom(grid, radius=0.6)


def test_kernel_at_zero():
    geom = ScanGeometry(10, 20)
    v = kernel_value(AffineMotion.identity(10), 3, 0.0, FbpConfig(gamma=0.05), geom)
    assert v == pytest.approx(10.13211836, abs=1e-8)


@given(st.floats(0, 1.5), st.integers(0, 9))
def test_kernel_even_identity(s, i):
    geom, cfg = ScanGeometry(10, 20), FbpConfig(gamma=0.05)
    m = AffineMotion.identity(10)
    assert kernel_value(m, i, s, cfg, geom) == pytest.approx(kernel_value(m, i, -s, cfg, geom),
                                                              rel=1e-13, abs=1e-15)


def test_kernel_static_closed_form():
    geom, cfg = ScanGeometry(10, 20), FbpConfig(gamma=0.07)
    for s in np.linspace(-0.5, 0.5, 11):
        assert kernel_value(AffineMotion.identity(10), 2, s, cfg, geom) == pytest.approx(
            static_psi(s, 0.07), rel=1e-9, abs=1e-12)


@given(st.floats(-1, 1), st.integers(0, 29))
def test_kernel_shift_substitution(s, i):
    geom, cfg = ScanGeometry(30, 20), FbpConfig(gamma=0.05)
    m = AffineMotion.shift([0.2, -0.15], 30)
    theta = np.array([np.cos(geom.angles[i]), np.sin(geom.angles[i])])
    z = s + m.shift_at(i) @ theta
    ident = kernel_value(AffineMotion.identity(30), i, z, cfg, geom)
    assert kernel_value(m, i, s, cfg, geom) == pytest.approx(ident, rel=1e-10, abs=1e-12)


def test_kernel_table_matches_values():
    geom, cfg = ScanGeometry(6, 5), FbpConfig(gamma=0.3)
    m = AffineMotion(np.diag([1.5, 1.0]), np.array([0.1, 0.0]), 6)
    tab = kernel_table(m, cfg, geom)
    assert tab.shape == (6, 4 * 5 + 1)
    for i in range(6):
        for j, lag in enumerate(np.arange(-10, 11) / 5):
            assert tab[i, j] == pytest.approx(kernel_value(m, i, lag, cfg, geom), rel=1e-13, abs=1e-15)


def test_filter_zero_and_linear(rng):
    geom, cfg = ScanGeometry(8, 6), FbpConfig(gamma=0.2)
    m = AffineMotion.shift([0.1, 0.1], 8)
    assert not filter_sinogram(Sinogram(geom, np.zeros(geom.shape)), m, cfg).any()
    g1, g2 = rng.normal(size=geom.shape), rng.normal(size=geom.shape)
    lhs = filter_sinogram(Sinogram(geom, 3 * g1 + g2), m, cfg)
    rhs = 3 * filter_sinogram(Sinogram(geom, g1), m, cfg) + filter_sinogram(Sinogram(geom, g2), m, cfg)
    assert np.allclose(lhs, rhs, atol=1e-12 * np.abs(rhs).max())


@pytest.mark.parametrize("motion", [AffineMotion.identity(8), AffineMotion.shift([0.2, 0.1], 8)])
def test_filter_impulse(motion):
    geom, cfg = ScanGeometry(8, 6), FbpConfig(gamma=0.2)
    i0, j0 = 5, 4
    g = np.zeros(geom.shape)
    g[i0, j0] = 1.0
    v = filter_sinogram(Sinogram(geom, g), motion, cfg)
    s = geom.offsets
    expected = np.array([kernel_value(motion, i0, s[j0] - sk, cfg, geom) for sk in s]) / geom.q
    assert np.allclose(v[i0], expected, rtol=1e-13, atol=1e-15)
    assert not np.delete(v, i0, axis=0).any()


def test_backproject_zero():
    geom = ScanGeometry(8, 6)
    img = backproject_filtered(np.zeros(geom.shape), AffineMotion.identity(8), FbpConfig(gamma=0.2, n_pix_out=16), geom)
    assert not img.values.any()


def test_outside_disk_is_zero(disk_case):
    geom = ScanGeometry(30, 32)
    img = static_fbp(forward_static(disk_case, geom), FbpConfig(n_pix_out=64))
    assert not img.values[~img.grid.disk_mask()].any()


def test_static_disk():
    grid = ImageGrid(128)
    disk = make_disk_phantom(grid)
    geom = ScanGeometry(180, 128)
    img = static_fbp(forward_static(disk, geom), FbpConfig(gamma=1.5 / 128, n_pix_out=128))
    assert relative_l2_error(img, disk, grid.disk_mask()) < 0.15


@pytest.mark.parametrize("factor", [1.0, 2.0, 3.0])
def test_interior_level_normalised(disk_case, factor):
    geom = ScanGeometry(120, 64)
    img = static_fbp(forward_static(disk_case, geom), FbpConfig(gamma=factor / 64, n_pix_out=101))
    x1, x2 = img.grid.coordinates()
    interior = np.hypot(x1, x2) < 0.3
    assert abs(img.values[interior].mean() - 1.0) <= 0.1


def test_static_equals_identity_dynamic(disk_case):
    geom = ScanGeometry(20, 16)
    sino = forward_static(disk_case, geom)
    cfg = FbpConfig(n_pix_out=33)
    assert np.array_equal(static_fbp(sino, cfg).values,
                          dynamic_fbp(sino, AffineMotion.identity(20), cfg).values)


def test_error_decreases_with_angles():
    c = (0.3, 0.2)
    disk = make_disk_phantom(ImageGrid(256), radius=0.4, center=c)
    truth = make_disk_phantom(ImageGrid(101), radius=0.4, center=c)
    x1, x2 = truth.grid.coordinates()
    # score streaks away from the edge, where mollifier blur does not depend on p
    mask = (np.abs(np.hypot(x1 - c[0], x2 - c[1]) - 0.4) > 0.1) & truth.grid.disk_mask()
    errs = [relative_l2_error(static_fbp(forward_static(disk, ScanGeometry(p, 128)),
                                         FbpConfig(n_pix_out=101)), truth, mask)
            for p in (45, 90, 180)]
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("A,b", [(np.eye(2), [0.2, 0.2]), (np.diag([1.5, 1.0]), [0.0, 0.0]),
                                 (np.array([[1.1, 0.1], [-0.1, 0.9]]), [0.1, -0.1])])
def test_true_motion_beats_static(A, b):
    spec = RectanglePhantom((0.0, 0.0), (0.3, 0.2))
    img, _ = make_rectangle_phantom(ImageGrid(256), spec)
    geom = ScanGeometry(120, 64)
    m = AffineMotion(A, np.array(b), 120)
    sino = forward_dynamic(img, m, geom)
    cfg = FbpConfig(n_pix_out=121)
    truth, _ = make_rectangle_phantom(ImageGrid(121), spec)
    e_true = relative_l2_error(dynamic_fbp(sino, m, cfg), truth)
    e_static = relative_l2_error(static_fbp(sino, cfg), truth)
    assert e_true < e_static


def test_motion_geometry_mismatch():
    geom = ScanGeometry(8, 4)
    with pytest.raises((ConfigurationError, ContractViolation)):
        dynamic_fbp(Sinogram(geom, np.zeros(geom.shape)), AffineMotion.identity(9))


def test_gamma_default_and_contract():
    assert FbpConfig().resolve_gamma(ScanGeometry(4, 150)) == pytest.approx(1.5 / 150)
    with pytest.raises((ConfigurationError, ContractViolation)):
        FbpConfig(gamma=0.0)
