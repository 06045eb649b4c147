import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspde import kernels
from fracspde.errors import PreconditionError
from fracspde.kernels import FracParams, InitialData

# 30-digit mpmath Mellin-Barnes integrals with the kernel prefactors
KERNEL_FROZEN = [
    ("z", (2, 0.75, 1), 1.0, 0.5, 0.34542035922062351),
    ("z", (2, 0.75, 1), 1.0, 1.0, 0.21100786762552962),
    ("z", (2, 0.75, 1), 1.0, 2.0, 0.055365168444621567),
    ("y", (1.5, 0.75, 2), 1.0, 1.0, 0.062704194646458468),
    ("zstar", (2, 1.5, 3), 1.0, 1.0, 0.054322567587271417),
    ("y", (1.2, 0.9, 1), 2.0, 0.7, 0.19259000472880976),
    ("z", (1.8, 1.3, 1), 0.5, 1.5, 0.0028989326196480588),
]


@pytest.mark.parametrize("which,abd,t,r,expected", KERNEL_FROZEN)
def test_kernel_frozen(which, abd, t, r, expected):
    assert kernels.kernel(which, FracParams(*abd), t, r) == pytest.approx(expected, rel=1e-9)


def test_heat_kernel_example():
    assert kernels.z_kernel(FracParams(2, 1, 1, 1), 1.0, 1.0) == pytest.approx(0.2419707245,
                                                                              abs=1e-10)


def test_stable_density_frozen_and_gaussian():
    assert kernels.stable_density(1.5, 2, 1.0) == pytest.approx(0.063184557589447939, rel=1e-9)
    r = np.array([0.0, 0.5, 2.0])
    for d in (1, 2, 3):
        np.testing.assert_allclose(kernels.stable_density(2, d, r),
                                   (4 * math.pi) ** (-d / 2) * np.exp(-r * r / 4), rtol=1e-10)


@given(st.floats(0.3, 2.0), st.floats(0.05, 5.0), st.integers(1, 3))
def test_z_equals_y_at_beta_one(alpha, r, d):
    p = FracParams(alpha, 1.0, d)
    assert kernels.z_kernel(p, 1.3, r) == pytest.approx(kernels.y_kernel(p, 1.3, r), rel=1e-12)


@pytest.mark.parametrize("which,mass", [("z", 1.0), ("y", 1.0), ("zstar", 0.0)])
def test_fourier_kernel_at_zero_is_mass(which, mass):
    p = FracParams(1.8, 1.3, 1)
    t = 2.0
    exact = {"z": t, "y": t ** 0.3 / math.gamma(1.3), "zstar": 1.0}[which]
    assert kernels.fourier_kernel(which, p, t, 0.0) == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("which,abd", [("z", (1.5, 0.75, 2)), ("y", (1.2, 0.9, 1)),
                                       ("zstar", (1.8, 1.3, 1))])
def test_kernel_mass(which, abd):
    p = FracParams(*abd)
    t = 1.7
    exact = {"z": t ** (p.ceil_beta - 1), "y": t ** (p.beta - 1) / math.gamma(p.beta),
             "zstar": 1.0}[which]
    assert kernels.kernel_mass(which, p, t) == pytest.approx(exact, abs=1e-6)


def test_inverse_fourier_oracle_matches_frozen():
    assert kernels.inverse_fourier_oracle("z", FracParams(2, 0.75, 1), 1.0, 1.0) == pytest.approx(
        0.21100786762552962, abs=1e-7)


@pytest.mark.parametrize("abd,which,case", [
    ((1.5, 0.75, 2), None, "certified_nonneg"),
    ((2, 1.5, 3), "y", "certified_nonneg"),
    ((1.8, 1.3, 1), "zstar", "certified_nonneg"),
    ((1.3, 1.3, 1), "y", "certified_conditional"),
    ((1.2, 1.5, 1), "y", "unknown"),
    ((1.5, 1.25, 2), "y", "unknown"),
    ((2, 1.5, 3), "zstar", "unknown"),
])
def test_nonnegativity_case(abd, which, case):
    assert kernels.nonnegativity_case(FracParams(*abd), which) == case


def test_nonnegativity_scan_certified():
    assert kernels.nonnegativity_scan("y", FracParams(1.5, 0.75, 2)) >= -1e-8


def test_envelope_bounds_y():
    p = FracParams(1.5, 1.25, 2)
    zeta = 1.2
    r = np.logspace(-3, 3, 61)
    for t in (0.5, 1.0, 3.0):
        y = np.abs(kernels.y_kernel(p, t, r))
        assert np.all(y <= kernels.envelope_bound(p, zeta, t, r) * (1 + 1e-9))


def test_envelope_zeta_window():
    with pytest.raises(PreconditionError):
        kernels.envelope_ratio_sup(FracParams(1, 1.25, 1), 1.5)


def test_j0_constant_data():
    p = FracParams(1, 1.5, 2)
    assert kernels.j0_field(p, InitialData.constant(1.0, 2.0), 4.0, 0.3) == 9.0
    assert kernels.j0_field(FracParams(2, 1.5, 1), InitialData.constant(3.0, 6.0), 1.0, 0.0) == 9.0
    assert kernels.j0_field(FracParams(2, 0.7, 1), InitialData.constant(2.5), 1.0, 0.0) == 2.5


def test_j0_sampled_heat():
    grid = np.arange(-12, 12.0001, 0.01)
    init = InitialData.sampled(grid, np.exp(-grid ** 2 / 2))
    x = np.array([0.0, 0.7, 2.0])
    t = 1.0
    got = kernels.j0_field(FracParams(2, 1, 1), init, t, x)
    exact = np.exp(-x ** 2 / (2 * (1 + t))) / math.sqrt(1 + t)
    np.testing.assert_allclose(got, exact, atol=1e-5)


def test_j0_sampled_constant_matches_constant():
    grid = np.linspace(-50, 50, 201)
    p = FracParams(1.8, 1.3, 1)
    init = InitialData.sampled(grid, np.full(grid.shape, 2.0), np.full(grid.shape, 0.5))
    assert kernels.j0_field(p, init, 1.5, 0.0) == pytest.approx(2.0 + 1.5 * 0.5, rel=1e-6)


def test_initial_data_count_checked():
    with pytest.raises(PreconditionError):
        kernels.j0_field(FracParams(2, 1.5, 1), InitialData.constant(1.0), 1.0, 0.0)


def test_duhamel_constant_forcing():
    p = FracParams(1.5, 0.8, 1)
    t, f = 2.0, 3.0
    exact = 1.0 + f * t ** 0.8 / math.gamma(1.8)
    assert kernels.duhamel_solve(p, InitialData.constant(1.0), f, t, 0.0) == pytest.approx(exact)
    got = kernels.duhamel_solve(p, InitialData.constant(1.0), lambda s, y: np.full(np.shape(y), f),
                                t, 0.0)
    assert got == pytest.approx(exact, rel=1e-6)


def test_grunwald_letnikov_power():
    f = lambda s: np.asarray(s, float) ** 2
    assert kernels.grunwald_letnikov(f, 1.5, 0.5) == pytest.approx(
        math.gamma(3) / math.gamma(2.5) * 1.5 ** 1.5, rel=1e-6)


def test_rl_link_one_point():
    fd, y = kernels.rl_link(FracParams(2, 0.8, 1), 1.0, 1.0)
    assert fd == pytest.approx(y, rel=1e-3)


def test_parameter_validation():
    with pytest.raises(PreconditionError):
        FracParams(2.5, 1, 1)
    with pytest.raises(PreconditionError):
        FracParams(2, 2, 1)
    with pytest.raises(PreconditionError):
        kernels.zstar_kernel(FracParams(2, 0.8, 1), 1.0, 1.0)
