import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspde.errors import GammaPoleError, PreconditionError
from fracspde.specfun import (MittagLefflerParams, bessel_j, digamma, log_gamma,
                              log_mittag_leffler, mittag_leffler)

EULER = 0.5772156649015329

# E_{rho,mu}(z) by 140-digit mpmath power series
ML_FROZEN = [
    ((0.75, 0.75), -2.0, 0.084363572245660564),
    ((1.5, 2.0), -4.0, 0.28397995796753765),
    ((0.75, 1.0), -3.0, 0.12585513691184153),
    ((0.75, 0.75), -50.0, 8.6221380547165754e-5),
    ((1.25, 1.25), -7.0, -0.020806813305503653),
    ((0.5, 1.0), -5.0, 0.11070463773306863),
]


@pytest.mark.parametrize("z,expected", [(1, 0.0), (0.5, 0.5723649429247001), (5, math.log(24))])
def test_log_gamma_examples(z, expected):
    assert log_gamma(z).real == pytest.approx(expected, abs=1e-13)
    assert log_gamma(z).imag == 0


def test_log_gamma_complex_frozen():
    # mpmath loggamma, principal branch
    assert log_gamma(2 + 3j) == pytest.approx(-2.0928517530927333 + 2.3023965434668676j, rel=1e-14)
    assert log_gamma(-2.5) == pytest.approx(-0.056243716497674051 - 9.4247779607693797j, rel=1e-14)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_gamma_poles_raise(z):
    with pytest.raises(GammaPoleError):
        log_gamma(z)
    with pytest.raises(GammaPoleError):
        digamma(z)


@pytest.mark.parametrize("z,expected", [(1, -EULER), (2, 1 - EULER),
                                        (0.5, -EULER - 2 * math.log(2))])
def test_digamma_examples(z, expected):
    assert digamma(z) == pytest.approx(expected, abs=1e-14)


def test_digamma_complex_frozen():
    assert digamma(0.5 + 1j) == pytest.approx(-0.051761650994412543 + 1.5649405178158793j,
                                              rel=1e-13)


@given(st.floats(-30, 30), st.floats(0.05, 30))
def test_log_gamma_recurrence(x, y):
    z = complex(x, y)
    # exp(lg(z+1)) = z exp(lg(z)) up to the branch of the logarithm
    diff = log_gamma(z + 1) - log_gamma(z) - cmath.log(z)
    assert abs(cmath.exp(diff) - 1) <= 1e-12


@given(st.floats(0.1, 60))
def test_digamma_matches_mpmath(x):
    assert digamma(x) == pytest.approx(float(mp.digamma(x)), rel=1e-12, abs=1e-13)


def test_bessel_examples():
    assert bessel_j(0.5, math.pi) == pytest.approx(0.0, abs=1e-15)
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(0.5, math.pi / 2) == pytest.approx(2 / math.pi, rel=1e-14)
    with pytest.raises(PreconditionError):
        bessel_j(-0.7, 1.0)


def test_mittag_leffler_examples():
    assert mittag_leffler(MittagLefflerParams(1, 1), 1.0) == pytest.approx(math.e, rel=1e-14)
    assert mittag_leffler(MittagLefflerParams(0.5, 0.5), 0.0) == pytest.approx(
        1 / math.sqrt(math.pi), rel=1e-15)
    assert mittag_leffler(MittagLefflerParams(0.5, 1), -1.0) == pytest.approx(
        float(mp.e * mp.erfc(1)), rel=1e-12)


@pytest.mark.parametrize("params,z,expected", ML_FROZEN)
def test_mittag_leffler_frozen(params, z, expected):
    assert mittag_leffler(MittagLefflerParams(*params), z) == pytest.approx(expected, rel=1e-9)


@given(st.floats(-10, 10))
def test_ml_exponential_reduction(z):
    assert mittag_leffler((1, 1), z) == pytest.approx(math.exp(z), rel=1e-10)


@given(st.floats(0.1, 1.95), st.floats(-3, 3).filter(lambda m: abs(m - round(m)) > 1e-3 or m > 0))
def test_ml_at_zero_is_reciprocal_gamma(rho, mu):
    from scipy import special
    assert mittag_leffler((rho, mu), 0.0) == pytest.approx(float(special.rgamma(mu)), rel=4e-16,
                                                           abs=1e-300)


@pytest.mark.parametrize("rho,mu", [(0.75, 0.75), (0.75, 1.0), (1.5, 2.0)])
def test_ml_routes_agree(rho, mu):
    x = np.linspace(0.5, 5, 19)
    s = mittag_leffler((rho, mu), -x, route="series")
    h = mittag_leffler((rho, mu), -x, route="foxh")
    assert np.max(np.abs(s - h)) <= 1e-8


def test_ml_half_is_erfcx():
    from scipy import special
    x = np.linspace(0, 5, 26)
    np.testing.assert_allclose(mittag_leffler((0.5, 1), -x), special.erfcx(x), rtol=1e-8)


def test_log_mittag_leffler_large_argument():
    # E_{1/2}(x) = exp(x^2) erfc(-x), and erfc(-x) -> 2
    x = 1e4
    assert log_mittag_leffler((0.5, 1.0), x) == pytest.approx(x * x + math.log(2), rel=1e-14)
    assert log_mittag_leffler((0.8, 1.0), 3.0) == pytest.approx(
        math.log(mittag_leffler((0.8, 1.0), 3.0)), rel=1e-13)


def test_ml_params_validation():
    with pytest.raises(PreconditionError):
        MittagLefflerParams(0.0, 1.0)
    with pytest.raises(PreconditionError):
        MittagLefflerParams(1.0, math.inf)
    with pytest.raises(PreconditionError):
        mittag_leffler((2.5, 1.0), 1.0, route="foxh")
