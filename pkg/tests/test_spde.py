import json
import math
from fractions import Fraction as F

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspde import spde
from fracspde.errors import ConditionError, PreconditionError, SeriesNotConvergedError
from fracspde.kernels import FracParams, InitialData

WHITE = spde.NoiseSpec.white()

rationals = st.fractions(min_value=F(1, 20), max_value=F(2), max_denominator=40)


def ml_oracle(rho, x):
    mp.mp.dps = 40
    return float(mp.nsum(lambda n: mp.mpf(x) ** n / mp.gamma(rho * n + 1), [0, mp.inf]))


def test_riesz_constant_one_dimension():
    # F(|x|^{-1/2}) = sqrt(2 pi) |xi|^{-1/2}
    assert spde.riesz_constant(0.5, 1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    with pytest.raises(PreconditionError):
        spde.riesz_constant(1.0, 1)


def test_noise_validation():
    with pytest.raises(PreconditionError):
        spde.NoiseSpec.riesz(None)
    with pytest.raises(PreconditionError):
        spde.NoiseSpec(temporal="riesz_time", beta_tilde=1.5)
    with pytest.raises(ConditionError):
        spde.NoiseSpec.riesz(2.5).validate(2)


@given(rationals, st.fractions(min_value=F(11, 20), max_value=F(39, 20), max_denominator=40),
       st.integers(1, 3))
def test_dalang_white_matches_closed_condition(alpha, beta, d):
    p = FracParams(alpha, beta, d)
    assert spde.dalang_check(WHITE, p).holds == (d / alpha + 1 / beta < 2)
    assert spde.dalang_check(WHITE, p, smoothed=True).holds == (
        d / alpha + 1 / beta < 2 * math.ceil(beta) / beta)


def test_dalang_boundaries_exact():
    eps = F(1, 10 ** 12)
    assert not spde.dalang_check(WHITE, FracParams(2, F(2, 3), 1)).holds
    assert spde.dalang_check(WHITE, FracParams(2, F(2, 3) + eps, 1)).holds
    assert not spde.dalang_check(WHITE, FracParams(1, 1, 1)).holds
    assert spde.dalang_check(WHITE, FracParams(1 + eps, 1, 1)).holds
    assert spde.dalang_check(WHITE, FracParams(2, 1, 1)).holds
    r = spde.dalang_check(spde.NoiseSpec.riesz(F(1, 2)), FracParams(1, F(3, 4), 1))
    assert r.exponent_available == F(2, 3) and r.holds


def test_existence_certificate_white():
    c = spde.existence_certificate(WHITE, FracParams(2, 0.8, 1, 1.0), 1.0)
    assert c.status == "certified"
    assert c.contraction < 1 and math.isfinite(c.n_cutoff)
    assert c.c_star == max(c.c_beta, c.c_nu_beta)
    doc = json.loads(c.to_json({"alpha": 2}))
    assert len(doc["config_hash"]) == 64


def test_existence_certificate_preconditions():
    c = spde.existence_certificate(WHITE, FracParams(2, 0.5, 1), 1.0)
    assert c.status == "precondition_failed" and c.condition == "beta > 1/2"
    c = spde.existence_certificate(WHITE, FracParams(1, 1, 1), 1.0)
    assert c.condition == "Dalang condition"
    c = spde.existence_certificate(spde.NoiseSpec.riesz(0.5), FracParams(1.2, 1.5, 2), 1.0)
    assert c.condition == "Y nonnegative"


def test_ct_constant():
    assert spde.ct_constant(WHITE, 3.0) == 1.0
    n = spde.NoiseSpec.white("riesz_time", beta_tilde=0.4)
    assert spde.ct_constant(n, 2.0) == pytest.approx(2 * 2.0 ** 0.6 / 0.6)
    n = spde.NoiseSpec(temporal="custom", gamma=lambda s: np.exp(-s),
                       antiderivative=lambda s: -math.exp(-s))
    assert spde.ct_constant(n, 1.0) == pytest.approx(2 * (1 - math.exp(-1)))


def test_c_nu_beta_diverges_at_half():
    with pytest.raises(ConditionError):
        spde.c_nu_beta(0.5, 1.0)
    assert spde.c_beta(0.8) >= (1 - 1e-14) / math.gamma(0.8) ** 2


@pytest.mark.parametrize("h,n,t,expected", [(1, 2, 1.0, 1 / 24), (0, 3, 2.0, 8 / 6)])
def test_simplex_closed_form(h, n, t, expected):
    assert spde.simplex_integral(h, n, t) == pytest.approx(expected, rel=1e-14)


def test_simplex_mpmath_quadrature():
    # n = 2: int_0^t int_0^{s2} ((t - s2)(s2 - s1))^h ds1 ds2
    h, t = 0.5, 1.3
    mp.mp.dps = 20
    val = mp.quad(lambda s2: (t - s2) ** h * s2 ** (h + 1) / (h + 1), [0, t])
    assert spde.simplex_integral(h, 2, t) == pytest.approx(float(val), rel=1e-12)


def test_simplex_monte_carlo_is_seeded():
    a = spde.simplex_monte_carlo(0.5, 3, 1.0, samples=20_000, seed=5)
    b = spde.simplex_monte_carlo(0.5, 3, 1.0, samples=20_000, seed=5)
    assert a == b
    assert abs(a[0] - spde.simplex_integral(0.5, 3, 1.0)) <= 4 * a[1]


def test_theta_exponents_example():
    assert spde.theta_exponents(FracParams(2, 1, 2), F(1)) == (F(1, 4), F(-1, 4))


@given(rationals, st.fractions(min_value=F(11, 20), max_value=F(39, 20), max_denominator=40),
       st.integers(1, 3), st.integers(1, 59))
def test_theta_identity(alpha, beta, d, k):
    kappa = F(k, 60) * d
    tm, ts = spde.theta_exponents(FracParams(alpha, beta, d), kappa)
    assert ts == tm - F(1, 2)


@pytest.mark.parametrize("kappa", [F(1, 2), F(1), F(3, 2)])
def test_p_exponent_reduction(kappa):
    p_exp, _, _ = spde.moment_exponents(FracParams(F(2), F(1), 2), kappa)
    assert p_exp == (4 - kappa) / (2 - kappa)


def test_moment_bounds_ordered():
    p = FracParams(2, 0.8, 1)
    noise = spde.NoiseSpec.riesz(0.5)
    for t in (0.5, 1.0, 2.0):
        rep = spde.moment_upper_bound(p, noise, 2.0, t, 1.3)
        assert rep.lower_bound_log <= rep.upper_bound_log
        assert rep.theta_moment == pytest.approx(
            float(spde.theta_exponents(p, 0.5)[0]) + 0.0, rel=1e-12)


def test_moment_upper_needs_certified_kernel():
    with pytest.raises(ConditionError):
        spde.moment_upper_bound(FracParams(1.2, 1.5, 2), spde.NoiseSpec.riesz(0.5), 2.0, 1.0)


def test_lower_bound_series_matches_mittag_leffler():
    p = FracParams(2, 0.8, 1)
    noise = spde.NoiseSpec.riesz(0.5)
    K, rho = spde.lower_bound_rate(p, noise)
    val, sums = spde.moment_lower_bound(p, noise, 1.3, 2.0, return_series=True)
    assert val == pytest.approx(1.69 * ml_oracle(rho, K * 2.0 ** rho), rel=1e-12)
    assert np.all(np.diff(sums) >= 0)


def test_smoothed_bounds_window():
    with pytest.raises(ConditionError):
        spde.smoothed_moment_bounds(FracParams(2, 1.2, 1), spde.NoiseSpec.riesz(0.5), 2.0, 1.0)
    rep = spde.smoothed_moment_bounds(FracParams(2, 0.8, 1), spde.NoiseSpec.riesz(0.5), 2.0, 1.0)
    assert rep.smoothed and math.isfinite(rep.upper_bound_log)


def test_smoothed_constant_scaling():
    # substituting w -> w |xi|^{-alpha/beta}: ratio 2^{-alpha/beta} at |xi| = 2 for beta <= 1
    p = FracParams(2, 0.8, 1)
    ratio = spde.smoothed_constant(p, 2.0) / spde.smoothed_constant(p, 1.0)
    assert ratio == pytest.approx(2 ** (-2 / 0.8), rel=1e-8)


def test_chaos_series_matches_closed_form():
    r = spde.chaos_second_moment(FracParams(2, 0.8, 1), spde.NoiseSpec.riesz(0.5), 1.3, 1.0)
    assert r.converged and r.summed
    assert r.upper_partial_sums[-1] == pytest.approx(r.upper_closed_form, rel=1e-10)
    assert r.lower_partial_sums[-1] == pytest.approx(r.lower_closed_form, rel=1e-10)
    assert r.calibration_grid == spde.SR_GRID_ID
    assert r.upper_partial_sums[-1] >= r.lower_partial_sums[-1]


def test_chaos_flag_at_boundary():
    p = FracParams(F(1), F(3, 4), 1)
    eps = F(1, 10 ** 9)
    below = spde.chaos_second_moment(p, spde.NoiseSpec.riesz(F(2, 3) - eps), 1.0, 1.0)
    assert below.converged and not below.summed
    for k in (F(2, 3), F(2, 3) + eps):
        assert not spde.chaos_second_moment(p, spde.NoiseSpec.riesz(k), 1.0, 1.0).converged


def test_chaos_white_noise():
    r = spde.chaos_second_moment(FracParams(2, 0.8, 1), WHITE, 1.0, 1.0)
    assert r.converged and r.lower_partial_sums is None
    assert r.upper_partial_sums[-1] == pytest.approx(r.upper_closed_form, rel=1e-10)


def test_chaos_uncertified_two_dimensions_uses_envelope():
    r = spde.chaos_second_moment(FracParams(1.2, 1.5, 2), spde.NoiseSpec.riesz(0.5), 1.0, 1.0)
    assert r.calibration_grid == "envelope-v1" and r.converged


def test_convolution_check_properties():
    p = FracParams(2, 0.8, 1)
    k = 0.5
    a = spde.riesz_convolution_check(p, k, 0.5, 2.0)
    b = spde.riesz_convolution_check(p, k, 2.0, 0.5)
    c = spde.riesz_convolution_check(p, k, 1.0, 4.0)
    assert a.route == "fourier"
    assert a.measured == pytest.approx(b.measured, rel=1e-12)
    assert a.measured <= a.bound
    # self-similarity: measured scales like (s r)^theta_series
    assert c.measured / a.measured == pytest.approx(4.0 ** a.theta_series, rel=1e-8)


def test_convolution_routes_agree():
    p = FracParams(2, 0.8, 1)
    f = spde.riesz_convolution_check(p, 0.5, 1.0, 2.0, spde.ConvolutionConfig(route="fourier"))
    d = spde.riesz_convolution_check(p, 0.5, 1.0, 2.0, spde.ConvolutionConfig(route="direct"))
    assert d.measured == pytest.approx(f.measured, rel=1e-6)


def test_envelope_convolution_constant_default_zeta():
    p = FracParams(1.5, 0.75, 2)
    C, zeta = spde.envelope_convolution_constant(p, 1.0)
    assert zeta == pytest.approx(0.5 * (1 / 1.5 + 4 / 3))
    assert C > 0 and math.isfinite(C)
    with pytest.raises(PreconditionError):
        spde.envelope_convolution_constant(p, 1.0, zeta=0.5)


def test_moment_report_json():
    rep = spde.moment_upper_bound(FracParams(2, 0.8, 1), spde.NoiseSpec.riesz(0.5), 2.0, 1.0,
                                  InitialData.constant(1.0))
    doc = json.loads(rep.to_json({"p": 2}))
    assert doc["config"] == {"p": 2} and "config_hash" in doc


def test_lower_bound_unsettled_raises():
    p = FracParams(F(1), F(3, 4), 1)
    noise = spde.NoiseSpec.riesz(F(2, 3) - F(1, 10 ** 9))
    with pytest.raises(SeriesNotConvergedError):
        spde.moment_lower_bound(p, noise, 1.0, 1.0, n_max=50)
