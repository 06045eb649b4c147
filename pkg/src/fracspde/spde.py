r"""SPDE layer: noise model, Dalang-type conditions, existence certificates,
moment bounds for Riesz spatial covariance and the chaos second-moment series.

Noise covariance is gamma(t - s) Lambda(x - y) with spectral measure mu.
For Lambda = |x|^{-kappa},

.. math:: \mu(d\xi) = C_\kappa |\xi|^{\kappa-d} d\xi,\qquad
          C_\kappa = 2^{d-\kappa}\pi^{d/2}\Gamma((d-\kappa)/2)/\Gamma(\kappa/2).

The noise strength enters as a factor ``lam**2 * lambda_sq`` on mu.
"""
from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, special

from . import kernels, quadrature
from .errors import ConditionError, ConvergenceError, PreconditionError, SeriesNotConvergedError
from .kernels import FracParams, InitialData
from .report import canonical_json, config_hash, plain
from .specfun import MittagLefflerParams, log_mittag_leffler, mittag_leffler

# --------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian noise: temporal part gamma and spatial part Lambda.

    temporal: "dirac", "riesz_time" (gamma(s) = s^{-beta_tilde}) or "custom"
    (``gamma`` callable with ``antiderivative`` G, G(0) finite).
    spatial: "white" (Lambda = delta) or "riesz" (Lambda = |x|^{-kappa}).
    """

    temporal: str = "dirac"
    spatial: str = "white"
    kappa: Optional[float] = None
    beta_tilde: Optional[float] = None
    gamma: Optional[Callable] = field(default=None, compare=False)
    antiderivative: Optional[Callable] = field(default=None, compare=False)
    lambda_sq: float = 1.0

    def __post_init__(self):
        if self.temporal not in ("dirac", "riesz_time", "custom"):
            raise PreconditionError(f"unknown temporal covariance {self.temporal!r}")
        if self.spatial not in ("white", "riesz"):
            raise PreconditionError(f"unknown spatial covariance {self.spatial!r}")
        if self.temporal == "riesz_time":
            if self.beta_tilde is None or not 0 < self.beta_tilde < 1:
                raise PreconditionError("riesz_time needs beta_tilde in (0, 1)")
        if self.temporal == "custom" and (self.gamma is None or self.antiderivative is None):
            raise PreconditionError("custom temporal covariance needs gamma and its antiderivative")
        if self.spatial == "riesz":
            if self.kappa is None or not self.kappa > 0:
                raise PreconditionError("riesz spatial covariance needs kappa > 0")
        if not self.lambda_sq > 0:
            raise PreconditionError("lambda_sq must be positive")

    @classmethod
    def white(cls, temporal="dirac", **kw):
        return cls(temporal=temporal, spatial="white", **kw)

    @classmethod
    def riesz(cls, kappa, temporal="dirac", **kw):
        return cls(temporal=temporal, spatial="riesz", kappa=kappa, **kw)

    @property
    def dirac(self):
        return self.temporal == "dirac"

    def validate(self, d):
        if self.spatial == "riesz" and not 0 < self.kappa < d:
            raise ConditionError(f"riesz kappa must lie in (0, d={d}), got {self.kappa}",
                                 "0 < kappa < d")

    def to_dict(self):
        out = {"temporal": self.temporal, "spatial": self.spatial, "lambda_sq": self.lambda_sq}
        if self.spatial == "riesz":
            out["kappa"] = self.kappa
        if self.temporal == "riesz_time":
            out["beta_tilde"] = self.beta_tilde
        return plain(out)


def riesz_constant(kappa, d):
    """C_kappa with F(|x|^{-kappa}) = C_kappa |xi|^{kappa - d}."""
    if not 0 < kappa < d:
        raise PreconditionError(f"kappa must lie in (0, d), got {kappa}")
    k = float(kappa)
    return (2.0 ** (d - k) * math.pi ** (d / 2) * math.gamma((d - k) / 2) / math.gamma(k / 2))


def _strength(noise, params):
    return float(noise.lambda_sq) * float(params.lam) ** 2


def _mu_density(noise, params):
    """(c, e) with mu(d xi) = c |xi|^{e - d} d xi (white: e = d)."""
    d = params.d
    if noise.spatial == "white":
        return _strength(noise, params), d
    return _strength(noise, params) * riesz_constant(noise.kappa, d), noise.kappa


# --------------------------------------------------------------------------
# Dalang-type conditions


@dataclass(frozen=True)
class DalangResult:
    holds: bool
    exponent_required: object  # d (white) or kappa (riesz): must be below
    exponent_available: object  # decay power of the kernel in xi
    smoothed: bool = False

    def to_dict(self):
        return plain(asdict(self))


def dalang_exponent(params, smoothed=False):
    """2 alpha - alpha/beta, or alpha (2 ceil(beta) - 1)/beta for the smoothed equation.

    Exact (Fraction) when alpha and beta are Fractions or integers.
    """
    a, b = params.alpha, params.beta
    if smoothed:
        return a * (2 * math.ceil(b) - 1) / b
    return 2 * a - a / b


def dalang_check(noise, params, smoothed=False):
    """Does mu integrate against 1/(1 + |xi|^e)?

    With mu = c |xi|^{k - d} d xi the integral is finite at 0 for k > 0 and at
    infinity iff k < e; white noise is k = d.
    """
    e = dalang_exponent(params, smoothed)
    k = params.d if noise.spatial == "white" else noise.kappa
    return DalangResult(bool(k < e), k, e, smoothed)


# --------------------------------------------------------------------------
# time covariance


def ct_constant(noise, t):
    """C_t = 2 int_0^t gamma(s) ds.

    For the delta-correlated case the time integral collapses to the
    diagonal and 1.0 is returned (check ``noise.dirac``).
    """
    if not t > 0:
        raise PreconditionError("t must be positive")
    if noise.temporal == "dirac":
        return 1.0
    if noise.temporal == "riesz_time":
        bt = float(noise.beta_tilde)
        return 2.0 * t ** (1 - bt) / (1 - bt)
    s = np.linspace(0, t, 257)[1:]
    g = np.asarray(noise.gamma(s), dtype=float)
    if np.any(g < 0):
        raise ConditionError("custom gamma must be nonnegative", "gamma >= 0")
    G0, Gt = float(noise.antiderivative(0.0)), float(noise.antiderivative(float(t)))
    if not (math.isfinite(G0) and math.isfinite(Gt)):
        raise ConditionError("gamma is not locally integrable (antiderivative not finite)",
                             "gamma locally integrable")
    return 2.0 * (Gt - G0)


def _ct_time_power(noise):
    """p with C_t proportional to t^p (None when not a power law)."""
    if noise.temporal == "dirac":
        return 0.0
    if noise.temporal == "riesz_time":
        return 1.0 - float(noise.beta_tilde)
    return None


# --------------------------------------------------------------------------
# Mittag-Leffler integrals


def _ml(b, mu, x):
    return mittag_leffler(MittagLefflerParams(float(b), float(mu)), -np.asarray(x, float))


@functools.lru_cache(maxsize=64)
def c_nu_beta(beta, nu):
    """C_{nu,beta} = int_0^inf beta^{-1} v^{1 - 1/beta} E_{beta,beta}(-nu v/2)^2 dv."""
    b = float(beta)
    if not b > 0.5:
        raise ConditionError("C_{nu,beta} diverges at 0 unless beta > 1/2", "beta > 1/2")

    def f(v):
        return v ** (1 - 1 / b) * _ml(b, b, 0.5 * float(nu) * v) ** 2 / b

    val, _ = quadrature.half_line_integral(f, 1e-14, 1e14, per_decade=3, order=24)
    return val


@functools.lru_cache(maxsize=64)
def c_beta(beta):
    """Bound for E_{beta,beta}(-x)^2 on x >= 0: max of 1/Gamma(beta)^2 and a grid sup."""
    b = float(beta)
    x = np.concatenate([[0.0], np.logspace(-6, 6, 241)])
    vals = _ml(b, b, x) ** 2
    return float(max(special.rgamma(b) ** 2, np.max(vals)))


def _radial_ml_integral(b, mu, alpha, kappa, d, square=True):
    """S_{d-1} int_0^inf E_{b,mu}(-k^alpha)^{1 or 2} k^{kappa-1} dk."""

    def f(k):
        e = _ml(b, mu, k ** float(alpha))
        return (e * e if square else e) * k ** (float(kappa) - 1)

    val, _ = quadrature.half_line_integral(f, 1e-12, 1e12, per_decade=3, order=24)
    return kernels.sphere_area(d) * val


@functools.lru_cache(maxsize=64)
def c_tilde(params, kappa):
    """int_{R^d} E_{beta,beta}(-|xi|^alpha)^2 |xi|^{kappa-d} d xi."""
    return _radial_ml_integral(params.beta, params.beta, params.alpha, kappa, params.d)


@functools.lru_cache(maxsize=64)
def c_bar(params, kappa):
    """int_{R^d} E_{beta,ceil(beta)}(-|eta|^alpha)^2 |eta|^{kappa-d} d eta."""
    return _radial_ml_integral(params.beta, params.ceil_beta, params.alpha, kappa, params.d)


# --------------------------------------------------------------------------
# existence certificate


@dataclass
class ExistenceCertificate:
    n_cutoff: float
    c_n: float
    d_n: float
    contraction: float
    status: str  # certified | not_found | precondition_failed
    c_star: float = math.nan
    c_beta: float = math.nan
    c_nu_beta: float = math.nan
    c_t: float = math.nan
    condition: str = ""
    message: str = ""

    def to_dict(self):
        return plain(asdict(self))

    def to_json(self, config=None):
        doc = self.to_dict()
        if config is not None:
            doc["config"] = plain(config)
            doc["config_hash"] = config_hash(config)
        return canonical_json(doc)


def _tail_and_ball(noise, params, e):
    """Closures N -> C_N and N -> D_N for mu = c |xi|^{k-d} d xi."""
    c, k = _mu_density(noise, params)
    S = kernels.sphere_area(params.d)
    k, e = float(k), float(e)
    return (lambda N: c * S * N ** (k - e) / (e - k)), (lambda N: c * S * N ** k / k)


def _failed(condition, message):
    nan = math.nan
    return ExistenceCertificate(nan, nan, nan, nan, "precondition_failed",
                                condition=condition, message=message)


def existence_certificate(noise, params, t, max_doublings=200):
    """Search N with 2 C_* C_t C_N < 1 (C_N tail mass, D_N ball mass of mu).

    C_* = max(C_beta, C_{nu,beta}).  Preconditions are reported, not raised.
    """
    if not float(params.beta) > 0.5:
        return _failed("beta > 1/2", "C_{nu,beta} diverges at zero for beta <= 1/2")
    if not 0 < params.alpha <= 2:
        return _failed("alpha in (0, 2]", "alpha out of range")
    try:
        noise.validate(params.d)
    except ConditionError as exc:
        return _failed(exc.condition, str(exc))
    dl = dalang_check(noise, params)
    if not dl.holds:
        return _failed("Dalang condition",
                       f"need {dl.exponent_required} < {dl.exponent_available}")
    case = kernels.nonnegativity_case(params, "y")
    if case != "certified_nonneg":
        return _failed("Y nonnegative", f"nonnegativity of Y is {case} for these parameters")
    try:
        c_t = ct_constant(noise, t)
    except ConditionError as exc:
        return _failed(exc.condition, str(exc))
    cb = c_beta(params.beta)
    cnb = c_nu_beta(params.beta, params.nu)
    cs = max(cb, cnb)
    C_N, D_N = _tail_and_ball(noise, params, dalang_exponent(params))

    def q(N):
        return 2 * cs * c_t * C_N(N)

    lo, hi = None, 1.0
    for _ in range(max_doublings):
        if q(hi) < 1:
            break
        lo, hi = hi, 2 * hi
    else:
        return ExistenceCertificate(hi, C_N(hi), D_N(hi), q(hi), "not_found", cs, cb, cnb, c_t,
                                    message="contraction did not drop below 1")
    if lo is not None:
        # smallest N (to relative 1e-9) in (lo, hi] with q(N) < 1
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if q(mid) < 1:
                hi = mid
            else:
                lo = mid
            if hi / lo - 1 < 1e-9:
                break
    return ExistenceCertificate(hi, C_N(hi), D_N(hi), q(hi), "certified", cs, cb, cnb, c_t)


# --------------------------------------------------------------------------
# smoothed equation constant


SMOOTHED_BETA = "beta in (1/2, 1] or (3/2, 2)"


def _check_smoothed_beta(beta):
    b = beta
    if not ((Fraction(1, 2) < b <= 1) or (Fraction(3, 2) < b < 2)):
        raise ConditionError(f"smoothed equation needs {SMOOTHED_BETA}, got {beta}", SMOOTHED_BETA)


def smoothed_constant(params, xi_norm):
    """int_0^inf w^{2(ceil(beta)-1)} E_{beta,ceil(beta)}(-nu w^beta |xi|^alpha / 2)^2 dw."""
    _check_smoothed_beta(params.beta)
    if not xi_norm > 0:
        raise PreconditionError("|xi| must be positive")
    b, m = float(params.beta), params.ceil_beta
    c = 0.5 * float(params.nu) * float(xi_norm) ** float(params.alpha)

    def f(w):
        return w ** (2 * (m - 1)) * _ml(b, m, c * w ** b) ** 2

    val, _ = quadrature.half_line_integral(f, 1e-14, 1e14, per_decade=3, order=24)
    return val


# --------------------------------------------------------------------------
# simplex integral


def simplex_integral(h, n, t):
    """int over 0 < s_1 < ... < s_n < t of [(t - s_n)(s_n - s_{n-1})...(s_2 - s_1)]^h ds."""
    if not h > -1:
        raise PreconditionError(f"simplex integral needs h > -1, got {h}")
    if int(n) != n or n < 1:
        raise PreconditionError(f"n must be a positive integer, got {n}")
    h, n, t = float(h), int(n), float(t)
    if t == 0:
        return 0.0
    return math.exp(n * special.gammaln(1 + h) + n * (1 + h) * math.log(t)
                    - special.gammaln(n * (1 + h) + 1))


def simplex_monte_carlo(h, n, t, samples=1_000_000, seed=0, chunk=200_000):
    """(mean, standard error) of the simplex integral from uniform order statistics.

    Chunks are drawn sequentially from one generator, so the estimate only
    depends on the seed.
    """
    rng = np.random.default_rng(seed)
    vol = t ** n / math.factorial(n)
    total, total_sq, done = 0.0, 0.0, 0
    while done < samples:
        m = min(chunk, samples - done)
        s = np.sort(rng.uniform(0.0, t, size=(m, n)), axis=1)
        gaps = np.diff(np.concatenate([s, np.full((m, 1), t)], axis=1), axis=1)
        v = vol * np.prod(gaps, axis=1) ** h
        total += float(np.sum(v))
        total_sq += float(np.sum(v * v))
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples)


# --------------------------------------------------------------------------
# exponents


def theta_exponents(params, kappa):
    """(theta_moment, theta_series) = (beta - 1/2 - beta kappa/(2 alpha), beta - 1 - beta kappa/(2 alpha)).

    Exact for Fraction/integer inputs.
    """
    if not 0 < kappa < params.d:
        raise PreconditionError(f"kappa must lie in (0, d), got {kappa}")
    a, b = params.alpha, params.beta
    base = b - b * kappa / (2 * a)
    half = Fraction(1, 2) if isinstance(base, (Fraction, int)) else 0.5
    return base - half, base - 1


def moment_exponents(params, kappa, smoothed=False):
    """(p exponent, alpha/D, D) of the upper bound; exact for Fraction inputs."""
    a, b = params.alpha, params.beta
    m = math.ceil(b) if smoothed else b
    D = 2 * a * m - a - b * kappa
    return (2 * a * m - b * kappa) / D, a / D, D


# --------------------------------------------------------------------------
# moment bounds


@dataclass
class MomentReport:
    c_t: float
    c_hat_t: float
    c_kappa: float
    c_star: float
    c_tilde: float
    theta_t: float
    p_exponent: float
    t_exponent_base: Optional[float]
    upper_bound_log: float
    lower_bound_log: Optional[float] = None
    theta_moment: float = math.nan
    exp_form_log: float = math.nan
    p: float = 2.0
    t: float = 1.0
    dirac_time: bool = False
    grid_sup: bool = False
    smoothed: bool = False

    def to_dict(self):
        return plain(asdict(self))

    def to_json(self, config=None):
        doc = self.to_dict()
        if config is not None:
            doc["config"] = plain(config)
            doc["config_hash"] = config_hash(config)
        return canonical_json(doc)


def c_hat(init, t):
    """(sup_{s <= t, y} |J_0(s, y)| or its bound, grid_sup flag).

    Constant data: max(|u_0|, |u_0 + t u_1|) exactly.  Sampled data: the
    bound sup|u_0| + t sup|u_1| over the sample grid (flagged).
    """
    if not isinstance(init, InitialData):
        return abs(float(init)), False
    if init.kind == "constant":
        u0 = float(init.values[0])
        if init.count() == 1:
            return abs(u0), False
        return max(abs(u0), abs(u0 + t * float(init.values[1]))), False
    sup = [float(np.max(np.abs(v))) for v in init.values]
    return sup[0] + (t * sup[1] if len(sup) > 1 else 0.0), True


def _riesz_pre(noise, params, window, name):
    if noise.spatial != "riesz":
        raise ConditionError("moment bounds need riesz spatial covariance", "Lambda = |x|^{-kappa}")
    noise.validate(params.d)
    if not noise.kappa < window:
        raise ConditionError(f"need kappa < {name} = {float(window):.6g}, got {noise.kappa}",
                             f"kappa < {name}")


def _upper_logs(c_hat_t, theta_t, theta, t, p, alpha_over_D, p_exp):
    x = math.sqrt(theta_t * p) * t ** theta
    log_e = log_mittag_leffler((theta, 1.0), x)
    upper = p * (math.log(c_hat_t) + log_e) if c_hat_t > 0 else -math.inf
    expo = (p * math.log(c_hat_t) if c_hat_t > 0 else -math.inf) + \
        t * theta_t ** alpha_over_D * p ** p_exp
    return upper, expo


def moment_upper_bound(params, noise, p, t, init=1.0):
    """Upper bound on E|u(t,x)|^p for Riesz spatial covariance.

    ``upper_bound_log`` is log of C_hat_t^p E_theta(sqrt(Theta_t p) t^theta)^p,
    the explicit series bound; ``exp_form_log`` is the exponential form with
    unit prefactor.  When the noise is delta-correlated in time and the data
    are a positive constant u_0 (u_1 = 0), ``lower_bound_log`` is filled.
    """
    if not p >= 1:
        raise PreconditionError("p must be >= 1")
    if not t > 0:
        raise PreconditionError("t must be positive")
    _riesz_pre(noise, params, min(dalang_exponent(params), params.d), "min(2 alpha - alpha/beta, d)")
    case = kernels.nonnegativity_case(params, "y")
    if case != "certified_nonneg":
        raise ConditionError(f"(alpha, beta, d) not in a certified nonnegativity regime ({case})",
                             "Y nonnegative")
    a, b, d, k = float(params.alpha), float(params.beta), params.d, float(noise.kappa)
    rho = 2 * b - 1 - b * k / a
    c_t = ct_constant(noise, t)
    ck = _strength(noise, params) * riesz_constant(noise.kappa, d)
    cs = math.gamma(rho)
    ctl = c_tilde(params, noise.kappa)
    theta_t = (2 * math.pi) ** (-d) * ck * cs * c_t * ctl * (2 / float(params.nu)) ** (k / a)
    p_exp, a_over_D, _ = moment_exponents(params, noise.kappa)
    p_exp, a_over_D = float(p_exp), float(a_over_D)
    chat, grid = c_hat(init, t)
    theta_m = rho / 2
    upper, expo = _upper_logs(chat, theta_t, theta_m, t, p, a_over_D, p_exp)
    tp = _ct_time_power(noise)
    report = MomentReport(
        c_t=c_t, c_hat_t=chat, c_kappa=ck, c_star=cs, c_tilde=ctl, theta_t=theta_t,
        p_exponent=p_exp, t_exponent_base=None if tp is None else 1 + tp * a_over_D,
        upper_bound_log=upper, theta_moment=theta_m, exp_form_log=expo, p=p, t=t,
        dirac_time=noise.dirac, grid_sup=grid)
    lower = _lower_from(params, noise, init, t, ck, ctl, cs, rho)
    if lower is not None:
        report.lower_bound_log = lower
    return report


def _constant_u0(init):
    """u_0 when the data are a positive constant with u_1 = 0, else None."""
    if not isinstance(init, InitialData):
        return float(init) if float(init) > 0 else None
    if init.kind != "constant":
        return None
    if init.count() > 1 and float(init.values[1]) != 0:
        return None
    u0 = float(init.values[0])
    return u0 if u0 > 0 else None


def _lower_from(params, noise, init, t, ck, ctl, cs, rho):
    if not noise.dirac:
        return None
    u0 = _constant_u0(init)
    if u0 is None:
        return None
    K = ck * ctl * (4 * math.pi) ** (-params.d) * cs * \
        (2 / float(params.nu)) ** (float(noise.kappa) / float(params.alpha))
    return 2 * math.log(u0) + log_mittag_leffler((rho, 1.0), K * t ** rho)


def lower_bound_rate(params, noise):
    """(K, rho): E u^2 >= u_0^2 E_rho(K t^rho) for delta-correlated time."""
    if not noise.dirac:
        raise ConditionError("the lower bound needs delta-correlated time", "gamma = delta")
    _riesz_pre(noise, params, min(dalang_exponent(params), params.d), "min(2 alpha - alpha/beta, d)")
    a, b, d, k = float(params.alpha), float(params.beta), params.d, float(noise.kappa)
    rho = 2 * b - 1 - b * k / a
    ck = _strength(noise, params) * riesz_constant(noise.kappa, d)
    K = ck * c_tilde(params, noise.kappa) * (4 * math.pi) ** (-d) * math.gamma(rho) * \
        (2 / float(params.nu)) ** (k / a)
    return K, rho


def moment_lower_bound(params, noise, u0, t, n_max=400, return_series=False):
    """Lower bound on E u(t,x)^2: sum_n u_0^2 K^n t^{n rho} / Gamma(n rho + 1).

    Needs delta-correlated time, Riesz spatial covariance and constant data
    u_0 > 0 (u_1 = 0).  With ``return_series`` the partial sums are returned
    as well.
    """
    if not u0 > 0:
        raise PreconditionError("the lower bound needs a constant u_0 > 0")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    case = kernels.nonnegativity_case(params, "y")
    if case != "certified_nonneg":
        raise ConditionError(f"(alpha, beta, d) not in a certified nonnegativity regime ({case})",
                             "Y nonnegative")
    K, rho = lower_bound_rate(params, noise)
    sums, settled = _ml_partial_sums(K * t ** rho if t > 0 else 0.0, rho, n_max)
    if not settled:
        raise SeriesNotConvergedError(f"lower-bound series not settled within {n_max} terms")
    val = u0 * u0 * sums[-1]
    if return_series:
        return val, u0 * u0 * sums
    return val


def _ml_partial_sums(x, rho, n_max, rel_tol=1e-17):
    """Partial sums of sum_n x^n / Gamma(rho n + 1) up to the first negligible term.

    Returns (partial sums, settled); ``settled`` is False when the terms are
    still significant after n_max.
    """
    n = np.arange(n_max + 1)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        logt = np.where(n == 0, 0.0, n * math.log(x) if x > 0 else -np.inf) - special.gammaln(rho * n + 1)
        terms = np.exp(logt)
        sums = np.cumsum(terms)
    peak = int(np.argmax(logt))
    small = np.flatnonzero((n > peak) & (terms <= rel_tol * sums))
    if not small.size:
        return sums, False
    return sums[: int(small[0]) + 1], True


def _ml_closed(x, rho):
    try:
        return math.exp(log_mittag_leffler((rho, 1.0), x))
    except (ConvergenceError, OverflowError):
        return math.nan


def smoothed_moment_bounds(params, noise, p, t, init=1.0):
    """Upper bound for the smoothed equation (kernel Z in the mild form)."""
    if not p >= 1:
        raise PreconditionError("p must be >= 1")
    if not t > 0:
        raise PreconditionError("t must be positive")
    _check_smoothed_beta(params.beta)
    window = min(params.alpha / params.beta, params.d)
    _riesz_pre(noise, params, window, "min(alpha/beta, d)")
    case = kernels.nonnegativity_case(params, "z")
    if case != "certified_nonneg":
        raise ConditionError(f"Z not certified nonnegative ({case})", "Z nonnegative")
    a, b, d, k = float(params.alpha), float(params.beta), params.d, float(noise.kappa)
    m = params.ceil_beta
    rho = 2 * m - 1 - b * k / a
    c_t = ct_constant(noise, t)
    ck = _strength(noise, params) * riesz_constant(noise.kappa, d)
    cs = math.gamma(rho)
    cb = c_bar(params, noise.kappa)
    theta_t = (2 * math.pi) ** (-d) * ck * cs * c_t * cb * (2 / float(params.nu)) ** (k / a)
    p_exp, a_over_D, _ = moment_exponents(params, noise.kappa, smoothed=True)
    p_exp, a_over_D = float(p_exp), float(a_over_D)
    chat, grid = c_hat(init, t)
    upper, expo = _upper_logs(chat, theta_t, rho / 2, t, p, a_over_D, p_exp)
    tp = _ct_time_power(noise)
    return MomentReport(
        c_t=c_t, c_hat_t=chat, c_kappa=ck, c_star=cs, c_tilde=cb, theta_t=theta_t,
        p_exponent=p_exp, t_exponent_base=None if tp is None else 1 + tp * a_over_D,
        upper_bound_log=upper, theta_moment=rho / 2, exp_form_log=expo, p=p, t=t,
        dirac_time=noise.dirac, grid_sup=grid, smoothed=True)


# --------------------------------------------------------------------------
# Riesz convolution check


SR_GRID_ID = "sr-grid-v1"
SR_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class ConvolutionConfig:
    route: str = "auto"  # auto | fourier | direct
    zeta: Optional[float] = None  # envelope exponent (default: midpoint of the window)


@dataclass
class ConvolutionCheck:
    measured: float
    bound: float
    theta_series: float
    route: str
    zeta: float

    def to_dict(self):
        return plain(asdict(self))


def _fourier_correlation(params, kappa, s, r):
    """(2 pi)^{-d} int F[Y_s] F[Y_r] mu_kappa(d xi); kappa None means Lambda = delta."""
    a, b, d, nu = float(params.alpha), float(params.beta), params.d, float(params.nu)
    if kappa is None:
        c, k = 1.0, float(d)
    else:
        c, k = riesz_constant(kappa, d), float(kappa)

    def f(q):
        return (_ml(b, b, 0.5 * nu * s ** b * q ** a) * _ml(b, b, 0.5 * nu * r ** b * q ** a)
                * q ** (k - 1))

    val, _ = quadrature.half_line_integral(f, 1e-12, 1e12, per_decade=3, order=24)
    return (2 * math.pi) ** (-d) * c * kernels.sphere_area(d) * (s * r) ** (b - 1) * val


@functools.lru_cache(maxsize=16)
def _abs_profile(params):
    """Vectorized w -> |Y(1, w)| for d = 1 (PCHIP in log w, tabulated on [1e-8, 1e8])."""
    w = np.logspace(-8, 8, 4001)
    vals = np.abs(kernels.y_kernel(params, 1.0, w))
    spline = interpolate.PchipInterpolator(np.log(w), vals, extrapolate=False)

    def prof(x):
        x = np.asarray(x, float)
        lx = np.log(np.clip(x, w[0], w[-1]))
        out = spline(lx)
        return np.where(x >= w[-1], 0.0, out)

    return prof


def _log_nodes(lo, hi, per_decade=4, order=16):
    edges = np.linspace(math.log(lo), math.log(hi), int(per_decade * math.log10(hi / lo)) + 1)
    u, w = quadrature.panel_nodes(edges, order)
    x = np.exp(u)
    return x, w * x


def _direct_correlation(params, kappa, s, r, rel=None):
    """int int |Y(s, x)| |Y(r, y)| |x - y|^{-kappa} dx dy in d = 1.

    Outer integral over x > 0 (evenness); inner Riesz potential of |Y(r, .)|
    split at v = |x| where Y(r, x - v) has its centre, log-graded panels on
    both pieces and an analytic v^{-kappa} end correction.
    """
    if params.d != 1:
        raise PreconditionError("the direct route is implemented for d = 1")
    a, b, k = float(params.alpha), float(params.beta), float(kappa)
    prof = _abs_profile(params)

    def absY(tt, x):
        return tt ** (b - 1 - b / a) * prof(np.abs(x) / tt ** (b / a))

    sw, rw = s ** (b / a), r ** (b / a)
    xs, wx = _log_nodes(1e-8 * sw, 1e8 * sw)
    eps = 1e-12
    tau, wt = _log_nodes(eps, 0.5)
    om, wo = _log_nodes(1e-12, 1e12)
    total = 0.0
    for x, w in zip(xs, wx):
        # v in [0, x]: graded towards both ends
        v1 = x * tau
        v2 = x * (1 - tau)
        f = lambda v: v ** (-k) * (absY(r, x - v) + absY(r, x + v))
        part = x * (np.dot(wt, f(v1)) + np.dot(wt, f(v2)))
        part += 2 * absY(r, x) * (x * eps) ** (1 - k) / (1 - k)
        # v in [x, inf)
        c = max(x, rw)
        part += c * np.dot(wo, f(x + c * om))
        total += w * absY(s, x) * part
    return 2 * total


def envelope_convolution_constant(params, kappa, zeta=None):
    """(C, zeta) with int int |Y(s,.)Y(r,.)| |x-y|^{-kappa} <= C (s r)^{theta_series}.

    C = C_env^2 M int(Theta), with M the sup over shifts of the Riesz
    potential of Theta, bounded in closed form by splitting at |x| = 1.
    """
    a, d, k = float(params.alpha), params.d, float(kappa)
    if not 0 < k < min(2 * a, d):
        raise PreconditionError("need 0 < kappa < min(2 alpha, d)")
    lo, hi = k / a, min(d / a, 2.0)
    zeta = 0.5 * (lo + hi) if zeta is None else float(zeta)
    if not lo < zeta < hi:
        raise PreconditionError(f"zeta must lie in ({lo:.6g}, {hi:.6g})")
    S = kernels.sphere_area(d)
    M = S * (2 / (zeta * a - k) + 2 / a + 1 / (d - k))
    i_theta = S * math.pi / (a * (1 + zeta) * math.sin(math.pi * zeta / (1 + zeta)))
    c_env = kernels.envelope_constant(params, zeta)
    return c_env ** 2 * M * i_theta, zeta


def riesz_convolution_check(params, kappa, s, r, cfg=ConvolutionConfig()):
    """Measured int int |Y(s, x1 - x2) Y(r, y1 - y2)| |x1 - y1|^{-kappa} and its bound C (s r)^theta.

    Routes: "fourier" (Parseval, valid when Y >= 0), "direct" (nested
    quadrature, d = 1); "auto" takes fourier when Y is certified nonnegative.
    """
    if not (s > 0 and r > 0):
        raise PreconditionError("s and r must be positive")
    C, zeta = envelope_convolution_constant(params, kappa, cfg.zeta)
    theta = float(theta_exponents(params, kappa)[1])
    route = cfg.route
    certified = kernels.nonnegativity_case(params, "y") == "certified_nonneg"
    if route == "auto":
        route = "fourier" if certified else "direct"
    if route == "fourier":
        if not certified:
            raise PreconditionError("the Fourier route needs Y certified nonnegative")
        measured = _fourier_correlation(params, kappa, s, r)
    elif route == "direct":
        measured = _direct_correlation(params, kappa, s, r)
    else:
        raise PreconditionError(f"unknown route {route!r}")
    return ConvolutionCheck(measured, C * (s * r) ** theta, theta, route, zeta)


# --------------------------------------------------------------------------
# chaos second moment


@dataclass
class ChaosResult:
    upper_partial_sums: np.ndarray
    upper_closed_form: float
    lower_partial_sums: Optional[np.ndarray]
    lower_closed_form: Optional[float]
    converged: bool
    theta_series: float
    rho: float
    calibration_constant: float
    calibration_grid: str
    c_t: float
    c_hat_t: float
    summed: bool = True  # partial sums settled within n_max terms

    def to_dict(self):
        return plain(asdict(self))


def _calibrate(params, kappa):
    """(C, grid id): max of measured / (s r)^theta over the fixed (s, r) grid."""
    certified = kernels.nonnegativity_case(params, "y") == "certified_nonneg"
    if kappa is None:
        if not certified:
            raise ConditionError("white spatial noise needs Y certified nonnegative",
                                 "Y nonnegative")
        b, d, a = float(params.beta), params.d, float(params.alpha)
        theta = b - 1 - b * d / (2 * a)
        ratios = [_fourier_correlation(params, None, s, r) / (s * r) ** theta
                  for s in SR_GRID for r in SR_GRID]
        return max(ratios), SR_GRID_ID
    if certified or params.d == 1:
        theta = float(theta_exponents(params, kappa)[1])
        route = "fourier" if certified else "direct"
        cfg = ConvolutionConfig(route=route)
        ratios = []
        for s in SR_GRID:
            for r in SR_GRID:
                if route == "direct" and r < s:
                    continue  # symmetric in (s, r)
                chk = riesz_convolution_check(params, kappa, s, r, cfg)
                ratios.append(chk.measured / (s * r) ** theta)
        return max(ratios), SR_GRID_ID
    C, _ = envelope_convolution_constant(params, kappa)
    return C, "envelope-v1"


def chaos_second_moment(params, noise, u0, t, n_max=200, calibration=None):
    """Partial sums of the chaos second-moment series and the convergence flag.

    Upper series: C_hat_t^2 sum_n (C C_t Gamma(2 theta + 1))^n t^{(2 theta+1) n}
    / Gamma((2 theta + 1) n + 1) with theta = theta_series and C calibrated on
    the (s, r) grid (times the noise strength).  For delta-correlated time,
    Riesz covariance and constant u_0 > 0 the lower series is added.

    ``converged`` is the ratio test: the term ratio tends to zero iff
    2 theta + 1 > 0, decided exactly.  ``summed`` says whether the partial
    sums settled within n_max terms (near the boundary they cannot).
    """
    if not t > 0:
        raise PreconditionError("t must be positive")
    noise.validate(params.d)
    a, b, d = params.alpha, params.beta, params.d
    k = params.d if noise.spatial == "white" else noise.kappa
    rho_exact = 2 * b - 1 - b * k / a
    rho = float(rho_exact)
    theta = (rho - 1) / 2
    chat, _ = c_hat(u0, t)
    c_t = ct_constant(noise, t)
    nan = math.nan
    if not rho_exact > 0:
        return ChaosResult(np.array([chat ** 2]), nan, None, None, False, theta, rho, nan, "",
                           c_t, chat, False)
    kappa = None if noise.spatial == "white" else noise.kappa
    if noise.spatial == "riesz" and not kappa < min(2 * a, d):
        raise ConditionError("need kappa < min(2 alpha, d)", "kappa < min(2 alpha, d)")
    if calibration is None:
        C, grid = _calibrate(params, kappa)
    else:
        C, grid = calibration
    x = _strength(noise, params) * C * c_t * math.gamma(rho) * t ** rho
    upper, summed = _ml_partial_sums(x, rho, n_max)
    upper = chat ** 2 * upper
    upper_closed = chat ** 2 * _ml_closed(x, rho)
    lower = lower_closed = None
    c0 = _constant_u0(u0)
    if noise.dirac and noise.spatial == "riesz" and c0 is not None \
            and kernels.nonnegativity_case(params, "y") == "certified_nonneg":
        K, rho_l = lower_bound_rate(params, noise)
        lower, settled = _ml_partial_sums(K * t ** rho_l, rho_l, n_max)
        lower = c0 * c0 * lower
        lower_closed = c0 * c0 * _ml_closed(K * t ** rho_l, rho_l)
        summed = summed and settled
    # ratio of consecutive terms ~ x Gamma(rho n + 1)/Gamma(rho n + rho + 1) -> 0 iff rho > 0
    return ChaosResult(upper, upper_closed, lower, lower_closed, True, theta, rho, C, grid,
                       c_t, chat, summed)
