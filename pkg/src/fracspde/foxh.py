r"""Fox H-functions: representation, evaluation and transform algebra.

An H-function is the Mellin-Barnes integral

.. math::

    H^{m,n}_{p,q}(z) = \frac{1}{2\pi i}\int_L \mathcal{H}(s) z^{-s}\,ds,\qquad
    \mathcal{H}(s) = \frac{\prod_{j\le m}\Gamma(b_j+\beta_j s)\prod_{i\le n}\Gamma(1-a_i-\alpha_i s)}
                          {\prod_{i>n}\Gamma(a_i+\alpha_i s)\prod_{j>m}\Gamma(1-b_j-\beta_j s)}.

Three numerical routes are provided for real z > 0:

* a vertical-line quadrature (needs a* > 0),
* the residue series at zero (left poles, with log terms at multiple poles),
* the residue series at infinity (right poles).

:func:`eval` picks among them and falls back to the contour when a series
does not meet its tolerance.
"""
from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import quadrature
from .errors import (
    ConditionError,
    NoAdmissibleLineError,
    NotReducibleError,
    PoleCollisionError,
    PoleOrderError,
    PoleTooCloseError,
    PreconditionError,
    RouteDisagreementError,
    SeriesNotConvergedError,
    ShapeError,
    TailNotConvergedError,
)
from .specfun import digamma

COLLISION_TOL = 1e-9
NEAR_COLLISION_TOL = 1e-6
MAX_POLE_ORDER = 3
EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# configuration and specs


@dataclass(frozen=True)
class EvalConfig:
    """Numerical policy shared by all evaluation routes.

    ``abs_tol`` is the contour truncation threshold, measured against the
    peak modulus of the Mellin-Barnes integrand.  ``rel_tol`` is the accuracy
    demanded of the residue series.  Points with z <= switch_radius try the
    series at zero first, points with z >= infinity_radius the series at
    infinity; everything else goes to the contour.
    """

    contour_halfheight: float = 40.0
    quadrature_points: int = 32
    series_terms: int = 60
    abs_tol: float = 1e-16
    rel_tol: float = 1e-12
    collision_tol: float = COLLISION_TOL
    switch_radius: float = 1.0
    infinity_radius: float = 30.0
    cross_check: bool = False

    def __post_init__(self):
        for name in ("contour_halfheight", "abs_tol", "rel_tol", "collision_tol",
                     "switch_radius", "infinity_radius"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise PreconditionError(f"EvalConfig.{name} must be positive, got {v}")
        if self.quadrature_points < 32:
            raise PreconditionError("EvalConfig.quadrature_points must be >= 32")
        if self.series_terms < 1:
            raise PreconditionError("EvalConfig.series_terms must be >= 1")


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class HCharacteristics:
    a_star: float
    delta: float
    mu: float


def _pairs(rows, what):
    out = []
    for row in rows:
        try:
            a, s = row
        except (TypeError, ValueError):
            raise ShapeError(f"{what} entries must be (value, scale) pairs, got {row!r}") from None
        a, s = float(a), float(s)
        if not (math.isfinite(a) and math.isfinite(s)):
            raise ShapeError(f"{what} entries must be finite, got {row!r}")
        if s <= 0:
            raise ShapeError(f"{what} scales must be positive, got {row!r}")
        out.append((a, s))
    return tuple(out)


@dataclass(frozen=True)
class HFunctionSpec:
    """Parameter block of H^{m,n}_{p,q}[z | (a_i, alpha_i); (b_j, beta_j)].

    Construction validates the shape and the separation of the two pole
    families; use :func:`make_spec` for a non-default collision tolerance.
    """

    m: int
    n: int
    p: int
    q: int
    upper: tuple = ()
    lower: tuple = ()
    collision_tol: float = field(default=COLLISION_TOL, compare=False, repr=False)

    def __post_init__(self):
        for name in ("m", "n", "p", "q"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ShapeError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "upper", _pairs(self.upper, "upper"))
        object.__setattr__(self, "lower", _pairs(self.lower, "lower"))
        if len(self.upper) != self.p:
            raise ShapeError(f"upper row has {len(self.upper)} pairs, p={self.p}")
        if len(self.lower) != self.q:
            raise ShapeError(f"lower row has {len(self.lower)} pairs, q={self.q}")
        if self.m > self.q:
            raise ShapeError(f"m={self.m} exceeds q={self.q}")
        if self.n > self.p:
            raise ShapeError(f"n={self.n} exceeds p={self.p}")
        gap = _closest_pole_gap(self)
        if gap < self.collision_tol:
            raise PoleCollisionError(
                "a lower pole coincides with an upper pole (pole sets not separated)")

    # convenience views
    @property
    def num_lower(self):
        return self.lower[: self.m]

    @property
    def num_upper(self):
        return self.upper[: self.n]

    @property
    def den_upper(self):
        return self.upper[self.n:]

    @property
    def den_lower(self):
        return self.lower[self.m:]

    def characteristics(self):
        return characteristics(self)

    def to_dict(self):
        return {"m": self.m, "n": self.n, "p": self.p, "q": self.q,
                "upper": [list(r) for r in self.upper],
                "lower": [list(r) for r in self.lower]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return make_spec(d["m"], d["n"], d["p"], d["q"], d.get("upper", []), d.get("lower", []))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def make_spec(m, n, p, q, upper=(), lower=(), collision_tol=COLLISION_TOL):
    """Validated :class:`HFunctionSpec`."""
    return HFunctionSpec(m, n, p, q, tuple(upper), tuple(lower), collision_tol)


def characteristics(spec):
    """a*, Delta and mu of a spec."""
    a_star = (sum(s for _, s in spec.num_upper) - sum(s for _, s in spec.den_upper)
              + sum(s for _, s in spec.num_lower) - sum(s for _, s in spec.den_lower))
    delta = sum(s for _, s in spec.lower) - sum(s for _, s in spec.upper)
    mu = sum(b for b, _ in spec.lower) - sum(a for a, _ in spec.upper) + (spec.p - spec.q) / 2
    return HCharacteristics(a_star, delta, mu)


# --------------------------------------------------------------------------
# poles


def _lower_family(b, beta, count):
    return -(b + np.arange(count)) / beta


def _upper_family(a, alpha, count):
    return (1 - a + np.arange(count)) / alpha


def _closest_pole_gap(spec):
    """Smallest distance between a lower pole and an upper pole (inf if none)."""
    if spec.m == 0 or spec.n == 0:
        return math.inf
    max_lower = max(-b / be for b, be in spec.num_lower)
    min_upper = min((1 - a) / al for a, al in spec.num_upper)
    if max_lower < min_upper:
        return min_upper - max_lower
    # overlapping ranges: enumerate the poles inside [min_upper-1, max_lower+1]
    lows = []
    for b, be in spec.num_lower:
        count = int(math.floor(be * (max_lower - min_upper + 1))) + 2
        lows.append(_lower_family(b, be, count))
    ups = []
    for a, al in spec.num_upper:
        count = int(math.floor(al * (max_lower - min_upper + 1))) + 2
        ups.append(_upper_family(a, al, count))
    lows = np.concatenate(lows)
    ups = np.concatenate(ups)
    return float(np.min(np.abs(lows[:, None] - ups[None, :])))


@dataclass(frozen=True)
class PoleGroup:
    location: float
    order: int
    origins: tuple  # ((index, layer), ...), indices 1-based


@dataclass(frozen=True)
class PoleTable:
    lower_poles: tuple
    upper_poles: tuple
    cutoff: float
    near_collision: bool = False


def _group(entries, tol):
    """Cluster (location, index, layer) triples whose locations agree within tol."""
    entries = sorted(entries)
    groups = []
    near = False
    for loc, i, k in entries:
        if groups and abs(loc - groups[-1][0][-1]) < tol:
            groups[-1][0].append(loc)
            groups[-1][1].append((i, k))
            continue
        if groups and abs(loc - groups[-1][0][-1]) < NEAR_COLLISION_TOL:
            near = True
        groups.append(([loc], [(i, k)]))
    out = [PoleGroup(float(np.mean(locs)), len(orig), tuple(orig)) for locs, orig in groups]
    return out, near


def pole_table(spec, layers=None, cfg=None):
    """Poles of the numerator gammas, grouped by location with multiplicity.

    Only poles with |location| below the cutoff are listed; the cutoff is the
    largest radius up to which every family is complete after ``layers``
    layers, so no pole inside it is missed.
    """
    cfg = cfg or DEFAULT_CONFIG
    layers = cfg.series_terms if layers is None else int(layers)
    if layers < 1:
        raise PreconditionError("layers must be >= 1")
    cut = math.inf
    low, up = [], []
    for j, (b, be) in enumerate(spec.num_lower, 1):
        locs = _lower_family(b, be, layers)
        cut = min(cut, abs(locs[-1]))
        low += [(float(x), j, l) for l, x in enumerate(locs)]
    for i, (a, al) in enumerate(spec.num_upper, 1):
        locs = _upper_family(a, al, layers)
        cut = min(cut, abs(locs[-1]))
        up += [(float(x), i, k) for k, x in enumerate(locs)]
    low = [e for e in low if abs(e[0]) <= cut + cfg.collision_tol]
    up = [e for e in up if abs(e[0]) <= cut + cfg.collision_tol]
    lg, near_l = _group(low, cfg.collision_tol)
    ug, near_u = _group(up, cfg.collision_tol)
    lg = tuple(reversed(lg))  # nearest the contour first
    return PoleTable(lg, tuple(ug), cut, near_l or near_u or
                     _closest_pole_gap(spec) < NEAR_COLLISION_TOL)


# --------------------------------------------------------------------------
# Laurent-series residue machinery


class _Laurent:
    """exp(logscale) * eps^val * sum_k coef[k] eps^k, truncated to K terms."""

    __slots__ = ("val", "coef", "logscale")

    def __init__(self, val, coef, logscale=0.0):
        self.val = val
        self.coef = np.asarray(coef, dtype=float)
        self.logscale = logscale

    def normalized(self):
        m = np.max(np.abs(self.coef))
        if m == 0:
            return self
        return _Laurent(self.val, self.coef / m, self.logscale + math.log(m))

    def __mul__(self, other):
        K = len(self.coef)
        c = np.convolve(self.coef, other.coef)[:K]
        return _Laurent(self.val + other.val, c, self.logscale + other.logscale).normalized()

    def inverse(self):
        c = self.coef
        if c[0] == 0:
            raise ZeroDivisionError("leading Laurent coefficient vanishes")
        K = len(c)
        out = np.zeros(K)
        out[0] = 1.0 / c[0]
        for k in range(1, K):
            out[k] = -np.dot(c[1:k + 1], out[k - 1::-1][:k]) / c[0]
        return _Laurent(-self.val, out, -self.logscale).normalized()


def _exp_series(f):
    """Coefficients of exp(sum_k f[k] y^k) with f[0] = 0."""
    K = len(f)
    g = np.zeros(K)
    g[0] = 1.0
    for n in range(1, K):
        g[n] = sum(k * f[k] * g[n - k] for k in range(1, n + 1)) / n
    return g


def _near_nonpositive_integer(x, tol):
    k = round(x)
    return k <= 0 and abs(x - k) < tol * max(1.0, abs(x))


def _gamma_laurent(c0, c1, s0, K, tol):
    """Laurent series of Gamma(c0 + c1 s) about s = s0 in eps = s - s0."""
    x0 = c0 + c1 * s0
    if _near_nonpositive_integer(x0, tol):
        x0 = float(round(x0))
    shift = max(0, math.ceil(1.0 - x0))
    x = x0 + shift
    # Taylor series of Gamma(x + y) for x >= 1 in powers of y
    f = np.zeros(K)
    for k in range(1, K):
        f[k] = (digamma(x) if k == 1 else special.polygamma(k - 1, x)) / math.factorial(k)
    ser = _Laurent(0, _exp_series(f), special.gammaln(x))
    # Gamma(x0 + y) = Gamma(x0 + shift + y) / prod_i (x0 + i + y)
    for i in range(shift):
        a = x0 + i
        if abs(a) < tol:
            lin = np.zeros(K)
            lin[0] = 1.0
            ser = ser * _Laurent(1, lin).inverse()
        else:
            lin = np.zeros(K)
            lin[0] = a
            if K > 1:
                lin[1] = 1.0
            ser = ser * _Laurent(0, lin).inverse()
    # substitute y = c1 * eps
    scaled = ser.coef * c1 ** np.arange(K)
    return _Laurent(ser.val, scaled * c1 ** ser.val, ser.logscale).normalized()


def _integrand_laurent(spec, s0, K, tol):
    acc = _Laurent(0, np.eye(1, K)[0])
    for b, be in spec.num_lower:
        acc = acc * _gamma_laurent(b, be, s0, K, tol)
    for a, al in spec.num_upper:
        acc = acc * _gamma_laurent(1 - a, -al, s0, K, tol)
    for a, al in spec.den_upper:
        acc = acc * _gamma_laurent(a, al, s0, K, tol).inverse()
    for b, be in spec.den_lower:
        acc = acc * _gamma_laurent(1 - b, -be, s0, K, tol).inverse()
    return acc


@dataclass(frozen=True)
class _Term:
    """exp(logscale) * z^exponent * sum_i coef[i] (log z)^i."""

    exponent: float
    logscale: float
    coef: tuple


def _residue_term(spec, s0, order, tol, sign):
    """sign * Res_{s=s0} H(s) z^{-s} as a _Term."""
    if order > MAX_POLE_ORDER:
        raise PoleOrderError(f"pole of order {order} at s={s0:.6g} (max {MAX_POLE_ORDER})")
    K = order + 1
    lau = _integrand_laurent(spec, s0, K, tol)
    N = -lau.val
    if N <= 0:
        return _Term(-s0, 0.0, (0.0,))
    # coefficient of eps^{-1} in eps^{-N} C(eps) exp(-eps L)
    coef = [sign * lau.coef[N - 1 - i] * (-1.0) ** i / math.factorial(i) for i in range(N)]
    return _Term(-s0, lau.logscale, tuple(coef))


def h_star(spec, j, l):
    """Simple-pole coefficient of z^{(b_j+l)/beta_j} in the expansion at zero.

    ``j`` is 1-based.  The closed form is used directly; a zero is returned
    when a denominator gamma sits at one of its poles.
    """
    b, be = spec.lower[j - 1]
    x = (b + l) / be
    logmag = -special.gammaln(l + 1) - math.log(be)
    sign = (-1.0) ** l
    num = [bi - x * bei for i, (bi, bei) in enumerate(spec.num_lower) if i != j - 1]
    num += [1 - a + x * al for a, al in spec.num_upper]
    den = [a - x * al for a, al in spec.den_upper]
    den += [1 - bi + x * bei for bi, bei in spec.den_lower]
    return _gamma_ratio(sign, logmag, num, den)


def h_inf(spec, i, k):
    """Coefficient of z^{(a_i-1-k)/alpha_i} in the expansion at infinity (1-based i)."""
    a, al = spec.upper[i - 1]
    x = (1 - a + k) / al
    logmag = -special.gammaln(k + 1) - math.log(al)
    sign = (-1.0) ** k
    num = [b + x * be for b, be in spec.num_lower]
    num += [1 - aj - x * alj for jj, (aj, alj) in enumerate(spec.num_upper) if jj != i - 1]
    den = [aj + x * alj for aj, alj in spec.den_upper]
    den += [1 - b - x * be for b, be in spec.den_lower]
    return _gamma_ratio(sign, logmag, num, den)


def _gamma_ratio(sign, logmag, num, den):
    for x in den:
        if _near_nonpositive_integer(x, 1e-12):
            return 0.0
    for x in num:
        if _near_nonpositive_integer(x, 1e-12):
            raise PoleOrderError("coincident poles: simple-pole formula does not apply")
    num, den = np.asarray(num, float), np.asarray(den, float)
    sign *= np.prod(special.gammasgn(num)) * np.prod(special.gammasgn(den))
    logmag += np.sum(special.gammaln(num)) - np.sum(special.gammaln(den))
    return float(sign * np.exp(logmag))


@functools.lru_cache(maxsize=512)
def _series_terms(spec, side, layers, tol):
    table = pole_table(spec, layers, EvalConfig(collision_tol=tol, series_terms=max(layers, 1)))
    terms = []
    if side == "zero":
        for g in table.lower_poles:
            terms.append(_residue_term(spec, g.location, g.order, tol, +1.0))
    else:
        for g in table.upper_poles:
            if g.order > 1:
                raise PoleOrderError("coincident upper poles: expansion at infinity unsupported")
            terms.append(_residue_term(spec, g.location, 1, tol, -1.0))
    families = spec.m if side == "zero" else spec.n
    return tuple(terms), max(families, 1), table.near_collision


def _sum_series(terms, families, z, rel_tol):
    """Sum residue terms at each z; returns (values, est_error, converged, empty)."""
    z = np.asarray(z, dtype=float)
    if not terms:
        zeros = np.zeros(z.shape)
        return zeros, np.full(z.shape, np.inf), np.zeros(z.shape, bool), True
    L = np.log(z)
    rows = []
    for t in terms:
        poly = np.zeros_like(L)
        for c in reversed(t.coef):
            poly = poly * L + c
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            rows.append(np.exp(t.logscale + t.exponent * L) * poly)
    M = np.array(rows)  # (terms, z)
    nonzero = np.array([any(c != 0 for c in t.coef) for t in terms])
    if not nonzero.any():
        zeros = np.zeros(z.shape)
        return zeros, np.full(z.shape, np.inf), np.zeros(z.shape, bool), True
    M = M[nonzero]
    absM = np.abs(M)
    absM = np.where(np.isfinite(absM), absM, np.inf)
    # layer envelope: largest term among the next `families` terms
    nt = absM.shape[0]
    env = np.copy(absM)
    for k in range(1, families):
        env[: nt - k] = np.maximum(env[: nt - k], absM[k:])
    # truncate where the envelope is smallest (at the end for a convergent series)
    kstar = nt - 1 - np.argmin(env[::-1], axis=0)
    idx = np.arange(nt)[:, None]
    keep = idx < kstar[None, :] + families
    with np.errstate(invalid="ignore"):
        vals = np.sum(np.where(keep, M, 0.0), axis=0)
        trunc = env[kstar, np.arange(absM.shape[1])]
        roundoff = 8 * EPS * np.sum(np.where(keep, absM, 0.0), axis=0)
    err = trunc + roundoff
    ok = np.isfinite(vals) & np.isfinite(err) & (err <= rel_tol * np.abs(vals))
    return vals, err, ok, False


def _series(spec, side, z, cfg):
    terms, families, _ = _series_terms(spec, side, cfg.series_terms, cfg.collision_tol)
    return _sum_series(terms, families, z, cfg.rel_tol)


def eval_series_zero(spec, z, cfg=None, return_error=False):
    """Residue expansion at zero (left poles, log terms at multiple poles)."""
    cfg = cfg or DEFAULT_CONFIG
    ch = characteristics(spec)
    if ch.delta < 0 and ch.a_star <= 0:
        raise PreconditionError("series at zero needs Delta >= 0, or Delta < 0 with a* > 0")
    za, scalar = _prep_z(z)
    vals, err, ok, empty = _series(spec, "zero", za, cfg)
    if not empty and not np.all(ok):
        bad = za[~ok][0]
        raise SeriesNotConvergedError(
            f"series at zero not converged at z={bad:.6g} (error {err[~ok][0]:.3g})")
    return _ret(vals, scalar, err if return_error else None)


def eval_series_infinity(spec, z, cfg=None, return_error=False):
    """Residue expansion at infinity (right poles).

    When n = 0 the expansion is empty and 0 is returned: the function is
    exponentially small at infinity and is not represented by this route.
    """
    cfg = cfg or DEFAULT_CONFIG
    ch = characteristics(spec)
    if ch.delta < 0 and ch.a_star <= 0:
        raise PreconditionError("series at infinity needs Delta >= 0, or Delta < 0 with a* > 0")
    za, scalar = _prep_z(z)
    vals, err, ok, empty = _series(spec, "infinity", za, cfg)
    if empty:
        return _ret(np.zeros(za.shape), scalar, np.zeros(za.shape) if return_error else None)
    if not np.all(ok):
        bad = za[~ok][0]
        raise SeriesNotConvergedError(
            f"series at infinity not converged at z={bad:.6g} (error {err[~ok][0]:.3g})")
    return _ret(vals, scalar, err if return_error else None)


# --------------------------------------------------------------------------
# contour route


def _prep_z(z):
    za = np.asarray(z, dtype=float)
    scalar = za.ndim == 0
    za = np.atleast_1d(za)
    if np.any(~np.isfinite(za)) or np.any(za <= 0):
        raise PreconditionError("H-functions are evaluated at real z > 0 only")
    return za, scalar


def _ret(vals, scalar, err=None):
    if scalar:
        vals = float(vals[0])
        if err is not None:
            return vals, float(err[0])
        return vals
    return (vals, err) if err is not None else vals


def admissible_line(spec):
    """(gamma, distance to the nearest pole) for the vertical contour."""
    lo = max((-b / be for b, be in spec.num_lower), default=None)
    hi = min(((1 - a) / al for a, al in spec.num_upper), default=None)
    if lo is not None and hi is not None:
        if lo >= hi:
            raise NoAdmissibleLineError(
                f"no vertical line separates the poles (max lower {lo:.6g} >= min upper {hi:.6g})")
        return 0.5 * (lo + hi), 0.5 * (hi - lo)
    if lo is not None:
        return lo + 0.5, 0.5
    if hi is not None:
        return hi - 0.5, 0.5
    return 0.0, 1.0


def log_integrand(spec, s):
    """log of the Mellin-Barnes kernel at complex s (vectorized)."""
    s = np.asarray(s, dtype=complex)
    out = np.zeros(s.shape, dtype=complex)
    for b, be in spec.num_lower:
        out += special.loggamma(b + be * s)
    for a, al in spec.num_upper:
        out += special.loggamma(1 - a - al * s)
    for a, al in spec.den_upper:
        out -= special.loggamma(a + al * s)
    for b, be in spec.den_lower:
        out -= special.loggamma(1 - b - be * s)
    return out


@functools.lru_cache(maxsize=256)
def _contour_nodes(spec, cfg, log_span):
    """Quadrature nodes tau >= 0 and weights*H(gamma + i tau) for the line integral."""
    gamma, w = admissible_line(spec)
    if w < 1e-8:
        raise PoleTooCloseError(f"a pole lies within {w:.3g} of the contour")
    x, wts = quadrature.gauss_legendre(cfg.quadrature_points)
    max_width = min(1.0, 12.0 / log_span)
    tau, peak = 0.0, 0.0
    T, T_cap = cfg.contour_halfheight, cfg.contour_halfheight * 2 ** 10
    nodes, values = [], []
    small_run = 0
    while True:
        width = min(max_width, 1.5 * math.hypot(w, tau))
        t = tau + 0.5 * width * (x + 1.0)
        h = np.exp(log_integrand(spec, gamma + 1j * t))
        nodes.append(t)
        values.append(0.5 * width * wts * h)
        panel_max = float(np.max(np.abs(h)))
        peak = max(peak, panel_max)
        tau += width
        small_run = small_run + 1 if panel_max <= cfg.abs_tol * peak else 0
        if small_run >= 2 and tau > 1.0:
            break
        if tau > T:
            T *= 2
            if T > T_cap:
                raise TailNotConvergedError(
                    f"contour integrand still at {panel_max / peak:.3g} of its peak at |Im s|={tau:.4g}")
    tau_nodes = np.concatenate(nodes)
    wh = np.concatenate(values)
    tau_nodes.setflags(write=False)
    wh.setflags(write=False)
    return gamma, tau_nodes, wh


@functools.lru_cache(maxsize=64)
def _contour_lower_half(spec, cfg, log_span):
    gamma, tau, wh = _contour_nodes(spec, cfg, log_span)
    # recover the raw weights from the upper half and re-evaluate at gamma - i tau
    h_up = np.exp(log_integrand(spec, gamma + 1j * tau))
    raw = np.where(h_up != 0, wh / np.where(h_up != 0, h_up, 1), 0)
    return raw * np.exp(log_integrand(spec, gamma - 1j * tau))


def _span_bucket(L):
    span = max(4.0, float(np.max(np.abs(L))) if L.size else 4.0)
    return float(2.0 ** math.ceil(math.log2(span)))


def _contour(spec, za, cfg, full_line=False):
    ch = characteristics(spec)
    if not ch.a_star > 0:
        raise PreconditionError(
            f"contour route needs a* > 0 (a* = {ch.a_star:.6g}); the line integral does not converge")
    L = np.log(za)
    out = np.empty(za.shape, dtype=complex if full_line else float)
    err = np.empty(za.shape)
    order = np.argsort(np.abs(L), kind="stable")
    chunk = 128
    for start in range(0, za.size, chunk):
        sel = order[start:start + chunk]
        Ls = L[sel]
        gamma, tau, wh = _contour_nodes(spec, cfg, _span_bucket(Ls))
        phase = np.outer(Ls, tau)
        c, s = np.cos(phase), np.sin(phase)
        zg = np.exp(-gamma * Ls)
        # (1/2pi) int_{-inf}^{inf} H(g+it) z^{-g-it} dt = (1/pi) Re int_0^inf ...
        re = c @ wh.real + s @ wh.imag
        if full_line:
            # lower half evaluated directly (no symmetry assumed), for auditing
            w_low = _contour_lower_half(spec, cfg, _span_bucket(Ls))
            up = (c - 1j * s) @ wh
            low = (c + 1j * s) @ w_low
            out[sel] = zg * (up + low) / (2 * math.pi)
        else:
            out[sel] = zg * re / math.pi
        err[sel] = 16 * EPS * zg * float(np.sum(np.abs(wh))) / math.pi
    return out, err


def eval_contour(spec, z, cfg=None, return_error=False, full_line=False):
    """Vertical-line Mellin-Barnes quadrature at gamma = midpoint of the gap."""
    cfg = cfg or DEFAULT_CONFIG
    za, scalar = _prep_z(z)
    vals, err = _contour(spec, za, cfg, full_line)
    if full_line:
        return (complex(vals[0]) if scalar else vals)
    return _ret(vals, scalar, err if return_error else None)


# --------------------------------------------------------------------------
# dispatcher


@dataclass
class EvalResult:
    value: np.ndarray
    route: np.ndarray
    est_error: np.ndarray


@functools.lru_cache(maxsize=512)
def _audit_cached(spec, side, cfg):
    """Radius from which the series is trusted, or None.

    An asymptotic series hides exponentially small (or oscillatory) parts
    that its truncation test cannot see, so the series is compared with the
    contour at the first point of a geometric scan (from the switch radius
    towards the series' own end) where it passes its own test.  Series points
    are then accepted only beyond that point.
    """
    z0 = cfg.switch_radius if side == "zero" else cfg.infinity_radius
    step = 0.25 if side == "zero" else 4.0
    zz = z0 * step ** np.arange(16)
    try:
        vals, err, ok, empty = _series(spec, side, zz, cfg)
    except (PoleOrderError, SeriesNotConvergedError):
        return None
    if empty:
        return None
    try:
        cv, cerr = _contour(spec, zz, cfg)
    except (TailNotConvergedError, PreconditionError):
        return z0
    for k in np.flatnonzero(ok):
        tol = max(1e3 * cfg.rel_tol * abs(cv[k]), 10 * (cerr[k] + err[k]))
        if abs(vals[k] - cv[k]) <= tol:
            return float(zz[k])
    return None


def eval(spec, z, cfg=None, return_info=False):
    """H(z) for real z > 0, choosing the numerical route per point.

    Series at zero for z <= switch_radius, series at infinity for
    z >= infinity_radius, contour otherwise; a series point that fails its
    truncation/roundoff test falls back to the contour.  With a* <= 0 only
    the series are available.
    """
    cfg = cfg or DEFAULT_CONFIG
    za, scalar = _prep_z(z)
    ch = characteristics(spec)
    contour_ok = ch.a_star > 0
    vals = np.full(za.shape, np.nan)
    errs = np.full(za.shape, np.nan)
    route = np.full(za.shape, "", dtype=object)
    todo = np.ones(za.shape, dtype=bool)

    near = False
    try:
        _, _, near = _series_terms(spec, "zero", cfg.series_terms, cfg.collision_tol)
    except PoleOrderError:
        near = True
    if near and not contour_ok:
        raise PoleOrderError("near-coincident poles and no contour route (a* <= 0)")
    if near:
        warnings.warn("near-coincident poles: forcing the contour route", RuntimeWarning, stacklevel=2)

    sides = []
    if not near:
        if ch.delta >= 0 or contour_ok:
            sides.append(("zero", za <= cfg.switch_radius))
        if spec.n > 0 and (ch.delta >= 0 or contour_ok):
            sides.append(("infinity", za >= cfg.infinity_radius))
    for side, window in sides:
        mask = todo & (window if contour_ok else np.ones_like(todo))
        if not mask.any():
            continue
        if contour_ok:
            radius = _audit_cached(spec, side, cfg)
            if radius is None:
                continue
            mask &= (za <= radius) if side == "zero" else (za >= radius)
            if not mask.any():
                continue
        try:
            sv, se, ok, empty = _series(spec, side, za[mask], cfg)
        except PoleOrderError:
            continue
        if empty:
            continue
        sub = np.flatnonzero(mask)[ok]
        vals[sub] = sv[ok]
        errs[sub] = se[ok]
        route[sub] = f"series_{side}"
        todo[sub] = False

    if todo.any():
        if not contour_ok:
            raise SeriesNotConvergedError(
                f"no route converged at z={za[todo][0]:.6g} (a* <= 0 rules out the contour)")
        cv, ce = _contour(spec, za[todo], cfg)
        vals[todo] = cv
        errs[todo] = ce
        route[todo] = "contour"

    if cfg.cross_check and contour_ok:
        ser = route != "contour"
        if ser.any():
            cv, ce = _contour(spec, za[ser], cfg)
            tol = np.maximum(10 * cfg.rel_tol * np.abs(cv), 10 * (ce + errs[ser]))
            diff = np.abs(cv - vals[ser])
            if np.any(diff > tol):
                k = int(np.argmax(diff - tol))
                raise RouteDisagreementError(
                    f"series and contour disagree at z={za[ser][k]:.6g}: "
                    f"{vals[ser][k]:.12g} vs {cv[k]:.12g}")

    if return_info:
        if scalar:
            return EvalResult(float(vals[0]), str(route[0]), float(errs[0]))
        return EvalResult(vals, route, errs)
    return _ret(vals, scalar)


# --------------------------------------------------------------------------
# transform algebra


def reduce(spec, tol=1e-12):
    """Cancel a numerator gamma against an equal denominator gamma.

    Covers both forms of the reduction property: an upper pair (a_i, alpha_i)
    with i <= n equal to a lower pair with j > m, or a lower pair with
    j <= m equal to an upper pair with i > n.  The order inside each of the
    four gamma groups is immaterial, so any position is accepted.
    """
    def same(u, v):
        return abs(u[0] - v[0]) <= tol and abs(u[1] - v[1]) <= tol

    up, lo = list(spec.upper), list(spec.lower)
    # first form: numerator upper vs denominator lower (prefer i=1, j=q)
    for i in range(spec.n):
        for j in reversed(range(spec.m, spec.q)):
            if same(up[i], lo[j]):
                del up[i], lo[j]
                return make_spec(spec.m, spec.n - 1, spec.p - 1, spec.q - 1, up, lo)
    # second form: numerator lower vs denominator upper (prefer j=1, i=p)
    for j in range(spec.m):
        for i in reversed(range(spec.n, spec.p)):
            if same(lo[j], up[i]):
                del up[i], lo[j]
                return make_spec(spec.m - 1, spec.n, spec.p - 1, spec.q - 1, up, lo)
    raise NotReducibleError("no numerator/denominator pair cancels")


def reciprocal_argument(spec):
    """Spec G with G(z) = H(1/z)."""
    return make_spec(spec.n, spec.m, spec.q, spec.p,
                     [(1 - b, be) for b, be in spec.lower],
                     [(1 - a, al) for a, al in spec.upper])


def power_scale(spec, k):
    """Spec G with H(z) = k * G(z^k)."""
    if not k > 0:
        raise PreconditionError(f"power_scale needs k > 0, got {k}")
    return make_spec(spec.m, spec.n, spec.p, spec.q,
                     [(a, k * al) for a, al in spec.upper],
                     [(b, k * be) for b, be in spec.lower])


@dataclass(frozen=True)
class HTransform:
    """F(x) = factor * x**x_power * H_spec(arg_scale * x**arg_power)."""

    spec: HFunctionSpec
    factor: float = 1.0
    x_power: float = 0.0
    arg_scale: float = 1.0
    arg_power: float = 1.0

    def argument(self, x):
        return self.arg_scale * np.asarray(x, dtype=float) ** self.arg_power

    def __call__(self, x, cfg=None):
        x = np.asarray(x, dtype=float)
        out = self.factor * x ** self.x_power * eval(self.spec, self.argument(x), cfg)
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "factor": self.factor, "x_power": self.x_power,
                "arg_scale": self.arg_scale, "arg_power": self.arg_power}


def _min_ratio(pairs, f):
    return min((f(a, s) for a, s in pairs), default=math.inf)


def _b_min(spec):
    return _min_ratio(spec.num_lower, lambda b, be: b / be)


def _a_min(spec):
    return _min_ratio(spec.num_upper, lambda a, al: (1 - a) / al)


def laplace_transform_spec(spec, w, a, sigma):
    """Laplace transform of x^w H(a x^sigma) as a function of t."""
    if not (a > 0 and sigma > 0):
        raise PreconditionError("laplace_transform_spec needs a > 0 and sigma > 0")
    ch = characteristics(spec)
    if not ch.a_star > 0:
        raise ConditionError(f"a* > 0 fails (a* = {ch.a_star:.6g})", "a_star")
    if not sigma * _b_min(spec) + w > -1:
        raise ConditionError("sigma*min(b_j/beta_j) + w > -1 fails", "sigma_b_w")
    new = make_spec(spec.m, spec.n + 1, spec.p + 1, spec.q,
                    [(-w, sigma)] + list(spec.upper), spec.lower)
    return HTransform(new, 1.0, -(w + 1.0), a, -sigma)


def hankel_transform_spec(spec, eta, w, sigma, tau, a, b):
    """int_0^inf (xt)^w J_eta(a (xt)^sigma) H(b t^tau) dt as a function of x."""
    if not (sigma > 0 and tau > 0 and a > 0 and b > 0):
        raise PreconditionError("hankel_transform_spec needs sigma, tau, a, b > 0")
    ch = characteristics(spec)
    if not (ch.a_star > 0 or (ch.a_star == 0 and ch.delta == 0 and ch.mu < -1)):
        raise ConditionError("a* > 0 (or a* = Delta = 0, mu < -1) fails", "a_star")
    if not sigma * eta + w + tau * _b_min(spec) > -1:
        raise ConditionError("sigma*eta + w + tau*min(b_j/beta_j) > -1 fails", "lower")
    if not tau * _a_min(spec) > w - sigma / 2 + 1:
        raise ConditionError("tau*min((1-a_i)/alpha_i) > w - sigma/2 + 1 fails", "upper")
    if not eta > -0.5:
        raise ConditionError("eta > -1/2 fails", "eta")
    c = 1 - (w + 1) / (2 * sigma)
    sc = tau / (2 * sigma)
    new = make_spec(spec.m, spec.n + 1, spec.p + 2, spec.q,
                    [(c - eta / 2, sc)] + list(spec.upper) + [(c + eta / 2, sc)], spec.lower)
    factor = (2 / a) ** ((w + 1) / sigma) / (2 * sigma)
    return HTransform(new, factor, -1.0, b * (2 / a) ** (tau / sigma), -tau)


def rl_derivative_spec(spec, frac_order, w, sigma):
    """Riemann-Liouville derivative of order frac_order of t^w H(t^sigma)."""
    if not 0 < frac_order < 1:
        raise PreconditionError("rl_derivative_spec needs frac_order in (0, 1)")
    if not sigma > 0:
        raise PreconditionError("rl_derivative_spec needs sigma > 0")
    ch = characteristics(spec)
    if not ch.a_star > 0:
        raise ConditionError(f"a* > 0 fails (a* = {ch.a_star:.6g})", "a_star")
    if not sigma * _b_min(spec) + w > -1:
        raise ConditionError("sigma*min(b_j/beta_j) + w > -1 fails", "sigma_b_w")
    new = make_spec(spec.m, spec.n + 1, spec.p + 1, spec.q + 1,
                    [(-w, sigma)] + list(spec.upper),
                    list(spec.lower) + [(-w + frac_order, sigma)])
    return HTransform(new, 1.0, w - frac_order, 1.0, sigma)


def convolution_conditions(spec1, spec2):
    """Evaluate the alternatives and inequalities of the H*H convolution theorem."""
    c1, c2 = characteristics(spec1), characteristics(spec2)
    A1, B1 = _a_min(spec1), _b_min(spec1)
    A2 = _min_ratio(spec2.num_lower, lambda c, g: c / g)
    B2 = _min_ratio(spec2.num_upper, lambda d, de: (1 - d) / de)
    alts = {
        "alt1": c1.a_star > 0 and c2.a_star >= 0 and c2.delta != 0,
        "alt2": c1.a_star >= 0 and c2.a_star > 0 and c1.delta != 0,
        "alt3": c1.a_star == 0 and c1.delta == 0 and c1.mu < -1 and c2.a_star > 0,
        "alt4": c2.a_star == 0 and c2.delta == 0 and c2.mu < -1 and c1.a_star > 0,
        "alt5": (c1.a_star == 0 and c1.delta == 0 and c1.mu < -1
                 and c2.a_star == 0 and c2.delta == 0 and c2.mu < -1),
    }
    ineq = {"A1+B1>0": A1 + B1 > 0, "A2+B2>0": A2 + B2 > 0,
            "A1+A2>0": A1 + A2 > 0, "B1+B2>0": B1 + B2 > 0}
    return {"A1": A1, "B1": B1, "A2": A2, "B2": B2,
            "a1_star": c1.a_star, "a2_star": c2.a_star,
            "alternatives": alts, "inequalities": ineq}


def convolve_specs(spec1, spec2):
    """Spec of int_0^inf H1(zt) H2(x/t) dt/t, a function of z*x."""
    info = convolution_conditions(spec1, spec2)
    if not any(info["alternatives"].values()):
        raise ConditionError("none of the five a*/Delta/mu alternatives holds", "alternatives")
    for name, ok in info["inequalities"].items():
        if not ok:
            raise ConditionError(f"inequality {name} fails", name)
    upper = list(spec1.num_upper) + list(spec2.upper) + list(spec1.den_upper)
    lower = list(spec1.num_lower) + list(spec2.lower) + list(spec1.den_lower)
    return make_spec(spec1.m + spec2.m, spec1.n + spec2.n, spec1.p + spec2.p,
                     spec1.q + spec2.q, upper, lower)
