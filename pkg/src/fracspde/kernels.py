r"""Fundamental solutions of the space-time fractional diffusion equation.

For :math:`\partial^\beta_t u = -\tfrac{\nu}{2}(-\Delta)^{\alpha/2} u` the
kernels Z, Y and Z* are radial H-functions of the self-similar argument

.. math:: X = \frac{|x|^\alpha}{2^{\alpha-1}\nu t^\beta}.

Everything here works on the radius r = |x|.  Each kernel has an independent
check through its Fourier transform (a Mittag-Leffler function), see
:func:`inverse_fourier_oracle`.
"""
from __future__ import annotations

import functools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import foxh, quadrature
from .errors import PreconditionError, QuadratureError, SingularPointError
from .specfun import MittagLefflerParams, bessel_j, mittag_leffler

log = logging.getLogger(__name__)

KERNELS = ("z", "y", "zstar")


@dataclass(frozen=True)
class FracParams:
    """Equation parameters.  ``lam`` (noise strength) is not used by the kernels.

    beta is accepted in (0, 2); the SPDE layer additionally requires
    beta > 1/2.
    """

    alpha: float
    beta: float
    d: int
    nu: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise PreconditionError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not 0 < self.beta < 2:
            raise PreconditionError(f"beta must lie in (0, 2), got {self.beta}")
        if int(self.d) != self.d or self.d < 1:
            raise PreconditionError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if not self.nu > 0:
            raise PreconditionError(f"nu must be positive, got {self.nu}")

    @property
    def ceil_beta(self):
        return math.ceil(self.beta)

    @property
    def scale(self):
        """2^{alpha-1} nu, the constant in the H argument."""
        return 2.0 ** (float(self.alpha) - 1) * float(self.nu)


def _check_which(which, params):
    which = which.lower().replace("*", "star")
    if which not in KERNELS:
        raise PreconditionError(f"unknown kernel {which!r}; expected one of {KERNELS}")
    if which == "zstar" and not 1 < params.beta < 2:
        raise PreconditionError("Z* is defined for beta in (1, 2) only")
    return which


@functools.lru_cache(maxsize=256)
def kernel_spec(which, params):
    """H-function spec of Z, Y or Z* (argument r^alpha / (2^{alpha-1} nu t^beta))."""
    which = _check_which(which, params)
    a, b, d = float(params.alpha), float(params.beta), params.d
    second = {"z": (params.ceil_beta, b), "y": (b, b), "zstar": (1.0, b)}[which]
    return foxh.make_spec(2, 1, 2, 3, [(1.0, 1.0), second],
                          [(d / 2, a / 2), (1.0, 1.0), (1.0, a / 2)])


def _time_power(which, params):
    b = float(params.beta)
    return {"z": params.ceil_beta - 1.0, "y": b - 1.0, "zstar": 0.0}[which]


def stable_spec(alpha, d):
    return foxh.make_spec(1, 1, 1, 2, [(1.0, 1.0)], [(d / 2, alpha / 2), (1.0, alpha / 2)])


def _origin_limit(spec, alpha, d, cfg):
    """(coefficient, exponent) with r^{-d} H(r^alpha/c) -> coef * c^{-exponent} at r = 0.

    Returns coef 0 when the kernel vanishes at the origin and raises when
    it is unbounded there.
    """
    cfg = cfg or foxh.DEFAULT_CONFIG
    terms, _, _ = foxh._series_terms(spec, "zero", cfg.series_terms, cfg.collision_tol)
    for t in terms:
        if all(c == 0 for c in t.coef):
            continue
        power = alpha * t.exponent - d
        has_log = any(c != 0 for c in t.coef[1:])
        if power > 1e-12:
            return 0.0, t.exponent
        if abs(power) <= 1e-12 and not has_log:
            return math.exp(t.logscale) * t.coef[0], t.exponent
        raise SingularPointError(
            f"kernel is unbounded at the origin (local power r^{power:.6g}"
            f"{' with log' if has_log else ''})")
    return 0.0, 0.0


def _radial_eval(spec, alpha, d, pref, c, r, cfg):
    """pref * pi^{-d/2} r^{-d} H(r^alpha / c), with the r = 0 limit."""
    r = np.asarray(r, dtype=float)
    pref, c = np.broadcast_arrays(np.asarray(pref, float), np.asarray(c, float))
    r, pref, c = np.broadcast_arrays(r, pref, c)
    if np.any(r < 0):
        raise PreconditionError("r must be >= 0")
    out = np.empty(r.shape)
    pos = r > 0
    if pos.any():
        z = r[pos] ** alpha / c[pos]
        out[pos] = pref[pos] * math.pi ** (-d / 2) * r[pos] ** (-d) * foxh.eval(spec, z, cfg)
    if (~pos).any():
        coef, e = _origin_limit(spec, alpha, d, cfg)
        out[~pos] = pref[~pos] * math.pi ** (-d / 2) * coef * c[~pos] ** (-e)
    return out


def _kernel(which, params, t, r, cfg=None):
    which = _check_which(which, params)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise PreconditionError("t must be positive")
    spec = kernel_spec(which, params)
    pref = t ** _time_power(which, params)
    c = params.scale * t ** float(params.beta)
    out = _radial_eval(spec, float(params.alpha), params.d, pref, c, r, cfg)
    return out.item() if out.ndim == 0 else out


def z_kernel(params, t, r, cfg=None):
    """Z(t, x) at r = |x| (vectorized, broadcasting t and r)."""
    return _kernel("z", params, t, r, cfg)


def y_kernel(params, t, r, cfg=None):
    """Y(t, x) at r = |x|; the kernel of the Duhamel term."""
    return _kernel("y", params, t, r, cfg)


def zstar_kernel(params, t, r, cfg=None):
    """Z*(t, x) = d/dt Z(t, x), beta in (1, 2)."""
    return _kernel("zstar", params, t, r, cfg)


def kernel(which, params, t, r, cfg=None):
    return _kernel(which, params, t, r, cfg)


def kernel_route(which, params, t, r, cfg=None):
    """Evaluation route and error estimate for each (t, r) with r > 0."""
    which = _check_which(which, params)
    t, r = np.broadcast_arrays(np.asarray(t, float), np.asarray(r, float))
    z = r ** float(params.alpha) / (params.scale * t ** float(params.beta))
    info = foxh.eval(kernel_spec(which, params), np.where(r > 0, z, 1.0), cfg, return_info=True)
    route = np.where(r > 0, info.route, "origin_limit")
    return route, info.est_error


def fourier_kernel(which, params, t, xi):
    """Fourier transform in x of Z, Y or Z* at |xi| (Mittag-Leffler form)."""
    which = _check_which(which, params)
    b = float(params.beta)
    t = np.asarray(t, dtype=float)
    xi = np.asarray(xi, dtype=float)
    arg = -0.5 * float(params.nu) * t ** b * np.abs(xi) ** float(params.alpha)
    mu = {"z": float(params.ceil_beta), "y": b, "zstar": 1.0}[which]
    out = t ** _time_power(which, params) * mittag_leffler(MittagLefflerParams(b, mu), arg)
    return out.item() if np.ndim(out) == 0 else out


def stable_density(alpha, d, r, cfg=None):
    """Density of the symmetric alpha-stable law on R^d with ch.f. exp(-|xi|^alpha)."""
    if not 0 < alpha <= 2:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha}")
    if int(d) != d or d < 1:
        raise PreconditionError(f"d must be a positive integer, got {d}")
    # (r/2)^alpha = r^alpha / 2^alpha
    out = _radial_eval(stable_spec(alpha, d), alpha, int(d), 1.0, 2.0 ** alpha, r, cfg)
    return out.item() if out.ndim == 0 else out


def sphere_area(d):
    """Surface area S_{d-1} of the unit sphere in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def _h_mass(spec, cfg=None):
    """int_0^inf H(z) dz / z by log-variable quadrature with power-law tails.

    In the decaying tail (z > 1), values below their own roundoff estimate
    are treated as zero; this matters for the super-exponentially small
    alpha = 2 kernels, where the contour only returns noise.
    """
    def f(z):
        info = foxh.eval(spec, z, cfg, return_info=True)
        v = np.where((z > 1) & (np.abs(info.value) <= 10 * info.est_error), 0.0, info.value)
        return v / z

    val, _ = quadrature.half_line_integral(f, 1e-12, 1e12, per_decade=3, order=24)
    return val


def kernel_mass(which, params, t, cfg=None):
    """int_{R^d} K(t, x) dx by radial quadrature (in the H argument)."""
    which = _check_which(which, params)
    pref = float(t) ** _time_power(which, params)
    d = params.d
    return sphere_area(d) * math.pi ** (-d / 2) * pref / float(params.alpha) * _h_mass(
        kernel_spec(which, params), cfg)


def stable_mass(alpha, d, cfg=None):
    return sphere_area(d) * math.pi ** (-d / 2) / alpha * _h_mass(stable_spec(alpha, d), cfg)


# --------------------------------------------------------------------------
# Fourier inversion oracle


@dataclass(frozen=True)
class OracleConfig:
    """Bessel-weighted quadrature policy for the inverse Fourier oracle."""

    order: int = 24
    x0: float = 40.0  # Mittag-Leffler argument beyond which the algebraic tail starts
    tail_intervals: int = 60
    tol: float = 1e-9


def inverse_fourier_oracle(which, params, t, r, cfg=OracleConfig()):
    r"""Radial inverse Fourier transform of :func:`fourier_kernel`.

    .. math:: f(r) = (2\pi)^{-d/2} r^{1-d/2}\int_0^\infty F(k) J_{d/2-1}(kr) k^{d/2}\,dk

    The integral is split at a Bessel zero beyond which F is in its
    algebraic regime; the oscillatory tail is summed over half periods and
    accelerated by iterated averaging of the partial sums.
    """
    which = _check_which(which, params)
    if not r > 0:
        raise PreconditionError("the oracle needs r > 0")
    d, a, b = params.d, float(params.alpha), float(params.beta)
    order_b = d / 2 - 1

    def g(k):
        return fourier_kernel(which, params, t, k) * special.jv(order_b, k * r) * k ** (d / 2)

    ks = (2.0 / (float(params.nu) * t ** b)) ** (1 / a)  # ML argument equals 1
    x0 = cfg.x0
    if b > 1:
        # exponentially damped oscillations of E_beta decay like exp(x^{1/b} cos(pi/b))
        x0 = max(x0, (36.0 / abs(math.cos(math.pi / b))) ** b)
    k0 = max(ks * x0 ** (1 / a), 30.0 / r)
    phase = order_b * math.pi / 2 + 0.75 * math.pi  # asymptotic zeros of J
    j0 = math.ceil((k0 * r - phase) / math.pi)
    k0 = (phase + j0 * math.pi) / r

    geo = ks * 1.5 ** np.arange(-80, 1)
    geo = geo[geo < k0]
    uni = np.arange(0.0, k0, min(math.pi / (2 * r), ks / 2))
    edges = np.unique(np.concatenate([[0.0, k0], geo, uni, ks * np.arange(1, 64) ** (2 / a)]))
    edges = edges[edges <= k0]
    head = quadrature.integrate_panels(g, edges, cfg.order)

    def tail_sums(count):
        tail_edges = (phase + (j0 + np.arange(count + 1)) * math.pi) / r
        nodes, w = quadrature.panel_nodes(tail_edges, cfg.order)
        vals = (w * g(nodes)).reshape(count, cfg.order).sum(axis=1)
        return head + np.cumsum(vals)

    n = cfg.tail_intervals
    s1 = tail_sums(n)
    s2 = tail_sums(2 * n)
    lim1, e1 = quadrature.alternating_limit(s1[-25:])
    lim2, e2 = quadrature.alternating_limit(s2[-25:])
    err = abs(lim2 - lim1) + e2
    scale = (2 * math.pi) ** (-d / 2) * r ** (1 - d / 2)
    if err * scale > max(cfg.tol, 1e-9 * abs(lim2 * scale)) * 1e3:
        raise QuadratureError(f"Fourier oracle tail not converged (error {err * scale:.3g})")
    return scale * lim2


# --------------------------------------------------------------------------
# nonnegativity


def nonnegativity_case(params, which=None):
    """Classify a parameter set against the certified nonnegativity regimes.

    ``which`` in {None, "z", "y", "zstar"}; None asks about Z and Y jointly.
    Returns "certified_nonneg", "certified_conditional" (the boundary
    alpha = beta of the d = 1 superdiffusive regime) or "unknown".
    """
    a, b, d = params.alpha, params.beta, params.d
    w = None if which is None else which.lower().replace("*", "star")
    if w == "zstar":
        if not 1 < b < 2:
            return "unknown"
        if d == 1 and b <= a <= 2:
            return "certified_conditional" if a == b else "certified_nonneg"
        return "unknown"
    if b <= 1:
        return "certified_nonneg"
    if a == 2 and d in (2, 3):
        return "certified_nonneg"
    if d == 1 and b <= a <= 2:
        return "certified_conditional" if a == b else "certified_nonneg"
    return "unknown"


def nonnegativity_scan(which, params, ts=(0.25, 1.0, 4.0), rs=None, cfg=None):
    """Minimum of the kernel over a (t, r) grid (r on a log grid by default)."""
    rs = np.logspace(-3, 3, 200) if rs is None else np.asarray(rs, float)
    T, R = np.meshgrid(np.asarray(ts, float), rs, indexing="ij")
    vals = kernel(which, params, T, R, cfg)
    return float(np.min(vals))


# --------------------------------------------------------------------------
# envelope bound


DEFAULT_ENVELOPE_GRID = tuple(np.logspace(-6, 6, 41))


def envelope_ratio_sup(params, zeta, z_grid=DEFAULT_ENVELOPE_GRID, cfg=None):
    """sup over the grid of |H_Y(z)| (z^{zeta+1} + 1) / z^zeta."""
    _check_zeta(params, zeta)
    z = np.asarray(z_grid, dtype=float)
    h = np.abs(foxh.eval(kernel_spec("y", params), z, cfg))
    return float(np.max(h * (z ** (zeta + 1) + 1) / z ** zeta))


def _check_zeta(params, zeta):
    hi = min(params.d / float(params.alpha), 2.0)
    if not 0 < zeta < hi:
        raise PreconditionError(f"zeta must lie in (0, {hi:.6g}), got {zeta}")


def theta_envelope(params, zeta, x):
    """Theta(x) = 1 / (|x|^{alpha+d} + |x|^{d - zeta alpha})."""
    a, d = float(params.alpha), params.d
    x = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        return 1.0 / (x ** (a + d) + x ** (d - zeta * a))


def envelope_constant(params, zeta, z_grid=DEFAULT_ENVELOPE_GRID, cfg=None):
    """C with |Y(t,x)| <= C t^{beta-1-beta d/alpha} Theta(x / t^{beta/alpha})."""
    c = params.scale
    c_h = envelope_ratio_sup(params, zeta, z_grid, cfg)
    return math.pi ** (-params.d / 2) * c_h * max(c, c ** (-zeta))


def envelope_bound(params, zeta, t, r, z_grid=DEFAULT_ENVELOPE_GRID, cfg=None):
    """Envelope value C t^{beta-1-beta d/alpha} Theta(r / t^{beta/alpha})."""
    a, b, d = float(params.alpha), float(params.beta), params.d
    C = envelope_constant(params, zeta, z_grid, cfg)
    t = np.asarray(t, dtype=float)
    out = C * t ** (b - 1 - b * d / a) * theta_envelope(params, zeta, np.asarray(r) / t ** (b / a))
    return out.item() if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# initial data, J0 and Duhamel


@dataclass(frozen=True)
class InitialData:
    """Initial conditions u_0 (and u_1 when beta > 1).

    ``constant``: values = (u_0,) or (u_0, u_1).
    ``sampled``: grid (1-D, increasing) and values = arrays on the grid;
    between nodes the data are interpolated linearly, outside the grid the
    edge values are held.
    """

    kind: str
    values: tuple
    grid: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "sampled"):
            raise PreconditionError(f"unknown initial-data kind {self.kind!r}")
        vals = tuple(self.values)
        if self.kind == "sampled":
            if self.grid is None:
                raise PreconditionError("sampled initial data need a grid")
            g = np.asarray(self.grid, float)
            if g.ndim != 1 or np.any(np.diff(g) <= 0):
                raise PreconditionError("grid must be 1-D and strictly increasing")
            vals = tuple(np.asarray(v, float) for v in vals)
            for v in vals:
                if v.shape != g.shape or not np.all(np.isfinite(v)):
                    raise PreconditionError("sampled values must be finite and match the grid")
            object.__setattr__(self, "grid", tuple(g))
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, u0, u1=None):
        return cls("constant", (u0,) if u1 is None else (u0, u1))

    @classmethod
    def sampled(cls, grid, u0, u1=None):
        return cls("sampled", (u0,) if u1 is None else (u0, u1), tuple(grid))

    def count(self):
        return len(self.values)

    def evaluate(self, k, y):
        if self.kind == "constant":
            return np.full(np.shape(y), float(self.values[k]))
        return np.interp(y, np.asarray(self.grid), self.values[k])


def _check_init(params, init):
    if init.count() != params.ceil_beta:
        raise PreconditionError(
            f"beta={params.beta} needs {params.ceil_beta} initial condition(s), got {init.count()}")


@functools.lru_cache(maxsize=64)
def _profile_nodes(which, params, cfg=None, per_decade=4, order=16):
    """Nodes w > 0 and weights * K(1, w) for 1-D convolutions (d = 1)."""
    edges = np.linspace(math.log(1e-9), math.log(1e9), int(18 * per_decade) + 1)
    u, wts = quadrature.panel_nodes(edges, order)
    w = np.exp(u)
    k = kernel(which, params, 1.0, w, cfg)
    return w, wts * w * k


def _convolve_1d(which, params, fun, t, x, cfg=None):
    """int_R fun(x - y) K(t, y) dy through self-similarity in y."""
    w, wk = _profile_nodes(which, params, cfg)
    s = float(t) ** (float(params.beta) / float(params.alpha))
    x = np.atleast_1d(np.asarray(x, float))
    y = w * s
    vals = fun(x[:, None] - y[None, :]) + fun(x[:, None] + y[None, :])
    return (vals @ wk) * float(t) ** _time_power(which, params)


def j0_field(params, init, t, x, cfg=None):
    """Homogeneous solution J_0(t, x) for the given initial data."""
    _check_init(params, init)
    if not t > 0:
        raise PreconditionError("t must be positive")
    b = float(params.beta)
    if init.kind == "constant":
        u = init.values
        val = float(u[0]) if b <= 1 else float(u[0]) + float(t) * float(u[1])
        return np.full(np.shape(x), val).item() if np.ndim(x) == 0 else np.full(np.shape(x), val)
    if params.d != 1:
        raise PreconditionError("sampled initial data are supported in d = 1 only")
    if b > 1 and nonnegativity_case(params, "zstar") == "unknown":
        warnings.warn("Z* is not certified nonnegative for these parameters", RuntimeWarning,
                      stacklevel=2)
    if b <= 1:
        out = _convolve_1d("z", params, lambda y: init.evaluate(0, y), t, x, cfg)
    else:
        out = (_convolve_1d("z", params, lambda y: init.evaluate(1, y), t, x, cfg)
               + _convolve_1d("zstar", params, lambda y: init.evaluate(0, y), t, x, cfg))
    return out.item() if np.ndim(x) == 0 else out


def duhamel_solve(params, init, forcing, t, x, n_time=48, cfg=None):
    """Mild solution J_0 + int_0^t int f(s, y) Y(t - s, x - y) dy ds.

    ``forcing`` is a constant (any d) or a callable f(s, y) on arrays
    (d = 1).  The time integral uses Gauss-Jacobi nodes for the
    (t - s)^{beta-1} endpoint behaviour.
    """
    b = float(params.beta)
    base = j0_field(params, init, t, x, cfg)
    if callable(forcing):
        if params.d != 1:
            raise PreconditionError("space-dependent forcing is supported in d = 1 only")
        xj, wj = quadrature.gauss_jacobi(n_time, 0.0, b - 1.0)
        tau = 0.5 * t * (1 + xj)
        total = 0.0
        for ti, wi in zip(tau, wj):
            s = t - ti
            # int f(s, x - y) Y(tau, y) dy = tau^{beta-1} * int f(s, x - w tau^{b/a}) Y(1, w) dw
            conv = _convolve_1d("y", params, lambda y, s=s: forcing(s, y), ti, x, cfg)
            total = total + wi * conv / ti ** (b - 1)
        extra = (0.5 * t) ** b * total
        extra = extra.item() if np.ndim(x) == 0 else extra
    else:
        f = float(forcing)
        extra = f * t ** b / math.gamma(b + 1)
        if np.ndim(x):
            extra = np.full(np.shape(x), extra)
    return base + extra


# --------------------------------------------------------------------------
# fractional-derivative link


def grunwald_letnikov(f, t, order, n_steps=2000, levels=3):
    """Riemann-Liouville derivative of f at t (f(0) side from the grid).

    Grunwald-Letnikov sums with step t/n, t/2n, ... combined by Richardson
    extrapolation assuming an O(h) leading error.
    """
    ests = []
    for lev in range(levels):
        n = n_steps * 2 ** lev
        h = t / n
        k = np.arange(n + 1)
        # weights (-1)^k binom(order, k) by recurrence
        g = np.empty(n + 1)
        g[0] = 1.0
        g[1:] = np.cumprod(1 - (order + 1) / k[1:])
        vals = f(t - k * h)
        ests.append(h ** (-order) * np.dot(g, vals))
    # Richardson on O(h), O(h^2)
    r = ests
    for p in range(1, levels):
        r = [(2 ** p * r[i + 1] - r[i]) / (2 ** p - 1) for i in range(len(r) - 1)]
    return float(r[-1])


def rl_link(params, t, r, n_steps=2000, cfg=None):
    """(D^{ceil(beta)-beta} Z(., r))(t) by Grunwald-Letnikov, and Y(t, r)."""
    order = params.ceil_beta - float(params.beta)

    def f(s):
        s = np.asarray(s, float)
        out = np.zeros(s.shape)
        pos = s > 0
        out[pos] = z_kernel(params, s[pos], r, cfg)
        return out

    if order == 0:
        return float(z_kernel(params, t, r, cfg)), float(y_kernel(params, t, r, cfg))
    return grunwald_letnikov(f, t, order, n_steps), float(y_kernel(params, t, r, cfg))
