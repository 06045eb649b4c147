"""Scalar special functions: gamma family, Mittag-Leffler, Bessel J.

The gamma family and Bessel J are thin guarded wrappers over
:mod:`scipy.special`.  The Mittag-Leffler function is evaluated here: by its
power series where that is numerically safe, and otherwise through its Fox H
representation

.. math:: E_{\\rho,\\mu}(-x) = H^{1,1}_{1,2}\\left[x \\,\\middle|\\,
          (0,1);\\ (0,1),(1-\\mu,\\rho)\\right].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import GammaPoleError, PreconditionError, SeriesNotConvergedError

EPS = np.finfo(float).eps


def _pole_mask(z):
    z = np.asarray(z)
    re = np.real(z)
    return (np.imag(z) == 0) & (re <= 0) & (re == np.round(re))


def _scalarize(out, like):
    if np.ndim(like) == 0:
        return out.item() if isinstance(out, np.ndarray) else out
    return out


def log_gamma(z):
    """Logarithm of the gamma function for real or complex ``z``.

    Uses the branch of scipy's ``loggamma`` that is analytic off the negative
    real axis; ``exp(log_gamma(z)) == gamma(z)`` wherever that is finite.
    """
    if np.any(_pole_mask(z)):
        raise GammaPoleError(f"gamma has a pole at {z!r}")
    out = special.loggamma(np.asarray(z, dtype=complex))
    return _scalarize(out, z)


def digamma(z):
    """psi(z) = Gamma'(z)/Gamma(z)."""
    if np.any(_pole_mask(z)):
        raise GammaPoleError(f"digamma has a pole at {z!r}")
    arr = np.asarray(z)
    out = special.psi(arr if np.iscomplexobj(arr) else arr.astype(float))
    return _scalarize(out, z)


def bessel_j(eta, x):
    """Bessel function of the first kind J_eta(x) for eta >= -1/2, x >= 0."""
    if eta < -0.5:
        raise PreconditionError(f"bessel_j needs eta >= -1/2, got {eta}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise PreconditionError("bessel_j needs x >= 0")
    out = special.jv(eta, xa)
    if eta < 0:
        # J_eta is singular at 0 for negative order
        out = np.where(xa == 0, np.inf, out)
    return _scalarize(out, x)


@dataclass(frozen=True)
class MittagLefflerParams:
    """Indices (rho, mu) of E_{rho,mu}."""

    rho: float
    mu: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise PreconditionError(f"Mittag-Leffler rho must be > 0, got {self.rho}")
        if not math.isfinite(self.mu):
            raise PreconditionError(f"Mittag-Leffler mu must be finite, got {self.mu}")


# series acceptance: relative roundoff budget of the power series
SERIES_REL_TOL = 1e-11


def _series_terms_needed(rho, mu, radius):
    """Number of terms after which |z|^n / |Gamma(rho n + mu)| is negligible."""
    if radius == 0:
        return 1
    lr = math.log(radius)
    n = 16
    while True:
        k = np.arange(n)
        logt = k * lr - special.gammaln(rho * k + mu)
        peak = np.max(logt)
        # terms after the peak decrease monotonically in log
        if np.argmax(logt) < n - 4 and np.all(logt[-3:] < peak - 41.0):
            return n
        n *= 2
        if n > 1 << 17:
            raise SeriesNotConvergedError(
                f"Mittag-Leffler series needs too many terms at |z|={radius}")


def _ml_series(rho, mu, z):
    """Power series; returns (values, relative roundoff estimate)."""
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=complex if np.iscomplexobj(z) else float)
    rel = np.zeros(z.shape)
    if z.size == 0:
        return out, rel
    nterms = _series_terms_needed(rho, mu, float(np.max(np.abs(z))))
    k = np.arange(nterms)
    arg = rho * k + mu
    lg = special.gammaln(arg)
    sg = special.gammasgn(arg)
    sg = np.where(_pole_mask(arg), 0.0, sg)  # 1/Gamma vanishes at poles
    for idx in np.ndindex(z.shape):
        zi = z[idx]
        if zi == 0:
            out[idx] = special.rgamma(mu)
            continue
        if np.iscomplexobj(z):
            logt = k * np.log(complex(zi)) - lg
            terms = sg * np.exp(logt)
            s = complex(math.fsum(terms.real), math.fsum(terms.imag))
            growth = np.max(np.abs(logt.real)) + 1.0
        else:
            logt = k * math.log(abs(zi)) - lg
            sign = sg * (np.where(k % 2 == 1, -1.0, 1.0) if zi < 0 else 1.0)
            terms = sign * np.exp(logt)
            s = math.fsum(terms)
            growth = np.max(np.abs(logt)) + 1.0
        absum = float(np.sum(np.abs(terms)))
        out[idx] = s
        # each term carries roughly growth*eps relative error from exp()
        rel[idx] = 4.0 * EPS * growth * absum / abs(s) if s != 0 else np.inf
    return out, rel


def _ml_hspec(rho, mu):
    from .foxh import make_spec

    return make_spec(1, 1, 1, 2, [(0.0, 1.0)], [(0.0, 1.0), (1.0 - mu, rho)])


def _ml_foxh(rho, mu, x, cfg=None):
    """E_{rho,mu}(-x) for x > 0 through the H representation."""
    from .foxh import eval as h_eval

    if rho >= 2:
        raise PreconditionError("Fox H route for Mittag-Leffler needs rho < 2 (a* = 2 - rho > 0)")
    return h_eval(_ml_hspec(rho, mu), x, cfg)


def mittag_leffler(params, z, route="auto", r0=5.0, cfg=None):
    """Two-parameter Mittag-Leffler function E_{rho,mu}(z).

    Parameters
    ----------
    params : MittagLefflerParams or tuple (rho, mu)
    z : real or complex scalar or array
    route : {"auto", "series", "foxh"}
        ``auto`` uses the power series for |z| <= r0 (and for all real z >= 0,
        where the terms are positive) as long as its roundoff estimate is
        acceptable, and the Fox H route for negative real z otherwise.
    r0 : float
        Series/H switchover radius.

    Returns real output for real input.
    """
    if not isinstance(params, MittagLefflerParams):
        params = MittagLefflerParams(*params)
    rho, mu = float(params.rho), float(params.mu)
    za = np.asarray(z)
    is_complex = np.iscomplexobj(za)
    if not is_complex:
        za = za.astype(float)
    flat = za.reshape(-1)
    out = np.empty(flat.shape, dtype=complex if is_complex else float)

    if route == "foxh":
        if is_complex and np.any(flat.imag != 0):
            raise PreconditionError("Fox H route supports real negative arguments only")
        x = -flat.real
        if np.any(x <= 0):
            raise PreconditionError("Fox H route needs z < 0")
        out[:] = _ml_foxh(rho, mu, x, cfg)
        return _scalarize(out.reshape(za.shape), z)

    if route == "series":
        vals, _ = _ml_series(rho, mu, flat)
        out[:] = vals
        return _scalarize(out.reshape(za.shape), z)

    if route != "auto":
        raise PreconditionError(f"unknown route {route!r}")

    absz = np.abs(flat)
    if is_complex:
        real_nonneg = (flat.imag == 0) & (flat.real >= 0)
    else:
        real_nonneg = flat >= 0
    series_mask = (absz <= r0) | real_nonneg
    done = np.zeros(flat.shape, dtype=bool)
    if np.any(series_mask):
        vals, rel = _ml_series(rho, mu, flat[series_mask])
        ok = (rel <= SERIES_REL_TOL) | real_nonneg[series_mask]
        sub = np.flatnonzero(series_mask)
        out[sub[ok]] = vals[ok]
        done[sub[ok]] = True
    rest = np.flatnonzero(~done)
    if rest.size:
        zr = flat[rest]
        if is_complex and np.any(zr.imag != 0):
            raise SeriesNotConvergedError(
                "Mittag-Leffler: complex argument outside the series regime")
        if rho >= 2:
            raise SeriesNotConvergedError(
                f"Mittag-Leffler: series loses accuracy and no H route for rho={rho}")
        out[rest] = _ml_foxh(rho, mu, -zr.real, cfg)
    return _scalarize(out.reshape(za.shape), z)


def log_mittag_leffler(params, x):
    """log E_{rho,mu}(x) for real x >= 0 without overflow.

    Log-sum-exp of the series terms; for rho < 2 and x^{1/rho} > 2000 the
    leading exponential asymptotic, whose relative remainder is far below
    double precision there.
    """
    if not isinstance(params, MittagLefflerParams):
        params = MittagLefflerParams(*params)
    rho, mu = float(params.rho), float(params.mu)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise PreconditionError("log_mittag_leffler needs x >= 0")
    out = np.empty(xa.shape)
    for i, xi in enumerate(xa):
        if xi == 0:
            g = special.rgamma(mu)
            if g <= 0:
                raise PreconditionError("E(0) = 1/Gamma(mu) is not positive")
            out[i] = math.log(g)
            continue
        lead = xi ** (1 / rho) if rho < 2 else 0.0
        if lead > 2000:
            # E(x) = x^{(1-mu)/rho} exp(x^{1/rho}) / rho + O(x^{-1}); the
            # algebraic remainder is below exp(-2000) relative
            out[i] = lead - math.log(rho) + (1 - mu) / rho * math.log(xi)
            continue
        n = _series_terms_needed(rho, mu, xi)
        k = np.arange(n)
        arg = rho * k + mu
        sg = np.where(_pole_mask(arg), 0.0, special.gammasgn(arg))
        logt = k * math.log(xi) - special.gammaln(arg)
        keep = sg != 0
        m = np.max(logt[keep])
        s = float(np.sum(sg[keep] * np.exp(logt[keep] - m)))
        if s <= 0:
            raise SeriesNotConvergedError("log_mittag_leffler: nonpositive sum")
        out[i] = m + math.log(s)
    return out.item() if np.ndim(x) == 0 else out.reshape(np.shape(x))
