"""Quadrature building blocks: Gauss-Legendre panels, log-variable
integrals over (0, inf) with power-law tail corrections, and an averaging
accelerator for alternating tails."""
from __future__ import annotations

import functools
import math

import numpy as np
from scipy import special

from .errors import QuadratureError


@functools.lru_cache(maxsize=64)
def gauss_legendre(n):
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@functools.lru_cache(maxsize=64)
def gauss_jacobi(n, a, b):
    """Nodes/weights for the weight (1-x)^a (1+x)^b on [-1, 1]."""
    x, w = special.roots_jacobi(n, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, order=32):
    """Flattened Gauss-Legendre nodes/weights for consecutive panels."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def integrate_panels(f, edges, order=32):
    nodes, weights = panel_nodes(edges, order)
    return float(np.dot(weights, f(nodes)))


def _tail_exponent(f, x0, ratio=1.25):
    """Local power-law exponent p of f near x0 (f ~ C x^p)."""
    f0, f1 = f(np.array([x0, x0 * ratio]))
    if f0 == 0 or f1 == 0 or np.sign(f0) != np.sign(f1):
        return None, f0
    return math.log(f1 / f0) / math.log(ratio), f0


def half_line_integral(f, lo=1e-12, hi=1e12, per_decade=3, order=24):
    """Integral of f over (0, inf) in the variable u = log x.

    The window [lo, hi] is integrated with Gauss-Legendre panels; the two
    tails are closed with the local power law, assuming f ~ C x^p there.
    Returns (value, tail_estimate).
    """
    n_panels = max(1, int(math.ceil(per_decade * math.log10(hi / lo))))
    edges = np.linspace(math.log(lo), math.log(hi), n_panels + 1)
    u, w = panel_nodes(edges, order)
    x = np.exp(u)
    body = float(np.dot(w, f(x) * x))
    tails = 0.0
    p, f_lo = _tail_exponent(f, lo, 0.8)
    if f_lo != 0:
        if p is None or p <= -1:
            raise QuadratureError(f"integrand not integrable at 0 (local exponent {p})")
        tails += lo * f_lo / (p + 1)
    p, f_hi = _tail_exponent(f, hi, 1.25)
    if f_hi != 0:
        if p is None or p >= -1:
            raise QuadratureError(f"integrand not integrable at infinity (local exponent {p})")
        tails += -hi * f_hi / (p + 1)
    return body + tails, abs(tails)


def alternating_limit(partial_sums, levels=16):
    """Limit of partial sums of an alternating series with smooth terms.

    Repeated averaging of neighbouring partial sums (an Euler-type
    transform); unlike Wynn's epsilon it never divides by the difference of
    two nearly equal numbers.  Returns (limit, error estimate), the error
    being the change made by the last averaging level.
    """
    s = np.asarray(partial_sums, dtype=float)
    levels = min(levels, len(s) - 1)
    prev = s[-1]
    for _ in range(levels):
        prev = s[-1]
        s = 0.5 * (s[:-1] + s[1:])
    return float(s[-1]), float(abs(s[-1] - prev))
