import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspde import quadrature
from fracspde.errors import QuadratureError


@given(st.integers(0, 63))
def test_gauss_legendre_exact_for_polynomials(k):
    x, w = quadrature.gauss_legendre(32)
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert np.dot(w, x ** k) == pytest.approx(exact, abs=1e-14)


def test_panel_nodes_cover_edges():
    val = quadrature.integrate_panels(np.sin, np.linspace(0, math.pi, 5), order=16)
    assert val == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("f,exact", [
    (lambda x: 1 / (1 + x * x), math.pi / 2),
    (lambda x: x ** -0.5 / (1 + x), math.pi),
    (lambda x: np.exp(-x), 1.0),
])
def test_half_line_integral(f, exact):
    val, tail = quadrature.half_line_integral(f)
    assert val == pytest.approx(exact, rel=1e-10)
    assert tail < 1e-5


def test_half_line_integral_rejects_divergent_tail():
    with pytest.raises(QuadratureError):
        quadrature.half_line_integral(lambda x: 1 / (1 + x))


def test_alternating_limit():
    k = np.arange(1, 41)
    partial = np.cumsum((-1.0) ** (k + 1) / k)
    lim, err = quadrature.alternating_limit(partial)
    assert lim == pytest.approx(math.log(2), abs=1e-10)
    assert err < 1e-8
