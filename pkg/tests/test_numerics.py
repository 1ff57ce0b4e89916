import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobs_ladder.errors import BracketError, ConvergenceError
from jacobs_ladder.numerics import (
    GK_DEGREE,
    GK_NODES,
    GK_WEIGHTS,
    GAUSS_WEIGHTS,
    adaptive_integrate,
    find_root_bracketed,
    fixed_point,
)


def test_rule_weights_are_normalized():
    assert GK_NODES.size == 21
    assert math.isclose(GK_WEIGHTS.sum(), 2.0, rel_tol=1e-15)
    assert math.isclose(GAUSS_WEIGHTS.sum(), 2.0, rel_tol=1e-15)
    # Gauss weights live on the odd-indexed Kronrod nodes
    assert np.all(GAUSS_WEIGHTS[::2] == 0.0)


@pytest.mark.parametrize("deg", range(0, GK_DEGREE + 1))
def test_kronrod_exact_through_degree_31(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert abs(GK_WEIGHTS @ GK_NODES**deg - exact) <= 1e-15


def test_kronrod_not_exact_at_degree_32():
    assert abs(GK_WEIGHTS @ GK_NODES**32 - 2.0 / 33) > 1e-12


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (lambda x: 1.0 / (1.0 + x * x), -50.0, 50.0, 2 * math.atan(50.0)),
        (np.sqrt, 0.0, 1.0, 2.0 / 3.0),
        (lambda x: np.sin(40 * x) ** 2, 0.0, math.pi, math.pi / 2),
    ],
)
def test_known_integrals(f, a, b, exact):
    r = adaptive_integrate(f, a, b, tol=1e-12)
    assert r.converged
    assert abs(r.value - exact) <= 1e-11 * abs(exact)
    assert r.abs_error_estimate <= 1e-11 * abs(exact)


def test_hint_at_kink_cuts_work():
    f = lambda x: np.abs(x - 0.3)
    plain = adaptive_integrate(f, 0.0, 1.0, tol=1e-13)
    hinted = adaptive_integrate(f, 0.0, 1.0, tol=1e-13, singular_hints=[0.3])
    assert hinted.evaluations < plain.evaluations
    assert abs(hinted.value - 0.29) < 1e-15


def test_budget_exhaustion_is_reported():
    r = adaptive_integrate(lambda x: 1.0 / np.sqrt(np.abs(x - 1.0 / 3.0)), 0.0, 1.0, tol=1e-15, max_panels=50)
    assert not r.converged
    assert r.panels <= 50


def test_empty_and_reversed_interval():
    assert adaptive_integrate(np.exp, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        adaptive_integrate(np.exp, 1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-5, 5),
    st.floats(0.1, 10),
    st.floats(-3, 3),
)
def test_brent_finds_cubic_root(r, scale, shift):
    f = lambda x: scale * (x - r) * ((x - r) ** 2 + 1.0) + 0.0 * shift
    x = find_root_bracketed(f, r - 7.0 + shift * 0.1, r + 6.0, tol=1e-13)
    assert abs(x - r) <= 1e-12


def test_brent_exact_endpoint_and_errors():
    assert find_root_bracketed(lambda x: x - 1.0, 1.0, 3.0) == 1.0
    with pytest.raises(BracketError):
        find_root_bracketed(lambda x: x * x + 1.0, -1.0, 1.0)


def test_brent_stays_inside_bracket():
    seen = []

    def f(x):
        seen.append(x)
        return math.tanh(50 * (x - 0.123))

    find_root_bracketed(f, 0.0, 10.0)
    assert min(seen) >= 0.0 and max(seen) <= 10.0


def test_fixed_point_cosine():
    res = fixed_point(math.cos, 1.0, damping=0.5, tol=1e-12)
    assert abs(res.x - 0.7390851332151607) < 1e-11
    assert res.history[0] == 1.0
    assert len(res.history) == res.iterations + 1
    assert res.residual < 1e-11


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(-10, 10))
def test_fixed_point_of_contraction(k, c):
    res = fixed_point(lambda x: k * x + c, 0.0, damping=0.5, tol=1e-12, max_iter=2000)
    assert abs(res.x - c / (1 - k)) <= 1e-10 * max(1.0, abs(c / (1 - k)))


def test_fixed_point_divergence_keeps_history():
    with pytest.raises(ConvergenceError) as info:
        fixed_point(lambda x: 3.0 * x + 1.0, 1.0, damping=1.0, max_iter=10)
    assert len(info.value.history) == 11
    assert info.value.last == info.value.history[-1]
