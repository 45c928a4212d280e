"""Exponential-polynomial algebra against calculus oracles."""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlstree.errors import BudgetExceededError
from nlstree.exppoly import ExpPoly, integral_power_phase

# small random ExpPolys
terms_strategy = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(-8, 8)),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    max_size=5,
)


def _numeric_integral(poly: ExpPoly, t: float, n: int = 20001) -> complex:
    # Simpson oracle, independent of the symbolic path
    xs = np.linspace(0.0, t, n)
    ys = poly.values(xs)
    from scipy.integrate import simpson

    return complex(simpson(ys, x=xs))


def test_constant_integrates_to_t():
    assert ExpPoly.constant(1.0).integrate().value(0.7) == pytest.approx(0.7)


def test_linear_resonant_integrates_to_half_square():
    poly = ExpPoly.term(1.0, power=1, phase=0)
    assert poly.integrate().value(2.0) == pytest.approx(2.0)


def test_oscillation_closed_form():
    # integral of e^{2is} over [0,1] = (e^{2i}-1)/(2i)
    val = ExpPoly.term(1.0, phase=2).integrate().value(1.0)
    expected = (cmath.exp(2j) - 1.0) / 2j
    assert val == pytest.approx(expected)
    assert val == pytest.approx(0.45464871341284085 + 0.7080734182735712j)


def test_integrate_matches_numeric_quadrature():
    poly = ExpPoly({(2, 3): 1.5 - 0.5j, (0, -7): 2.0j, (1, 0): -1.0})
    sym = poly.integrate().value(0.9)
    num = _numeric_integral(poly, 0.9)
    assert sym == pytest.approx(num, abs=1e-10)


@pytest.mark.parametrize("p,theta", [(0, 0), (0, 5), (3, 0), (2, -4), (4, 11)])
def test_integral_power_phase_matches_numeric(p, theta):
    poly = ExpPoly.term(1.0, power=p, phase=theta)
    assert integral_power_phase(p, theta, 0.8) == pytest.approx(
        _numeric_integral(poly, 0.8), abs=1e-10
    )


@settings(max_examples=60, deadline=None)
@given(terms_strategy)
def test_primitive_vanishes_at_zero_and_derivative_inverts(terms):
    poly = ExpPoly(terms)
    prim = poly.integrate()
    scale = max([1.0] + [abs(c) for _, c in poly.items()])
    assert abs(prim.value(0.0)) <= 1e-12 * scale
    assert prim.differentiate().isclose(poly, tol=1e-9)


@settings(max_examples=60, deadline=None)
@given(terms_strategy, terms_strategy, st.floats(-2, 2))
def test_product_evaluates_pointwise(a_terms, b_terms, t):
    a, b = ExpPoly(a_terms), ExpPoly(b_terms)
    lhs = (a * b).value(t)
    rhs = a.value(t) * b.value(t)
    assert lhs == pytest.approx(rhs, abs=1e-6 * (1 + abs(rhs)))


@settings(max_examples=40, deadline=None)
@given(terms_strategy, st.floats(-2, 2))
def test_conjugate_and_phase_shift(terms, t):
    poly = ExpPoly(terms)
    assert poly.conjugate().value(t) == pytest.approx(
        poly.value(t).conjugate(), abs=1e-9
    )
    assert poly.phase_shifted(3).value(t) == pytest.approx(
        poly.value(t) * cmath.exp(3j * t), abs=1e-9 * (1 + abs(poly.value(t)))
    )


def test_phase_cancellation_gives_constant():
    prod = ExpPoly.term(1.0, phase=2) * ExpPoly.term(1.0, phase=-2)
    assert prod == ExpPoly.constant(1.0)


def test_identity_and_zero():
    poly = ExpPoly({(2, 5): 1.0 + 2.0j})
    assert ExpPoly.constant(1.0) * poly == poly
    assert (poly - poly).is_zero


def test_rejects_noninteger_keys():
    with pytest.raises(TypeError):
        ExpPoly({(0.5, 0): 1.0})
    with pytest.raises(ValueError):
        ExpPoly({(-1, 0): 1.0})


def test_term_cap_enforced(monkeypatch):
    monkeypatch.setattr("nlstree.exppoly.TERM_CAP", 3)
    with pytest.raises(BudgetExceededError):
        ExpPoly({(0, i): 1.0 for i in range(10)})


def test_values_vectorised_matches_scalar():
    poly = ExpPoly({(1, 4): 2.0, (0, 0): -1.0j})
    ts = np.array([0.0, 0.3, 1.1])
    vec = poly.values(ts)
    for t, v in zip(ts, vec):
        assert v == pytest.approx(poly.value(float(t)))
