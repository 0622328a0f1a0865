import json
import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from marangoni_vim import exppoly
from marangoni_vim.exppoly import ExpPoly, add, differentiate, evaluate, integrate_kernel, mul, taylor

ETA = ExpPoly.monomial(1, 1)
E1 = ExpPoly.monomial(1, 0, 1)
ONE = ExpPoly.constant(1)


small_frac = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@st.composite
def exppolys(draw, max_decay=2, max_degree=2):
    n = draw(st.integers(0, 3))
    terms = {}
    for _ in range(n):
        k = draw(st.integers(0, max_decay))
        terms[k] = draw(st.lists(small_frac, min_size=1, max_size=max_degree + 1))
    return ExpPoly(terms)


# -- add / mul / differentiate ------------------------------------------

def test_add_disjoint_terms():
    f = ETA + E1
    assert f.terms == {0: (0, 1), 1: (1,)}


def test_add_identity_and_cancellation():
    assert ETA + ExpPoly.zero() == ETA
    assert (ETA - ETA).terms == {}
    assert (ETA - ETA).is_zero()


def test_mul_examples():
    assert E1 * E1 == ExpPoly.monomial(1, 0, 2)
    assert (ONE + ETA) * ONE == ONE + ETA
    f = ExpPoly.monomial(1, 1, 1)
    assert f * f == ExpPoly.monomial(1, 2, 2)


def test_differentiate_examples():
    f = ExpPoly.monomial(1, 1, 1)
    assert differentiate(f) == E1 - f
    assert differentiate(ExpPoly.constant(7)).is_zero()
    A, B, C = Fraction(2), Fraction(3, 7), Fraction(-5, 3)
    F0 = ExpPoly({0: [A, B], 1: [C]})
    assert F0.derivative(3) == ExpPoly({1: [-C]})


def test_non_integer_decay_rejected():
    with pytest.raises(ValueError):
        ExpPoly({1.5: [1]})
    with pytest.raises(ValueError):
        ExpPoly({-1: [1]})


def test_canonical_form_strips_zeros():
    f = ExpPoly({0: [1, 0, 0], 3: [0, 0]})
    assert f.terms == {0: (1,)}
    assert f == ExpPoly.constant(1)
    assert hash(f) == hash(ExpPoly.constant(1))


# -- integrate_kernel -----------------------------------------------------

def test_integrate_kernel_closed_form_example():
    got = integrate_kernel(E1, 2, 1)
    want = ExpPoly({0: [2, -2, 1], 1: [-2]})
    assert got == want
    for eta in (0.5, 1.0, 2.0):
        ref, _ = quad(lambda t: (t - eta) ** 2 * math.exp(-t), 0, eta, epsabs=1e-13)
        assert abs(evaluate(got, eta) - ref) < 1e-10


def test_integrate_kernel_trivial():
    assert integrate_kernel(ONE, 0, 1) == ETA


@given(exppolys(), st.integers(0, 3), small_frac)
def test_integrate_kernel_vanishes_at_origin(f, p, s):
    assert integrate_kernel(f, p, s)(0.0) == 0.0
    assert taylor(integrate_kernel(f, p, s), 0) == [0]


@settings(max_examples=60, deadline=None)
@given(exppolys(), st.integers(0, 3), small_frac, st.floats(0.05, 5.0))
def test_integrate_kernel_matches_quadrature(f, p, s, eta):
    got = evaluate(integrate_kernel(f, p, s), eta)
    ref, _ = quad(lambda t: float(s) * (t - eta) ** p * evaluate(f, t), 0, eta, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


@given(exppolys())
def test_fundamental_theorem(f):
    assert differentiate(integrate_kernel(f, 0, 1)) == f


# -- ring axioms -----------------------------------------------------------

@settings(max_examples=250, deadline=None)
@given(exppolys(), exppolys(), exppolys())
def test_ring_axioms(f, g, h):
    assert add(f, g) == add(g, f)
    assert mul(f, g) == mul(g, f)
    assert add(add(f, g), h) == add(f, add(g, h))
    assert mul(mul(f, g), h) == mul(f, mul(g, h))
    assert mul(f, add(g, h)) == add(mul(f, g), mul(f, h))


@settings(max_examples=250, deadline=None)
@given(exppolys(), exppolys())
def test_leibniz(f, g):
    lhs = differentiate(mul(f, g))
    rhs = add(mul(differentiate(f), g), mul(f, differentiate(g)))
    assert lhs == rhs


# -- eval / taylor ------------------------------------------------------------

def test_eval_examples():
    assert evaluate(E1, 0.0) == 1.0
    assert evaluate(ETA * ETA, 3.0) == 9.0
    # closed-form F' of the k = 0 solution, as printed, at the surface
    dF = ExpPoly(
        {
            0: ["0.1120407076", "-0.09383205466", "0.01546616248"],
            1: ["1.275918584", "-0.2030839727"],
            2: [Fraction(-1, 12)],
        }
    )
    assert abs(evaluate(dF, 0.0) - 1.3046259583) < 1e-10


def test_eval_vectorised():
    f = ETA * E1 + ONE
    x = np.linspace(0, 3, 7)
    np.testing.assert_allclose(evaluate(f, x), x * np.exp(-x) + 1, rtol=1e-15)


def test_taylor_examples():
    assert taylor(ExpPoly.monomial(1, 0, 2), 3) == [1, -2, 2, Fraction(-4, 3)]
    assert taylor(ETA * ETA, 4) == [0, 0, 1, 0, 0]
    assert taylor(ETA * E1, 3) == [0, 1, -1, Fraction(1, 2)]


@settings(max_examples=40, deadline=None)
@given(exppolys())
def test_taylor_matches_finite_differences(f):
    c = taylor(f, 4)
    h = 1e-2
    # central differences of order 4 accuracy around 0
    x = np.arange(-4, 5) * h
    y = evaluate(f, x)
    d1 = (y[2] - 8 * y[3] + 8 * y[5] - y[6]) / (12 * h)
    d2 = (-y[2] + 16 * y[3] - 30 * y[4] + 16 * y[5] - y[6]) / (12 * h**2)
    scale = max(1.0, max(abs(float(v)) for v in c))
    assert abs(float(c[0]) - y[4]) < 1e-12 * scale
    assert abs(float(c[1]) - d1) < 1e-6 * scale
    assert abs(float(c[2]) - d2 / 2) < 1e-6 * scale * 10


# -- serialization -----------------------------------------------------------

@given(exppolys())
def test_records_round_trip(f):
    recs = json.loads(json.dumps(f.to_records()))
    assert ExpPoly.from_records(recs) == f


def test_records_format():
    f = ExpPoly({0: [Fraction(1, 3)], 2: [0, Fraction(-5, 2)]})
    assert f.to_records() == [
        {"decay_index": 0, "coefficients": ["1/3"]},
        {"decay_index": 2, "coefficients": ["0/1", "-5/2"]},
    ]


def test_term_count_warning(monkeypatch, caplog):
    monkeypatch.setattr(exppoly, "TERM_WARNING_THRESHOLD", 3)
    with caplog.at_level(logging.WARNING, logger="marangoni_vim.exppoly"):
        ExpPoly({0: [1, 1, 1, 1]})
    assert "terms" in caplog.text
