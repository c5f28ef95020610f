from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.laurent import (LaurentElem, lp_differentiate, lp_mul, lp_pole_order,
                              lp_shift_expand)

V2 = ("z1", "z2")


def z(i, p=1, vars=V2):
    e = [0] * len(vars)
    e[i] = p
    return LaurentElem.monomial(vars, e)


def d12(o=1, vars=V2):
    return LaurentElem.diff_pole(vars, 0, 1, o)


# worked examples ------------------------------------------------------------------
def test_pole_cancels_to_unit():
    assert lp_mul(d12(), LaurentElem(V2, {(1, 0): 1, (0, 1): -1})) == LaurentElem.const(V2, 1)


def test_zero_absorbs():
    x = z(0, -2) + d12(3)
    assert lp_mul(LaurentElem.zero(V2), x).is_zero()


def test_product_of_laurent_binomials():
    a = z(0, -1) + z(1)
    b = z(0, -1) - z(1)
    assert lp_mul(a, b) == z(0, -2) - z(1, 2)


def test_power_rule_and_quotient_rule():
    assert lp_differentiate(z(0, 3), "z1") == z(0, 2).scale(3)
    assert lp_differentiate(d12(), "z1") == -d12(2)


def test_derivative_in_second_variable_with_pole():
    f = z(0, 2) * d12()
    assert lp_differentiate(f, "z2") == z(0, 2) * d12(2)
    # finite-difference cross-check at rational points
    h = Fraction(1, 10 ** 6)
    pt = (Fraction(3), Fraction(1, 2))
    fd = (f.evaluate((pt[0], pt[1] + h)) - f.evaluate(pt)) / h
    assert abs(fd - lp_differentiate(f, "z2").evaluate(pt)) < Fraction(1, 1000)


def test_shift_expand_binomial_and_order_zero():
    V = ("z1",)
    w = LaurentElem.monomial(("z1", "w"), (0, 1))
    z1 = LaurentElem.monomial(("z1", "w"), (1, 0))
    sq = LaurentElem.monomial(V, (2,))
    assert lp_shift_expand(sq, "z1", "w", 2) == z1 * z1 + z1 * w.scale(2) + w * w
    assert lp_shift_expand(sq, "z1", "w", 0) == z1 * z1


def test_shift_expand_pole_needs_region():
    with pytest.raises(ValueError):
        lp_shift_expand(d12(), "z1", "w", 1)
    got = lp_shift_expand(d12(), "z1", "w", 1, region_ok=True)
    V3 = ("z1", "z2", "w")
    w = LaurentElem.monomial(V3, (0, 0, 1))
    assert got == LaurentElem.diff_pole(V3, 0, 1, 1) - w * LaurentElem.diff_pole(V3, 0, 1, 2)


def test_pole_orders():
    assert lp_pole_order(d12(3), 0, 1) == 3
    assert lp_pole_order(z(0) * z(1), 0, 1) == 0
    sq = LaurentElem(V2, {(2, 0): 1, (1, 1): -2, (0, 2): 1})
    assert lp_pole_order(sq * d12(5), 0, 1) == 3


def test_zero_and_reduced_invariants():
    zero = LaurentElem(V2, {(0, 0): 0}, {(0, 1): 2})
    assert zero.terms == {} and zero.poles == {}
    with pytest.raises(ValueError):
        LaurentElem(V2, {(1,): 1})


def test_unknown_variable_is_reported():
    with pytest.raises(KeyError, match="misconfigured"):
        lp_differentiate(z(0), "z9")


def test_json_round_trip():
    x = z(0, -2).scale(Fraction(3, 7)) + d12(2) * z(1, 3)
    assert LaurentElem.from_json(x.to_json()) == x


# properties ------------------------------------------------------------------------
coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def elems(draw):
    terms = draw(st.dictionaries(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), coef, max_size=4))
    o = draw(st.integers(0, 2))
    return LaurentElem(V2, terms, {(0, 1): o})


points = st.tuples(st.fractions(min_value=1, max_value=3, max_denominator=5),
                   st.fractions(min_value=-3, max_value=-1, max_denominator=5))


@given(elems(), elems(), elems())
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a - a).is_zero()


@given(elems(), elems(), points)
def test_mul_matches_evaluation(a, b, pt):
    assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)
    assert (a + b).evaluate(pt) == a.evaluate(pt) + b.evaluate(pt)


@given(elems(), elems())
def test_differentiation_is_a_derivation(a, b):
    for v in V2:
        assert (a * b).differentiate(v) == a.differentiate(v) * b + a * b.differentiate(v)


@given(elems())
def test_pole_orders_are_minimal(a):
    diff = LaurentElem(V2, {(1, 0): 1, (0, 1): -1})
    o = a.pole_order(0, 1)
    if not a.is_zero():
        assert (a * d12()).pole_order(0, 1) == o + 1
        assert (a * diff).pole_order(0, 1) == max(o - 1, 0)
