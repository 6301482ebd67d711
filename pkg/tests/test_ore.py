from collections import Counter
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from ncpainleve.ore import (
    OreError,
    OrePoly,
    expected_roots,
    hecke_verify,
    multiply,
    normal_form,
    point_maps,
    random_instance,
)

H = Fraction(1, 3)
X, Y = OrePoly.x(H), OrePoly.y(H)

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def ore_polys(draw, hbar=H, max_deg=3):
    terms = {}
    for a in range(max_deg + 1):
        for b in range(max_deg + 1 - a):
            if draw(st.booleans()):
                terms[(a, b)] = draw(fractions)
    return OrePoly(hbar, terms)


def words():
    return st.text(alphabet="xy", max_size=6)


def test_normal_form_examples():
    assert normal_form("xy", H) == Y * X + H * Y
    assert normal_form("yx", H) == multiply(Y, X)
    assert normal_form("xxy", H) == multiply(Y, multiply(X, X)) + 2 * H * multiply(Y, X) + H * H * Y
    assert multiply(X, Y) == normal_form("xy", H)
    with pytest.raises(OreError):
        normal_form("xz", H)


def test_commutative_limit_product():
    h0 = Fraction(0)
    x, y = OrePoly.x(h0), OrePoly.y(h0)
    assert multiply(x, y) == multiply(y, x)
    f = x * 2 + multiply(y, x) - 1
    g = multiply(x, x) + y * Fraction(1, 2)
    a, b = sympy.symbols("a b")

    def to_expr(p):
        return sum(sympy.Rational(c.numerator, c.denominator) * b ** i * a ** j for (i, j), c in p.terms.items())

    assert sympy.expand(to_expr(multiply(f, g)) - to_expr(f) * to_expr(g)) == 0


def test_hbar_mismatch():
    with pytest.raises(OreError):
        multiply(OrePoly.x(Fraction(1)), OrePoly.x(Fraction(2)))


def test_point_maps():
    f = multiply(X - 1, X - 2)
    assert point_maps(f) == Counter({1: 1, 2: 1})
    s = Fraction(3, 2)
    g = X - s + multiply(multiply(X, Y), Y)
    assert point_maps(g) == Counter({sympy.Rational(3, 2): 1})
    assert point_maps(multiply(X - 1, X - 1)) == Counter({1: 2})
    with pytest.raises(OreError):
        point_maps(Y)


def test_linear_case():
    s = Fraction(5, 2)
    fp, rep = hecke_verify(X - s, s)
    assert rep["ok"] and rep["cyclic"]
    assert rep["roots_after"] == [["13/6", 1]]
    assert point_maps(fp) == Counter({sympy.Rational(13, 6): 1})


def test_two_roots_frozen():
    fp, rep = hecke_verify(multiply(X - 1, X - 2), 1)
    assert rep["ok"]
    assert rep["roots_after"] == [["2", 1], ["2/3", 1]]


def test_chain_reaches_two_steps():
    _, rep = hecke_verify(multiply(X - 1, X - 2), 1, chain=[Fraction(2, 3)])
    assert rep["ok"]
    assert ["1/3", 1] in rep["roots_after"]


def test_repeated_root():
    f = multiply(multiply(X - 1, X - 1), X + 2) + multiply(X, Y)
    _, rep = hecke_verify(f, 1)
    assert rep["ok"]
    assert rep["roots_after"] == [["-2", 1], ["1", 1], ["2/3", 1]]


def test_bad_inputs():
    with pytest.raises(OreError):
        hecke_verify(X - 1, 2)
    with pytest.raises(OreError):
        hecke_verify(multiply(X - 1, X - 2), 1, N=2)


def test_seeded_instances():
    for k in range(25):
        f, s, _ = random_instance(k)
        _, rep = hecke_verify(f, s)
        assert rep["ok"], (k, rep)


def test_hbar_zero_keeps_roots():
    h0 = Fraction(0)
    x = OrePoly.x(h0)
    f = multiply(x - 1, x - 3) + multiply(x, OrePoly.y(h0))
    _, rep = hecke_verify(f, 1)
    assert rep["roots_after"] == rep["roots_before"]
    assert rep["ok"]


def test_expected_roots_sign():
    got = expected_roots(Counter({sympy.Integer(1): 1}), Fraction(1), Fraction(1, 3))
    assert got == Counter({sympy.Rational(2, 3): 1})
    got = expected_roots(Counter({sympy.Integer(1): 1}), Fraction(1), Fraction(1, 3), shift_sign=1)
    assert got == Counter({sympy.Rational(4, 3): 1})


def test_nested_roundtrip():
    f = multiply(X - 1, X - 2) + multiply(Y, X)
    assert OrePoly.from_nested(f.to_nested(), H) == f


@settings(max_examples=40, deadline=None)
@given(ore_polys(), ore_polys(), ore_polys())
def test_associativity_exact(f, g, h):
    assert multiply(multiply(f, g), h) == multiply(f, multiply(g, h))


@settings(max_examples=40, deadline=None)
@given(words(), words())
def test_rewriting_confluent(e, g):
    lhs = multiply(normal_form(e, H), normal_form(g, H))
    assert lhs == normal_form(e + g, H)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=1, max_size=3),
       st.fractions(min_value=-2, max_value=2, max_denominator=3).filter(lambda h: h != 0))
def test_root_shift_property(roots, h):
    x = OrePoly.x(h)
    f = OrePoly.const(1, h)
    for r in roots:
        f = multiply(f, x - r)
    f = f + OrePoly.y(h)
    _, rep = hecke_verify(f, roots[0])
    assert rep["ok"]
