from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from mcnaughton.symbolic import Interval, SymMatrix, SymPoly, identity_matrix, sym

coef = st.fractions(min_value=-5, max_value=5, max_denominator=7)
x, y, p = sym("x"), sym("y"), sym("pi")


@st.composite
def polys(draw):
    out = SymPoly()
    for _ in range(draw(st.integers(0, 4))):
        e1, e2 = draw(st.integers(-2, 3)), draw(st.integers(0, 3))
        out = out + draw(coef) * x ** e1 * y ** e2
    return out


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == SymPoly()


@given(polys(), st.fractions(1, 3, max_denominator=5), st.fractions(1, 3, max_denominator=5))
def test_evaluation_homomorphism(a, vx, vy):
    b = a * a + 3
    vals = {"x": vx, "y": vy}
    assert b.evaluate(vals) == a.evaluate(vals) ** 2 + 3


def test_diff_and_subs():
    q = x ** 3 * y + 2 * x
    assert q.diff("x") == 3 * x ** 2 * y + 2
    assert q.subs({"x": y + 1}) == (y + 1) ** 3 * y + 2 * (y + 1)
    assert (x ** -2).diff("x") == -2 * x ** -3


def test_rewrite_product():
    r, th = sym("r"), sym("th")
    assert (r ** 2 * th).rewrite_product("r", "th", "s") == r * sym("s")


def test_matrix_inverse():
    M = SymMatrix([[1, 0], [p / 3, -1]])
    assert M * M.inverse() == identity_matrix()
    assert M.det() == -1


def test_interval_arithmetic():
    a = Interval(F(1), F(2))
    assert a * a == Interval(F(1), F(4))
    assert (a - a) == Interval(F(-1), F(1))
    assert Interval(F(-1), F(2)) ** 2 == Interval(F(0), F(4))
    assert a.reciprocal() == Interval(F(1, 2), F(1))
    with pytest.raises(ZeroDivisionError):
        Interval(F(-1), F(1)).reciprocal()
    assert Interval(F(1, 3), F(1, 2)).sign() == 1


@given(polys(), st.fractions(1, 2, max_denominator=9), st.fractions(1, 2, max_denominator=9))
def test_interval_encloses_point(a, lo, w):
    I = Interval(lo, lo + w)
    val = Interval.lift(a.evaluate({"x": I, "y": Interval.point(1)}))
    for t in (lo, lo + w, lo + w / 2):
        v = a.evaluate({"x": t, "y": 1})
        assert val.lo <= v <= val.hi
