import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mcnaughton.errors import NotMcNaughton, TermSyntaxError
from mcnaughton.geom import Polygon, pt
from mcnaughton.gens import build_R1, random_rational_point
from mcnaughton.mvfun import affine, mv_neg, mv_oplus, projection, pullback
from mcnaughton.synth import (
    _det3,
    eval_term,
    homogeneous,
    neg,
    oplus,
    parse,
    synth_function,
    term_to_pwl,
    to_text,
    unimodular_refine,
    var,
    verify_term,
    zero,
)


def random_term(rng, depth=4):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([zero(), var(1), var(2)])
    if rng.random() < 0.4:
        return neg(random_term(rng, depth - 1))
    return oplus(random_term(rng, depth - 1), random_term(rng, depth - 1))


def test_parse_examples():
    assert parse("(x1 + !x1)") is oplus(var(1), neg(var(1)))
    with pytest.raises(TermSyntaxError) as e:
        parse("(x1 +")
    assert e.value.position == 5


def test_sugar_expands():
    t = parse("(x1 & 1)")
    assert eval_term(t, (F(1, 3), 0)) == F(1, 3)
    assert eval_term(parse("(x1 - x2)"), (F(1, 2), F(1, 3))) == F(1, 6)
    assert eval_term(parse("(x1 * x2)"), (F(3, 4), F(1, 2))) == F(1, 4)
    assert eval_term(parse("(x1 | x2)"), (F(3, 4), F(1, 2))) == F(3, 4)


def test_round_trip_random_terms():
    rng = random.Random(0)
    for _ in range(1000):
        t = random_term(rng)
        s = to_text(t)
        assert parse(s) is t
        assert to_text(parse(s)) == s


def test_eval_examples():
    assert eval_term(neg(var(1)), (F(1, 4), F(9, 10))) == F(3, 4)
    assert eval_term(oplus(var(1), var(1)), (F(3, 4), 0)) == 1
    assert eval_term(oplus(var(1), var(2)), (F(1, 4), F(1, 3))) == F(7, 12)


def test_term_to_pwl():
    f = term_to_pwl(var(1))
    assert f.functionals == projection(1).functionals
    g = term_to_pwl(oplus(var(1), var(1)))
    assert any(v.x == F(1, 2) for C in g.cells for v in C.vertices)
    ok, _ = verify_term(oplus(var(1), var(1)), g)
    assert ok


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_homomorphism_and_axioms(seed):
    rng = random.Random(seed)
    s, t = random_term(rng, 3), random_term(rng, 3)
    fs, ft = term_to_pwl(s), term_to_pwl(t)
    h = term_to_pwl(oplus(s, t))
    hn = term_to_pwl(neg(s))
    ref = mv_oplus(fs, ft)
    for _ in range(30):
        p = random_rational_point(rng, 1000, interior=False)
        assert h(p) == ref(p) == eval_term(oplus(s, t), p)
        assert hn(p) == mv_neg(fs)(p)
        assert eval_term(neg(neg(s)), p) == eval_term(s, p)
        one = neg(zero())
        assert eval_term(oplus(s, one), p) == 1
        lhs = oplus(neg(oplus(neg(s), t)), t)
        rhs = oplus(neg(oplus(neg(t), s)), s)
        assert eval_term(lhs, p) == eval_term(rhs, p)


def test_unimodular_examples():
    sq = Polygon.of((0, 0), (1, 0), (1, 1), (0, 1))
    U = unimodular_refine([Polygon.of((0, 0), (1, 0), (1, 1)), Polygon.of((0, 0), (1, 1), (0, 1))])
    assert len(U.triangles) == 2 and U.is_unimodular()
    tri = Polygon.of((0, 0), (1, 0), ("1/4", "1/4"))
    assert abs(_det3(homogeneous(pt(0, 0)), homogeneous(pt(1, 0)), homogeneous(pt("1/4", "1/4")))) == 1
    assert len(unimodular_refine([tri]).triangles) == 1
    assert unimodular_refine([sq]).is_unimodular()


def test_refinement_refines_input():
    f = pullback(projection(1), build_R1())
    U = unimodular_refine(f.cells)
    assert U.is_unimodular()
    for T, k in zip(U.polygons(), U.parent):
        assert all(f.cells[k].contains(v) for v in T.vertices)
    assert sum(T.area() for T in U.polygons()) == 1


def test_refinement_non_unimodular_triangle():
    tri = Polygon.of((0, 0), (1, 0), ("1/3", "1/5"))
    U = unimodular_refine([tri])
    assert U.is_unimodular() and len(U.triangles) > 1
    assert sum(T.area() for T in U.polygons()) == tri.area()


def test_synth_round_trips():
    for f in (projection(1), mv_oplus(projection(1), projection(2)), pullback(projection(1), build_R1())):
        res = synth_function(f, dmax=16)
        assert res.verified_dmax == 16
        ok, bad = verify_term(res.term, f, 16)
        assert ok and bad == 0
        g = term_to_pwl(res.term)
        assert verify_term(res.term, g, 16)[0]


def test_t1_matches_R1():
    R1 = build_R1()
    t1 = synth_function(pullback(projection(1), R1)).term
    rng = random.Random(7)
    for _ in range(100):
        p = random_rational_point(rng, 16, interior=False)
        assert eval_term(t1, p) == R1(p).x


def test_synth_rejects_non_integer():
    with pytest.raises(NotMcNaughton):
        synth_function(affine(F(1, 2), 0, 0))


def test_synth_budget():
    from mcnaughton.errors import BudgetExceeded
    with pytest.raises(BudgetExceeded):
        synth_function(pullback(projection(1), build_R1()), budget=10)
