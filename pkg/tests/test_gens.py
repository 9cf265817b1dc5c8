import random
from fractions import Fraction as F

import pytest

from mcnaughton.gens import (
    HALF_TURN,
    QUARTER_TURN,
    Family,
    FamilyParams,
    build_B,
    build_R1,
    build_R2,
    lemma_r2sq_check,
    named_points,
    random_rational_point,
    verify_report,
)
from mcnaughton.geom import AffinePiece, pt
from mcnaughton.pwl import eval_map
from mcnaughton.twist import E_SQUARE

P = named_points()


def test_params_validation():
    with pytest.raises(ValueError):
        FamilyParams(0, 1)
    with pytest.raises(ValueError):
        FamilyParams(1, 0)


def test_named_points():
    assert P["p0"] == pt("1/4", "1/4") and P["p3"] == pt("3/4", "1/4") and P["q2"] == pt("5/8", "5/8")
    assert P["p1'"] == HALF_TURN(P["p1"])


def test_R1_examples():
    R1 = build_R1()
    assert eval_map(R1, P["p2"]) == P["p0"]
    assert eval_map(R1, pt(1, 1)) == pt(1, 1)
    k = R1.locate(pt("1/3", "1/3"))
    assert R1.pieces[k] == AffinePiece.make([[-1, -1], [1, 0]], [1, 0])


def test_R2_examples():
    R2 = build_R2()
    assert eval_map(R2, P["q1"]) == P["q0"]
    assert eval_map(R2, P["p3"]) == P["p3"]
    k = R2.locate(pt("3/8", "11/32"))  # interior of <p0, q1, q0>
    assert R2.pieces[k] == AffinePiece.make([[0, 1], [-1, 4]], [0, "-1/2"])
    assert not R2.pieces[k].is_integer()


def test_R2_identity_outside_E(rng):
    R2 = build_R2()
    n = 0
    while n < 200:
        p = random_rational_point(rng, 10**5)
        if E_SQUARE.contains(p):
            continue
        assert eval_map(R2, p) == p
        n += 1


def test_symmetries():
    R1, R2 = build_R1(), build_R2()
    rng = random.Random(4)
    for _ in range(100):
        p = random_rational_point(rng, 10**4)
        assert HALF_TURN(eval_map(R1, p)) == eval_map(R1, HALF_TURN(p))
        assert QUARTER_TURN(eval_map(R2, p)) == eval_map(R2, QUARTER_TURN(p))


def test_lemma_products():
    rep = lemma_r2sq_check()
    assert rep["all_integer"] and not rep["Q_integer"] and rep["passed"]


def test_verify_report():
    assert verify_report()["passed"]


def test_B_boundary_and_pointwise(rng):
    params = FamilyParams(1, 1)
    B = build_B(params)
    assert eval_map(B, pt("1/2", 0)) == pt("1/2", 0)
    fam = Family(params)
    for _ in range(1000):
        p = random_rational_point(rng, 10**4)
        assert eval_map(B, p) == fam.apply(p)


def test_lattice_path_matches_exact(rng):
    fam = Family(FamilyParams(2, 1))
    for _ in range(200):
        D = rng.randint(2, 10**6)
        X, Y = rng.randint(0, D), rng.randint(0, D)
        q = fam.apply(pt(F(X, D), F(Y, D)))
        X2, Y2 = fam.apply_lattice(X, Y, D)
        assert q == pt(F(X2, D), F(Y2, D))


def test_family_inverse(rng):
    fam = Family(FamilyParams(1, 2))
    for _ in range(50):
        p = random_rational_point(rng, 10**4)
        assert fam.apply_inverse(fam.apply(p)) == p
