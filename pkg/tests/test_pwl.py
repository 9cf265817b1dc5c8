import random
from fractions import Fraction as F

from mcnaughton.geom import UNIT_SQUARE, AffinePiece, Polygon, denominator, pt
from mcnaughton.gens import FamilyParams, R2_squared, build_B, build_R1, build_R2, named_points, random_rational_point
from mcnaughton.pwl import (
    PwlMap,
    compose,
    eval_map,
    identity_map,
    inverse,
    locate_cell,
    mcnaughton_report,
    power,
    validate,
)

P = named_points()


def test_locate_and_eval_R1():
    R1 = build_R1()
    k = locate_cell(R1, pt("1/8", "1/16"))
    assert set(R1.cells[k].vertices) == {pt(0, 0), pt(1, 0), P["p0"]}
    assert eval_map(R1, P["p0"]) == P["p1"]
    assert eval_map(R1, pt(0, 0)) == pt(0, 0)
    assert eval_map(R1, pt("1/8", "1/16")) == pt("3/16", "1/16")


def test_shared_edge_goes_to_lowest_index():
    R1 = build_R1()
    p = P["p0"]
    cands = R1.containing_cells(p)
    assert len(cands) > 1 and locate_cell(R1, p) == min(cands)


def test_validate():
    assert validate(build_R1()) == []
    lower = Polygon.of((0, 0), (1, 0), (0, 1))
    upper = Polygon.of((1, 1), (1, 0), (0, 1))
    bad = PwlMap((lower, upper), (AffinePiece.make([[1, 0], [0, 1]]), AffinePiece.make([[1, 0], [0, 1]], ("1/8", 0))))
    assert any(v["kind"] == "discontinuity" for v in validate(bad))
    overlap = PwlMap((UNIT_SQUARE, lower), (AffinePiece.make([[1, 0], [0, 1]]),) * 2)
    assert any(v["kind"] == "overlap" for v in validate(overlap))


def test_reports():
    assert mcnaughton_report(build_R1()).is_mcnaughton_homeo
    rep = mcnaughton_report(build_R2())
    assert not rep.all_integer
    assert mcnaughton_report(power(build_R2(), 2)).is_mcnaughton_homeo


def test_compose_and_power():
    R1 = build_R1()
    assert eval_map(compose(R1, R1), pt("1/8", "1/16")) == pt("1/4", "1/16")
    assert mcnaughton_report(compose(build_R2(), build_R2())).is_mcnaughton_homeo
    assert eval_map(power(R1, 3), P["p0"]) == P["p0"]
    assert all(pc.is_integer() for pc in power(build_R2(), 2).pieces)
    rng = random.Random(0)
    C = compose(identity_map(), R1)
    for _ in range(100):
        p = random_rational_point(rng, 10**4)
        assert eval_map(C, p) == eval_map(R1, p)
    assert eval_map(power(R1, 1), pt("1/7", "2/9")) == eval_map(R1, pt("1/7", "2/9"))


def test_compose_matches_sequential_eval():
    R1, R2 = build_R1(), build_R2()
    C = compose(R1, R2)
    rng = random.Random(1)
    for _ in range(1000):
        p = random_rational_point(rng, 10**6)
        assert eval_map(C, p) == eval_map(R2, eval_map(R1, p))


def test_inverse():
    I = inverse(identity_map())
    assert eval_map(I, pt("1/3", "2/5")) == pt("1/3", "2/5")
    R1 = build_R1()
    R1i = inverse(R1)
    rng = random.Random(2)
    for _ in range(100):
        p = random_rational_point(rng, 10**5)
        assert eval_map(R1i, eval_map(R1, p)) == p
    assert mcnaughton_report(R1i).is_mcnaughton_homeo


def test_inverse_of_B11():
    B = build_B(FamilyParams(1, 1))
    assert mcnaughton_report(inverse(B)).is_mcnaughton_homeo


def test_denominators_and_area_preserved():
    S = R2_squared()
    rng = random.Random(3)
    for _ in range(300):
        p = random_rational_point(rng, rng.randint(2, 500))
        assert denominator(eval_map(S, p)) == denominator(p)
    for C, A in zip(S.cells, S.pieces):
        assert C.map(A).area() == C.area()
