from fractions import Fraction as F
from math import gcd, lcm

import pytest
from hypothesis import given, strategies as st

from mcnaughton.errors import DegenerateSource
from mcnaughton.geom import (
    UNIT_SQUARE,
    AffinePiece,
    Point,
    Polygon,
    affine_from_triples,
    denominator,
    face_violations,
    polygon_intersect,
    polygon_measures,
    pt,
)

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=50)


def test_affine_from_triples_shear():
    A = affine_from_triples([pt(0, 0), pt(1, 0), pt("1/4", "1/4")], [pt(0, 0), pt(1, 0), pt("1/2", "1/4")])
    assert A.linear == ((1, 1), (0, 1))
    assert A.translate == (0, 0)


def test_affine_from_triples_identity():
    tri = [pt("1/3", 0), pt(1, "1/5"), pt("1/2", "7/8")]
    assert affine_from_triples(tri, tri) == AffinePiece.make([[1, 0], [0, 1]])


def test_affine_from_triples_collinear():
    with pytest.raises(DegenerateSource):
        affine_from_triples([pt(0, 0), pt(1, 0), pt(2, 0)], [pt(0, 0), pt(1, 0), pt(0, 1)])


def test_intersections():
    assert polygon_intersect(UNIT_SQUARE, UNIT_SQUARE) == UNIT_SQUARE
    lower = Polygon.of((0, 0), (1, 0), (0, 1))
    upper = Polygon.of((1, 1), (1, 0), (0, 1))
    seg = polygon_intersect(lower, upper)
    assert seg.dim == 1 and set(seg.vertices) == {pt(1, 0), pt(0, 1)}
    corner = Polygon.of(("1/2", "1/2"), (1, "1/2"), (1, 1), ("1/2", 1))
    assert polygon_intersect(lower, corner) == Polygon.of(("1/2", "1/2"))


def test_measures():
    area, c, _ = polygon_measures(UNIT_SQUARE)
    assert area == 1 and c == pt("1/2", "1/2")
    area, c, _ = polygon_measures(Polygon.of((0, 0), (1, 0), (0, 1)))
    assert area == F(1, 2) and c == pt("1/3", "1/3")
    assert polygon_measures(UNIT_SQUARE, (1, 1, 0))[2] == 1


def test_denominator_examples():
    assert denominator(pt("1/4", "1/4")) == 4
    assert denominator(pt(0, 0)) == 1
    assert denominator(pt("1/2", "1/3")) == 6


def test_denominator_matches_coprimality_definition():
    for d1 in range(1, 13):
        for a in range(d1 + 1):
            for d2 in range(1, 13):
                for b in range(0, d2 + 1, 3):
                    p = Point(F(a, d1), F(b, d2))
                    d = denominator(p)
                    assert d == lcm(p.x.denominator, p.y.denominator)
                    assert gcd(gcd(int(p.x * d), int(p.y * d)), d) == 1


def test_canonical_vertex_order():
    P = Polygon.of((1, 1), (0, 0), (1, 0), (0, 1))
    assert P.vertices[0] == pt(0, 0)
    assert P.area() > 0  # counterclockwise


@given(rationals, rationals)
def test_exact_arithmetic(a, b):
    assert (a + b) - b == a


@given(st.lists(st.tuples(st.fractions(0, 1, max_denominator=20), st.fractions(0, 1, max_denominator=20)),
                min_size=3, max_size=8))
def test_intersection_commutative_and_idempotent(points):
    P = Polygon.hull(Point(*p) for p in points)
    Q = Polygon.of(("1/4", 0), (1, "1/4"), ("3/4", 1), (0, "3/4"))
    assert polygon_intersect(P, Q) == polygon_intersect(Q, P)
    assert polygon_intersect(P, P) == P


def test_area_additive_over_split():
    from mcnaughton.geom import clip_polygon

    h = (F(2), F(-3), F(1, 3))
    pos = clip_polygon(UNIT_SQUARE, [h])
    neg = clip_polygon(UNIT_SQUARE, [tuple(-t for t in h)])
    assert pos.area() + neg.area() == 1


def test_face_violations_detects_overlap():
    cells = [UNIT_SQUARE, Polygon.of((0, 0), (1, 0), (0, 1))]
    kinds = {v["kind"] for v in face_violations(cells)}
    assert "overlap" in kinds
    ok = [Polygon.of((0, 0), (1, 0), (0, 1)), Polygon.of((1, 1), (1, 0), (0, 1))]
    assert face_violations(ok) == []
