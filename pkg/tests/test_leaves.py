from fractions import Fraction as F

import pytest

from mcnaughton.geom import pt
from mcnaughton.leaves import (
    LeafSegment,
    crossing_report,
    horizontal_seed,
    leaf_iterate,
    parallelogram_sides,
    push_polyline,
    render_svg,
    unstable_seed,
)
from mcnaughton.gens import build_R1


def test_boundary_seed_unchanged(p11):
    s = LeafSegment((pt(0, 0), pt("1/2", 0)))
    assert leaf_iterate(p11, s, 3).points == s.points
    rep = crossing_report(s)
    assert not any(v["horizontal"] or v["vertical"] for v in rep.values())


def test_segment_validation():
    with pytest.raises(ValueError):
        LeafSegment((pt(0, 0),))
    with pytest.raises(ValueError):
        LeafSegment((pt(0, 0), pt(0, 0)))


def test_push_matches_pointwise():
    R1 = build_R1()
    pts = [pt("1/10", "1/5"), pt("3/5", "1/7")]
    out = push_polyline(R1, pts)
    assert out[0] == R1(pts[0]) and out[-1] == R1(pts[1])


def test_horizontal_definition():
    s = horizontal_seed("P1", F(1, 3), F(1, 2))
    assert crossing_report(s)["P1"]["horizontal"]
    horiz, vert = parallelogram_sides("P1")
    assert len(horiz) == 2 and len(vert) == 2


def test_propagation_k2(p11):
    s = horizontal_seed("P1", F(1, 3), F(1, 2))
    leaf = leaf_iterate(p11, s, 2)
    assert all(isinstance(c, F) for p in leaf.points for c in p)
    assert all(v["horizontal"] for v in crossing_report(leaf).values())


def test_unstable_seed_grows(p11):
    s = unstable_seed(pt("2/7", "3/19"), F(1, 1000), p11)
    leaf = leaf_iterate(p11, s, 4)
    assert leaf.length() > s.length()


def test_svg():
    svg = render_svg([horizontal_seed("P2", F(1, 2), F(1, 2))])
    assert svg.startswith("<svg") and svg.endswith("</svg>") and "polyline" in svg
