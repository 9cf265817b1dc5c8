from fractions import Fraction as F

import pytest

from mcnaughton.errors import ZeroRadius
from mcnaughton.geom import pt
from mcnaughton.gens import build_R1, build_R2, named_points
from mcnaughton.pwl import PwlMap, eval_map
from mcnaughton.twist import (
    M_inv,
    N_inv,
    check_conjugacy_R1,
    check_conjugacy_R2,
    eval_F,
    eval_G,
    eval_M,
    eval_Mp,
    eval_N,
    polar,
    twist_profiles,
)

P = named_points()


def test_profiles():
    assert twist_profiles(F(1, 4))[0] == 1
    assert twist_profiles(1) == (0, 0)
    assert twist_profiles(F(1, 2)) == (F(1, 3), 1)
    with pytest.raises(ZeroRadius):
        twist_profiles(0)


def test_twists():
    assert eval_F(polar("1/2", 0), 1) == polar("1/2", "1/3")
    assert eval_F(polar(1, "2/7"), 1) == polar(1, "2/7")
    assert eval_G(polar("1/2", 0), 1) == polar("1/2", 0)


def test_charts():
    assert eval_M(polar(0, "1/5")) == pt("1/3", "1/3")
    assert eval_M(polar(1, "1/3")) == pt(0, 1)
    assert eval_N(polar("1/2", 0)) == P["q1"]
    assert eval_Mp(polar(0, 0)) == pt("2/3", "2/3")


def test_chart_inverses(rng):
    for _ in range(200):
        p = polar(F(rng.randint(1, 999), 1000), F(rng.randint(0, 999), 1000))
        assert M_inv(eval_M(p)) == p
        assert N_inv(eval_N(p)) == p


def test_conjugacy_R1():
    assert check_conjugacy_R1(1, 1000)["passed"]


def test_conjugacy_R1_negative_control():
    R1 = build_R1()
    k = R1.locate(pt("1/3", "1/3"))
    bad = list(R1.pieces)
    bad[k] = bad[(k + 1) % len(bad)]
    rep = check_conjugacy_R1(1, 200, R1=PwlMap(R1.cells, tuple(bad)))
    assert not rep["passed"] and rep["failures"]


def test_conjugacy_R2():
    rep = check_conjugacy_R2(1, 1000)
    assert rep["passed"] and rep["reading"] == "both"
    rep2 = check_conjugacy_R2(2, 200)
    assert rep2["reading"] == "R2^(4m)"


def test_worked_point():
    q = eval_N(polar(F(2, 3), F(3, 4)))
    assert q == pt("1/3", "1/3")
    R2 = build_R2()
    for _ in range(4):
        q = eval_map(R2, q)
    assert q == pt("2/3", "2/3")


def test_boundary_of_E_fixed():
    R2 = build_R2()
    for k in range(16):
        q = eval_N(polar(1, F(k, 16)))
        assert eval_map(R2, q) == q
