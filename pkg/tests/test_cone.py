import random
from fractions import Fraction as F

import pytest

from mcnaughton.cone import (
    BOX_W,
    BOX_Z,
    ConeBasis,
    PI_HI,
    PI_LO,
    classify_containment,
    cone_field_at,
    cone_matrices,
    displayed_matrices,
    invariance_probe,
    lemma7_certify,
    lemma7_replay,
)
from mcnaughton.errors import UndefinedAtPoint
from mcnaughton.geom import pt
from mcnaughton.gens import FamilyParams, named_points
from mcnaughton.symbolic import SymPoly, sym

pi, z, w = sym("pi"), sym("z"), sym("w")
P = named_points()


def test_cone_matrices():
    M = cone_matrices(1, 1, 1)
    assert M["A1"][1, 0] == pi / 3
    assert M["TF"][1, 0] == -2 * pi / 3
    assert M["A4"][1, 0] == -M["A3"][1, 0]
    assert M["A4"][0, 0] == M["A3"][0, 0] and M["A4"][1, 1] == M["A3"][1, 1]


def test_replay():
    rep = lemma7_replay()
    assert rep["passed"]
    D = displayed_matrices()
    x, y = sym("x"), sym("y")
    assert D["C"][1, 0] == 6 * pi * y - 2 * pi + 9
    first = SymPoly.const(F(9, 32)) * (12 * z + 1) ** 2 * (4 * pi * z - pi + 12)
    assert rep["final_matrix"][0, 0] == first


def test_final_entries():
    final = lemma7_replay()["final_matrix"]
    v = final[0, 0].evaluate({"z": F(1, 8), "w": F(1, 16), "pi": F(22, 7)})
    assert v == F(9, 32) * F(25, 4) * (12 - F(22, 7) / 2)
    assert final[0, 1].subs({"w": SymPoly.const(F(1, 4))}).is_zero()


def test_certificate():
    cert = lemma7_certify(PI_LO, PI_HI)
    assert cert["passed"]
    assert set(cert["entries"]) == {"11", "12", "21", "22"}
    assert all(F(e["min_lower_bound"]) > 0 for e in cert["entries"].values())


def test_cone_field_exclusions():
    with pytest.raises(UndefinedAtPoint):
        cone_field_at(pt("1/3", "1/3"))
    with pytest.raises(UndefinedAtPoint):
        cone_field_at(pt("3/8", "1/4"))  # on the inner triangle boundary
    U = cone_field_at(pt("7/16", "3/11"))
    assert isinstance(U, ConeBasis)


def test_cone_contains_generators():
    U = cone_field_at(pt("1/2", "5/16"))
    assert U.chart == "N"
    assert U.contains(U.u) and U.contains(U.v)
    assert U.contains((U.u[0] + U.v[0], U.u[1] + U.v[1]), strict=True)
    assert not U.contains((U.u[0] - 2 * U.v[0], U.u[1] - 2 * U.v[1]))


def test_classify():
    assert classify_containment([[1, 2], [3, 4]]) == (True, True)
    assert classify_containment([[1, 0], [3, 4]]) == (True, False)
    assert classify_containment([[-1, -2], [-3, -4]]) == (True, True)
    assert classify_containment([[1, -2], [3, 4]]) == (False, False)


def test_probe_small():
    rep = invariance_probe(FamilyParams(1, 1), samples=300, horizon=50, seed=5)
    assert rep.containment_failures == 0
    assert rep.det_ok
    # every non-strict event outside case (a) starts in a kite
    assert all(k.split(":")[1].startswith("kite") for k in rep.nonstrict_by_region)
