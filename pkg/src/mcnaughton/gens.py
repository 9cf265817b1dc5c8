"""The generators R1, R2 and the family B_lm = R2^(4m) o R1^(3l)."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ConstructionGateFailed
from .geom import AffinePiece, Point, Polygon, affine_from_triples, pt
from .pwl import (
    DEFAULT_CELL_BUDGET,
    LatticeStepper,
    PwlMap,
    compose,
    eval_map,
    fixes_boundary,
    image_tiling_ok,
    inverse,
    mcnaughton_report,
    power,
    validate,
)

O, X1, Y1, Z1 = pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1)
p0 = pt("1/4", "1/4")
p1 = pt("1/2", "1/4")
p2 = pt("1/4", "1/2")
p3 = pt("3/4", "1/4")
p4 = pt("1/4", "3/4")
q0 = pt("3/8", "3/8")
q1 = pt("5/8", "3/8")
q2 = pt("5/8", "5/8")
q3 = pt("3/8", "5/8")
CENTER = pt("1/2", "1/2")

HALF_TURN = AffinePiece.make([[-1, 0], [0, -1]], [1, 1])
# clockwise quarter turn about (1/2, 1/2): (x, y) -> (y, 1 - x)
QUARTER_TURN = AffinePiece.make([[0, 1], [-1, 0]], [0, 1])

p0p, p1p, p2p = HALF_TURN(p0), HALF_TURN(p1), HALF_TURN(p2)


@dataclass(frozen=True)
class FamilyParams:
    l: int
    m: int

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("l and m must be >= 1")


def named_points() -> dict[str, Point]:
    return {
        "p0": p0, "p1": p1, "p2": p2, "p3": p3, "p4": p4,
        "p0'": p0p, "p1'": p1p, "p2'": p2p,
        "q0": q0, "q1": q1, "q2": q2, "q3": q3,
    }


def _map_from_vertex_action(triangles, action) -> PwlMap:
    cells = []
    pieces = []
    for tri in triangles:
        src = list(tri)
        dst = [action.get(v, v) for v in src]
        cells.append(Polygon.hull(src))
        pieces.append(affine_from_triples(src, dst))
    return PwlMap(tuple(cells), tuple(pieces))


def r1_triangles():
    half = [
        (p0, p1, p2),
        (O, X1, p0), (X1, p1, p0), (X1, Y1, p1),
        (Y1, p2, p1), (Y1, O, p2), (O, p0, p2),
    ]
    return half + [tuple(HALF_TURN(v) for v in t) for t in half]


def r2_triangles():
    ring = [(p0, p3, q1), (p0, q1, q0)]
    outside = [(O, X1, p3), (O, p3, p0)]
    out = [(q0, q1, q2, q3)]
    for base in (ring, outside):
        cur = base
        for _ in range(4):
            out.extend(cur)
            cur = [tuple(QUARTER_TURN(v) for v in t) for t in cur]
    return out


def _build_R1() -> PwlMap:
    action = {p0: p1, p1: p2, p2: p0, p0p: p1p, p1p: p2p, p2p: p0p}
    return _map_from_vertex_action(r1_triangles(), action)


def _build_R2() -> PwlMap:
    action = {q1: q0, q0: q3, q3: q2, q2: q1}
    cells = []
    pieces = []
    for t in r2_triangles():
        src = list(t)[:3]
        cells.append(Polygon.hull(t))
        pieces.append(affine_from_triples(src, [action.get(v, v) for v in src]))
    return PwlMap(tuple(cells), tuple(pieces))


def _gate(name, ok, detail, gates):
    gates.append({"gate": name, "passed": bool(ok), "detail": detail})


def r1_gates(S: PwlMap) -> list[dict]:
    gates: list[dict] = []
    v = validate(S)
    _gate("validate", not v, v[:5], gates)
    ok, bad = image_tiling_ok(S)
    _gate("homeomorphism-tiling", ok, bad[:5], gates)
    _gate("integer-unimodular", all(P.is_unimodular() for P in S.pieces), None, gates)
    ok, bad = fixes_boundary(S)
    _gate("boundary-fixed", ok, bad[:5], gates)
    from .twist import check_conjugacy_R1

    rep = check_conjugacy_R1(1, 40, seed=7, R1=S)
    _gate("twist-conjugacy", rep["passed"], rep["failures"][:3], gates)
    return gates


def r2_gates(S: PwlMap) -> list[dict]:
    gates: list[dict] = []
    v = validate(S)
    _gate("validate", not v, v[:5], gates)
    ok, bad = image_tiling_ok(S)
    _gate("homeomorphism-tiling", ok, bad[:5], gates)
    ok, bad = fixes_boundary(S)
    _gate("boundary-fixed", ok, bad[:5], gates)
    lemma = lemma_r2sq_products(S)
    _gate("lemma-products-integral", lemma["all_integer"], lemma["products"], gates)
    from .twist import check_conjugacy_R2

    rep = check_conjugacy_R2(1, 40, seed=7, R2=S)
    _gate("twist-conjugacy", rep["passed"], rep["failures"][:3], gates)
    return gates


@lru_cache(maxsize=None)
def build_R1() -> PwlMap:
    S = _build_R1()
    gates = r1_gates(S)
    if not all(g["passed"] for g in gates):
        raise ConstructionGateFailed("R1 construction gate failed", gates)
    return S


@lru_cache(maxsize=None)
def build_R2() -> PwlMap:
    S = _build_R2()
    gates = r2_gates(S)
    if not all(g["passed"] for g in gates):
        raise ConstructionGateFailed("R2 construction gate failed", gates)
    return S


@lru_cache(maxsize=None)
def R2_squared() -> PwlMap:
    return power(build_R2(), 2)


@lru_cache(maxsize=None)
def R1_power(k: int) -> PwlMap:
    return power(build_R1(), k)


@lru_cache(maxsize=None)
def R2_power(k: int) -> PwlMap:
    return power(build_R2(), k)


@lru_cache(maxsize=None)
def build_B(params: FamilyParams, budget: int = DEFAULT_CELL_BUDGET) -> PwlMap:
    """Materialize B_lm as a single PwlMap."""
    A = power(build_R1(), 3 * params.l, budget=budget)
    B = power(R2_squared(), 2 * params.m, budget=budget)
    return compose(A, B, budget=budget)


def _hmul(X, Y):
    return tuple(
        tuple(sum(X[i][k] * Y[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def _hinv(P: AffinePiece):
    return P.inverse().homogeneous()


def _piece_on(S: PwlMap, tri) -> AffinePiece:
    target = Polygon.hull(tri)
    for C, P in zip(S.cells, S.pieces):
        if C == target:
            return P
    raise KeyError(f"no cell {target}")


def lemma_r2sq_products(S: PwlMap) -> dict:
    P = _piece_on(S, (p0, p3, q1))
    Qp = _piece_on(S, (p0, q1, q0))
    A = QUARTER_TURN.homogeneous()
    Ainv = _hinv(QUARTER_TURN)
    Ph, Qh = P.homogeneous(), Qp.homogeneous()
    APA = _hmul(_hmul(A, Ph), Ainv)
    AQA = _hmul(_hmul(A, Qh), Ainv)
    prods = {
        "P^2": _hmul(Ph, Ph),
        "QP": _hmul(Qh, Ph),
        "(APA^-1)Q": _hmul(APA, Qh),
        "(AQA^-1)Q": _hmul(AQA, Qh),
    }
    from .geom import fmt_q

    def is_int(M):
        return all(x.denominator == 1 for row in M for x in row)

    return {
        "A": [[fmt_q(x) for x in row] for row in A],
        "Q_integer": is_int(Qh),
        "products": {
            k: {"matrix": [[fmt_q(x) for x in row] for row in M], "integer": is_int(M)}
            for k, M in prods.items()
        },
        "all_integer": all(is_int(M) for M in prods.values()),
    }


def lemma_r2sq_check() -> dict:
    rep = lemma_r2sq_products(build_R2())
    rep["r2_squared_report"] = mcnaughton_report(R2_squared()).to_json()
    rep["passed"] = rep["all_integer"] and rep["r2_squared_report"]["is_mcnaughton_homeo"]
    return rep


def verify_report() -> dict:
    """Gate report for both generators (used by ``gens verify``)."""
    R1, R2 = _build_R1(), _build_R2()
    g1, g2 = r1_gates(R1), r2_gates(R2)
    lemma = lemma_r2sq_check()
    return {
        "R1": {"cells": len(R1), "gates": g1, "report": mcnaughton_report(R1).to_json()},
        "R2": {"cells": len(R2), "gates": g2, "report": mcnaughton_report(R2).to_json()},
        "lemma": lemma,
        "passed": all(g["passed"] for g in g1 + g2) and lemma["passed"],
    }


class Family:
    """Stepwise evaluation of B_lm without materializing its powers.

    Exact rational points use R1 and R2 directly; the lattice path uses R1
    and R2^2 (both with integer pieces) on points ``(X/D, Y/D)``.
    """

    def __init__(self, params: FamilyParams):
        self.params = params
        self.R1 = build_R1()
        self.R2 = build_R2()
        self._lat1 = None
        self._lat2 = None
        self._inv = None

    def schedule(self):
        return [self.R1] * (3 * self.params.l) + [self.R2] * (4 * self.params.m)

    def apply(self, p: Point, k: int = 1) -> Point:
        for _ in range(k):
            for S in self.schedule():
                p = eval_map(S, p)
        return p

    def apply_inverse(self, p: Point, k: int = 1) -> Point:
        if self._inv is None:
            self._inv = (inverse(self.R1), inverse(self.R2))
        R1i, R2i = self._inv
        for _ in range(k):
            for _ in range(4 * self.params.m):
                p = eval_map(R2i, p)
            for _ in range(3 * self.params.l):
                p = eval_map(R1i, p)
        return p

    def lattice(self):
        if self._lat1 is None:
            self._lat1 = LatticeStepper(self.R1)
            self._lat2 = LatticeStepper(R2_squared())
        return self._lat1, self._lat2

    def apply_lattice(self, X: int, Y: int, D: int, k: int = 1) -> tuple[int, int]:
        s1, s2 = self.lattice()
        for _ in range(k):
            for _ in range(3 * self.params.l):
                X, Y = s1.step(X, Y, D)
            for _ in range(2 * self.params.m):
                X, Y = s2.step(X, Y, D)
        return X, Y


def random_rational_point(rng: random.Random, D: int = 2**31 - 1, interior: bool = True) -> Point:
    lo = 1 if interior else 0
    hi = D - 1 if interior else D
    return Point(Fraction(rng.randint(lo, hi), D), Fraction(rng.randint(lo, hi), D))
