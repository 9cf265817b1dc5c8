"""Piecewise-affine self-maps of the unit square."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .errors import BudgetExceeded, InvalidMap, NotInjective, OutOfSquare
from .geom import (
    IDENTITY,
    UNIT_SQUARE,
    AffinePiece,
    BucketIndex,
    Point,
    Polygon,
    ZERO,
    clip_polygon,
    conform,
    face_violations,
    fmt_q,
    intersecting_pairs,
    merge_cells,
    piece_from_json,
    piece_to_json,
    polygon_from_json,
    polygon_intersect,
    polygon_to_json,
)

DEFAULT_CELL_BUDGET = 200_000


@dataclass(frozen=True, eq=False)
class PwlMap:
    """A rational complex (given by its 2-cells) with one affine piece per cell."""

    cells: tuple[Polygon, ...]
    pieces: tuple[AffinePiece, ...]
    _index: Optional[BucketIndex] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.cells) != len(self.pieces):
            raise ValueError("one piece per 2-cell is required")
        if self._index is None:
            object.__setattr__(self, "_index", BucketIndex(self.cells))

    def __len__(self):
        return len(self.cells)

    def locate(self, p: Point) -> int:
        return locate_cell(self, p)

    def __call__(self, p: Point) -> Point:
        return eval_map(self, p)

    def containing_cells(self, p: Point) -> list[int]:
        return [k for k in self._index.at(p) if self.cells[k].contains(p)]


def identity_map() -> PwlMap:
    return PwlMap((UNIT_SQUARE,), (IDENTITY,))


def locate_cell(S: PwlMap, p: Point) -> int:
    """Lowest-index 2-cell containing ``p``."""
    if not p.in_square():
        raise OutOfSquare(f"{p} is outside [0,1]^2")
    for k in S._index.at(p):
        if S.cells[k].contains(p):
            return k
    raise OutOfSquare(f"no cell contains {p}")


def eval_map(S: PwlMap, p: Point) -> Point:
    return S.pieces[locate_cell(S, p)](p)


def validate(S: PwlMap) -> list[dict]:
    """Complex conditions plus continuity; returns the list of violations."""
    out = face_violations(S.cells)
    for i, j, I in intersecting_pairs(S.cells):
        if I.dim == 2:
            continue
        Pi, Pj = S.pieces[i], S.pieces[j]
        for v in I.vertices:
            if Pi(v) != Pj(v):
                out.append({"kind": "discontinuity", "cells": [i, j], "face": polygon_to_json(I)})
                break
    return out


@dataclass
class McNaughtonReport:
    is_continuous: bool
    all_integer: bool
    all_unimodular: bool
    injective: bool
    fixes_boundary: bool
    witnesses: list = field(default_factory=list)

    @property
    def is_mcnaughton_homeo(self) -> bool:
        return self.is_continuous and self.all_integer and self.all_unimodular and self.injective

    def to_json(self) -> dict:
        return {
            "is_continuous": self.is_continuous,
            "all_integer": self.all_integer,
            "all_unimodular": self.all_unimodular,
            "injective": self.injective,
            "fixes_boundary": self.fixes_boundary,
            "is_mcnaughton_homeo": self.is_mcnaughton_homeo,
            "witnesses": self.witnesses,
        }


def image_tiling_ok(S: PwlMap) -> tuple[bool, list]:
    """Images of the 2-cells pairwise interior-disjoint, inside the square, area 1."""
    images = []
    bad = []
    total = ZERO
    for k, (C, P) in enumerate(zip(S.cells, S.pieces)):
        D = C.map(P)
        if D.dim < 2:
            bad.append({"cell": k, "reason": "image is degenerate"})
            D = None
        elif not all(v.in_square() for v in D.vertices):
            bad.append({"cell": k, "reason": "image leaves the square"})
        images.append(D)
        if D is not None:
            total += D.area()
    live = [D for D in images if D is not None]
    ids = [k for k, D in enumerate(images) if D is not None]
    for i, j, I in intersecting_pairs(live):
        if I.dim == 2:
            bad.append({"cell": ids[i], "reason": f"image overlaps image of cell {ids[j]}"})
    if total != 1:
        bad.append({"cell": None, "reason": f"image area {fmt_q(total)} != 1"})
    return not bad, bad


def fixes_boundary(S: PwlMap) -> tuple[bool, list]:
    bad = []
    for k, (C, P) in enumerate(zip(S.cells, S.pieces)):
        for a, b in C.edges():
            on_side = (a.x == b.x and a.x in (0, 1)) or (a.y == b.y and a.y in (0, 1))
            if on_side and (P(a) != a or P(b) != b):
                bad.append({"cell": k, "reason": "boundary edge moved"})
    return not bad, bad


def mcnaughton_report(S: PwlMap) -> McNaughtonReport:
    violations = validate(S)
    if violations:
        raise InvalidMap("map fails validation", violations)
    witnesses = []
    all_int = True
    all_uni = True
    for k, (C, P) in enumerate(zip(S.cells, S.pieces)):
        if not P.is_integer():
            all_int = False
            witnesses.append({"cell": k, "polygon": polygon_to_json(C), "reason": "non-integer piece"})
        elif abs(P.det()) != 1:
            witnesses.append({"cell": k, "polygon": polygon_to_json(C), "reason": "determinant not +-1"})
        if not P.is_unimodular():
            all_uni = False
    inj, bad = image_tiling_ok(S)
    witnesses.extend(bad)
    fb, bad = fixes_boundary(S)
    witnesses.extend(bad)
    return McNaughtonReport(True, all_int, all_uni, inj, fb, witnesses)


def _finish(cells, pieces, merge=True, budget=DEFAULT_CELL_BUDGET) -> PwlMap:
    if merge:
        cells, pieces = merge_cells(cells, pieces)
    cells, pieces = conform(cells, pieces)
    if len(cells) > budget:
        raise BudgetExceeded(f"{len(cells)} cells exceed the budget of {budget}")
    return PwlMap(tuple(cells), tuple(pieces))


def refine_through(S: PwlMap, cells: Sequence[Polygon]):
    """Yield ``(k, j, region)``: the 2-dim parts of cell k of S mapped into cells[j].

    ``region`` is ``C_k`` intersected with the preimage of ``cells[j]`` under
    the k-th piece; it is computed by pulling back half-planes, so singular
    pieces are fine.
    """
    index = BucketIndex(cells)
    halfplanes = [D.halfplanes() for D in cells]
    for k, (C, P) in enumerate(zip(S.cells, S.pieces)):
        image = C.map(P)
        for j in index.candidates(image.bbox()):
            if polygon_intersect(image, cells[j]) is None:
                continue
            R = clip_polygon(C, [P.pull_halfplane(*h) for h in halfplanes[j]])
            if R is not None and R.dim == 2:
                yield k, j, R


def compose(first: PwlMap, second: PwlMap, budget: int = DEFAULT_CELL_BUDGET, merge: bool = True) -> PwlMap:
    """The map p -> second(first(p))."""
    cells = []
    pieces = []
    for k, j, R in refine_through(first, second.cells):
        cells.append(R)
        pieces.append(first.pieces[k].then(second.pieces[j]))
        if len(cells) > budget:
            raise BudgetExceeded(f"composition exceeds {budget} cells")
    return _finish(cells, pieces, merge, budget)


def power(S: PwlMap, k: int, budget: int = DEFAULT_CELL_BUDGET) -> PwlMap:
    if k < 1:
        raise ValueError("power needs k >= 1")
    out = S
    for _ in range(k - 1):
        out = compose(out, S, budget=budget)
    return out


def inverse(S: PwlMap) -> PwlMap:
    ok, bad = image_tiling_ok(S)
    if not ok:
        raise NotInjective(f"map is not injective: {bad[:3]}")
    cells = [C.map(P) for C, P in zip(S.cells, S.pieces)]
    pieces = [P.inverse() for P in S.pieces]
    return _finish(cells, pieces, merge=True)


# -- JSON ----------------------------------------------------------------

def map_to_json(S: PwlMap) -> dict:
    return {
        "cells": [
            {"polygon": polygon_to_json(C), **piece_to_json(P)}
            for C, P in zip(S.cells, S.pieces)
        ]
    }


def map_from_json(data) -> PwlMap:
    if isinstance(data, str):
        data = json.loads(data)
    cells = [polygon_from_json(c["polygon"]) for c in data["cells"]]
    pieces = [piece_from_json(c) for c in data["cells"]]
    return PwlMap(tuple(cells), tuple(pieces))


# -- integer fast path ---------------------------------------------------

class LatticeStepper:
    """Evaluate an integer-piece map on points ``(X/D, Y/D)`` in pure ints.

    Every cell is stored as integer half-planes ``a*X + b*Y + c*D >= 0``,
    and every piece as integer matrix entries, so a step costs a handful of
    int multiplications.  Only valid for maps whose pieces are integer.
    """

    def __init__(self, S: PwlMap):
        if not all(P.is_integer() for P in S.pieces):
            raise ValueError("lattice stepping needs integer pieces")
        self.map = S
        self.cells = []
        for C in S.cells:
            hs = []
            for a, b, c in C.halfplanes():
                m = lcm(a.denominator, b.denominator, c.denominator)
                hs.append((int(a * m), int(b * m), int(c * m)))
            self.cells.append(hs)
        self.pieces = [
            tuple(int(t) for t in (P.a, P.b, P.c, P.d, P.e, P.f)) for P in S.pieces
        ]
        self.index = S._index

    def find(self, X: int, Y: int, D: int) -> tuple[int, bool]:
        """Cell index and whether the point is interior to it."""
        p = Point(Fraction(X, D), Fraction(Y, D))
        for k in self.index.at(p):
            vals = [a * X + b * Y + c * D for a, b, c in self.cells[k]]
            if min(vals) >= 0:
                return k, min(vals) > 0
        raise OutOfSquare(f"({X}/{D}, {Y}/{D}) not located")

    def step(self, X: int, Y: int, D: int) -> tuple[int, int]:
        k, _ = self.find(X, Y, D)
        a, b, c, d, e, f = self.pieces[k]
        return a * X + b * Y + e * D, c * X + d * Y + f * D
