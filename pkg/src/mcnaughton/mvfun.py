"""McNaughton functions on the square, the MV operations, and the state m.

A function is stored as the 2-cells of a rational complex and, per cell,
an affine functional ``(a, b, c)`` meaning ``a*x + b*y + c``.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import BadIndex, InvalidMap, NotDenseSupport
from .geom import (
    ONE,
    UNIT_SQUARE,
    ZERO,
    BucketIndex,
    Point,
    Polygon,
    clip_polygon,
    conform,
    face_violations,
    fmt_q,
    intersecting_pairs,
    merge_cells,
    parse_q,
    polygon_from_json,
    polygon_intersect,
    polygon_measures,
    polygon_to_json,
)
from .pwl import PwlMap, refine_through, validate as validate_map

Functional = tuple  # (a, b, c)


def fval(F: Functional, p: Point) -> Fraction:
    return F[0] * p.x + F[1] * p.y + F[2]


@dataclass(frozen=True, eq=False)
class PwlFunction:
    cells: tuple[Polygon, ...]
    functionals: tuple[Functional, ...]
    _index: Optional[BucketIndex] = field(default=None, repr=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(self, "_index", BucketIndex(self.cells))

    def __len__(self):
        return len(self.cells)

    def __call__(self, p: Point) -> Fraction:
        for k in self._index.at(p):
            if self.cells[k].contains(p):
                return fval(self.functionals[k], p)
        raise ValueError(f"{p} is not in the square")

    @property
    def is_mcnaughton(self) -> bool:
        return all(all(t.denominator == 1 for t in F) for F in self.functionals)

    def validate(self) -> list[dict]:
        out = face_violations(self.cells)
        for k, (C, F) in enumerate(zip(self.cells, self.functionals)):
            if any(not 0 <= fval(F, v) <= 1 for v in C.vertices):
                out.append({"kind": "value-out-of-range", "cells": [k]})
        for i, j, I in intersecting_pairs(self.cells):
            if I.dim < 2 and any(fval(self.functionals[i], v) != fval(self.functionals[j], v) for v in I.vertices):
                out.append({"kind": "discontinuity", "cells": [i, j]})
        return out


def _make(cells, functionals, merge=True) -> PwlFunction:
    functionals = [tuple(F) for F in functionals]
    if merge:
        cells, functionals = merge_cells(list(cells), functionals)
    cells, functionals = conform(list(cells), list(functionals))
    return PwlFunction(tuple(cells), tuple(functionals))


def constant(c) -> PwlFunction:
    return PwlFunction((UNIT_SQUARE,), ((ZERO, ZERO, Fraction(c)),))


def projection(i: int) -> PwlFunction:
    if i == 1:
        F = (ONE, ZERO, ZERO)
    elif i == 2:
        F = (ZERO, ONE, ZERO)
    else:
        raise BadIndex(f"projection index must be 1 or 2, got {i}")
    return PwlFunction((UNIT_SQUARE,), (F,))


def affine(a, b, c) -> PwlFunction:
    """Single-piece function; caller guarantees values stay in [0, 1]."""
    return PwlFunction((UNIT_SQUARE,), ((Fraction(a), Fraction(b), Fraction(c)),))


def common_refinement(f: PwlFunction, g: PwlFunction):
    """Yield ``(cell, F, G)`` over the 2-dim intersections of the two complexes."""
    for i, C in enumerate(f.cells):
        for j in g._index.candidates(C.bbox()):
            I = polygon_intersect(C, g.cells[j])
            if I is not None and I.dim == 2:
                yield I, f.functionals[i], g.functionals[j]


def _split(C: Polygon, h: Functional):
    """Parts of C where h >= 0 and h <= 0 (2-dim parts only).

    A cell on which h keeps one sign goes to one side only, so an h that
    vanishes on C does not duplicate it.
    """
    vals = [fval(h, v) for v in C.vertices]
    if all(v >= 0 for v in vals):
        return C, None
    if all(v <= 0 for v in vals):
        return None, C
    pos = clip_polygon(C, [h])
    neg = clip_polygon(C, [(-h[0], -h[1], -h[2])])
    return (pos if pos is not None and pos.dim == 2 else None,
            neg if neg is not None and neg.dim == 2 else None)


def _sub(F, G):
    return (F[0] - G[0], F[1] - G[1], F[2] - G[2])


def mv_oplus(f: PwlFunction, g: PwlFunction) -> PwlFunction:
    cells, funcs = [], []
    for C, F, G in common_refinement(f, g):
        S = (F[0] + G[0], F[1] + G[1], F[2] + G[2])
        hi, lo = _split(C, (S[0], S[1], S[2] - 1))
        if hi is not None:
            cells.append(hi)
            funcs.append((ZERO, ZERO, ONE))
        if lo is not None:
            cells.append(lo)
            funcs.append(S)
    return _make(cells, funcs)


def mv_neg(f: PwlFunction) -> PwlFunction:
    return PwlFunction(f.cells, tuple((-a, -b, 1 - c) for a, b, c in f.functionals), f._index)


def _lattice(f: PwlFunction, g: PwlFunction, take_max: bool) -> PwlFunction:
    cells, funcs = [], []
    for C, F, G in common_refinement(f, g):
        ge, le = _split(C, _sub(F, G))
        if ge is not None:
            cells.append(ge)
            funcs.append(F if take_max else G)
        if le is not None:
            cells.append(le)
            funcs.append(G if take_max else F)
    return _make(cells, funcs)


def mv_meet(f: PwlFunction, g: PwlFunction) -> PwlFunction:
    return _lattice(f, g, take_max=False)


def mv_join(f: PwlFunction, g: PwlFunction) -> PwlFunction:
    return _lattice(f, g, take_max=True)


def mv_odot(f: PwlFunction, g: PwlFunction) -> PwlFunction:
    return mv_neg(mv_oplus(mv_neg(f), mv_neg(g)))


def functions_equal(f: PwlFunction, g: PwlFunction) -> bool:
    """Exact equality as functions: the functionals agree on every common 2-cell."""
    return all(F == G for _, F, G in common_refinement(f, g))


def mv_axioms(f: PwlFunction, g: PwlFunction) -> dict[str, bool]:
    """The three defining identities, checked exactly for the pair (f, g)."""
    zero = constant(0)
    top = mv_neg(zero)
    return {
        "double_negation": functions_equal(mv_neg(mv_neg(f)), f),
        "absorbing_top": functions_equal(mv_oplus(f, top), top),
        "lukasiewicz": functions_equal(mv_oplus(mv_neg(mv_oplus(mv_neg(f), g)), g),
                                       mv_oplus(mv_neg(mv_oplus(mv_neg(g), f)), f)),
    }


def random_function(rng: random.Random, depth: int = 3) -> PwlFunction:
    """Random function built from projections, rational constants and simple
    affine leaves by the MV operations (not necessarily McNaughton)."""
    if depth == 0 or rng.random() < 0.2:
        kind = rng.randrange(5)
        if kind == 0:
            return projection(rng.choice((1, 2)))
        if kind == 1:
            return constant(Fraction(rng.randint(0, 6), 6))
        if kind == 2:
            return affine(Fraction(rng.randint(0, 2), 2), 0, 0) if rng.random() < 0.5 else affine(0, Fraction(rng.randint(0, 2), 2), 0)
        if kind == 3:
            return affine(Fraction(1, 2), Fraction(1, 2), 0)
        return affine(-1, 0, 1) if rng.random() < 0.5 else affine(0, -1, 1)
    op = rng.randrange(5)
    a = random_function(rng, depth - 1)
    if op == 0:
        return mv_neg(a)
    b = random_function(rng, depth - 1)
    return (mv_oplus, mv_odot, mv_meet, mv_join)[op - 1](a, b)


def integrate(f: PwlFunction, region: Optional[Polygon] = None) -> Fraction:
    """Exact Lebesgue integral over the square, or over a convex region."""
    total = ZERO
    for C, F in zip(f.cells, f.functionals):
        if region is not None:
            C = polygon_intersect(C, region)
            if C is None or C.dim < 2:
                continue
        total += polygon_measures(C, F)[2]
    return total


def pullback(f: PwlFunction, S: PwlMap, check: bool = False) -> PwlFunction:
    """The composite f o S."""
    if check:
        v = validate_map(S)
        if v:
            raise InvalidMap("map fails validation", v)
    cells, funcs = [], []
    for k, j, R in refine_through(S, f.cells):
        P = S.pieces[k]
        a, b, c = f.functionals[j]
        cells.append(R)
        funcs.append((a * P.a + b * P.c, a * P.b + b * P.d, a * P.e + b * P.f + c))
    return _make(cells, funcs)


def has_dense_support(f: PwlFunction) -> bool:
    """False iff f vanishes identically on some 2-cell.

    A nonnegative affine function vanishing on an open set vanishes on the
    whole cell, so checking vertices decides it exactly.
    """
    return not any(all(fval(F, v) == 0 for v in C.vertices) for C, F in zip(f.cells, f.functionals))


def b2_probe(f: PwlFunction, kmax: int) -> list[Fraction]:
    """m(f), m(f + f), ..., m(kmax-fold truncated sum)."""
    if not has_dense_support(f):
        raise NotDenseSupport("f vanishes on a 2-cell")
    out = []
    acc = f
    for k in range(1, kmax + 1):
        if k > 1:
            acc = mv_oplus(acc, f)
        out.append(integrate(acc))
    return out


def function_to_json(f: PwlFunction) -> dict:
    return {
        "cells": [
            {"polygon": polygon_to_json(C), "functional": [fmt_q(t) for t in F]}
            for C, F in zip(f.cells, f.functionals)
        ]
    }


def function_from_json(data) -> PwlFunction:
    if isinstance(data, str):
        data = json.loads(data)
    cells = tuple(polygon_from_json(c["polygon"]) for c in data["cells"])
    funcs = tuple(tuple(parse_q(t) for t in c["functional"]) for c in data["cells"])
    return PwlFunction(cells, funcs)
