"""Exact iteration of polylines under B_lm, crossing diagnostics, SVG output."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from .cone import PARALLELOGRAMS
from .errors import BudgetExceeded
from .geom import Point, Polygon, fmt_q
from .gens import FamilyParams, R2_squared, build_R1
from .pwl import PwlMap, inverse

from gmpy2 import mpq

_ZERO, _ONE = mpq(0), mpq(1)

DEFAULT_VERTEX_CAP = 200_000


@dataclass(frozen=True)
class LeafSegment:
    points: tuple[Point, ...]
    orientation: str = "unstable"

    def __post_init__(self):
        pts = tuple(Point(Fraction(p[0]), Fraction(p[1])) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a leaf needs at least two points")
        if any(a == b for a, b in zip(pts, pts[1:])):
            raise ValueError("consecutive points must be distinct")
        object.__setattr__(self, "points", pts)

    def length(self) -> float:
        return sum(math.hypot(float(b.x - a.x), float(b.y - a.y)) for a, b in zip(self.points, self.points[1:]))

    def __len__(self):
        return len(self.points)


def _clip_segment(hps, a, b):
    """Parameter interval [t0, t1] of a + t(b - a) inside the cell, if of positive length."""
    t0, t1 = _ZERO, _ONE
    dx, dy = b[0] - a[0], b[1] - a[1]
    for ha, hb, hc in hps:
        va = ha * a[0] + hb * a[1] + hc
        dv = ha * dx + hb * dy
        if dv == 0:
            if va < 0:
                return None
            continue
        t = -va / dv
        if dv > 0:
            if t > t0:
                t0 = t
        elif t < t1:
            t1 = t
        if t0 >= t1:
            return None
    return t0, t1


def _inside(hps, p) -> bool:
    return all(ha * p[0] + hb * p[1] + hc >= 0 for ha, hb, hc in hps)


class _MapTable:
    """mpq copies of a map's half-planes and pieces."""

    def __init__(self, S: PwlMap):
        self.index = S._index
        self.hps = [[(mpq(a), mpq(b), mpq(c)) for a, b, c in C.halfplanes()] for C in S.cells]
        self.pieces = [tuple(mpq(t) for t in (P.a, P.b, P.c, P.d, P.e, P.f)) for P in S.pieces]

    def apply(self, k, p):
        a, b, c, d, e, f = self.pieces[k]
        return (a * p[0] + b * p[1] + e, c * p[0] + d * p[1] + f)


@lru_cache(maxsize=None)
def _table_for(S: PwlMap) -> _MapTable:
    return _MapTable(S)


def _push(T: _MapTable, pts: list, cap: int) -> list:
    out: list = []
    for a, b in zip(pts, pts[1:]):
        # a cell holding both endpoints holds the whole segment (convexity)
        home = None
        for k in T.index.candidates((a[0], a[1], a[0], a[1])):
            if _inside(T.hps[k], a) and _inside(T.hps[k], b):
                home = k
                break
        if home is not None:
            for q in (T.apply(home, a), T.apply(home, b)):
                if not out or out[-1] != q:
                    out.append(q)
            continue
        box = (min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1]))
        pieces = []
        for k in T.index.candidates(box):
            iv = _clip_segment(T.hps[k], a, b)
            if iv is not None:
                pieces.append((iv[0], iv[1], k))
        pieces.sort()
        t_reached = _ZERO
        for t0, t1, k in pieces:
            if t1 <= t_reached:
                continue
            t0 = max(t0, t_reached)
            for t in (t0, t1):
                q = T.apply(k, (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                if not out or out[-1] != q:
                    out.append(q)
            t_reached = t1
        if len(out) > cap:
            raise BudgetExceeded(f"polyline exceeds {cap} vertices")
    return _drop_collinear(out)


def _to_mpq(pts) -> list:
    return [(mpq(p[0]), mpq(p[1])) for p in pts]


def _to_points(pts) -> tuple[Point, ...]:
    return tuple(Point(Fraction(int(x.numerator), int(x.denominator)), Fraction(int(y.numerator), int(y.denominator)))
                 for x, y in pts)


def push_polyline(S: PwlMap, pts, cap: int = DEFAULT_VERTEX_CAP) -> list[Point]:
    """Image of a polyline, split at every cell wall so it stays exact."""
    return list(_to_points(_push(_table_for(S), _to_mpq(pts), cap)))


def _drop_collinear(pts: list) -> list:
    out: list = []
    for p in pts:
        if out and out[-1] == p:
            continue
        while len(out) >= 2:
            a, b = out[-2], out[-1]
            cr = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            dot = (b[0] - a[0]) * (p[0] - b[0]) + (b[1] - a[1]) * (p[1] - b[1])
            if cr == 0 and dot > 0:
                out.pop()
            else:
                break
        out.append(p)
    return out


@lru_cache(maxsize=None)
def _inverse_maps():
    return inverse(build_R1()), inverse(R2_squared())


def b_schedule(params: FamilyParams, direction: str = "forward") -> list[PwlMap]:
    if direction == "forward":
        return [build_R1()] * (3 * params.l) + [R2_squared()] * (2 * params.m)
    if direction == "backward":
        R1i, R2i = _inverse_maps()
        return [R2i] * (2 * params.m) + [R1i] * (3 * params.l)
    raise ValueError("direction must be 'forward' or 'backward'")


def leaf_iterate(params: FamilyParams, seed: LeafSegment, k: int, direction: str = "forward",
                 cap: int = DEFAULT_VERTEX_CAP, keep_all: bool = False):
    """B^k (or B^-k) of the seed polyline.  With ``keep_all`` returns every iterate."""
    pts = _to_mpq(seed.points)
    tables = [_table_for(S) for S in b_schedule(params, direction)]
    history = [seed]
    for i in range(k):
        for T in tables:
            pts = _push(T, pts, cap)
        if keep_all or i == k - 1:
            history.append(LeafSegment(_to_points(pts), seed.orientation))
    return history if keep_all else history[-1]


# -- crossing diagnostics --------------------------------------------------

def parallelogram_sides(name: str):
    """(horizontal sides, vertical sides) of one of the four parallelograms.

    Horizontal sides lie on level curves of the N-radius (the boundary of E
    and the inner square), vertical sides on level curves of the M-radius
    (the lines x + y = 3/4, 1, 5/4).
    """
    P = PARALLELOGRAMS[name]
    horiz, vert = [], []
    for a, b in P.edges():
        if (a.x + a.y) == (b.x + b.y):
            vert.append((a, b))
        else:
            horiz.append((a, b))
    return horiz, vert


def _on_side(p, side) -> bool:
    a, b = side
    cr = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if cr != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _components(hps, pts: list):
    """Maximal connected pieces of the polyline inside a convex cell."""
    comps: list[list] = []
    cur: list = []
    for a, b in zip(pts, pts[1:]):
        iv = _clip_segment(hps, a, b)
        if iv is None:
            if cur:
                comps.append(cur)
                cur = []
            continue
        t0, t1 = iv
        s = (a[0] + t0 * (b[0] - a[0]), a[1] + t0 * (b[1] - a[1]))
        e = (a[0] + t1 * (b[0] - a[0]), a[1] + t1 * (b[1] - a[1]))
        if cur and cur[-1] == s:
            cur.append(e)
        else:
            if cur:
                comps.append(cur)
            cur = [s, e]
        if t1 < 1:
            comps.append(cur)
            cur = []
    if cur:
        comps.append(cur)
    return comps


def _connects(comp: list, sides) -> bool:
    s1, s2 = sides
    return any(_on_side(p, s1) for p in comp) and any(_on_side(p, s2) for p in comp)


def crossing_report(leaf: LeafSegment) -> dict:
    """Which parallelograms the polyline crosses horizontally / vertically."""
    pts = _to_mpq(leaf.points)
    out = {}
    for name, P in PARALLELOGRAMS.items():
        horiz, vert = parallelogram_sides(name)
        horiz = [tuple(_to_mpq(side)) for side in horiz]
        vert = [tuple(_to_mpq(side)) for side in vert]
        hps = [(mpq(a), mpq(b), mpq(c)) for a, b, c in P.halfplanes()]
        comps = _components(hps, pts)
        out[name] = {
            "horizontal": any(_connects(c, vert) for c in comps),
            "vertical": any(_connects(c, horiz) for c in comps),
            "components": len(comps),
        }
    return out


def horizontal_seed(name: str, s: Fraction, t: Fraction) -> LeafSegment:
    """Straight segment joining the two vertical sides of a parallelogram
    at fractions s and t along them."""
    _, (v1, v2) = parallelogram_sides(name)
    a = Point(v1[0].x + s * (v1[1].x - v1[0].x), v1[0].y + s * (v1[1].y - v1[0].y))
    b = Point(v2[0].x + t * (v2[1].x - v2[0].x), v2[0].y + t * (v2[1].y - v2[0].y))
    return LeafSegment((a, b), "unstable")


def propagation_check(params: FamilyParams, seeds: Iterable[LeafSegment], ks=(2, 3, 4)) -> dict:
    """For each horizontal seed, is B^k of it horizontal in all four P_i?"""
    rows = []
    ok = True
    kmax = max(ks)
    for seed in seeds:
        hist = leaf_iterate(params, seed, kmax, keep_all=True)
        res = {}
        for k in ks:
            rep = crossing_report(hist[k])
            allh = all(v["horizontal"] for v in rep.values())
            res[str(k)] = {"all_horizontal": allh, "vertices": len(hist[k])}
            ok = ok and allh
        rows.append({"seed": [[fmt_q(p.x), fmt_q(p.y)] for p in seed.points], "iterates": res})
    return {"passed": ok, "seeds": rows}


def unstable_seed(q: Point, length: Fraction, params: FamilyParams) -> LeafSegment:
    """Short segment centred at q along the middle ray of the cone at q."""
    from .cone import cone_field_at

    U = cone_field_at(q, params.l, params.m)
    du = math.hypot(float(U.u[0]), float(U.u[1]))
    dv = math.hypot(float(U.v[0]), float(U.v[1]))
    # rational bisector approximation: sum of the two directions scaled to similar length
    su = Fraction(1) / Fraction(du).limit_denominator(10**6)
    sv = Fraction(1) / Fraction(dv).limit_denominator(10**6)
    d = (U.u[0] * su + U.v[0] * sv, U.u[1] * su + U.v[1] * sv)
    n = Fraction(math.hypot(float(d[0]), float(d[1]))).limit_denominator(10**6)
    h = length / (2 * n)
    a = Point(q.x - h * d[0], q.y - h * d[1])
    b = Point(q.x + h * d[0], q.y + h * d[1])
    return LeafSegment((a, b), "unstable")


def render_svg(leaves: Iterable[LeafSegment], size: int = 800, stroke: float = 0.002,
               show_parallelograms: bool = True) -> str:
    """SVG with viewBox [0,1]^2 and y pointing up."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 1 1">',
        '<g transform="translate(0,1) scale(1,-1)">',
        f'<rect x="0" y="0" width="1" height="1" fill="white" stroke="black" stroke-width="{stroke}"/>',
    ]
    if show_parallelograms:
        for P in PARALLELOGRAMS.values():
            pts = " ".join(f"{float(v.x):.6f},{float(v.y):.6f}" for v in P.vertices)
            parts.append(f'<polygon points="{pts}" fill="none" stroke="#999" stroke-width="{stroke}"/>')
    for leaf in leaves:
        color = "#c03" if leaf.orientation == "unstable" else "#03c"
        pts = " ".join(f"{float(p.x):.6f},{float(p.y):.6f}" for p in leaf.points)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{stroke}"/>')
    parts.append("</g></svg>")
    return "\n".join(parts)
