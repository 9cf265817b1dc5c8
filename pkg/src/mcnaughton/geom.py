"""Exact rational geometry on the unit square.

Scalars are :class:`fractions.Fraction`; nothing in this module ever rounds.
Polygons are convex, stored counterclockwise starting from the
lexicographically least vertex, and may be degenerate (a segment or a
point).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import DegenerateSource, ZeroDimensional

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def Q(value) -> Fraction:
    """Coerce ints, Fractions and ``"n/d"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact geometry")
    return Fraction(value)


class Point(NamedTuple):
    x: Fraction
    y: Fraction

    def __sub__(self, other):
        return Point(self.x - other.x, self.y - other.y)

    def __add__(self, other):
        return Point(self.x + other.x, self.y + other.y)

    def scale(self, s) -> "Point":
        return Point(self.x * s, self.y * s)

    def in_square(self) -> bool:
        return 0 <= self.x <= 1 and 0 <= self.y <= 1


def pt(x, y) -> Point:
    return Point(Q(x), Q(y))


def cross(o: Point, a: Point, b: Point) -> Fraction:
    """Twice the signed area of the triangle ``o, a, b``."""
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def denominator(p: Point) -> int:
    """Least d >= 1 with d*x, d*y integers (then d*x, d*y, d are coprime)."""
    return lcm(p.x.denominator, p.y.denominator)


def _hull(points: Iterable[Point]) -> list[Point]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


@dataclass(frozen=True)
class Polygon:
    """Convex hull of finitely many rational points (dim 0, 1 or 2)."""

    vertices: tuple[Point, ...]

    @classmethod
    def of(cls, *points) -> "Polygon":
        """Build from points given as Point or (x, y) pairs."""
        return cls.hull(pt(*p) if not isinstance(p, Point) else p for p in points)

    @classmethod
    def hull(cls, points: Iterable[Point]) -> "Polygon":
        h = _hull(points)
        if not h:
            raise ValueError("empty point set")
        return cls(tuple(h))

    @property
    def dim(self) -> int:
        return min(len(self.vertices) - 1, 2)

    def __len__(self):
        return len(self.vertices)

    def edges(self) -> list[tuple[Point, Point]]:
        v = self.vertices
        if len(v) < 3:
            return [(v[0], v[-1])] if len(v) == 2 else []
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def halfplanes(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        """Triples (a, b, c) with the polygon equal to {a*x + b*y + c >= 0}."""
        if self.dim < 2:
            raise ZeroDimensional("half-plane form needs a 2-cell")
        out = []
        for p, q in self.edges():
            a = -(q.y - p.y)
            b = q.x - p.x
            out.append((a, b, -(a * p.x + b * p.y)))
        return out

    def bbox(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def area(self) -> Fraction:
        v = self.vertices
        if len(v) < 3:
            return ZERO
        s = ZERO
        for i in range(len(v)):
            p, q = v[i], v[(i + 1) % len(v)]
            s += p.x * q.y - q.x * p.y
        return s / 2

    def contains(self, p: Point) -> bool:
        """Closed membership test."""
        v = self.vertices
        if len(v) == 1:
            return p == v[0]
        if len(v) == 2:
            return _on_segment(p, v[0], v[1])
        return all(cross(a, b, p) >= 0 for a, b in self.edges())

    def contains_interior(self, p: Point) -> bool:
        if self.dim < 2:
            return False
        return all(cross(a, b, p) > 0 for a, b in self.edges())

    def is_face(self, other: "Polygon") -> bool:
        """True if ``other`` is a vertex, an edge, or all of this polygon."""
        if other == self:
            return True
        if other.dim == 0:
            return other.vertices[0] in self.vertices
        if other.dim == 1 and self.dim == 2:
            a, b = other.vertices
            return any({a, b} == {p, q} for p, q in self.edges())
        return False

    def map(self, piece: "AffinePiece") -> "Polygon":
        return Polygon.hull(piece(v) for v in self.vertices)

    def __str__(self):
        return "<" + ", ".join(fmt_point(v) for v in self.vertices) + ">"


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    if cross(a, b, p) != 0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


UNIT_SQUARE = Polygon.of((0, 0), (1, 0), (1, 1), (0, 1))


def clip(points: Sequence[Point], a, b, c) -> list[Point]:
    """Clip a convex vertex cycle to the closed half-plane a*x + b*y + c >= 0."""
    if not points:
        return []
    vals = [a * p.x + b * p.y + c for p in points]
    if all(v >= 0 for v in vals):
        return list(points)
    if all(v < 0 for v in vals):
        return []
    out: list[Point] = []
    n = len(points)
    for i in range(n):
        p, vp = points[i], vals[i]
        q, vq = points[(i + 1) % n], vals[(i + 1) % n]
        if vp >= 0:
            out.append(p)
        if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
            s = vp / (vp - vq)
            out.append(Point(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)))
    return out


def clip_polygon(poly: Polygon, halfplanes) -> Optional[Polygon]:
    pts = list(poly.vertices)
    for a, b, c in halfplanes:
        pts = clip(pts, a, b, c)
        if not pts:
            return None
    return Polygon.hull(pts)


def polygon_intersect(P: Polygon, Q_: Polygon) -> Optional[Polygon]:
    """Exact intersection of two convex polygons; ``None`` when empty."""
    if P.dim < Q_.dim:
        P, Q_ = Q_, P
    px0, py0, px1, py1 = P.bbox()
    qx0, qy0, qx1, qy1 = Q_.bbox()
    if px1 < qx0 or qx1 < px0 or py1 < qy0 or qy1 < py0:
        return None
    if P.dim == 2:
        return clip_polygon(Q_, P.halfplanes())
    if Q_.dim == 0:
        return Q_ if P.contains(Q_.vertices[0]) else None
    if P.dim == 0:
        return P if P == Q_ else None
    # two segments
    a, b = P.vertices
    c, d = Q_.vertices
    if cross(a, b, c) == 0 and cross(a, b, d) == 0:
        pts = [p for p in (a, b) if _on_segment(p, c, d)] + [p for p in (c, d) if _on_segment(p, a, b)]
        return Polygon.hull(pts) if pts else None
    denom = (b.x - a.x) * (d.y - c.y) - (b.y - a.y) * (d.x - c.x)
    if denom == 0:
        return None
    s = ((c.x - a.x) * (d.y - c.y) - (c.y - a.y) * (d.x - c.x)) / denom
    t = ((c.x - a.x) * (b.y - a.y) - (c.y - a.y) * (b.x - a.x)) / denom
    if 0 <= s <= 1 and 0 <= t <= 1:
        return Polygon((Point(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)),))
    return None


def polygon_measures(P: Polygon, F=None):
    """Return ``(area, centroid, integral)`` of a 2-cell.

    ``F`` is an optional affine functional ``(a, b, c)`` meaning
    ``a*x + b*y + c``; its integral is exact because an affine function
    integrates to its centroid value times the area.
    """
    if P.dim < 2:
        raise ZeroDimensional(f"polygon {P} has dimension {P.dim}")
    v = P.vertices
    A2 = ZERO
    cx = ZERO
    cy = ZERO
    for i in range(len(v)):
        p, q = v[i], v[(i + 1) % len(v)]
        w = p.x * q.y - q.x * p.y
        A2 += w
        cx += (p.x + q.x) * w
        cy += (p.y + q.y) * w
    area = A2 / 2
    centroid = Point(cx / (3 * A2), cy / (3 * A2))
    integral = None
    if F is not None:
        a, b, c = (Q(t) for t in F)
        integral = (a * centroid.x + b * centroid.y + c) * area
    return area, centroid, integral


@dataclass(frozen=True)
class AffinePiece:
    """The map (x, y) -> (a*x + b*y + e, c*x + d*y + f)."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    e: Fraction = ZERO
    f: Fraction = ZERO

    @classmethod
    def make(cls, linear, translate=(0, 0)) -> "AffinePiece":
        (a, b), (c, d) = linear
        return cls(Q(a), Q(b), Q(c), Q(d), Q(translate[0]), Q(translate[1]))

    @property
    def linear(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def translate(self):
        return (self.e, self.f)

    def __call__(self, p: Point) -> Point:
        return Point(self.a * p.x + self.b * p.y + self.e, self.c * p.x + self.d * p.y + self.f)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def then(self, other: "AffinePiece") -> "AffinePiece":
        """The composite ``other o self`` (apply self first)."""
        o = other
        return AffinePiece(
            o.a * self.a + o.b * self.c,
            o.a * self.b + o.b * self.d,
            o.c * self.a + o.d * self.c,
            o.c * self.b + o.d * self.d,
            o.a * self.e + o.b * self.f + o.e,
            o.c * self.e + o.d * self.f + o.f,
        )

    def inverse(self) -> "AffinePiece":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular affine piece")
        a, b, c, d = self.d / det, -self.b / det, -self.c / det, self.a / det
        return AffinePiece(a, b, c, d, -(a * self.e + b * self.f), -(c * self.e + d * self.f))

    def is_integer(self) -> bool:
        return all(t.denominator == 1 for t in (self.a, self.b, self.c, self.d, self.e, self.f))

    def is_unimodular(self) -> bool:
        return self.is_integer() and abs(self.det()) == 1

    def homogeneous(self):
        return ((self.a, self.b, self.e), (self.c, self.d, self.f), (ZERO, ZERO, ONE))

    def pull_halfplane(self, a, b, c):
        """Half-plane {u : a*u.x + b*u.y + c >= 0} pulled back through self."""
        return (
            a * self.a + b * self.c,
            a * self.b + b * self.d,
            a * self.e + b * self.f + c,
        )


IDENTITY = AffinePiece(ONE, ZERO, ZERO, ONE)


def affine_from_triples(src: Sequence[Point], dst: Sequence[Point]) -> AffinePiece:
    """The unique affine map sending ``src[i]`` to ``dst[i]`` for i = 0, 1, 2."""
    s0, s1, s2 = src
    d0, d1, d2 = dst
    det = cross(s0, s1, s2)
    if det == 0:
        raise DegenerateSource("source points are collinear")
    u1, u2 = s1 - s0, s2 - s0
    v1, v2 = d1 - d0, d2 - d0
    # Solve L [u1 u2] = [v1 v2].
    inv = ((u2.y / det, -u2.x / det), (-u1.y / det, u1.x / det))
    a = v1.x * inv[0][0] + v2.x * inv[1][0]
    b = v1.x * inv[0][1] + v2.x * inv[1][1]
    c = v1.y * inv[0][0] + v2.y * inv[1][0]
    d = v1.y * inv[0][1] + v2.y * inv[1][1]
    e = d0.x - a * s0.x - b * s0.y
    f = d0.y - c * s0.x - d * s0.y
    return AffinePiece(a, b, c, d, e, f)


# -- serialization -------------------------------------------------------

def fmt_q(q: Fraction) -> str:
    q = Q(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_q(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s).strip())


def fmt_point(p: Point) -> str:
    return f"[{fmt_q(p.x)}, {fmt_q(p.y)}]"


def parse_point(s) -> Point:
    if isinstance(s, (list, tuple)):
        return Point(parse_q(s[0]), parse_q(s[1]))
    body = s.strip().lstrip("[").rstrip("]")
    x, y = body.split(",")
    return Point(parse_q(x), parse_q(y))


def polygon_to_json(P: Polygon) -> list[str]:
    return [fmt_point(v) for v in P.vertices]


def polygon_from_json(data) -> Polygon:
    return Polygon.hull(parse_point(v) for v in data)


def piece_to_json(A: AffinePiece) -> dict:
    return {
        "linear": [[fmt_q(A.a), fmt_q(A.b)], [fmt_q(A.c), fmt_q(A.d)]],
        "translate": [fmt_q(A.e), fmt_q(A.f)],
    }


def piece_from_json(data) -> AffinePiece:
    (a, b), (c, d) = data["linear"]
    e, f = data["translate"]
    return AffinePiece(*(parse_q(t) for t in (a, b, c, d, e, f)))


# -- complexes -------------------------------------------------------------

def face_violations(cells: Sequence[Polygon]) -> list[dict]:
    """Check the rational-complex conditions on a list of 2-cells.

    Returns a list of violation records; an empty list means the cells form
    a complex over the unit square (faces are implied by the 2-cells).
    """
    out: list[dict] = []
    total = ZERO
    for i, C in enumerate(cells):
        if C.dim != 2:
            out.append({"kind": "degenerate-cell", "cells": [i]})
            continue
        if not all(v.in_square() for v in C.vertices):
            out.append({"kind": "outside-square", "cells": [i]})
        total += C.area()
    if total != 1:
        out.append({"kind": "area", "total": fmt_q(total)})
    for i, j, I in intersecting_pairs(cells):
        if I.dim == 2:
            out.append({"kind": "overlap", "cells": [i, j]})
        elif not (cells[i].is_face(I) and cells[j].is_face(I)):
            out.append({"kind": "not-a-common-face", "cells": [i, j], "intersection": polygon_to_json(I)})
    return out


class BucketIndex:
    """Uniform grid of buckets over the square holding polygon indices."""

    def __init__(self, polys: Sequence[Polygon], n: Optional[int] = None):
        if n is None:
            n = max(1, min(64, int(len(polys) ** 0.5) + 1))
        self.n = n
        self.buckets: dict[tuple[int, int], list[int]] = {}
        for k, P in enumerate(polys):
            for key in self._keys(P.bbox()):
                self.buckets.setdefault(key, []).append(k)

    def _range(self, lo, hi):
        n = self.n
        i0 = max(0, min(n - 1, int(lo * n)))
        i1 = max(0, min(n - 1, int(hi * n)))
        # points on a bucket boundary belong to both neighbours
        if i0 > 0 and lo * n == i0:
            i0 -= 1
        return range(i0, i1 + 1)

    def _keys(self, box):
        x0, y0, x1, y1 = box
        return [(i, j) for i in self._range(x0, x1) for j in self._range(y0, y1)]

    def candidates(self, box) -> list[int]:
        seen: set[int] = set()
        for key in self._keys(box):
            seen.update(self.buckets.get(key, ()))
        return sorted(seen)

    def at(self, p: Point) -> list[int]:
        return self.candidates((p.x, p.y, p.x, p.y))


def intersecting_pairs(cells: Sequence[Polygon]):
    """Yield ``(i, j, intersection)`` for i < j with non-empty intersection."""
    index = BucketIndex(cells)
    for i, C in enumerate(cells):
        for j in index.candidates(C.bbox()):
            if j <= i:
                continue
            I = polygon_intersect(C, cells[j])
            if I is not None:
                yield i, j, I


def merge_cells(cells: list[Polygon], keys: list) -> tuple[list[Polygon], list]:
    """Greedily merge adjacent cells carrying equal keys when the union is convex."""
    groups: dict = {}
    for C, k in zip(cells, keys):
        groups.setdefault(k, []).append(C)
    out_cells: list[Polygon] = []
    out_keys: list = []
    for k, polys in groups.items():
        polys = list(polys)
        changed = True
        while changed and len(polys) > 1:
            changed = False
            edge_owner: dict = {}
            for idx, P in enumerate(polys):
                for a, b in P.edges():
                    key = (a, b) if a < b else (b, a)
                    if key in edge_owner and edge_owner[key] != idx:
                        j = edge_owner[key]
                        U = Polygon.hull(P.vertices + polys[j].vertices)
                        if U.area() == P.area() + polys[j].area():
                            polys[j] = U
                            polys.pop(idx)
                            changed = True
                            break
                    edge_owner[key] = idx
                if changed:
                    break
        out_cells.extend(polys)
        out_keys.extend([k] * len(polys))
    return out_cells, out_keys


def conform(cells: list[Polygon], keys: list) -> tuple[list[Polygon], list]:
    """Remove T-junctions by fan-triangulating cells that have vertices of
    other cells in the relative interior of their edges."""
    verts = sorted({v for C in cells for v in C.vertices})
    vpolys = [Polygon((v,)) for v in verts]
    vindex = BucketIndex(vpolys, n=max(1, min(128, int(len(verts) ** 0.5) + 1)))
    out_cells: list[Polygon] = []
    out_keys: list = []
    for C, k in zip(cells, keys):
        own = set(C.vertices)
        boundary: list[Point] = []
        extra = False
        for a, b in C.edges():
            boundary.append(a)
            box = (min(a.x, b.x), min(a.y, b.y), max(a.x, b.x), max(a.y, b.y))
            inner = []
            for vi in vindex.candidates(box):
                v = verts[vi]
                if v not in own and _on_segment(v, a, b):
                    inner.append(v)
            if inner:
                extra = True
                inner.sort(key=lambda v: (v.x - a.x) ** 2 + (v.y - a.y) ** 2)
                boundary.extend(inner)
        if not extra:
            out_cells.append(C)
            out_keys.append(k)
            continue
        for T in fan_triangulate(boundary, own):
            out_cells.append(T)
            out_keys.append(k)
    return out_cells, out_keys


def fan_triangulate(boundary: list[Point], corners=None) -> list[Polygon]:
    """Triangulate a convex cycle whose boundary carries extra collinear
    points, keeping every boundary point as a vertex.

    Fans from a corner whose two edges carry no extra points when there is
    one (no new vertex); otherwise from the mean of the boundary points,
    which lies strictly inside.
    """
    n = len(boundary)
    if corners:
        for i in range(n):
            prev, cur, nxt = boundary[i - 1], boundary[i], boundary[(i + 1) % n]
            if cur in corners and prev in corners and nxt in corners:
                return [Polygon.hull((cur, boundary[(i + j) % n], boundary[(i + j + 1) % n])) for j in range(1, n - 1)]
    apex = Point(sum(p.x for p in boundary) / n, sum(p.y for p in boundary) / n)
    return [Polygon.hull((apex, boundary[i], boundary[(i + 1) % n])) for i in range(n)]
