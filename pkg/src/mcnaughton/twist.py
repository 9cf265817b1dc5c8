"""Polar models of R1^(3l) and R2^4: twist maps conjugated into the square.

Angles are normalized turns ``t = theta / 2pi`` kept in [0, 1).  Every
breakpoint of the parametrizations is rational in these units, so all
conjugacy checks below run in exact arithmetic.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import ZeroRadius
from .geom import ONE, ZERO, Point, Polygon, pt

THIRD = Fraction(1, 3)
QUARTER = Fraction(1, 4)
M_CENTER = Point(THIRD, THIRD)
N_CENTER = Point(Fraction(1, 2), Fraction(1, 2))


class PolarPoint(NamedTuple):
    r: Fraction
    t: Fraction


def polar(r, t) -> PolarPoint:
    return PolarPoint(Fraction(r), Fraction(t) % 1)


def twist_profiles(r) -> tuple[Fraction, Fraction]:
    """Values of the two twist profiles at radius ``r``."""
    r = Fraction(r)
    if r == 0:
        raise ZeroRadius("twist profiles are undefined at r = 0")
    f = min(ONE, (1 / r - 1) / 3)
    g = min(ONE, 1 / r - 1)
    return f, g


def eval_F(p: PolarPoint, l: int) -> PolarPoint:
    if p.r == 0:
        return p
    f, _ = twist_profiles(p.r)
    return PolarPoint(p.r, (p.t + l * f) % 1)


def eval_G(p: PolarPoint, m: int) -> PolarPoint:
    if p.r == 0:
        return p
    _, g = twist_profiles(p.r)
    return PolarPoint(p.r, (p.t - m * g) % 1)


def m_sector(t: Fraction) -> int:
    return 0 if t < THIRD else (1 if t < 2 * THIRD else 2)


def n_sector(t: Fraction) -> int:
    return int(t * 4)


def m_boundary(t: Fraction) -> Point:
    """Boundary point of the triangle L reached at turn t (r = 1)."""
    s = m_sector(t)
    if s == 0:
        return Point(1 - 3 * t, 3 * t)
    if s == 1:
        return Point(ZERO, 2 - 3 * t)
    return Point(3 * t - 2, ZERO)


def m_boundary_dt(t: Fraction) -> Point:
    return [Point(Fraction(-3), Fraction(3)), Point(ZERO, Fraction(-3)), Point(Fraction(3), ZERO)][m_sector(t)]


def n_boundary(t: Fraction) -> Point:
    """Offset from (1/2, 1/2) of the boundary of E at turn t (r = 1)."""
    s = n_sector(t)
    if s == 0:
        return Point(QUARTER, -QUARTER + 2 * t)
    if s == 1:
        return Point(Fraction(3, 4) - 2 * t, QUARTER)
    if s == 2:
        return Point(-QUARTER, Fraction(5, 4) - 2 * t)
    return Point(Fraction(-7, 4) + 2 * t, -QUARTER)


def n_boundary_dt(t: Fraction) -> Point:
    return [Point(ZERO, Fraction(2)), Point(Fraction(-2), ZERO), Point(ZERO, Fraction(-2)), Point(Fraction(2), ZERO)][n_sector(t)]


def eval_M(p: PolarPoint) -> Point:
    b = m_boundary(p.t % 1)
    return Point((1 - p.r) * M_CENTER.x + p.r * b.x, (1 - p.r) * M_CENTER.y + p.r * b.y)


def half_turn(q: Point) -> Point:
    return Point(1 - q.x, 1 - q.y)


def eval_Mp(p: PolarPoint) -> Point:
    return half_turn(eval_M(p))


def eval_N(p: PolarPoint) -> Point:
    b = n_boundary(p.t % 1)
    return Point(N_CENTER.x + p.r * b.x, N_CENTER.y + p.r * b.y)


def m_radius(q: Point) -> Fraction:
    """Radial coordinate of a point of L under M."""
    return max(3 * (q.x + q.y) - 2, 1 - 3 * q.x, 1 - 3 * q.y)


def n_radius(q: Point) -> Fraction:
    return 4 * max(abs(q.x - N_CENTER.x), abs(q.y - N_CENTER.y))


def M_inv(q: Point) -> PolarPoint:
    """Polar preimage of a point of L."""
    r = m_radius(q)
    if r == 0:
        return PolarPoint(ZERO, ZERO)
    bx = M_CENTER.x + (q.x - M_CENTER.x) / r
    by = M_CENTER.y + (q.y - M_CENTER.y) / r
    if bx + by == 1 and bx > 0:
        t = by / 3
    elif bx == 0 and by > 0:
        t = (2 - by) / 3
    else:
        t = (bx + 2) / 3
    return PolarPoint(r, t % 1)


def Mp_inv(q: Point) -> PolarPoint:
    return M_inv(half_turn(q))


def N_inv(q: Point) -> PolarPoint:
    r = n_radius(q)
    if r == 0:
        return PolarPoint(ZERO, ZERO)
    bx = (q.x - N_CENTER.x) / r
    by = (q.y - N_CENTER.y) / r
    if bx == QUARTER and by < QUARTER:
        t = (by + QUARTER) / 2
    elif by == QUARTER and bx > -QUARTER:
        t = (Fraction(3, 4) - bx) / 2
    elif bx == -QUARTER and by > -QUARTER:
        t = (Fraction(5, 4) - by) / 2
    else:
        t = (bx + Fraction(7, 4)) / 2
    return PolarPoint(r, t % 1)


# -- regions ---------------------------------------------------------------

L_TRIANGLE = Polygon.of((0, 0), (1, 0), (0, 1))
L_INNER = Polygon.of(("1/4", "1/4"), ("1/2", "1/4"), ("1/4", "1/2"))
E_SQUARE = Polygon.of(("1/4", "1/4"), ("3/4", "1/4"), ("3/4", "3/4"), ("1/4", "3/4"))
E_INNER = Polygon.of(("3/8", "3/8"), ("5/8", "3/8"), ("5/8", "5/8"), ("3/8", "5/8"))


def _half_turn_poly(P: Polygon) -> Polygon:
    return Polygon.hull(half_turn(v) for v in P.vertices)


@dataclass(frozen=True)
class Region:
    """Open region: interior of ``outer`` minus the closed ``inner`` polygon."""

    name: str
    outer: Polygon
    inner: Optional[Polygon] = None

    def contains(self, q: Point) -> bool:
        if not self.outer.contains_interior(q):
            return False
        return self.inner is None or not self.inner.contains(q)

    def closure_contains(self, q: Point) -> bool:
        if not self.outer.contains(q):
            return False
        return self.inner is None or not self.inner.contains_interior(q)


REGIONS = {
    "L": Region("L", L_TRIANGLE),
    "L'": Region("L'", _half_turn_poly(L_TRIANGLE)),
    "E": Region("E", E_SQUARE),
    "MH": Region("MH", L_TRIANGLE, L_INNER),
    "M'H": Region("M'H", _half_turn_poly(L_TRIANGLE), _half_turn_poly(L_INNER)),
    "NK": Region("NK", E_SQUARE, E_INNER),
}


# -- conjugacy checks ------------------------------------------------------

def random_polar(rng: random.Random, D: int = 2**31 - 1) -> PolarPoint:
    return PolarPoint(Fraction(rng.randint(1, D - 1), D), Fraction(rng.randint(0, D - 1), D))


def check_conjugacy_R1(l: int, samples: int, seed: int = 0, R1=None) -> dict:
    """Compare M(F(p)) with R1^(3l)(M(p)), and the same for M' on L'."""
    from .pwl import eval_map

    if R1 is None:
        from .gens import build_R1

        R1 = build_R1()
    rng = random.Random(seed)
    pts = [PolarPoint(ZERO, ZERO)] + [random_polar(rng) for _ in range(samples)]
    failures = []
    for p in pts:
        for name, param in (("M", eval_M), ("M'", eval_Mp)):
            lhs = param(eval_F(p, l))
            rhs = param(p)
            for _ in range(3 * l):
                rhs = eval_map(R1, rhs)
            if lhs != rhs:
                failures.append({"param": name, "r": str(p.r), "t": str(p.t), "lhs": [str(lhs.x), str(lhs.y)], "rhs": [str(rhs.x), str(rhs.y)]})
    return {"l": l, "samples": len(pts), "passed": not failures, "failures": failures}


def check_conjugacy_R2(m: int, samples: int, seed: int = 0, R2=None) -> dict:
    """Compare N(G_m(p)) with R2^4(N(p)) and with R2^(4m)(N(p)).

    The report says which of the two readings of the exponent holds.
    """
    from .pwl import eval_map

    if R2 is None:
        from .gens import build_R2

        R2 = build_R2()
    rng = random.Random(seed)
    pts = [PolarPoint(ZERO, ZERO), PolarPoint(ONE, Fraction(1, 8))] + [random_polar(rng) for _ in range(samples)]
    fail4 = []
    fail4m = []
    for p in pts:
        lhs = eval_N(eval_G(p, m))
        q = eval_N(p)
        images = {}
        for k in range(1, 4 * m + 1):
            q = eval_map(R2, q)
            images[k] = q
        if lhs != images[4]:
            fail4.append({"r": str(p.r), "t": str(p.t)})
        if lhs != images[4 * m]:
            fail4m.append({"r": str(p.r), "t": str(p.t)})
    holds4, holds4m = not fail4, not fail4m
    if holds4 and holds4m:
        reading = "both"
    elif holds4m:
        reading = "R2^(4m)"
    elif holds4:
        reading = "R2^4"
    else:
        reading = "neither"
    return {
        "m": m,
        "samples": len(pts),
        "holds_R2_4": holds4,
        "holds_R2_4m": holds4m,
        "reading": reading,
        "passed": holds4 or holds4m,
        "failures": (fail4m if not holds4m else []) + (fail4 if not holds4 and not holds4m else []),
        "first_failures_R2_4": fail4[:3],
    }
