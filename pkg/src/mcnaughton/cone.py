"""Cone fields for the family B_lm.

Two halves:

* a symbolic replay of the matrix chain showing that, on the bottom
  parallelogram, the N-pushed unstable cone sits strictly inside the
  M-pushed one, plus an interval certificate that the final matrix is
  entrywise positive;
* an exact sampler that pushes cones through the Jacobian of B along
  orbits and classifies every containment event.

Polar angles are measured in turns ``t = theta / 2pi`` on the sampling side.
With that choice every cone direction is rational: the factors of pi in the
cone matrices cancel against the 2pi of the angular chart.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import Inconclusive, SymbolicMismatch, UndefinedAtPoint, ZeroRadius
from .geom import Point, Polygon, fmt_q
from .gens import FamilyParams, p0, p1, p2, p3, p4, p0p, p1p, p2p, q0, q1, q2, q3
from .symbolic import Interval, SymMatrix, SymPoly, identity_matrix, sym
from . import twist

PI_LO = Fraction(333, 106)
PI_HI = Fraction(355, 113)

PI = sym("pi")


def pi_interval(lo=PI_LO, hi=PI_HI) -> Interval:
    return Interval(Fraction(lo), Fraction(hi))


# -- cone matrices ---------------------------------------------------------

def _cone_matrix_polys(r: SymPoly, l, m) -> dict[str, SymMatrix]:
    r2inv = r ** -2
    return {
        "A1": SymMatrix([[1, 0], [PI * l * r2inv * Fraction(1, 3), -1]]),
        "A2": SymMatrix([[1, 0], [-PI * l * r2inv * Fraction(1, 3), -1]]),
        "A3": SymMatrix([[1, 0], [-PI * m * r2inv, 1]]),
        "A4": SymMatrix([[1, 0], [PI * m * r2inv, 1]]),
        "TF": SymMatrix([[1, 0], [-2 * PI * l * r2inv * Fraction(1, 3), 1]]),
        "TG": SymMatrix([[1, 0], [2 * PI * m * r2inv, 1]]),
    }


def cone_matrices(r, l: int = 1, m: int = 1) -> dict[str, SymMatrix]:
    """A_1..A_4 and the differentials of F and G at radius r, in (r, theta).

    Entries are polynomials in the formal symbol ``pi`` (degree <= 1).
    """
    r = Fraction(r)
    if r <= 0:
        raise ZeroRadius("cone matrices need r > 0")
    return _cone_matrix_polys(SymPoly.const(r), l, m)


def matrix_intervals(M: SymMatrix, pi: Optional[Interval] = None) -> list[list[Interval]]:
    pi = pi or pi_interval()
    return [[Interval.lift(x.evaluate({"pi": pi})) for x in row] for row in M.rows]


# generators of U^1..U^4 in (r, t) coordinates; columns of A_i with the
# angular component divided by 2pi
def _generators_rt(i: int, r: Fraction, l: int, m: int):
    if i == 1:
        return (Fraction(1), Fraction(l) / (6 * r * r)), (Fraction(0), Fraction(-1))
    if i == 2:
        return (Fraction(1), -Fraction(l) / (6 * r * r)), (Fraction(0), Fraction(-1))
    if i == 3:
        return (Fraction(1), -Fraction(m) / (2 * r * r)), (Fraction(0), Fraction(1))
    if i == 4:
        return (Fraction(1), Fraction(m) / (2 * r * r)), (Fraction(0), Fraction(1))
    raise ValueError(i)


# -- symbolic replay -------------------------------------------------------

def _mismatch(where: str, got: SymMatrix, want: SymMatrix):
    diff = got.first_difference(want)
    if diff is None:
        return None
    (i, j), g, w = diff
    return {"where": where, "entry": [i, j], "computed": repr(g), "expected": repr(w)}


def _polar_param_M() -> tuple[SymPoly, SymPoly]:
    """M on its first sector as polynomials in r1, th1, pi^-1."""
    r, th = sym("r1"), sym("th1")
    t0 = Fraction(0)
    b0, db = twist.m_boundary(t0), twist.m_boundary_dt(t0)
    turn = th * (PI ** -1) * Fraction(1, 2)
    c = twist.M_CENTER
    bx = b0.x + db.x * (turn - t0)
    by = b0.y + db.y * (turn - t0)
    return c.x + r * (bx - c.x), c.y + r * (by - c.y)


def _polar_param_N() -> tuple[SymPoly, SymPoly]:
    """N on its last sector (angles in [3pi/2, 2pi))."""
    r, th = sym("r2"), sym("th2")
    t0 = Fraction(3, 4)
    b0, db = twist.n_boundary(t0), twist.n_boundary_dt(t0)
    turn = th * (PI ** -1) * Fraction(1, 2)
    bx = b0.x + db.x * (turn - t0)
    by = b0.y + db.y * (turn - t0)
    c = twist.N_CENTER
    return c.x + r * bx, c.y + r * by


def _jacobian(fx: SymPoly, fy: SymPoly, u: str, v: str) -> SymMatrix:
    return SymMatrix([[fx.diff(u), fx.diff(v)], [fy.diff(u), fy.diff(v)]])


def _linear_identity(fx: SymPoly, fy: SymPoly, cx, cy, r: str, th: str, s: str) -> SymMatrix:
    """Matrix J with (fx - cx, fy - cy) = J (r, r*th)."""
    gx = (fx - cx).rewrite_product(r, th, s)
    gy = (fy - cy).rewrite_product(r, th, s)
    J = SymMatrix([[gx.coefficient(r), gx.coefficient(s)], [gy.coefficient(r), gy.coefficient(s)]])
    back = SymMatrix([[J[0, 0] * sym(r) + J[0, 1] * sym(s), 0], [J[1, 0] * sym(r) + J[1, 1] * sym(s), 0]])
    if back[0, 0] != gx or back[1, 0] != gy:
        raise SymbolicMismatch("parametrization is not linear in (r, r*theta)", where="linear identity")
    return J


def displayed_matrices() -> dict[str, SymMatrix]:
    """The matrices exactly as written in the derivation being replayed."""
    r1, th1, r2, th2 = sym("r1"), sym("th1"), sym("r2"), sym("th2")
    x, y, z, w = sym("x"), sym("y"), sym("z"), sym("w")
    pinv = PI ** -1
    F = Fraction
    quad = 81 * x ** 2 + 81 * y ** 2 + 162 * x * y - 108 * x - 108 * y + 36
    return {
        "B1": SymMatrix([
            [F(2, 3) - F(3, 2) * th1 * pinv, -F(3, 2) * r1 * pinv],
            [-F(1, 3) + F(3, 2) * th1 * pinv, F(3, 2) * r1 * pinv],
        ]),
        "B2": SymMatrix([[-F(7, 4) + th2 * pinv, r2 * pinv], [-F(1, 4), 0]]),
        "K1": SymMatrix([[1, 0], [r1 ** -2, -1]]),
        "K2": SymMatrix([[1, 0], [3 * r2 ** -2, 1]]),
        "star": SymMatrix([
            [9 * r1 ** 2, 9 * r1 ** 2],
            [9 * r1 * th1 - 2 * r1 * PI + 9, 9 * r1 * th1 - 4 * r1 * PI + 9],
        ]),
        "J1": SymMatrix([[F(2, 3), -F(3, 2) * pinv], [-F(1, 3), F(3, 2) * pinv]]),
        "J2": SymMatrix([[-F(7, 4), pinv], [-F(1, 4), 0]]),
        "C": SymMatrix([[quad, quad], [6 * PI * y - 2 * PI + 9, -6 * PI * x + 2 * PI + 9]]),
        "D": SymMatrix([
            [2 * PI * x - PI + 6, 32 * y ** 2 - 32 * y + 8],
            [2 * PI * y - PI, 0],
        ]),
        "final": SymMatrix([
            [
                F(9, 32) * (12 * z + 1) ** 2 * (4 * PI * z - PI + 12),
                F(9, 8) * (4 * w - 1) ** 2 * (12 * z + 1) ** 2,
            ],
            [
                F(1, 2) * ((4 * PI ** 2 + 36 * PI) * z + (-8 * PI ** 2 + 72 * PI) * w + PI ** 2 - 15 * PI + 108),
                (4 * w - 1) ** 2 * (12 * PI * w - PI + 18),
            ],
        ]),
    }


def _positive_factors(got: SymMatrix, want: SymMatrix):
    """Rational row/column factors k_ij > 0 with got = k_ij * want, if any."""
    ks = {}
    for i in range(2):
        for j in range(2):
            g, w = got[i, j], want[i, j]
            if g.is_zero() and w.is_zero():
                continue
            if g.is_zero() or w.is_zero():
                return None
            mono, cw = next(iter(w.terms.items()))
            k = g.terms.get(mono, Fraction(0)) / cw
            if k <= 0 or g != w * k:
                return None
            ks[(i, j)] = k
    if len(ks) == 4 and ks[(0, 0)] * ks[(1, 1)] != ks[(0, 1)] * ks[(1, 0)]:
        return None
    return {f"{i + 1}{j + 1}": fmt_q(k) for (i, j), k in ks.items()}


def _nonneg_coefficients(p: SymPoly) -> bool:
    return all(c >= 0 for c in p.terms.values())


def lemma7_replay(raise_on_mismatch: bool = True) -> dict:
    """Replay the bottom-parallelogram matrix chain in exact symbolic arithmetic."""
    disp = displayed_matrices()
    steps: list[dict] = []
    mismatches: list[dict] = []

    def record(name, ok, detail=None):
        steps.append({"step": name, "passed": bool(ok), "detail": detail})
        if not ok:
            mismatches.append({"step": name, "detail": detail})

    def compare(name, got, want):
        mm = _mismatch(name, got, want)
        record(name, mm is None, mm)
        return mm is None

    r1, th1, r2, th2 = sym("r1"), sym("th1"), sym("r2"), sym("th2")
    x, y, z, w = sym("x"), sym("y"), sym("z"), sym("w")
    l, m = sym("l"), sym("m")

    # twist differentials and the cone transport they induce
    fprof = (sym("r") ** -1 - 1) * Fraction(1, 3)
    gprof = sym("r") ** -1 - 1
    TF = SymMatrix([[1, 0], [(2 * PI * l * fprof).diff("r"), 1]])
    TG = SymMatrix([[1, 0], [(-2 * PI * m * gprof).diff("r"), 1]])
    cm = _cone_matrix_polys(sym("r"), l, m)
    compare("TF from the twist profile", TF, cm["TF"])
    compare("TG from the twist profile", TG, cm["TG"])
    compare("TF A1 = A2", TF * cm["A1"], cm["A2"])
    compare("TG A3 = A4", TG * cm["A3"], cm["A4"])
    inc12 = cm["A1"].inverse() * cm["A2"]
    inc43 = cm["A3"].inverse() * cm["A4"]
    sign_ok = all(_nonneg_coefficients(e) for e in inc12.rows[0] + inc12.rows[1]) and all(
        _nonneg_coefficients(-e) or _nonneg_coefficients(e) for e in inc43.rows[0] + inc43.rows[1]
    )
    record("U2 in U1 and U4 in U3", sign_ok and _nonneg_coefficients(inc43[1, 0]) and _nonneg_coefficients(inc43[0, 0]),
           {"A1^-1 A2": repr(inc12), "A3^-1 A4": repr(inc43)})

    # differentials of the two parametrizations
    Mx, My = _polar_param_M()
    Nx, Ny = _polar_param_N()
    B1 = _jacobian(Mx, My, "r1", "th1")
    B2 = _jacobian(Nx, Ny, "r2", "th2")
    compare("B1 = TM", B1, disp["B1"])
    compare("B2 = TN", B2, disp["B2"])

    # splitting off the positive scalars a and b
    a = (PI * l - 3) * Fraction(1, 3) * r1 ** -2
    b = (PI * m - 3) * r2 ** -2
    A1 = _cone_matrix_polys(r1, l, m)["A1"]
    A4 = _cone_matrix_polys(r2, l, m)["A4"]
    compare("A1(r1)^-1 = [1 0; a 1] K1", SymMatrix([[1, 0], [a, 1]]) * disp["K1"], A1.inverse())
    compare("A4(r2) = K2 [1 0; b 1]", disp["K2"] * SymMatrix([[1, 0], [b, 1]]), A4)
    # pi*l - 3 = u*(v + 1) + 3v with u = pi - 3 > 0, v = l - 1 >= 0
    numer = (sym("u") + 3) * (sym("v") + 1) - 3
    record("a > 0 and b > 0", PI_LO > 3 and _nonneg_coefficients(numer) and not numer.is_zero(),
           {"a": repr(a), "b": repr(b), "pi*l - 3 with pi = u + 3, l = v + 1": repr(numer)})
    middle = disp["K1"] * B1.inverse() * B2 * disp["K2"]
    full = (B1 * A1).inverse() * (B2 * A4)
    compare("(B1 A1)^-1 (B2 A4) = [1 0; a 1] (K1 B1^-1 B2 K2) [1 0; b 1]",
            SymMatrix([[1, 0], [a, 1]]) * middle * SymMatrix([[1, 0], [b, 1]]), full)

    # scaled product 3 r1^2 K1 B1^-1
    star = 3 * r1 ** 2 * disp["K1"] * B1.inverse()
    compare("3 r1^2 K1 B1^-1", star, disp["star"])

    # eliminating the polar coordinates
    J1 = _linear_identity(Mx, My, twist.M_CENTER.x, twist.M_CENTER.y, "r1", "th1", "s1")
    compare("M identity", J1, disp["J1"])
    sol1 = J1.inverse() * SymMatrix([[x - twist.M_CENTER.x, 0], [y - twist.M_CENTER.y, 0]])
    sub1 = {"r1": sol1[0, 0], "s1": sol1[1, 0]}
    record("r1 = 3x + 3y - 2", sol1[0, 0] == 3 * x + 3 * y - 2, repr(sol1[0, 0]))
    C = disp["star"].map(lambda e: e.rewrite_product("r1", "th1", "s1").subs(sub1))
    compare("C", C, disp["C"])

    J2 = _linear_identity(Nx, Ny, twist.N_CENTER.x, twist.N_CENTER.y, "r2", "th2", "s2")
    compare("N identity", J2, disp["J2"])
    sol2 = J2.inverse() * SymMatrix([[x - twist.N_CENTER.x, 0], [y - twist.N_CENTER.y, 0]])
    sub2 = {"r2": sol2[0, 0], "s2": sol2[1, 0]}
    record("r2 = -4y + 2, r2 th2 = pi x - 7 pi y + 3 pi",
           sol2[0, 0] == -4 * y + 2 and sol2[1, 0] == PI * x - 7 * PI * y + 3 * PI,
           [repr(sol2[0, 0]), repr(sol2[1, 0])])
    D = (2 * PI * r2 * B2 * disp["K2"]).map(lambda e: e.rewrite_product("r2", "th2", "s2").subs(sub2))
    compare("D", D, disp["D"])

    # the bottom parallelogram becomes the box (0,1/4) x (0,1/8)
    zw = {"x": z - w + Fraction(1, 2), "y": w + Fraction(1, 4)}
    corners = {}
    for name, v in (("p1", p1), ("p3", p3), ("q1", q1), ("q0", q0)):
        # inverse change of variables: z = x + y - 3/4, w = y - 1/4
        corners[name] = (v.x + v.y - Fraction(3, 4), v.y - Fraction(1, 4))
    box = {(Fraction(0), Fraction(0)), (Fraction(1, 4), Fraction(0)), (Fraction(1, 4), Fraction(1, 8)), (Fraction(0), Fraction(1, 8))}
    record("P1 corners map to the box corners", set(corners.values()) == box,
           {k: [fmt_q(a_), fmt_q(b_)] for k, (a_, b_) in corners.items()})

    final = (C * D).subs(zw)
    mm = _mismatch("final", final, disp["final"])
    factors = None
    if mm is not None:
        factors = _positive_factors(final, disp["final"])
    record("final matrix", mm is None or factors is not None, mm if factors is None else {"positive_factors": factors})

    # the global factor 3 r1^2 * 2 pi r2 dropped along the way is positive
    record("discarded factors positive", True, "3*r1^2 and 2*pi*r2 with r1, r2 > 0")

    passed = not mismatches
    if not passed and raise_on_mismatch:
        first = mismatches[0]
        raise SymbolicMismatch(f"replay mismatch at {first['step']}", where=first)
    return {
        "passed": passed,
        "steps": steps,
        "C": [[repr(e) for e in row] for row in C.rows],
        "D": [[repr(e) for e in row] for row in D.rows],
        "final": [[repr(e) for e in row] for row in final.rows],
        "final_matrix": final,
    }


# -- interval certificate --------------------------------------------------

BOX_Z = (Fraction(0), Fraction(1, 4))
BOX_W = (Fraction(0), Fraction(1, 8))


def certify_positive(p: SymPoly, pi: Interval, box=(BOX_Z, BOX_W), max_depth: int = 40):
    """Cover ``box`` by sub-boxes on which the interval value of p is > 0.

    Returns the list of (z-interval, w-interval, lower bound) triples.
    """
    cover = []
    stack = [(Interval(*box[0]), Interval(*box[1]), 0)]
    while stack:
        Z, W, depth = stack.pop()
        val = Interval.lift(p.evaluate({"z": Z, "w": W, "pi": pi}))
        if val.lo > 0:
            cover.append((Z, W, val.lo))
            continue
        if val.hi <= 0:
            raise Inconclusive(f"nonpositive value on [{Z.lo},{Z.hi}]x[{W.lo},{W.hi}]")
        if depth >= max_depth:
            raise Inconclusive("subdivision depth exhausted")
        if Z.width >= W.width:
            a, b = Z.split()
            stack.extend([(a, W, depth + 1), (b, W, depth + 1)])
        else:
            a, b = W.split()
            stack.extend([(Z, a, depth + 1), (Z, b, depth + 1)])
    return cover


def lemma7_certify(pi_lo=PI_LO, pi_hi=PI_HI, final: Optional[SymMatrix] = None, max_depth: int = 40) -> dict:
    """Interval proof that the replayed final matrix is entrywise positive on the box."""
    pi_lo, pi_hi = Fraction(pi_lo), Fraction(pi_hi)
    if not pi_lo < pi_hi:
        raise ValueError("need pi_lo < pi_hi")
    if final is None:
        final = lemma7_replay()["final_matrix"]
    pi = Interval(pi_lo, pi_hi)
    entries = {}
    for i in range(2):
        for j in range(2):
            cover = certify_positive(final[i, j], pi, max_depth=max_depth)
            entries[f"{i + 1}{j + 1}"] = {
                "boxes": [
                    {"z": [fmt_q(Z.lo), fmt_q(Z.hi)], "w": [fmt_q(W.lo), fmt_q(W.hi)], "lower": fmt_q(lo)}
                    for Z, W, lo in cover
                ],
                "min_lower_bound": fmt_q(min(lo for _, _, lo in cover)),
            }
    return {
        "passed": True,
        "pi": [fmt_q(pi_lo), fmt_q(pi_hi)],
        "box": {"z": [fmt_q(BOX_Z[0]), fmt_q(BOX_Z[1])], "w": [fmt_q(BOX_W[0]), fmt_q(BOX_W[1])]},
        "entries": entries,
    }


# -- cone field ------------------------------------------------------------

Vec = tuple  # (Fraction, Fraction)

PARALLELOGRAMS = {
    "P1": Polygon.hull([p1, p3, q1, q0]),
    "P2": Polygon.hull([p2, q0, q3, p4]),
    "P3": Polygon.hull([p1p, p4, q3, q2]),
    "P4": Polygon.hull([p2p, q2, q1, p3]),
}
INNER_TRIANGLES = (Polygon.hull([p0, p1, p2]), Polygon.hull([p0p, p1p, p2p]))


@dataclass(frozen=True)
class ConeBasis:
    """Double cone {a*u + b*v : a*b >= 0} at ``base``."""

    base: Point
    u: Vec
    v: Vec
    chart: str = ""
    polar: Optional[twist.PolarPoint] = None

    def __post_init__(self):
        if self.u == (0, 0) or self.v == (0, 0):
            raise ValueError("cone directions must be nonzero")

    def matrix(self):
        return ((self.u[0], self.v[0]), (self.u[1], self.v[1]))

    def intervals(self) -> tuple[tuple[Interval, Interval], tuple[Interval, Interval]]:
        return (tuple(Interval.point(t) for t in self.u), tuple(Interval.point(t) for t in self.v))

    def coordinates(self, vec: Vec) -> tuple[Fraction, Fraction]:
        (a, b), (c, d) = self.matrix()
        det = a * d - b * c
        return ((d * vec[0] - b * vec[1]) / det, (-c * vec[0] + a * vec[1]) / det)

    def contains(self, vec: Vec, strict: bool = False) -> bool:
        s, t = self.coordinates(vec)
        if strict:
            return (s > 0 and t > 0) or (s < 0 and t < 0)
        return (s >= 0 and t >= 0) or (s <= 0 and t <= 0)

    def to_json(self) -> dict:
        return {
            "base": [fmt_q(self.base.x), fmt_q(self.base.y)],
            "chart": self.chart,
            "directions": [[fmt_q(t) for t in self.u], [fmt_q(t) for t in self.v]],
        }


def _push(col_r: Point, col_t: Point, gen) -> Vec:
    a, b = gen
    return (a * col_r.x + b * col_t.x, a * col_r.y + b * col_t.y)


def cone_chart(q: Point) -> str:
    """Which chart defines the cone at q: 'N', 'M', "M'"; raises off the field's domain."""
    R = twist.REGIONS
    if R["NK"].contains(q):
        return "N"
    if R["NK"].closure_contains(q):
        raise UndefinedAtPoint(f"{q} lies on the boundary of NK")
    if R["MH"].contains(q):
        return "M"
    if R["M'H"].contains(q):
        return "M'"
    raise UndefinedAtPoint(f"{q} is outside the domain of the cone field")


def cone_field_at(q: Point, l: int = 1, m: int = 1) -> ConeBasis:
    q = Point(Fraction(q[0]), Fraction(q[1]))
    if q == twist.M_CENTER or q == twist.half_turn(twist.M_CENTER) or q == twist.N_CENTER:
        raise UndefinedAtPoint(f"{q} is a polar center")
    chart = cone_chart(q)
    if chart == "N":
        pp = twist.N_inv(q)
        if (pp.t * 4).denominator == 1:
            raise UndefinedAtPoint(f"{q} lies on a sector ray of N")
        col_r = twist.n_boundary(pp.t)
        dt = twist.n_boundary_dt(pp.t)
        col_t = Point(pp.r * dt.x, pp.r * dt.y)
        g1, g2 = _generators_rt(4, pp.r, l, m)
    else:
        src = q if chart == "M" else twist.half_turn(q)
        pp = twist.M_inv(src)
        if (pp.t * 3).denominator == 1:
            raise UndefinedAtPoint(f"{q} lies on a sector ray of M")
        b = twist.m_boundary(pp.t)
        dt = twist.m_boundary_dt(pp.t)
        sgn = 1 if chart == "M" else -1
        col_r = Point(sgn * (b.x - twist.M_CENTER.x), sgn * (b.y - twist.M_CENTER.y))
        col_t = Point(sgn * pp.r * dt.x, sgn * pp.r * dt.y)
        g1, g2 = _generators_rt(2, pp.r, l, m)
    return ConeBasis(q, _push(col_r, col_t, g1), _push(col_r, col_t, g2), chart, pp)


def containment_matrix(J, src: ConeBasis, dst: ConeBasis):
    """Coordinates of J u, J v in the basis of ``dst`` (as a 2x2 matrix)."""
    cols = []
    for vec in (src.u, src.v):
        img = (J[0][0] * vec[0] + J[0][1] * vec[1], J[1][0] * vec[0] + J[1][1] * vec[1])
        cols.append(dst.coordinates(img))
    return ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))


def classify_containment(W) -> tuple[bool, bool]:
    """(contained, strictly contained) from the coordinate matrix."""
    entries = [W[0][0], W[0][1], W[1][0], W[1][1]]
    contained = all(e >= 0 for e in entries) or all(e <= 0 for e in entries)
    strict = all(e > 0 for e in entries) or all(e < 0 for e in entries)
    return contained, strict


def event_case(q_chart: str, bq_chart: str) -> str:
    qn, bn = q_chart == "N", bq_chart == "N"
    return {(False, False): "a", (False, True): "b", (True, False): "c", (True, True): "d"}[(qn, bn)]


def region_label(q: Point) -> str:
    for name, P in PARALLELOGRAMS.items():
        if P.contains(q):
            return name
    if twist.REGIONS["NK"].contains(q):
        if any(T.contains(q) for T in INNER_TRIANGLES):
            return "kite"
        return "NK-other"
    return "outside-NK"


def _matmul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def lattice_step_with_jacobian(family, X: int, Y: int, D: int):
    """One application of B on (X/D, Y/D): image, Jacobian, and whether
    every intermediate point was interior to its cell."""
    s1, s2 = family.lattice()
    J = ((1, 0), (0, 1))
    interior = True
    plan = [s1] * (3 * family.params.l) + [s2] * (2 * family.params.m)
    for st in plan:
        k, inside = st.find(X, Y, D)
        interior = interior and inside
        a, b, c, d, e, f = st.pieces[k]
        X, Y = a * X + b * Y + e * D, c * X + d * Y + f * D
        J = _matmul(((a, b), (c, d)), J)
    return X, Y, J, interior


@dataclass
class ProbeReport:
    l: int
    m: int
    samples: int
    horizon: int
    events: int = 0
    containment_failures: int = 0
    cases: dict = field(default_factory=lambda: {c: {"events": 0, "strict": 0} for c in "abcd"})
    nonstrict_bcd: list = field(default_factory=list)
    nonstrict_by_region: dict = field(default_factory=dict)
    orbits_strict: int = 0
    orbits_complete: int = 0
    exclusions: dict = field(default_factory=lambda: {"sample": 0, "boundary": 0, "undefined": 0})
    det_ok: bool = True
    failures: list = field(default_factory=list)
    # per counted orbit: (step of first strict event or None, step of abort or None)
    orbit_log: list = field(default_factory=list)

    @property
    def strict_fraction(self) -> float:
        return self.orbits_strict / max(1, self.orbits_complete)

    @property
    def strict_in_bcd(self) -> bool:
        return all(self.cases[c]["events"] == self.cases[c]["strict"] for c in "bcd")

    def strict_fraction_at(self, h: int) -> float:
        """Strict fraction had the probe stopped at horizon h <= self.horizon.

        Orbits that aborted before step h without a strict event are not
        counted, exactly as in a run with that horizon.
        """
        done = strict = 0
        for first, abort in self.orbit_log:
            if first is not None and first <= h:
                done += 1
                strict += 1
            elif abort is None or abort > h:
                done += 1
        return strict / max(1, done)

    def nonstrict_bcd_within(self, h: int) -> list:
        return [e for e in self.nonstrict_bcd if e["step"] <= h]

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "m": self.m,
            "samples": self.samples,
            "horizon": self.horizon,
            "events": self.events,
            "containment_failures": self.containment_failures,
            "cases": self.cases,
            "strict_in_all_bcd_events": self.strict_in_bcd,
            "nonstrict_bcd_by_region": self.nonstrict_by_region,
            "nonstrict_bcd_examples": self.nonstrict_bcd[:5],
            "orbits": self.orbits_complete,
            "orbits_strict_within_horizon": self.orbits_strict,
            "strict_fraction": self.strict_fraction,
            "exclusions": self.exclusions,
            "det_pm1": self.det_ok,
            "failures": self.failures[:5],
        }


def invariance_probe(params: FamilyParams, samples: int = 10_000, horizon: int = 50, seed: int = 0,
                     D: int = 2**31 - 1, follow_after_strict: bool = False) -> ProbeReport:
    """Push sampled cones along forward B-orbits and classify every event.

    Each orbit runs until its first strict event (or through the whole
    horizon when ``follow_after_strict``), so every event seen is checked
    for containment.
    """
    from .gens import Family

    fam = Family(params)
    rng = random.Random(seed)
    rep = ProbeReport(params.l, params.m, samples, horizon)
    while rep.orbits_complete < samples:
        X, Y = rng.randint(1, D - 1), rng.randint(1, D - 1)
        q = Point(Fraction(X, D), Fraction(Y, D))
        try:
            U = cone_field_at(q, params.l, params.m)
        except UndefinedAtPoint:
            rep.exclusions["sample"] += 1
            continue
        strict_seen = False
        aborted = False
        first_strict = abort_step = None
        for step in range(1, horizon + 1):
            X2, Y2, J, interior = lattice_step_with_jacobian(fam, X, Y, D)
            if J[0][0] * J[1][1] - J[0][1] * J[1][0] not in (1, -1):
                rep.det_ok = False
            if not interior:
                rep.exclusions["boundary"] += 1
                aborted, abort_step = True, step
                break
            bq = Point(Fraction(X2, D), Fraction(Y2, D))
            try:
                V = cone_field_at(bq, params.l, params.m)
            except UndefinedAtPoint:
                rep.exclusions["undefined"] += 1
                aborted, abort_step = True, step
                break
            W = containment_matrix(J, U, V)
            contained, strict = classify_containment(W)
            case = event_case(U.chart, V.chart)
            rep.events += 1
            rep.cases[case]["events"] += 1
            if strict:
                rep.cases[case]["strict"] += 1
            if not contained:
                rep.containment_failures += 1
                rep.failures.append({"q": [fmt_q(q.x), fmt_q(q.y)], "Bq": [fmt_q(bq.x), fmt_q(bq.y)], "case": case})
            if case != "a" and not strict:
                key = f"{case}:{region_label(q)}->{region_label(bq)}"
                rep.nonstrict_by_region[key] = rep.nonstrict_by_region.get(key, 0) + 1
                rep.nonstrict_bcd.append({
                    "step": step,
                    "region": key,
                    "q": [fmt_q(q.x), fmt_q(q.y)], "Bq": [fmt_q(bq.x), fmt_q(bq.y)], "case": case,
                    "W": [[fmt_q(e) for e in row] for row in W],
                })
            if strict and not strict_seen:
                first_strict = step
            strict_seen = strict_seen or strict
            X, Y, q, U = X2, Y2, bq, V
            if strict_seen and not follow_after_strict:
                break
        if aborted and not strict_seen:
            rep.orbit_log.append((None, abort_step))
            continue
        rep.orbit_log.append((first_strict, None))
        rep.orbits_complete += 1
        if strict_seen:
            rep.orbits_strict += 1
    return rep
