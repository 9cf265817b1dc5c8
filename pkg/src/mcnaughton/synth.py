"""Lukasiewicz terms in two variables: syntax, evaluation, and synthesis of a
term for a given McNaughton function via unimodular triangulations and
Schauder hats.

Terms are hash-consed DAG nodes, so the very large terms produced by
synthesis share their repeated subterms.  Only the four core constructors
exist; the usual abbreviations are expanded when terms are built.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, ConstructionGateFailed, NotMcNaughton, TermSyntaxError
from .geom import Point, Polygon
from .mvfun import PwlFunction, constant, mv_neg, mv_oplus, projection

# -- terms -----------------------------------------------------------------

VAR, ZERO, NEG, OPLUS = "var", "zero", "neg", "oplus"


class MvTerm:
    """Interned term node.  Build with var/zero/neg/oplus, never directly."""

    __slots__ = ("kind", "args", "index", "id", "__weakref__")
    _table: dict = {}
    _next = 0

    def __new__(cls, kind, args=(), index=0):
        key = (kind, tuple(a.id for a in args), index)
        node = cls._table.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.kind, node.args, node.index = kind, tuple(args), index
        node.id = MvTerm._next
        MvTerm._next += 1
        cls._table[key] = node
        return node

    def __repr__(self):
        s = to_text(self, limit=200)
        return f"MvTerm({s})"

    def __or__(self, other):
        return join(self, other)

    def __and__(self, other):
        return meet(self, other)


def var(i: int) -> MvTerm:
    if i not in (1, 2):
        raise ValueError("variables are x1 and x2")
    return MvTerm(VAR, (), i)


def zero() -> MvTerm:
    return MvTerm(ZERO)


def neg(t: MvTerm) -> MvTerm:
    return MvTerm(NEG, (t,))


def oplus(a: MvTerm, b: MvTerm) -> MvTerm:
    return MvTerm(OPLUS, (a, b))


def one() -> MvTerm:
    return neg(zero())


def odot(a, b):
    return neg(oplus(neg(a), neg(b)))


def join(a, b):
    # a v b = (a (-) b) (+) b
    return oplus(odot(a, neg(b)), b)


def meet(a, b):
    return neg(join(neg(a), neg(b)))


def minus(a, b):
    """Truncated subtraction max(0, a - b)."""
    return odot(a, neg(b))


# Simplifying builders used by synthesis: they cancel double negations and
# drop neutral elements, which keeps synthesized terms much smaller.  The
# parser uses the plain constructors so that parsing stays structural.

def _sneg(t: MvTerm) -> MvTerm:
    return t.args[0] if t.kind == NEG else neg(t)


def _soplus(a: MvTerm, b: MvTerm) -> MvTerm:
    if a.kind == ZERO:
        return b
    if b.kind == ZERO:
        return a
    if a is one() or b is one():
        return one()
    return oplus(a, b)


def _sodot(a: MvTerm, b: MvTerm) -> MvTerm:
    return _sneg(_soplus(_sneg(a), _sneg(b)))


def _sjoin(a, b):
    if a is b:
        return a
    return _soplus(_sodot(a, _sneg(b)), b)


def _smeet(a, b):
    return _sneg(_sjoin(_sneg(a), _sneg(b)))


def big_oplus(terms: list) -> MvTerm:
    if not terms:
        return zero()
    while len(terms) > 1:
        terms = [_soplus(terms[i], terms[i + 1]) if i + 1 < len(terms) else terms[i] for i in range(0, len(terms), 2)]
    return terms[0]


def big_join(terms: list) -> MvTerm:
    if not terms:
        return zero()
    while len(terms) > 1:
        terms = [_sjoin(terms[i], terms[i + 1]) if i + 1 < len(terms) else terms[i] for i in range(0, len(terms), 2)]
    return terms[0]


def big_meet(terms: list) -> MvTerm:
    if not terms:
        return one()
    while len(terms) > 1:
        terms = [_smeet(terms[i], terms[i + 1]) if i + 1 < len(terms) else terms[i] for i in range(0, len(terms), 2)]
    return terms[0]


def multiple(n: int, t: MvTerm) -> MvTerm:
    """n copies of t joined by (+), built by doubling."""
    if n <= 0:
        return zero()
    out = None
    power = t
    while n:
        if n & 1:
            out = power if out is None else _soplus(out, power)
        n >>= 1
        if n:
            power = _soplus(power, power)
    return out


def topo_order(t: MvTerm) -> list[MvTerm]:
    """Nodes of the DAG below t, children before parents."""
    order, seen = [], set()
    stack = [(t, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if node.id in seen:
            continue
        seen.add(node.id)
        stack.append((node, True))
        for a in reversed(node.args):
            if a.id not in seen:
                stack.append((a, False))
    return order


def dag_size(t: MvTerm) -> int:
    return len(topo_order(t))


def tree_size(t: MvTerm) -> int:
    """Number of nodes of the fully unshared term (can be astronomically large)."""
    size: dict[int, int] = {}
    for n in topo_order(t):
        size[n.id] = 1 + sum(size[a.id] for a in n.args)
    return size[t.id]


# -- text ------------------------------------------------------------------

_BINARY = {"+": oplus, "&": meet, "|": join, "*": odot, "-": minus}


def parse(text: str) -> MvTerm:
    """Parse the ASCII grammar; binary operators always need parentheses."""
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    # explicit stack machine: frames are pending constructions
    stack: list = []
    result = None
    while True:
        skip()
        if pos >= n:
            raise TermSyntaxError("unexpected end of input", pos)
        c = text[pos]
        if c == "0":
            pos += 1
            result = zero()
        elif c == "1":
            pos += 1
            result = one()
        elif c == "x":
            if pos + 1 < n and text[pos + 1] in "12":
                result = var(int(text[pos + 1]))
                pos += 2
            else:
                raise TermSyntaxError("expected x1 or x2", pos)
        elif c == "!":
            pos += 1
            stack.append(("neg",))
            continue
        elif c == "(":
            pos += 1
            stack.append(("open", pos - 1))
            continue
        else:
            raise TermSyntaxError(f"unexpected {c!r}", pos)
        # reduce finished operands
        while True:
            if not stack:
                skip()
                if pos != n:
                    raise TermSyntaxError("trailing input", pos)
                return result
            top = stack[-1]
            if top[0] == "neg":
                stack.pop()
                result = neg(result)
                continue
            if top[0] == "open":
                skip()
                if pos >= n:
                    raise TermSyntaxError("unexpected end of input", pos)
                op = text[pos]
                if op not in _BINARY:
                    raise TermSyntaxError(f"expected a binary operator, got {op!r}", pos)
                pos += 1
                stack[-1] = ("left", result, op)
                break
            if top[0] == "left":
                skip()
                if pos >= n or text[pos] != ")":
                    raise TermSyntaxError("expected ')'", pos)
                pos += 1
                stack.pop()
                result = _BINARY[top[2]](top[1], result)
                continue


def to_text(t: MvTerm, limit: Optional[int] = None) -> str:
    """Canonical text (core constructors only).  ``limit`` truncates with '...'."""
    out: list[str] = []
    total = 0
    stack: list = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            total += len(item)
        elif item.kind == VAR:
            out.append(f"x{item.index}")
            total += 2
        elif item.kind == ZERO:
            out.append("0")
            total += 1
        elif item.kind == NEG:
            out.append("!")
            total += 1
            stack.append(item.args[0])
        else:
            out.append("(")
            total += 1
            stack.extend([")", item.args[1], " + ", item.args[0]])
        if limit is not None and total > limit:
            return "".join(out)[:limit] + "..."
    return "".join(out)


# -- evaluation ------------------------------------------------------------

def eval_term(t: MvTerm, p) -> Fraction:
    x, y = Fraction(p[0]), Fraction(p[1])
    val: dict[int, Fraction] = {}
    for n in topo_order(t):
        if n.kind == VAR:
            v = x if n.index == 1 else y
        elif n.kind == ZERO:
            v = Fraction(0)
        elif n.kind == NEG:
            v = 1 - val[n.args[0].id]
        else:
            v = min(Fraction(1), val[n.args[0].id] + val[n.args[1].id])
        val[n.id] = v
    return val[t.id]


GRID_SCALE = 720720  # lcm(1..16)


def grid_points(dmax: int = 16) -> tuple[np.ndarray, np.ndarray, int]:
    """All points with denominator <= dmax, as integers scaled by L = lcm(1..dmax)."""
    L = 1
    for d in range(1, dmax + 1):
        L = lcm(L, d)
    pts = set()
    for d in range(1, dmax + 1):
        s = L // d
        for a in range(d + 1):
            for b in range(d + 1):
                pts.add((a * s, b * s))
    arr = np.array(sorted(pts), dtype=np.int64)
    return arr[:, 0], arr[:, 1], L


def eval_term_grid(t: MvTerm, X: np.ndarray, Y: np.ndarray, L: int) -> np.ndarray:
    """Exact vectorized evaluation; values are scaled by L like the inputs."""
    val: dict[int, np.ndarray] = {}
    zeros = np.zeros_like(X)
    for n in topo_order(t):
        if n.kind == VAR:
            v = X if n.index == 1 else Y
        elif n.kind == ZERO:
            v = zeros
        elif n.kind == NEG:
            v = L - val[n.args[0].id]
        else:
            v = np.minimum(L, val[n.args[0].id] + val[n.args[1].id])
        val[n.id] = v
    return val[t.id]


def eval_function_grid(f: PwlFunction, X: np.ndarray, Y: np.ndarray, L: int) -> np.ndarray:
    """Values of a McNaughton function at the scaled grid points (exact ints)."""
    out = np.full(X.shape, -1, dtype=np.int64)
    for C, (a, b, c) in zip(f.cells, f.functionals):
        mask = np.ones(X.shape, dtype=bool)
        for ha, hb, hc in C.halfplanes():
            m = lcm(ha.denominator, hb.denominator, hc.denominator)
            mask &= int(ha * m) * X + int(hb * m) * Y + int(hc * m) * L >= 0
        out[mask] = int(a) * X[mask] + int(b) * Y[mask] + int(c) * L
    return out


def term_to_pwl(t: MvTerm) -> PwlFunction:
    memo: dict[int, PwlFunction] = {}
    for n in topo_order(t):
        if n.kind == VAR:
            g = projection(n.index)
        elif n.kind == ZERO:
            g = constant(0)
        elif n.kind == NEG:
            g = mv_neg(memo[n.args[0].id])
        else:
            g = mv_oplus(memo[n.args[0].id], memo[n.args[1].id])
        memo[n.id] = g
    return memo[t.id]


# -- unimodular triangulations ---------------------------------------------

Vec3 = tuple  # primitive integer (p, q, r), r > 0, for the point (p/r, q/r)


def homogeneous(p: Point) -> Vec3:
    r = lcm(p.x.denominator, p.y.denominator)
    return (int(p.x * r), int(p.y * r), r)


def _det3(u, v, w) -> int:
    return (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
            + u[2] * (v[0] * w[1] - v[1] * w[0]))


def _primitive(v) -> Vec3:
    g = gcd(gcd(v[0], v[1]), v[2])
    return (v[0] // g, v[1] // g, v[2] // g)


def _to_point(v: Vec3) -> Point:
    return Point(Fraction(v[0], v[2]), Fraction(v[1], v[2]))


@dataclass
class UnimodularComplex:
    triangles: list  # of (Vec3, Vec3, Vec3)
    parent: list     # input cell index per triangle

    def polygons(self) -> list[Polygon]:
        return [Polygon.hull([_to_point(v) for v in T]) for T in self.triangles]

    def vertices(self) -> list[Vec3]:
        return sorted({v for T in self.triangles for v in T})

    def is_unimodular(self) -> bool:
        return all(abs(_det3(*T)) == 1 for T in self.triangles)


def _parallelepiped_point(T, budget: int) -> Vec3:
    """A nonzero lattice point a1 v1 + a2 v2 + a3 v3 with 0 <= ai < 1.

    Walks the finite group Z^3 / <v1, v2, v3> by breadth-first search from
    the images of the unit vectors, and prefers points on an edge of the
    triangle (one coefficient zero).
    """
    D = abs(_det3(*T))
    if D > budget:
        raise BudgetExceeded(f"triangle determinant {D} exceeds the search budget")
    v1, v2, v3 = T
    # coefficients of e_k in the basis v1, v2, v3, via Cramer's rule (times det)
    det = _det3(v1, v2, v3)
    gens = []
    for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        gens.append((_det3(e, v2, v3) % D if det > 0 else -_det3(e, v2, v3) % D,
                     _det3(v1, e, v3) % D if det > 0 else -_det3(v1, e, v3) % D,
                     _det3(v1, v2, e) % D if det > 0 else -_det3(v1, v2, e) % D))
    start = (0, 0, 0)
    seen = {start}
    queue = deque([start])
    best = None
    while queue:
        a = queue.popleft()
        if a != start:
            zeros = sum(1 for c in a if c == 0)
            key = (-zeros, sum(a))
            if best is None or key < best[0]:
                best = (key, a)
        for g in gens:
            b = ((a[0] + g[0]) % D, (a[1] + g[1]) % D, (a[2] + g[2]) % D)
            if b not in seen:
                seen.add(b)
                queue.append(b)
    _, a = best
    w = tuple((a[0] * v1[i] + a[1] * v2[i] + a[2] * v3[i]) // D for i in range(3))
    return _primitive(w)


def _fan(P: Polygon) -> list[tuple[Point, Point, Point]]:
    v = P.vertices
    return [(v[0], v[i], v[i + 1]) for i in range(1, len(v) - 1)]


def unimodular_refine(cells, budget: int = 200_000, det_budget: int = 10**7) -> UnimodularComplex:
    """Refine a complex of convex polygons into unimodular triangles.

    Cells are fanned into triangles, then non-unimodular triangles are
    subdivided at a lattice point of their fundamental parallelepiped.  A
    point on an edge also splits the neighbour across that edge, so the
    result stays a complex.  Every split strictly lowers the determinants
    involved, which bounds the work.
    """
    tris: dict[int, tuple] = {}
    parent: dict[int, int] = {}
    edges: dict[frozenset, set] = {}
    next_id = 0

    def add(T, par):
        nonlocal next_id
        if _det3(*T) < 0:
            T = (T[0], T[2], T[1])
        tid = next_id
        next_id += 1
        tris[tid] = T
        parent[tid] = par
        for i in range(3):
            edges.setdefault(frozenset((T[i], T[(i + 1) % 3])), set()).add(tid)
        return tid

    def remove(tid):
        T = tris.pop(tid)
        for i in range(3):
            e = frozenset((T[i], T[(i + 1) % 3]))
            edges[e].discard(tid)
            if not edges[e]:
                del edges[e]
        return T, parent.pop(tid)

    for k, C in enumerate(cells):
        if C.dim < 2:
            continue
        for tri in _fan(C):
            add(tuple(homogeneous(v) for v in tri), k)

    work = deque(tris.keys())
    while work:
        tid = work.popleft()
        if tid not in tris:
            continue
        T = tris[tid]
        if abs(_det3(*T)) == 1:
            continue
        if len(tris) > budget:
            raise BudgetExceeded(f"refinement exceeds {budget} triangles")
        w = _parallelepiped_point(T, det_budget)
        on_edge = None
        for i in range(3):
            a, b = T[i], T[(i + 1) % 3]
            if _det3(a, b, w) == 0:
                on_edge = (a, b)
        if on_edge is None:
            T, par = remove(tid)
            for i in range(3):
                work.append(add((T[i], T[(i + 1) % 3], w), par))
        else:
            a, b = on_edge
            for nid in list(edges.get(frozenset(on_edge), ())):
                U, par = remove(nid)
                c = next(v for v in U if v != a and v != b)
                work.append(add((a, w, c), par))
                work.append(add((w, b, c), par))
    ids = sorted(tris)
    return UnimodularComplex([tris[i] for i in ids], [parent[i] for i in ids])


# -- Schauder hats ---------------------------------------------------------

def _affine_through(T, values) -> tuple[int, int, int]:
    """Integer (a, b, c) with a*x + b*y + c = values[i] at the vertices of T."""
    pts = [_to_point(v) for v in T]
    (x0, y0), (x1, y1), (x2, y2) = pts
    det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    f0, f1, f2 = values
    a = ((f1 - f0) * (y2 - y0) - (f2 - f0) * (y1 - y0)) / det
    b = ((x1 - x0) * (f2 - f0) - (x2 - x0) * (f1 - f0)) / det
    c = f0 - a * x0 - b * y0
    if a.denominator != 1 or b.denominator != 1 or c.denominator != 1:
        raise NotMcNaughton("hat piece is not integral; triangle is not unimodular")
    return int(a), int(b), int(c)


class ClampBuilder:
    """Terms for max(0, min(1, a*x1 + b*x2 + c)) with integer coefficients."""

    def __init__(self):
        self.memo: dict = {}

    def _children(self, a: int, b: int, c: int):
        """(lower, upper, literal) for the recursion step, or None at a leaf."""
        lo = c + min(0, a) + min(0, b)
        hi = c + max(0, a) + max(0, b)
        if lo >= 1 or hi <= 0 or (a == 0 and b == 0):
            return None
        if a > 0:
            return (a - 1, b, c), (a - 1, b, c + 1), var(1)
        if a < 0:
            return (a + 1, b, c - 1), (a + 1, b, c), neg(var(1))
        if b > 0:
            return (0, b - 1, c), (0, b - 1, c + 1), var(2)
        return (0, b + 1, c - 1), (0, b + 1, c), neg(var(2))

    def __call__(self, a: int, b: int, c: int) -> MvTerm:
        # explicit stack: the recursion depth is |a| + |b|
        memo = self.memo
        stack = [(a, b, c)]
        while stack:
            key = stack[-1]
            if key in memo:
                stack.pop()
                continue
            ch = self._children(*key)
            if ch is None:
                ka, kb, kc = key
                memo[key] = one() if kc + min(0, ka) + min(0, kb) >= 1 else zero()
                stack.pop()
                continue
            low, up, lit = ch
            todo = [k for k in (low, up) if k not in memo]
            if todo:
                stack.extend(todo)
                continue
            memo[key] = _soplus(memo[low], _sodot(memo[up], lit))
            stack.pop()
        return memo[(a, b, c)]


def hat_term(v: Vec3, star: list, clamp: ClampBuilder) -> MvTerm:
    """Schauder hat at v: 1/r at v, 0 at the other vertices, affine on triangles.

    Max-min representation over the star's pieces: on triangle T the hat
    equals l_T, and it is the max over T of the min of those pieces l_j
    that dominate l_T on T.  The zero piece outside the star is absorbed by
    clamping.
    """
    pieces = []
    for T in star:
        vals = [Fraction(1, v[2]) if u == v else Fraction(0) for u in T]
        pieces.append((T, _affine_through(T, vals)))
    terms = []
    for T, lT in pieces:
        pts = [_to_point(u) for u in T]
        dominating = []
        for _, lj in pieces:
            if all(lj[0] * p.x + lj[1] * p.y + lj[2] >= lT[0] * p.x + lT[1] * p.y + lT[2] for p in pts):
                dominating.append(clamp(*lj))
        terms.append(big_meet(dominating))
    return big_join(terms)


@dataclass
class SynthResult:
    term: MvTerm
    triangles: int
    vertices: int
    hats: int
    dag_nodes: int
    verified_dmax: Optional[int] = None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "triangles": self.triangles,
            "vertices": self.vertices,
            "hats": self.hats,
            "dag_nodes": self.dag_nodes,
            "tree_size": str(tree_size(self.term)),
            "verified_dmax": self.verified_dmax,
        }


def verify_term(t: MvTerm, f: PwlFunction, dmax: int = 16) -> tuple[bool, int]:
    """Exact comparison on every point of denominator <= dmax; returns (ok, #mismatches)."""
    X, Y, L = grid_points(dmax)
    got = eval_term_grid(t, X, Y, L)
    want = eval_function_grid(f, X, Y, L)
    bad = int((got != want).sum())
    return bad == 0, bad


def synth_function(f: PwlFunction, dmax: Optional[int] = 16, budget: int = 200_000) -> SynthResult:
    """A term whose function is f, checked on the denominator-<=dmax grid.

    ``budget`` caps both the refinement's triangle count and the number of
    new term nodes created while building hats.
    """
    if not f.is_mcnaughton:
        raise NotMcNaughton("function has non-integer pieces")
    U = unimodular_refine(f.cells, budget=budget)
    star: dict[Vec3, list] = {}
    for T in U.triangles:
        for v in T:
            star.setdefault(v, []).append(T)
    clamp = ClampBuilder()
    parts = []
    vertex_cell = {}
    for T, k in zip(U.triangles, U.parent):
        for v in T:
            vertex_cell.setdefault(v, k)
    nodes0 = len(MvTerm._table)
    for v in sorted(star):
        if len(MvTerm._table) - nodes0 > budget:
            raise BudgetExceeded(f"term construction exceeds {budget} new nodes")
        a, b, c = f.functionals[vertex_cell[v]]
        n = a * v[0] + b * v[1] + c * v[2]
        if n.denominator != 1 or not 0 <= n <= v[2]:
            raise NotMcNaughton(f"value at vertex {v} is not k/{v[2]}")
        if n:
            parts.append(multiple(int(n), hat_term(v, star[v], clamp)))
    t = big_oplus(parts)
    res = SynthResult(t, len(U.triangles), len(star), len(parts), dag_size(t))
    if dmax:
        ok, bad = verify_term(t, f, dmax)
        if not ok:
            raise ConstructionGateFailed(f"synthesized term differs from f at {bad} grid points",
                                         {"mismatches": bad, "dmax": dmax})
        res.verified_dmax = dmax
    return res
