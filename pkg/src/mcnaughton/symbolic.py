"""Exact multivariate Laurent polynomials, 2x2 matrices over them, and
rational interval arithmetic.

``pi`` is an ordinary formal variable here; it only becomes a number when
an interval enclosure is substituted for it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Monomial = tuple  # sorted tuple of (variable, nonzero exponent)
Number = Union[int, Fraction]


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in d.items() if e != 0))


class SymPoly:
    """Sum of rational multiples of monomials; exponents may be negative."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    self.terms[m] = Fraction(c)

    @classmethod
    def const(cls, c: Number) -> "SymPoly":
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "SymPoly":
        return cls({((name, exp),): Fraction(1)})

    @staticmethod
    def lift(x) -> "SymPoly":
        return x if isinstance(x, SymPoly) else SymPoly.const(x)

    def __add__(self, other):
        if isinstance(other, SymMatrix):
            return NotImplemented
        other = SymPoly.lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return SymPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return SymPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-SymPoly.lift(other))

    def __rsub__(self, other):
        return SymPoly.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, SymMatrix):
            return NotImplemented
        other = SymPoly.lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return SymPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a scalar or by a single monomial term."""
        other = SymPoly.lift(other)
        if len(other.terms) != 1:
            raise ZeroDivisionError("can only divide by a monomial")
        (m, c), = other.terms.items()
        inv = SymPoly({tuple((v, -e) for v, e in m): 1 / c})
        return self * inv

    def __pow__(self, k: int):
        if k < 0:
            return SymPoly.const(1) / (self ** (-k))
        out = SymPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymPoly.const(other)
        if not isinstance(other, SymPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def diff(self, name: str) -> "SymPoly":
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(name, 0)
            if e == 0:
                continue
            d[name] = e - 1
            mm = tuple(sorted((v, k) for v, k in d.items() if k != 0))
            out[mm] = out.get(mm, 0) + c * e
        return SymPoly(out)

    def subs(self, values: Mapping[str, "SymPoly"]) -> "SymPoly":
        """Substitute polynomials for variables (negative powers need monomials)."""
        out = SymPoly()
        for m, c in self.terms.items():
            term = SymPoly.const(c)
            for v, e in m:
                if v in values:
                    term = term * (SymPoly.lift(values[v]) ** e)
                else:
                    term = term * SymPoly.var(v, e)
            out = out + term
        return out

    def rewrite_product(self, r: str, th: str, s: str) -> "SymPoly":
        """Replace r^a th^b by r^(a-b) s^b, i.e. introduce s = r*th."""
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            b = d.pop(th, 0)
            if b:
                d[r] = d.get(r, 0) - b
                d[s] = d.get(s, 0) + b
            mm = tuple(sorted((v, k) for v, k in d.items() if k != 0))
            out[mm] = out.get(mm, 0) + c
        return SymPoly(out)

    def coefficient(self, name: str, exp: int = 1) -> "SymPoly":
        """Coefficient of name^exp, as a polynomial in the other variables."""
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.get(name, 0) != exp:
                continue
            d.pop(name, None)
            mm = tuple(sorted(d.items()))
            out[mm] = out.get(mm, 0) + c
        return SymPoly(out)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate with numbers or Intervals substituted for every variable."""
        total = None
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                x = values[v]
                term = term * (x ** e)
            total = term if total is None else total + term
        return Fraction(0) if total is None else total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda kv: (-sum(abs(e) for _, e in kv[0]), kv[0])):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def sym(name: str) -> SymPoly:
    return SymPoly.var(name)


class SymMatrix:
    """2x2 matrix of SymPoly entries."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(SymPoly.lift(x) for x in row) for row in rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __mul__(self, other):
        if isinstance(other, SymMatrix):
            A, B = self.rows, other.rows
            return SymMatrix([[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)])
        return SymMatrix([[x * other for x in row] for row in self.rows])

    def __rmul__(self, other):
        return SymMatrix([[other * x for x in row] for row in self.rows])

    def __add__(self, other):
        return SymMatrix([[self.rows[i][j] + other.rows[i][j] for j in range(2)] for i in range(2)])

    def __sub__(self, other):
        return SymMatrix([[self.rows[i][j] - other.rows[i][j] for j in range(2)] for i in range(2)])

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and self.rows == other.rows

    def det(self) -> SymPoly:
        (a, b), (c, d) = self.rows
        return a * d - b * c

    def adjugate(self) -> "SymMatrix":
        (a, b), (c, d) = self.rows
        return SymMatrix([[d, -b], [-c, a]])

    def inverse(self) -> "SymMatrix":
        """Inverse when the determinant is a single monomial."""
        det = self.det()
        return SymMatrix([[x / det for x in row] for row in self.adjugate().rows])

    def map(self, fn) -> "SymMatrix":
        return SymMatrix([[fn(x) for x in row] for row in self.rows])

    def subs(self, values) -> "SymMatrix":
        return self.map(lambda x: x.subs(values))

    def first_difference(self, other: "SymMatrix"):
        for i in range(2):
            for j in range(2):
                if self.rows[i][j] != other.rows[i][j]:
                    return (i + 1, j + 1), self.rows[i][j], other.rows[i][j]
        return None

    def __repr__(self):
        return f"SymMatrix({[[repr(x) for x in row] for row in self.rows]})"


def identity_matrix() -> SymMatrix:
    return SymMatrix([[1, 0], [0, 1]])


@dataclass(frozen=True)
class Interval:
    """Closed interval with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        x = Fraction(x)
        return cls(x, x)

    @staticmethod
    def lift(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval.point(x)

    def __add__(self, other):
        o = Interval.lift(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.lift(other))

    def __rsub__(self, other):
        return Interval.lift(other) - self

    def __mul__(self, other):
        o = Interval.lift(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains 0")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * Interval.lift(other).reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return (self ** (-k)).reciprocal()
        if k == 0:
            return Interval.point(1)
        a, b = self.lo ** k, self.hi ** k
        if k % 2 == 0:
            if self.lo <= 0 <= self.hi:
                return Interval(Fraction(0), max(a, b))
            return Interval(min(a, b), max(a, b))
        return Interval(a, b)

    def sign(self) -> int:
        """+1 or -1 when the sign is determined, else 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    def split(self) -> tuple["Interval", "Interval"]:
        mid = (self.lo + self.hi) / 2
        return Interval(self.lo, mid), Interval(mid, self.hi)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo
