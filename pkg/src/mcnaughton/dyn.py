"""Orbits, denominator permutations and statistical diagnostics for B_lm."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded
from .geom import Point, Polygon, denominator, fmt_q
from .gens import Family, FamilyParams, R2_squared, build_B, build_R1
from .mvfun import PwlFunction, integrate, pullback, projection
from .pwl import LatticeStepper, inverse

# -- exact orbits ----------------------------------------------------------


def orbit(params: FamilyParams, p: Point, k: int) -> list[Point]:
    """p, B(p), ..., B^k(p), exactly."""
    p = Point(Fraction(p[0]), Fraction(p[1]))
    D = denominator(p)
    X, Y = int(p.x * D), int(p.y * D)
    fam = Family(params)
    out = [p]
    for _ in range(k):
        X, Y = fam.apply_lattice(X, Y, D)
        out.append(Point(Fraction(X, D), Fraction(Y, D)))
    return out


@dataclass(frozen=True)
class DenominatorClass:
    d: int
    points: tuple[Point, ...]

    def __len__(self):
        return len(self.points)


def denominator_class(d: int) -> DenominatorClass:
    """All points of the square whose coordinates have lcm denominator d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    pts = []
    for a in range(d + 1):
        ga = math.gcd(a, d)
        for b in range(d + 1):
            if math.gcd(ga, b) == 1:
                pts.append(Point(Fraction(a, d), Fraction(b, d)))
    return DenominatorClass(d, tuple(pts))


@dataclass
class Permutation:
    d: int
    points: tuple[Point, ...]
    image: list[int]
    cycles: list[list[int]] = field(default_factory=list)
    bijective: bool = False
    preserves_denominator: bool = False

    @property
    def cycle_lengths(self) -> list[int]:
        return sorted(len(c) for c in self.cycles)

    @property
    def all_periodic(self) -> bool:
        return self.bijective and sum(len(c) for c in self.cycles) == len(self.points)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "size": len(self.points),
            "bijective": self.bijective,
            "preserves_denominator": self.preserves_denominator,
            "cycle_lengths": self.cycle_lengths,
            "cycles": [[f"({fmt_q(self.points[i].x)},{fmt_q(self.points[i].y)})" for i in c] for c in self.cycles],
        }


def _cycles(image: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(image)
    out = []
    for s in range(len(image)):
        if seen[s]:
            continue
        cyc = []
        i = s
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = image[i]
        out.append(cyc)
    return out


@lru_cache(maxsize=None)
def _inverse_steppers():
    return LatticeStepper(inverse(build_R1())), LatticeStepper(inverse(R2_squared()))


def _apply_inverse_lattice(params: FamilyParams, X: int, Y: int, D: int) -> tuple[int, int]:
    s1, s2 = _inverse_steppers()
    for _ in range(2 * params.m):
        X, Y = s2.step(X, Y, D)
    for _ in range(3 * params.l):
        X, Y = s1.step(X, Y, D)
    return X, Y


def perm_Ad(params: FamilyParams, d: int, budget: int = 1_000_000, use_inverse: bool = False) -> Permutation:
    """The permutation induced on the denominator class A_d, with cycles."""
    cls = denominator_class(d)
    if len(cls) > budget:
        raise BudgetExceeded(f"|A_{d}| = {len(cls)} exceeds {budget}")
    index = {(int(p.x * d), int(p.y * d)): i for i, p in enumerate(cls.points)}
    fam = Family(params)
    image = []
    preserves = True
    for p in cls.points:
        X, Y = int(p.x * d), int(p.y * d)
        if use_inverse:
            X, Y = _apply_inverse_lattice(params, X, Y, d)
        else:
            X, Y = fam.apply_lattice(X, Y, d)
        j = index.get((X, Y))
        if j is None:
            preserves = False
            image.append(-1)
        else:
            image.append(j)
    bij = preserves and len(set(image)) == len(image)
    perm = Permutation(d, cls.points, image, bijective=bij, preserves_denominator=preserves)
    if bij:
        perm.cycles = _cycles(image)
    return perm


# -- float diagnostics -----------------------------------------------------

@lru_cache(maxsize=None)
def float_family(params: FamilyParams):
    from .fastmap import FloatFamily

    return FloatFamily(params)


@lru_cache(maxsize=None)
def _ftable(f: PwlFunction):
    from .fastmap import function_table

    return function_table(f)


def _seed_point(rng: np.random.Generator) -> tuple[float, float]:
    return float(rng.uniform(0.001, 0.999)), float(rng.uniform(0.001, 0.999))


@dataclass
class BirkhoffResult:
    averages: np.ndarray
    stride: int
    final: float
    target: Fraction
    kinks: int

    @property
    def error(self) -> float:
        return abs(self.final - float(self.target))


def birkhoff(params: FamilyParams, observable: PwlFunction, p0, N: int, stride: int = 1000) -> BirkhoffResult:
    """Running time averages (1/n) sum f(B^k p0), sampled every ``stride`` steps."""
    from .fastmap import birkhoff_kernel

    stride = max(1, min(stride, N))
    ff = float_family(params)
    out, kinks = birkhoff_kernel(float(p0[0]), float(p0[1]), N, stride, *ff.maps(), *_ftable(observable).arrays())
    final = float(out[-1]) if len(out) else float("nan")
    return BirkhoffResult(out, stride, final, integrate(observable), int(kinks))


@dataclass
class LyapunovEstimate:
    lam1: float
    lam2: float
    n: int
    kinks: int = 0
    stderr: Optional[float] = None

    @property
    def total(self) -> float:
        return self.lam1 + self.lam2

    def to_json(self) -> dict:
        return {"lambda1": self.lam1, "lambda2": self.lam2, "sum": self.total, "n": self.n,
                "stderr": self.stderr, "kinks": self.kinks}


def lyapunov(params: FamilyParams, p0, N: int) -> LyapunovEstimate:
    from .fastmap import lyapunov_kernel

    s1, s2, kinks = lyapunov_kernel(float(p0[0]), float(p0[1]), N, *float_family(params).maps())
    l1, l2 = s1 / N, s2 / N
    if l2 > l1:
        l1, l2 = l2, l1
    return LyapunovEstimate(float(l1), float(l2), N, int(kinks))


def lyapunov_seeds(params: FamilyParams, N: int, seeds: Sequence[int]) -> dict:
    ests = []
    for s in seeds:
        ests.append(lyapunov(params, _seed_point(np.random.default_rng(s)), N))
    l1 = np.array([e.lam1 for e in ests])
    sums = np.array([e.total for e in ests])
    se = float(l1.std(ddof=1) / math.sqrt(len(l1))) if len(l1) > 1 else float("nan")
    return {
        "estimates": [e.to_json() for e in ests],
        "lambda1_mean": float(l1.mean()),
        "lambda1_stderr": se,
        "max_abs_sum": float(np.abs(sums).max()),
        "lambda1_positive_3se": bool(l1.mean() > 3 * se),
    }


@dataclass(frozen=True)
class DensitySpec:
    """Piecewise-constant density on the n x n grid; values[i][j] on cell
    [i/n, (i+1)/n] x [j/n, (j+1)/n]."""

    n: int
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if any(v < 0 for row in self.values for v in row):
            raise ValueError("density must be nonnegative")
        if sum(v for row in self.values for v in row) != self.n * self.n:
            raise ValueError("density must integrate to 1")

    @classmethod
    def uniform(cls) -> "DensitySpec":
        return cls(1, ((Fraction(1),),))

    @classmethod
    def box(cls, n: int, i0: int, i1: int, j0: int, j1: int) -> "DensitySpec":
        """Uniform on the union of grid cells i0 <= i < i1, j0 <= j < j1."""
        mass = Fraction(n * n, (i1 - i0) * (j1 - j0))
        return cls(n, tuple(tuple(mass if i0 <= i < i1 and j0 <= j < j1 else Fraction(0) for j in range(n)) for i in range(n)))

    def cell(self, i: int, j: int) -> Polygon:
        n = self.n
        return Polygon.of((Fraction(i, n), Fraction(j, n)), (Fraction(i + 1, n), Fraction(j, n)),
                          (Fraction(i + 1, n), Fraction(j + 1, n)), (Fraction(i, n), Fraction(j + 1, n)))

    def integral_against(self, f: PwlFunction) -> Fraction:
        total = Fraction(0)
        for i, row in enumerate(self.values):
            for j, v in enumerate(row):
                if v:
                    total += v * integrate(f, self.cell(i, j))
        return total


@dataclass
class MixingReport:
    values: list[float]
    target: Fraction
    exact: dict

    @property
    def discrepancies(self) -> list[float]:
        return [abs(v - float(self.target)) for v in self.values]

    def first_below(self, tol: float) -> Optional[int]:
        for k, d in enumerate(self.discrepancies):
            if d < tol:
                return k
        return None

    def to_json(self) -> dict:
        return {
            "target": fmt_q(self.target),
            "values": self.values,
            "discrepancies": self.discrepancies,
            "exact": {str(k): fmt_q(v) for k, v in self.exact.items()},
        }


def mixing_probe(params: FamilyParams, density: DensitySpec, f: PwlFunction, kmax: int,
                 samples: int = 200_000, seed: int = 0, exact_k: int = 0) -> MixingReport:
    """Estimates of the integral of f o B^k against the density, k = 0..kmax.

    The sample cloud is stratified: each grid cell with positive mass gets
    samples in proportion to its mass, spread over a jittered sub-grid.
    ``exact_k`` additionally computes the first few terms exactly by
    pulling f back through the materialized B.
    """
    from .fastmap import mixing_kernel

    rng = np.random.default_rng(seed)
    n = density.n
    xs, ys, ws = [], [], []
    for i, row in enumerate(density.values):
        for j, v in enumerate(row):
            if not v:
                continue
            mass = float(v) / (n * n)
            cnt = max(1, int(round(samples * mass)))
            side = max(1, int(math.isqrt(cnt)))
            cnt = side * side
            gi, gj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
            u = (gi.ravel() + rng.random(cnt)) / side
            w = (gj.ravel() + rng.random(cnt)) / side
            xs.append((i + u) / n)
            ys.append((j + w) / n)
            ws.append(np.full(cnt, mass / cnt))
    X, Y, W = np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)
    vals = mixing_kernel(X, Y, W, kmax, *float_family(params).maps(), *_ftable(f).arrays())
    exact = {}
    g = f
    for k in range(exact_k + 1):
        if k > 0:
            g = pullback(g, build_B(params))
        exact[k] = density.integral_against(g)
    return MixingReport([float(v) for v in vals], integrate(f), exact)


def devaney_report(params: FamilyParams, dmax: int = 24, grid: int = 32, steps: int = 10_000_000,
                   pairs: int = 1000, horizon: int = 10_000, seed: int = 0, sep: float = 1e-9) -> dict:
    """Proxies for the three Devaney conditions."""
    from .fastmap import coverage_kernel, separation_kernel

    periodic = {}
    for d in range(1, dmax + 1):
        perm = perm_Ad(params, d)
        periodic[d] = perm.all_periodic
    rng = np.random.default_rng(seed)
    ff = float_family(params)
    x0, y0 = _seed_point(rng)
    counts, filled_at = coverage_kernel(x0, y0, steps, grid, *ff.maps())
    covered = int((counts > 0).sum())
    xa = rng.uniform(0.001, 0.999, pairs)
    ya = rng.uniform(0.001, 0.999, pairs)
    ang = rng.uniform(0, 2 * np.pi, pairs)
    xb = np.clip(xa + sep * np.cos(ang), 0, 1)
    yb = np.clip(ya + sep * np.sin(ang), 0, 1)
    times = separation_kernel(xa, ya, xb, yb, horizon, 0.25, *ff.maps())
    sens = float((times >= 0).mean())
    return {
        "periodic_dense": {"dmax": dmax, "all_periodic": all(periodic.values())},
        "transitivity": {"grid": grid, "steps": steps, "cells_visited": covered,
                         "all_visited": covered == grid * grid, "filled_at_step": int(filled_at)},
        "sensitivity": {"pairs": pairs, "initial_separation": sep, "horizon": horizon, "threshold": 0.25,
                        "fraction_separated": sens,
                        "median_steps": float(np.median(times[times >= 0])) if (times >= 0).any() else None},
        "passed": all(periodic.values()) and covered == grid * grid and sens >= 0.95,
    }


def shadow_check(params: FamilyParams, points: Sequence[Point], steps: int) -> dict:
    """Largest one-step discrepancy between the float kernel and exact stepping.

    Each exact orbit point is converted to floats and pushed one step by the
    kernel; the result is compared with the next exact point.  Free-running
    float orbits diverge exponentially, so this is the meaningful check.
    """
    from .fastmap import one_step_batch

    ff = float_family(params)
    worst = 0.0
    for p in points:
        orb = orbit(params, p, steps)
        xs = np.array([float(q.x) for q in orb[:-1]])
        ys = np.array([float(q.y) for q in orb[:-1]])
        ox, oy = one_step_batch(xs, ys, *ff.maps())
        ex = np.array([float(q.x) for q in orb[1:]])
        ey = np.array([float(q.y) for q in orb[1:]])
        worst = max(worst, float(np.max(np.hypot(ox - ex, oy - ey))))
    return {"points": len(points), "steps": steps, "max_one_step_error": worst}


def projections():
    return projection(1), projection(2)
