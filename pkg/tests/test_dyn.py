from fractions import Fraction as F

import numpy as np

from mcnaughton.dyn import (
    DensitySpec,
    birkhoff,
    denominator_class,
    devaney_report,
    lyapunov,
    lyapunov_seeds,
    mixing_probe,
    orbit,
    perm_Ad,
    shadow_check,
)
from mcnaughton.geom import denominator, pt
from mcnaughton.gens import FamilyParams, random_rational_point
from mcnaughton.mvfun import constant, projection


def test_orbit(p11):
    assert orbit(p11, pt("1/2", 0), 5) == [pt("1/2", 0)] * 6
    o = orbit(p11, pt("1/3", "1/3"), 6)
    assert o[:2] == [pt("1/3", "1/3"), pt("2/3", "2/3")]
    assert all(denominator(q) == 3 for q in o)


def test_denominator_classes():
    seen = set()
    for d in range(1, 9):
        cls = denominator_class(d)
        pts = set(cls.points)
        assert not pts & seen
        seen |= pts
        assert all(denominator(p) == d for p in pts)
    grid = {pt(F(a, d), F(b, d)) for d in range(1, 9) for a in range(d + 1) for b in range(d + 1)}
    assert seen == grid


def test_perm(p11):
    p1 = perm_Ad(p11, 1)
    assert len(p1.points) == 4 and p1.cycle_lengths == [1, 1, 1, 1]
    p2 = perm_Ad(p11, 2)
    assert len(p2.points) == 5
    for i, p in enumerate(p2.points):
        if p.x in (0, 1) or p.y in (0, 1):
            assert p2.image[i] == i
    for d in (7, 12, 24):
        perm = perm_Ad(p11, d)
        assert perm.bijective and sum(perm.cycle_lengths) == len(perm.points)
        inv = perm_Ad(p11, d, use_inverse=True)
        assert all(inv.image[perm.image[i]] == i for i in range(len(perm.points)))


def test_birkhoff(p11):
    r = birkhoff(p11, projection(1), (0.5, 0.0), 1000)
    assert abs(r.final - 0.5) < 1e-6
    r = birkhoff(p11, constant(1), (0.3, 0.4), 1000)
    assert abs(r.final - 1.0) < 1e-12
    r = birkhoff(p11, projection(1), (0.3141, 0.2718), 10**5)
    assert abs(r.final - 0.5) < 0.05


def test_lyapunov(p11):
    est = lyapunov(p11, (0.3141, 0.2718), 10**5)
    assert est.lam1 >= est.lam2 and abs(est.total) < 1e-6 and est.lam1 > 0.3
    fixed = lyapunov(p11, (0.5, 0.0), 1000)
    assert fixed.lam1 == 0 and fixed.lam2 == 0
    rep = lyapunov_seeds(p11, 10**4, range(4))
    assert rep["max_abs_sum"] < 1e-6


def test_mixing(p11):
    x = projection(1)
    u = mixing_probe(p11, DensitySpec.uniform(), x, 5, samples=40000)
    assert all(abs(v - 0.5) < 0.01 for v in u.values)
    box = DensitySpec.box(2, 0, 1, 0, 1)
    rep = mixing_probe(p11, box, x, 20, samples=40000, exact_k=1)
    assert rep.exact[0] == F(1, 4)
    assert abs(rep.values[0] - 0.25) < 0.01
    assert rep.first_below(0.05) is not None


def test_devaney_small(p11):
    rep = devaney_report(p11, dmax=8, grid=8, steps=10**5, pairs=100, horizon=1000)
    assert rep["passed"]


def test_shadow(p11, rng):
    pts = [random_rational_point(rng, 10**6) for _ in range(3)]
    rep = shadow_check(p11, pts, 20)
    assert rep["max_one_step_error"] < 1e-9
