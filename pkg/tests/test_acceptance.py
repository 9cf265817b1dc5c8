"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 6 and 9 have a literal reading that does not hold for the family
(see README); the literal tests are strict xfails carrying the measured
reason, and a corrected test checks the achievable statement.
"""
import functools

import pytest

from mcnaughton import acceptance as acc


@functools.lru_cache(maxsize=None)
def result(n):
    return acc.CRITERIA[n]()


def report(n, ok, label=""):
    r = result(n)
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:2d} {r['name']}{label} ({r['seconds']:.1f}s)")
    return ok


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 7, 8, 10, 11])
def test_criterion(n):
    assert report(n, result(n)["passed"]), result(n)


def test_criterion_6_corrected():
    r = result(6)
    assert r["containment_failures"] == 0
    report(6, r["passed"], " [literal, horizon 50]")
    assert report(6, r["corrected"]["passed"], " [kites excused, horizon 400]"), r["corrected"]


@pytest.mark.xfail(strict=True, reason=(
    "inside the twist kites the return map is a shear, so the cone containment "
    "matrix has a unit eigenvalue and is never strict; about 5% of orbits are "
    "still non-strict at horizon 50, and every such event starts in a kite"))
def test_criterion_6_literal():
    r = result(6)
    nonkite = [k for k in r["nonstrict_bcd_by_region"] if not k.split(":")[1].startswith("kite")]
    assert not nonkite
    assert report(6, r["passed"], " [literal]"), r["nonstrict_bcd_by_region"]


def test_criterion_9_corrected():
    r = result(9)
    assert r["exact_polylines"] and r["propagation"] and r["svg"]
    report(9, r["passed"], " [literal, nondecreasing length]")
    assert report(9, r["corrected"]["passed"], " [net growth]"), r["seeds"]


@pytest.mark.xfail(strict=True, reason=(
    "a leaf crossing a chart boundary can be shortened for one step in the "
    "Euclidean metric while it stays in the unstable cone; only net growth holds"))
def test_criterion_9_literal():
    r = result(9)
    assert report(9, r["passed"], " [literal]"), [s["ratios"] for s in r["seeds"]]
