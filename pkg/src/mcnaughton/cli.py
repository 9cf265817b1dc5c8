"""Command-line entry point.

JSON goes to stdout, a short human summary to stderr.  Exit codes: 0 ok,
1 gate failure, 2 budget exhausted, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import BudgetExceeded, ConstructionGateFailed, McNaughtonError, TermSyntaxError

EXIT_OK, EXIT_GATE, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- output ----------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with floats written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (np.bool_,)):
        return json.dumps(bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(str(obj))


def emit(data, summary: str, passed: bool = True) -> int:
    sys.stdout.write(dumps(data) + "\n")
    sys.stderr.write(summary + "\n")
    return EXIT_OK if passed else EXIT_GATE


def _read_json(path):
    return json.loads(Path(path).read_text())


def _write(path, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _params(args):
    from .gens import FamilyParams

    if args.l < 1 or args.m < 1:
        raise UsageError("--l and --m must be >= 1")
    return FamilyParams(args.l, args.m)


def _point(s: str):
    from .geom import Point

    try:
        x, y = s.split(",")
        return Point(Fraction(x.strip()), Fraction(y.strip()))
    except ValueError as e:
        raise UsageError(f"bad point {s!r}; expected x,y with rationals") from e


def _load_map(path):
    from .pwl import map_from_json

    return map_from_json(_read_json(path))


def _load_function(args):
    from .mvfun import function_from_json
    from .synth import parse, term_to_pwl

    if getattr(args, "term", None):
        text = args.term
        if Path(text).exists():
            text = Path(text).read_text()
        return term_to_pwl(parse(text.strip()))
    if getattr(args, "fun", None):
        return function_from_json(_read_json(args.fun))
    raise UsageError("give --term or --fun")


# -- commands --------------------------------------------------------------

def cmd_gens(args) -> int:
    from .gens import R2_squared, build_B, build_R1, build_R2, verify_report
    from .pwl import map_to_json

    if args.action == "verify":
        rep = verify_report()
        return emit(rep, f"generators: {'PASS' if rep['passed'] else 'FAIL'}", rep["passed"])
    maps = {"R1": build_R1, "R2": build_R2, "R2sq": R2_squared}
    S = build_B(_params(args)) if args.which == "B" else maps[args.which]()
    data = map_to_json(S)
    if args.out:
        _write(args.out, json.dumps(data, indent=1))
        return emit({"map": args.which, "cells": len(S), "out": args.out}, f"wrote {args.which} ({len(S)} cells)")
    return emit(data, f"{args.which}: {len(S)} cells")


def cmd_pwl(args) -> int:
    from .pwl import compose, inverse, map_to_json, mcnaughton_report, power, validate

    S = _load_map(args.map)
    if args.action == "report":
        rep = mcnaughton_report(S).to_json()
        rep["violations"] = validate(S)
        ok = rep["is_mcnaughton_homeo"] and not rep["violations"]
        return emit(rep, f"McNaughton homeomorphism: {ok}", ok)
    if args.action == "compose":
        T = compose(S, _load_map(args.then), budget=args.budget)
    elif args.action == "power":
        T = power(S, args.k, budget=args.budget)
    else:
        T = inverse(S)
    data = map_to_json(T)
    if args.out:
        _write(args.out, json.dumps(data, indent=1))
        return emit({"cells": len(T), "out": args.out}, f"wrote {len(T)} cells")
    return emit(data, f"{len(T)} cells")


def cmd_state(args) -> int:
    from .gens import build_B
    from .mvfun import b2_probe, integrate, pullback

    f = _load_function(args)
    if args.action == "integrate":
        v = integrate(f)
        return emit({"integral": str(v)}, f"m(f) = {v}")
    if args.action == "b2":
        vals = b2_probe(f, args.kmax)
        return emit({"k": list(range(1, args.kmax + 1)), "m": [str(v) for v in vals]}, f"m(kf), k <= {args.kmax}")
    P = _params(args)
    a, b = integrate(f), integrate(pullback(f, build_B(P)))
    return emit({"m_f": str(a), "m_f_after_B": str(b), "equal": a == b}, f"invariant: {a == b}", a == b)


def cmd_twist(args) -> int:
    from .twist import check_conjugacy_R1, check_conjugacy_R2

    if args.which == "R1":
        rep = check_conjugacy_R1(args.l, args.samples, args.seed)
    else:
        rep = check_conjugacy_R2(args.m, args.samples, args.seed)
    rep = dict(rep)
    rep.pop("failures", None)
    return emit(rep, f"conjugacy {args.which}: {'PASS' if rep['passed'] else 'FAIL'}", rep["passed"])


def cmd_cone(args) -> int:
    from .cone import invariance_probe, lemma7_certify, lemma7_replay

    if args.action == "replay":
        rep = lemma7_replay(raise_on_mismatch=False)
        rep.pop("final_matrix")
        return emit(rep, f"replay: {'PASS' if rep['passed'] else 'FAIL'}", rep["passed"])
    if args.action == "certify":
        rep = lemma7_certify(Fraction(args.pi_lo), Fraction(args.pi_hi), max_depth=args.max_depth)
        return emit(rep, f"certificate: {'PASS' if rep['passed'] else 'FAIL'}", rep["passed"])
    rep = invariance_probe(_params(args), args.samples, args.horizon, args.seed).to_json()
    ok = rep["containment_failures"] == 0
    return emit(rep, f"probe: {rep['containment_failures']} containment failures, "
                     f"strict fraction {rep['strict_fraction']:.4f}", ok)


def cmd_dyn(args) -> int:
    from . import dyn
    from .geom import fmt_q

    P = _params(args)
    a = args.action
    if a == "orbit":
        pts = dyn.orbit(P, _point(args.point), args.k)
        return emit({"orbit": [[fmt_q(p.x), fmt_q(p.y)] for p in pts]}, f"{len(pts)} points")
    if a == "perm":
        perm = dyn.perm_Ad(P, args.d, budget=args.budget)
        ok = perm.bijective and perm.preserves_denominator
        return emit(perm.to_json(), f"A_{args.d}: {len(perm.points)} points, bijective {perm.bijective}", ok)
    if a == "birkhoff":
        f = dyn.projections()[args.coord - 1]
        p0 = dyn._seed_point(np.random.default_rng(args.seed))
        res = dyn.birkhoff(P, f, p0, args.N, args.stride)
        return emit({"final": res.final, "target": str(res.target), "error": res.error, "kinks": res.kinks,
                     "stride": res.stride, "averages": res.averages.tolist()},
                    f"average {res.final:.6f} (target {res.target})")
    if a == "lyapunov":
        rep = dyn.lyapunov_seeds(P, args.N, range(args.seed, args.seed + args.seeds))
        return emit(rep, f"lambda1 = {rep['lambda1_mean']:.6f} +- {rep['lambda1_stderr']:.2g}")
    if a == "mixing":
        dens = dyn.DensitySpec.box(args.grid, 0, 1, 0, 1)
        rep = dyn.mixing_probe(P, dens, dyn.projections()[args.coord - 1], args.kmax, args.samples, args.seed)
        data = rep.to_json()
        data["first_k_below"] = rep.first_below(args.tol)
        return emit(data, f"discrepancy below {args.tol} at k = {data['first_k_below']}")
    if a == "devaney":
        rep = dyn.devaney_report(P, steps=args.steps, pairs=args.pairs, seed=args.seed)
        return emit(rep, f"devaney proxies: {'PASS' if rep['passed'] else 'FAIL'}", rep["passed"])
    # leaf
    from .leaves import LeafSegment, crossing_report, leaf_iterate, render_svg

    if args.start and args.end:
        seed = LeafSegment((_point(args.start), _point(args.end)), args.orientation)
    else:
        from .leaves import horizontal_seed

        seed = horizontal_seed("P1", Fraction(1, 3), Fraction(1, 2))
    leaf = leaf_iterate(P, seed, args.k, "forward" if args.orientation == "unstable" else "backward",
                        cap=args.budget)
    if args.svg:
        _write(args.svg, render_svg([leaf]))
    data = {"vertices": len(leaf), "length": leaf.length(), "crossings": crossing_report(leaf),
            "points": [[fmt_q(p.x), fmt_q(p.y)] for p in leaf.points] if args.points else None}
    return emit(data, f"leaf with {len(leaf)} vertices, length {leaf.length():.6g}")


def cmd_synth(args) -> int:
    from .mvfun import projection, pullback
    from .synth import parse, synth_function, to_text, verify_term

    f = pullback(projection(args.coord), _load_map(args.map))
    if args.action == "from-map":
        res = synth_function(f, dmax=args.dmax, budget=args.budget)
        text = to_text(res.term, limit=args.max_chars)
        if text.endswith("..."):
            raise BudgetExceeded(f"term text exceeds {args.max_chars} characters")
        data = res.to_json()
        if args.out:
            _write(args.out, text + "\n")
            data["out"] = args.out
        else:
            data["term"] = text
        return emit(data, f"term: {res.dag_nodes} shared nodes, verified to d <= {res.verified_dmax}")
    t = parse(Path(args.term).read_text().strip())
    ok, bad = verify_term(t, f, args.dmax)
    return emit({"equal": ok, "mismatches": bad, "dmax": args.dmax}, f"term matches: {ok}", ok)


def cmd_verify_all(args) -> int:
    from .acceptance import run_all

    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError as e:
            raise UsageError("--only takes a comma-separated list of criterion numbers") from e
    P = _params(args)
    log = (lambda s: sys.stderr.write(s + "\n")) if not args.quiet else None
    verdict = run_all(P.l, P.m, only=only, svg_dir=args.svg_dir, log=log)
    if args.no_timing:
        for r in verdict["criteria"]:
            r.pop("seconds", None)
    ok = verdict["passed_literal"] if args.strict else verdict["passed"]
    return emit(verdict, f"verdict: {'PASS' if ok else 'FAIL'} (literal failures: {verdict['literal_failures']})", ok)


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--l", type=int, default=1, help="R1 exponent multiplier (>= 1)")
    common.add_argument("--m", type=int, default=1, help="R2 exponent multiplier (>= 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="accepted for compatibility; JSON is always on stdout")

    p = _Parser(prog="mcnaughton", description="McNaughton homeomorphisms of the square: exact and numerical tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gens", parents=[common], help="generators R1, R2 and the family B")
    g.add_argument("action", choices=["verify", "export"])
    g.add_argument("--which", choices=["R1", "R2", "R2sq", "B"], default="R1")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gens)

    w = sub.add_parser("pwl", parents=[common], help="operations on map files")
    w.add_argument("action", choices=["report", "compose", "power", "inverse"])
    w.add_argument("--map", required=True)
    w.add_argument("--then", help="second map for compose (applied after --map)")
    w.add_argument("--k", type=int, default=2)
    w.add_argument("--budget", type=int, default=200_000)
    w.add_argument("--out")
    w.set_defaults(func=cmd_pwl)

    s = sub.add_parser("state", parents=[common], help="the Lebesgue state of a function")
    s.add_argument("action", choices=["integrate", "b2", "invariance"])
    s.add_argument("--term", help="term text or a file holding one")
    s.add_argument("--fun", help="function JSON file")
    s.add_argument("--kmax", type=int, default=16)
    s.set_defaults(func=cmd_state)

    t = sub.add_parser("twist", parents=[common], help="polar conjugacy checks")
    t.add_argument("--which", choices=["R1", "R2"], default="R1")
    t.add_argument("--samples", type=int, default=1000)
    t.set_defaults(func=cmd_twist)

    c = sub.add_parser("cone", parents=[common], help="cone computation replay, certificate, probe")
    c.add_argument("action", choices=["replay", "certify", "probe"])
    c.add_argument("--pi-lo", default="333/106")
    c.add_argument("--pi-hi", default="355/113")
    c.add_argument("--max-depth", type=int, default=40)
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--horizon", type=int, default=50)
    c.set_defaults(func=cmd_cone)

    d = sub.add_parser("dyn", parents=[common], help="orbits, permutations and statistics of B")
    d.add_argument("action", choices=["orbit", "perm", "birkhoff", "lyapunov", "leaf", "mixing", "devaney"])
    d.add_argument("--point", default="1/3,1/5")
    d.add_argument("--k", type=int, default=10)
    d.add_argument("--d", type=int, default=8)
    d.add_argument("--coord", type=int, choices=[1, 2], default=1)
    d.add_argument("--N", type=int, default=10**6)
    d.add_argument("--stride", type=int, default=1000)
    d.add_argument("--seeds", type=int, default=10)
    d.add_argument("--kmax", type=int, default=50)
    d.add_argument("--grid", type=int, default=8)
    d.add_argument("--samples", type=int, default=200_000)
    d.add_argument("--tol", type=float, default=0.05)
    d.add_argument("--steps", type=int, default=10**7)
    d.add_argument("--pairs", type=int, default=1000)
    d.add_argument("--start", help="leaf seed endpoint x,y (default: a horizontal segment in P1)")
    d.add_argument("--end")
    d.add_argument("--orientation", choices=["unstable", "stable"], default="unstable")
    d.add_argument("--svg")
    d.add_argument("--points", action="store_true", help="include leaf vertices in the JSON")
    d.add_argument("--budget", type=int, default=1_000_000)
    d.set_defaults(func=cmd_dyn)

    y = sub.add_parser("synth", parents=[common], help="terms for coordinate functions of a map")
    y.add_argument("action", choices=["from-map", "verify"])
    y.add_argument("--map", required=True)
    y.add_argument("--coord", type=int, choices=[1, 2], default=1)
    y.add_argument("--term", help="term file (verify)")
    y.add_argument("--out")
    y.add_argument("--dmax", type=int, default=16)
    y.add_argument("--budget", type=int, default=200_000, help="maximum number of triangles")
    y.add_argument("--max-chars", type=int, default=50_000_000)
    y.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--svg-dir")
    v.add_argument("--strict", action="store_true", help="fail on literal-threshold failures too")
    v.add_argument("--no-timing", action="store_true", help="omit wall-clock times (byte-identical output)")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, TermSyntaxError) as e:
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except (BudgetExceeded, MemoryError) as e:
        sys.stderr.write(f"budget exhausted: {e}\n")
        return EXIT_BUDGET
    except (ConstructionGateFailed, McNaughtonError) as e:
        sys.stderr.write(f"gate failure: {type(e).__name__}: {e}\n")
        return EXIT_GATE
    except (OSError, ValueError) as e:
        sys.stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
