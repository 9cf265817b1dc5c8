import json
import subprocess
import sys

import pytest

from mcnaughton.cli import dumps, main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_error_exit_64(capsys):
    code, _, err = run(["verify-all", "--l", "0"], capsys)
    assert code == 64 and "usage" in err
    code, _, _ = run(["nonsense"], capsys)
    assert code == 64


def test_verify_all_subset(capsys):
    code, out, _ = run(["verify-all", "--l", "1", "--m", "1", "--only", "1,2,5", "--no-timing", "--quiet"], capsys)
    data = json.loads(out)
    assert code == 0 and data["passed"] and [c["id"] for c in data["criteria"]] == [1, 2, 5]


def test_determinism(capsys, tmp_path):
    args = ["dyn", "birkhoff", "--N", "20000", "--stride", "5000", "--seed", "3"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args, capsys)
    assert a == b
    _, c, _ = run(["verify-all", "--only", "2", "--no-timing", "--quiet"], capsys)
    _, d, _ = run(["verify-all", "--only", "2", "--no-timing", "--quiet"], capsys)
    assert c == d


def test_synth_from_map_and_verify(capsys, tmp_path):
    m = tmp_path / "r1.json"
    t = tmp_path / "t1.luk"
    assert run(["gens", "export", "--which", "R1", "--out", str(m)], capsys)[0] == 0
    code, out, _ = run(["synth", "from-map", "--map", str(m), "--coord", "1", "--out", str(t)], capsys)
    assert code == 0 and json.loads(out)["verified_dmax"] == 16
    code, out, _ = run(["synth", "verify", "--term", str(t), "--map", str(m), "--dmax", "16"], capsys)
    assert code == 0 and json.loads(out)["equal"]


def test_gate_failure_exit_1(capsys, tmp_path):
    m = tmp_path / "r2.json"
    run(["gens", "export", "--which", "R2", "--out", str(m)], capsys)
    code, _, _ = run(["pwl", "report", "--map", str(m)], capsys)
    assert code == 1


def test_budget_exit_2(capsys, tmp_path):
    m = tmp_path / "r1.json"
    run(["gens", "export", "--which", "R1", "--out", str(m)], capsys)
    code, _, err = run(["pwl", "power", "--map", str(m), "--k", "6", "--budget", "10"], capsys)
    assert code == 2 and "budget" in err


def test_syntax_error_is_usage(capsys):
    code, _, err = run(["state", "integrate", "--term", "(x1 +"], capsys)
    assert code == 64 and "position 5" in err


def test_float_format():
    assert dumps(0.1) == "0.10000000000000001"
    assert dumps(1.0) == "1.0"
    assert json.loads(dumps({"a": [0.1, 2, True, None]})) == {"a": [0.1, 2, True, None]}


def test_console_script_module():
    r = subprocess.run([sys.executable, "-m", "mcnaughton.cli", "state", "integrate", "--term", "(x1 + x2)"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["integral"] == "5/6"
