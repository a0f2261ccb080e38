from __future__ import annotations

import csv
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from folnerfill.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run_cli(args, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report, out


def stable_part(report):
    return {k: v for k, v in report.items() if k != "run"}


def assert_no_floats(x):
    if isinstance(x, float):
        raise AssertionError(f"float {x} in report")
    if isinstance(x, dict):
        for v in x.values():
            assert_no_floats(v)
    if isinstance(x, list):
        for v in x:
            assert_no_floats(v)


def test_fill_bundled_instance_matches_golden(tmp_path):
    code, report, _ = run_cli(["fill", "--input", "bundled:z1_basic"], tmp_path)
    assert code == 0
    assert report["records"][0]["bound"] == "33/10"
    assert stable_part(report) == json.loads((GOLDEN / "fill_z1_basic.json").read_text())


def test_reports_are_reproducible(tmp_path):
    args = ["fill", "--group", "zd:2", "--seed", "5", "--count", "3"]
    _, a, pa = run_cli(args, tmp_path, "a.json")
    _, b, pb = run_cli(args, tmp_path, "b.json")
    assert stable_part(a) == stable_part(b)
    strip = lambda p: json.dumps(stable_part(json.loads(p.read_text())), sort_keys=True)
    assert strip(pa) == strip(pb)
    assert a["config_hash"] == b["config_hash"]
    _, c, _ = run_cli(["fill", "--group", "zd:2", "--seed", "6", "--count", "3"], tmp_path, "c.json")
    assert c["config_hash"] != a["config_hash"]


def test_reports_hold_exact_rationals_only(tmp_path):
    for cmd in (["fill"], ["stable", "--k", "2"], ["mixed", "--space", "odometer:1:12", "--epsilon", "1/2"],
                ["gap", "--group", "zd:2", "--count", "2"]):
        code, report, _ = run_cli(cmd, tmp_path)
        assert code == 0, cmd
        assert_no_floats(stable_part(report))


@pytest.mark.parametrize("cmd", [
    ["stable", "--k", "3", "--count", "3"],
    ["param", "--space", "odometer:1:12", "--k", "3", "--count", "3"],
    ["mixed", "--space", "odometer:1:12", "--epsilon", "1/2", "--count", "3"],
    ["shrink", "--group", "zd:2", "--target", "1/10", "--count", "3"],
    ["complete", "--count", "2", "--tolerance", "1/10"],
    ["decompose", "--chunks", "3"],
    ["oracle", "--input", "bundled:z1_basic", "--ball", "2"],
    ["gen", "--group", "zd:3", "--count", "2", "--degree", "2"],
])
def test_engines_exit_zero(cmd, tmp_path):
    code, report, _ = run_cli(cmd, tmp_path)
    assert code == 0 and report["summary"]["failed"] == 0


def test_oracle_value_on_bundled_instance(tmp_path):
    code, report, out = run_cli(["oracle", "--input", "bundled:z1_basic", "--ball", "2"], tmp_path)
    rec = report["records"][0]
    assert code == 0 and rec["value"] == "1" and rec["certified"]
    rows = list(csv.DictReader(out.with_suffix(".csv").open()))
    assert rows[0]["value"] == "1" and rows[0]["provenance"] == "bar-ball(2)"


def test_gap_csv_rows_have_nonnegative_slack(tmp_path):
    code, report, out = run_cli(["gap", "--group", "zd:2", "--count", "5", "--seed", "1"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader(out.with_suffix(".csv").open()))
    assert len(rows) == 5
    assert all(Fraction(r["slack"]) >= 0 and r["certified"] == "True" for r in rows)


def test_malformed_chain_file_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cycle": {"backend": "bar:Z^1:full", "degree": 1, "ring": "Q",
                                         "terms": [{"cell": [[0], [1]], "coef": 0.5}]}}))
    code = main(["fill", "--input", str(bad)])
    assert code == 2
    assert "$.cycle.terms[0].coef" in capsys.readouterr().err


def test_json_syntax_error_is_positioned(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n    ,}')
    assert main(["fill", "--input", str(bad)]) == 2
    assert "line 2, column 5" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["fill", "--epsilon", "0"],
    ["fill", "--epsilon", "0.1"],
    ["fill", "--group", "sl2"],
    ["param", "--k", "1"],
    ["mixed", "--space", "torus:3"],
    ["fill", "--input", "bundled:nope"],
])
def test_config_errors_exit_two(args, tmp_path):
    assert main(args + ["--out", str(tmp_path / "r.json")]) == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"group": "zd:2", "epsilon": "1/2", "count": 2}))
    code, report, _ = run_cli(["fill", "--config", str(cfg), "--epsilon", "1/4"], tmp_path)
    assert code == 0
    assert report["config"]["group"] == "zd:2" and report["config"]["epsilon"] == "1/4"
    assert len(report["records"]) == 2
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["fill", "--config", str(cfg)]) == 2


def test_verification_failure_exits_one(tmp_path, capsys):
    # a class that cannot be shrunk within a tiny box cap
    code, report, _ = run_cli(["shrink", "--target", "1/1000", "--k-cap", "4"], tmp_path)
    assert code == 1 and report["summary"]["failed"] == 1
    assert "verification failed" in capsys.readouterr().err


def test_stdin_stdout_pipe():
    inst = (Path(__file__).parents[1] / "src/folnerfill/data/z1_basic.json").read_text()
    proc = subprocess.run([sys.executable, "-m", "folnerfill.cli", "fill", "--input", "-"],
                          input=inst, capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["records"][0]["bound"] == "33/10"


def test_gen_output_feeds_fill(tmp_path):
    _, gen, out = run_cli(["gen", "--group", "zd:2", "--count", "2", "--seed", "9"], tmp_path, "gen.json")
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({"instances": [{k: r[k] for k in ("name", "cycle", "witness")}
                                              for r in gen["records"]]}))
    code, report, _ = run_cli(["fill", "--input", str(inst)], tmp_path)
    assert code == 0 and [r["name"] for r in report["records"]] == [r["name"] for r in gen["records"]]


def test_gen_report_pipes_into_fill(tmp_path):
    _, gen, _ = run_cli(["gen", "--group", "zd:2", "--count", "2", "--seed", "9"], tmp_path, "gen.json")
    code, report, _ = run_cli(["fill", "--input", str(tmp_path / "gen.json")], tmp_path)
    assert code == 0 and len(report["records"]) == 2


def test_oracle_on_torus_input(tmp_path):
    spec = tmp_path / "torus.json"
    spec.write_text(json.dumps({"complex": {"torus": 3}, "cycle": {
        "backend": "matrix:torus:3", "degree": 1, "ring": "Q", "terms": []}}))
    code, report, _ = run_cli(["oracle", "--input", str(spec)], tmp_path)
    assert code == 0 and report["records"][0]["value"] == "0"
