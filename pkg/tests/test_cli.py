"""CLI surface: subcommands, exit codes, reproducibility."""

import json
import subprocess
import sys

import pytest

from conftest import VERILOG_ADDER2
from rcimflow.cli import main


@pytest.fixture()
def adder_file(tmp_path):
    path = tmp_path / "add2.v"
    path.write_text(VERILOG_ADDER2)
    return path


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_recipes_fifteen_lines(capsys):
    code, out, err = run_cli(["recipes", "--options", "ba,rf,rw"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 15
    assert lines[0] == "ba" and lines[-1] == "rw,rf,ba"


def test_recipes_json(capsys):
    code, out, _ = run_cli(["recipes", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert len(data["recipes"]) == 64


def test_unknown_flag_exit_2():
    proc = subprocess.run(
        [sys.executable, "-m", "rcimflow.cli", "recipes", "--bogus"],
        capture_output=True,
    )
    assert proc.returncode == 2


def test_synth_emits_aiger(adder_file, capsys, tmp_path):
    out_path = tmp_path / "out.aag"
    profile_path = tmp_path / "prof.json"
    code, _, _ = run_cli(
        ["synth", adder_file, "--recipe", "rw,ba", "-o", out_path,
         "--profile", profile_path],
        capsys,
    )
    assert code == 0
    from rcimflow.frontend import parse_aiger, parse_verilog_subset
    from rcimflow.aig import equivalent

    g1 = parse_verilog_subset(VERILOG_ADDER2).to_aig()
    g2 = parse_aiger(out_path.read_bytes())
    assert equivalent(g1, g2)
    prof = json.loads(profile_path.read_text())
    assert prof["totals"]["gates"] > 0


def test_characterize(adder_file, capsys):
    code, out, _ = run_cli(["characterize", adder_file], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["depth"] >= 1
    assert sum(data["nand2"]) == data["totals"]["nand2"]


def test_map_and_simulate(adder_file, capsys, tmp_path):
    code, out, _ = run_cli(["map", adder_file, "--topology", "8KBx3"], capsys)
    assert code == 0
    assert "m0" in out or "m1" in out

    trace = tmp_path / "trace.txt"
    code, out, _ = run_cli(
        ["simulate", adder_file, "--topology", "4KBx1", "--trace", trace], capsys
    )
    assert code == 0
    data = json.loads(out)
    assert data["passed"] and data["mismatches"] == []
    assert "NAND2" in trace.read_text() or "NOR2" in trace.read_text()


def test_estimate(adder_file, capsys):
    code, out, _ = run_cli(
        ["estimate", adder_file, "--topology", "8KBx1", "--recipe", "ba"], capsys
    )
    assert code == 0
    data = json.loads(out)
    assert data["metrics"]["cycles"] >= 1
    assert data["inductor"]["L_nH"] > 0


def test_calibrate(capsys):
    code, out, _ = run_cli(["calibrate"], capsys)
    assert code == 0
    data = json.loads(out)
    assert len(data["residuals"]) == 18
    assert data["identity_check"]["flagged"] == []


def test_explore_file_output_and_exit(adder_file, capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, _ = run_cli(
        ["explore", adder_file, "-o", out_path, "--jobs", "1"], capsys
    )
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["signoff"]["passed"]
    assert data["best"]["topology"]


def test_explore_reproducible_bytes(adder_file, capsys, tmp_path):
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for p in (p1, p2):
        code, _, _ = run_cli(
            ["explore", adder_file, "-o", p, "--jobs", "1", "--seed", "7"], capsys
        )
        assert code == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_explore_csv(adder_file, capsys):
    code, out, _ = run_cli(
        ["explore", adder_file, "--format", "csv", "--no-signoff", "--jobs", "1"],
        capsys,
    )
    assert code == 0
    header = out.splitlines()[0]
    assert header.startswith("circuit,recipe")


def test_domain_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.v"
    bad.write_text("module t(a, y); input a; output y;\nalways @(a) y = a;\nendmodule")
    code, out, err = run_cli(["characterize", bad], capsys)
    assert code == 1
    assert "UnsupportedConstruct" in err


def test_usage_error_exit_2(adder_file, capsys):
    code, _, err = run_cli(["map", adder_file, "--topology", "NOPE"], capsys)
    assert code == 2


def test_error_json_flag(tmp_path, capsys):
    bad = tmp_path / "bad.v"
    bad.write_text("module t(a, y); input a; output y;\nalways @(a) y = a;\nendmodule")
    code, out, err = run_cli(["--error-json", "characterize", bad], capsys)
    assert code == 1
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "UnsupportedConstruct"


def test_explore_with_explicit_library_file(adder_file, capsys, tmp_path):
    from rcimflow.costmodel import DATA_DIR

    out_path = tmp_path / "rep.json"
    code, _, _ = run_cli(
        ["explore", adder_file, "--library", DATA_DIR / "default.topo",
         "--calibration", DATA_DIR / "default.cal", "-o", out_path,
         "--jobs", "1"],
        capsys,
    )
    assert code == 0
    assert json.loads(out_path.read_text())["signoff"]["passed"]


def test_library_env_var(adder_file, capsys, monkeypatch):
    from rcimflow.cli import ENV_LIBRARY
    from rcimflow.costmodel import DATA_DIR

    monkeypatch.setenv(ENV_LIBRARY, str(DATA_DIR / "default.topo"))
    code, out, _ = run_cli(["estimate", adder_file, "--topology", "4KBx1"], capsys)
    assert code == 0
    assert json.loads(out)["topology"] == "4KBx1"


def test_trends_flag(adder_file, capsys):
    code, out, err = run_cli(
        ["explore", adder_file, "--exhaustive", "--no-signoff", "--trends",
         "--jobs", "1"],
        capsys,
    )
    assert code == 0
    assert "trend report" in err
    data = json.loads(out)
    assert "trends" in data
