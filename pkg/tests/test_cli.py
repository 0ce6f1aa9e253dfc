import json
import subprocess
import sys

import pytest

from goursat.cli import RunConfig, main, validate

WORKED = {"a": [1], "N": 10, "f": {"basis": "zzbar", "terms": [{"degree": 0, "coeffs": [1]}]}}


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_json(path):
    return json.loads(path.read_text())


def test_solve_worked_example_degenerate(tmp_path, capsys):
    cfg = write_config(tmp_path, WORKED)
    code = main(["solve", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 3
    assert "m=2" in capsys.readouterr().err
    rep = read_json(tmp_path / "o" / "report.json")
    assert rep["status"] == "degenerate_at(2)" and rep["degenerate_degree"] == 2
    (u2,) = [t for t in rep["u"]["terms"] if t["degree"] == 2]
    assert u2["coeffs"] == [[-0.125, -0.125], [0.25, 0.0], [-0.125, 0.125]]
    assert (tmp_path / "o" / "per_degree.csv").read_text().startswith("m,abs_det_M,norm_u,residual")


def test_solve_success_and_determinism(tmp_path):
    doc = {"a": ["1/2", -3, 2], "N": 14,
           "f": {"basis": "xy", "terms": [{"degree": 2, "coeffs": [1, "1/3", [0, 2]]}]},
           "c": {"basis": "zzbar", "terms": [{"degree": 0, "coeffs": ["1/4"]}]}}
    cfg = write_config(tmp_path, doc)
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
        outs.append(((out / "report.json").read_bytes(), (out / "per_degree.csv").read_bytes()))
    assert outs[0] == outs[1]
    rep = json.loads(outs[0][0])
    assert rep["status"] == "solved" and rep["residual_ok"] and rep["divisor"]["p"] == 2


def test_env_precision_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GOURSAT_PRECISION", "exact")
    cfg = write_config(tmp_path, dict(WORKED, N=3, precision="binary64"))
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["precision"] == "exact"
    (u2,) = [t for t in rep["u"]["terms"] if t["degree"] == 2]
    assert u2["coeffs"][1] == ["1/4", "0"]


def test_analyze_rational(tmp_path):
    assert main(["analyze", "--a", "1", "--mmax", "40", "--window", "10", "--out", str(tmp_path)]) == 0
    v = read_json(tmp_path / "verdict.json")
    assert v["lines"][0]["rational"] is True and v["lines"][0]["beta_exact"] == "1/4"
    assert v["tau"]["verdict"] == "vanishing" and v["tau"]["zero_determinants"][0] == 2
    assert (tmp_path / "tau_trend.csv").read_text().splitlines()[0] == "m,abs_det_M,root"


def test_analyze_irrational_certified(tmp_path):
    assert main(["analyze", "--a", "2", "--mmax", "200", "--window", "50", "--out", str(tmp_path)]) == 0
    v = read_json(tmp_path / "verdict.json")
    assert v["lines"][0]["rational"] is False and v["tau"]["verdict"] == "positive"


def test_detseq(tmp_path):
    assert main(["detseq", "--a", "0,2,1/2", "--mmax", "20", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "detseq.csv").read_text().splitlines()
    assert lines[0] == "m,abs_det_M,root,degenerate" and len(lines) == 22


def test_probe_and_precision_exit(tmp_path):
    assert main(["probe", "--liouville", "2", "--m", "10", "--out", str(tmp_path)]) == 0
    row = (tmp_path / "probe.csv").read_text().splitlines()[1].split(",")
    assert 5e-10 <= float(row[1]) <= float(row[2]) <= 8e-10
    assert main(["probe", "--liouville", "1", "--m", str(10 ** 11), "--out", str(tmp_path)]) == 4


def test_leray(capsys):
    assert main(["leray", "--lambda", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["beta"] == 0 and doc["a"] == 0
    assert main(["leray", "--lambda", "2"]) == 2


def test_demo_divergence(tmp_path):
    assert main(["demo-divergence", "--out", str(tmp_path)]) == 0
    doc = read_json(tmp_path / "divergence.json")
    assert doc["max_rel_err_vs_closed_form"] <= 1e-8
    assert doc["blowup_ratio"] >= 1e6
    rows = (tmp_path / "divergence.csv").read_text().splitlines()
    assert rows[0] == "n,abs_b_solver,abs_b_closed_form,rel_err,root" and len(rows) == 30


@pytest.mark.parametrize("argv", [
    ["solve", "--a", "1,1,2", "--N", "6"],
    ["probe", "--liouville", "3"],
    ["demo-divergence", "--precision", "16"],
    ["solve", "--config", "/nonexistent/cfg.json"],
])
def test_validation_exit_code(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_validate_diagnostics():
    ok = RunConfig("solve", dict(WORKED))
    assert validate(ok) == []
    dup = validate(RunConfig("solve", dict(WORKED, a=[1, 1, 2])))
    assert [d.code for d in dup] == ["InvalidDivisor"]
    short = validate(RunConfig("solve", dict(WORKED, a=[1, 2, 3], N=3)))
    assert [d.code for d in short] == ["truncation"]
    empty = validate(RunConfig("solve", dict(WORKED, f={"basis": "xy", "terms": []})))
    assert [d.code for d in empty] == ["empty_series"]
    scale = validate(RunConfig("demo-divergence", {"liouville": 3}, precision="extended(50)"))
    assert [d.code for d in scale] == ["scale"]


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, WORKED)
    proc = subprocess.run([sys.executable, "-m", "goursat.cli", "solve", "--config", cfg, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 3 and "m=2" in proc.stderr
