import csv
import json
import subprocess
import sys

import pytest

from foldform import scenarios
from foldform.cli import main
from foldform.config import SCENARIO_IDS
from foldform.report import bool_check


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for sid in SCENARIO_IDS:
        assert sid in out


def test_schema(capsys):
    assert main(["schema"]) == 0
    assert "properties" in json.loads(capsys.readouterr().out)


def test_verify_writes_report_and_csv(tmp_path, capsys):
    out, d = tmp_path / "r.json", tmp_path / "csv"
    rc = main(["verify", "--scenario", "trivial_torus", "--n", "1", "--out", str(out), "--csv", str(d),
               "--no-timestamp"])
    assert rc == 0
    rep = json.loads(out.read_text())
    assert list(rep) == ["scenario", "config", "checks", "overall"]
    assert rep["overall"] is True and rep["scenario"] == "trivial_torus"
    assert all(c["ms"] == 0 for c in rep["checks"])
    assert all(set(c) == {"name", "anchor", "metric", "threshold", "samples", "passed", "witness", "ms"}
               for c in rep["checks"])
    rows = list(csv.reader((d / "checks.csv").open()))
    assert rows[0][0] == "name" and len(rows) == len(rep["checks"]) + 1
    assert "overall: PASS" in capsys.readouterr().out


def test_verify_stdout_is_json(capsys):
    assert main(["verify", "--scenario", "trivial_torus", "--no-timestamp"]) == 0
    assert json.loads(capsys.readouterr().out)["overall"]


@pytest.mark.parametrize("argv", [
    ["verify"],
    ["verify", "--scenario", "cotangent_t3", "--n", "2"],
    ["verify", "--scenario", "trivial_torus", "--grid", "1"],
    ["verify", "--config", "/nonexistent.json"],
    ["flow", "--scenario", "trivial_torus", "--x0", "a,b", "--T", "1"],
    ["flow", "--scenario", "trivial_torus", "--x0", "0.1", "--T", "1"],
    ["profile", "check", "--f", "2 - u", "--g=-t"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("foldform:")


def test_bad_thread_count_exit_2(monkeypatch, capsys):
    monkeypatch.setenv("FOLDFORM_THREADS", "zero")
    assert main(["verify", "--scenario", "trivial_torus"]) == 2


def test_invalid_config_lists_field(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "trivial_torus", "grid": {"per_cord": 4}}))
    assert main(["verify", "--config", str(cfg)]) == 2
    assert "grid.per_cord" in capsys.readouterr().err


def test_failing_custom_profile_exit_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "custom", "profile": {"kind": "custom", "f": "2 - t^2", "g": "-t"}}))
    out = tmp_path / "r.json"
    assert main(["verify", "--config", str(cfg), "--out", str(out), "--no-timestamp"]) == 1
    rep = json.loads(out.read_text())
    assert not rep["overall"]
    assert any(c["name"].startswith("(1)") and not c["passed"] for c in rep["checks"])


def test_numeric_failure_exit_3(monkeypatch, capsys):
    def scen(cfg, T):
        T.add("ok", "always", lambda: bool_check("ok", "always", True))

        def fail():
            raise FloatingPointError("overflow")
        T.add("solve", "numeric", fail)
    monkeypatch.setitem(scenarios.SCENARIOS, "trivial_torus", scen)
    assert main(["verify", "--scenario", "trivial_torus", "--no-timestamp"]) == 3


def test_profile_check(capsys):
    assert main(["profile", "check"]) == 0
    assert json.loads(capsys.readouterr().out)["overall"]
    assert main(["profile", "check", "--f", "2 - t^2", "--g=-t"]) == 1


def test_flow_csv_and_detect(tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert main(["flow", "--scenario", "cotangent_t3", "--x0", "0,0,0,1,0,0", "--T", "7", "--csv", str(out),
                 "--detect"]) == 0
    info = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert abs(info["period"] - 6.283185307179586) < 1e-8 and info["winding"] == [1, 0, 0]
    header = out.read_text().splitlines()[0]
    assert header.startswith("time,th1,th2,th3,x1,x2,x3")


def test_flow_trivial_torus(capsys):
    # Reeb field (1/K) d theta with K = 2: theta advances by T / 2
    assert main(["flow", "--scenario", "trivial_torus", "--K", "2", "--x0", "0.1,0.2,0", "--T", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "time,x1,y1,theta,lift_theta"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == 1.0 and abs(last[-1] - 0.5) < 1e-12 and last[1:3] == [0.1, 0.2]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "foldform", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "trivial_torus" in r.stdout
