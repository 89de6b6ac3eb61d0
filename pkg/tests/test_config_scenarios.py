import json

import numpy as np
import pytest

from foldform import scenarios
from foldform.config import ConfigError, config_schema, load_config
from foldform.report import Check, VerificationReport, bool_check, max_check, min_check
from foldform.scenarios import has_numeric_failure, pool_size, run_scenario, scenario_flow_field


def test_defaults_and_resolution():
    assert load_config({"scenario": "trivial_torus"}).n == 1
    assert load_config({"scenario": "cotangent_t3"}).n == 3
    cfg = load_config({"scenario": "folded_spheres"}, n=2, **{"grid.per_coord": 6, "K": None})
    assert cfg.n == 2 and cfg.grid.per_coord == 6 and cfg.K == 1.0


@pytest.mark.parametrize("data, path", [
    ({"scenario": "nope"}, "scenario"),
    ({"scenario": "trivial_torus", "bogus": 1}, "bogus"),
    ({"scenario": "trivial_torus", "grid": {"per_coord": 1}}, "grid.per_coord"),
    ({"scenario": "trivial_torus", "K": -1}, "K"),
    ({"scenario": "trivial_torus", "cutoff": {"inner": 0.9, "outer": 0.5}}, "cutoff"),
    ({"scenario": "cotangent_t3", "n": 2}, "<root>"),
    ({"scenario": "custom"}, "<root>"),
    ({"scenario": "custom", "profile": {"kind": "custom", "f": "2 - u", "g": "-t"}}, "profile"),
])
def test_config_errors_name_the_field(data, path):
    with pytest.raises(ConfigError) as ei:
        load_config(data)
    assert any(e.startswith(path) for e in ei.value.errors), ei.value.errors


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_schema_is_strict():
    s = config_schema()
    assert s["additionalProperties"] is False
    assert set(s["properties"]["scenario"]["enum"]) == set(scenarios.SCENARIOS)


def test_echo_drops_output_paths():
    cfg = load_config({"scenario": "trivial_torus", "output": {"out": "x.json"}})
    assert "output" not in cfg.echo()
    json.dumps(cfg.echo())


def test_pool_size(monkeypatch):
    monkeypatch.setenv("FOLDFORM_THREADS", "3")
    assert pool_size() == 3
    for bad in ("0", "x", "-2"):
        monkeypatch.setenv("FOLDFORM_THREADS", bad)
        with pytest.raises(ValueError):
            pool_size()


def test_check_sanitises_values():
    c = Check("c", "a", float("nan"), 1.0, 3, False, [float("inf"), 1.0])
    d = c.to_dict()
    assert list(d) == ["name", "anchor", "metric", "threshold", "samples", "passed", "witness", "ms"]
    assert np.isfinite(d["metric"]) and np.isfinite(d["witness"][0])
    with pytest.raises(ValueError):
        Check("c", "", 0.0, 1.0, 1, True)


def test_check_builders():
    pts = np.arange(6.0).reshape(3, 2)
    c = max_check("m", "a", [0.1, -0.5, 0.2], 0.4, pts)
    assert not c.passed and c.metric == 0.5 and c.witness == [2.0, 3.0]
    assert max_check("m", "a", [0.1], 0.1, strict=False).passed
    assert not max_check("m", "a", [], 1.0).passed
    assert not max_check("m", "a", [np.nan], 1.0).passed
    assert min_check("m", "a", [1.0, 2.0], 0.5).passed
    assert not bool_check("b", "a", False).passed
    rep = VerificationReport("s", {}, [c])
    assert not rep.overall and rep.failures() == [c] and rep["m"] is c
    assert not VerificationReport().overall


def test_run_scenario_deterministic_across_threads():
    cfg = load_config({"scenario": "trivial_torus", "n": 1})
    a = run_scenario(cfg, threads=1)
    b = run_scenario(cfg, threads=3)
    assert a.overall
    assert a.to_json(timestamps=False) == b.to_json(timestamps=False)
    assert a.config == cfg.echo()


def _boom_scenario(exc):
    def scen(cfg, T):
        T.add("fine", "always", lambda: bool_check("fine", "always", True))

        def fail():
            raise exc
        T.add("broken", "raises", fail)
    return scen


def test_task_exceptions_become_failed_checks(monkeypatch):
    cfg = load_config({"scenario": "trivial_torus"})
    monkeypatch.setitem(scenarios.SCENARIOS, "trivial_torus", _boom_scenario(ZeroDivisionError("x")))
    rep = run_scenario(cfg, threads=1)
    assert [c.name for c in rep] == ["fine", "broken"]
    assert rep["fine"].passed and not rep["broken"].passed
    assert has_numeric_failure(rep)
    monkeypatch.setitem(scenarios.SCENARIOS, "trivial_torus", _boom_scenario(KeyError("y")))
    rep = run_scenario(cfg, threads=1)
    assert not rep.overall and not has_numeric_failure(rep)


@pytest.mark.parametrize("scenario, dim", [("trivial_torus", 3), ("cotangent_t3", 6), ("folded_spheres", 3)])
def test_flow_fields(scenario, dim):
    v = scenario_flow_field(load_config({"scenario": scenario}))
    assert v.chart.dim == dim


def test_folded_t3_reports_the_structural_mismatch():
    rep = run_scenario(load_config({"scenario": "folded_t3"}, **{"grid.middle_points": 500,
                                                                 "grid.frame_samples": 200}), threads=1)
    failed = [c.name for c in rep.failures()]
    assert failed == ["H_Z = z (structural)"]
    assert rep["H_Z = sigma(Z) = g z (structural)"].passed
