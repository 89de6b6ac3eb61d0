"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <k> PASS|FAIL`` line (shown even
under output capture) and then asserts the criterion at its stated tolerance.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from strategies import box_chart, random_expr, random_form

from foldform.config import load_config
from foldform.contact import ContactFormRecord
from foldform.exterior import compile_exprs, exterior_derivative
from foldform.fibration import MonodromyMap, period_integrals, verify_exact_symplectomorphism
from foldform.folding import (assemble_folded_form, contact_field_Z, fold_locus, folded_reeb_field, folded_sum,
                              make_gluing_profile, middle_identity_residual, standard_model_fields)
from foldform.models import (boundary_reeb, cotangent_t3_fiber, default_disk_hamiltonians,
                             default_t3_hamiltonians, disk_fiber)
from foldform.scenarios import _t3_roundtrip, has_numeric_failure, run_scenario


@pytest.fixture
def emit(capsys):
    def _emit(k, title, ok, info=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}  {title}  {info}")
    return _emit


@pytest.fixture(scope="module")
def profile():
    return make_gluing_profile()


def _spec(F, profile):
    return folded_sum(F, profile=profile, reeb_alpha=boundary_reeb(F))


@pytest.fixture(scope="module")
def sphere_specs(profile):
    return {n: _spec(disk_fiber(n), profile) for n in (1, 2, 3)}


@pytest.fixture(scope="module")
def t3_report():
    return run_scenario(load_config({"scenario": "cotangent_t3"}), threads=1)


def _failed(reports):
    return [c.name for r in reports for c in r.checks if not c.passed]


def _metric(reports, prefix):
    return max(c.metric for r in reports for c in r.checks if c.name.startswith(prefix))


# ---------------------------------------------------------------- 1
def test_criterion_01_exterior_soundness(emit):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    chart = box_chart(4)
    not_zero = 0
    for _ in range(1000):
        w = random_form(rng, chart, int(rng.integers(0, 4)))
        if not exterior_derivative(exterior_derivative(w)).is_zero:
            not_zero += 1
    # symbolic derivative against a central difference with step 1e-5, on 1000 points
    pts = chart.random(1000, 11)
    h = 1e-5
    worst = 0.0
    for _ in range(50):
        e = random_expr(rng, chart.names)
        k = int(rng.integers(chart.dim))
        fn = compile_exprs([e, e.diff(chart.names[k])], chart.names)

        def ev(P, j):
            return np.broadcast_to(fn(*[P[:, i] for i in range(chart.dim)])[j], (P.shape[0],))
        exact = ev(pts, 1)
        fd = np.zeros(len(pts))
        for s, wt in ((-1, -0.5), (1, 0.5)):
            P = pts.copy()
            P[:, k] += s * h
            fd += wt * ev(P, 0)
        fd /= h
        worst = max(worst, float(np.max(np.abs(fd - exact) / np.maximum(1.0, np.abs(exact)))))
    dt = time.perf_counter() - t0
    ok = not_zero == 0 and worst < 1e-7 and dt < 10
    emit(1, "exterior-calculus soundness", ok,
         f"dd!=0: {not_zero}/1000, FD rel err {worst:.2e} (< 1e-7), {dt:.2f} s (< 10 s)")
    assert not_zero == 0
    assert worst < 1e-7
    assert dt < 10


# ---------------------------------------------------------------- 2
def test_criterion_02_hamiltonian_round_trip(emit):
    t0 = time.perf_counter()
    reps = [standard_model_fields(n)[3] for n in (2, 3)]
    pairs = sum(1 for r in reps for c in r.checks if c.name.endswith("Z_H = Z"))
    rt = _t3_roundtrip(cotangent_t3_fiber(), 1000, 3, 1e-10)
    dt = time.perf_counter() - t0
    bad = _failed(reps) + [c.name for c in rt if not c.passed]
    worst = max(c.metric for c in rt)
    ok = not bad and pairs == 5 + 7 and dt < 20
    emit(2, "H -> Z_H -> H round trip", ok,
         f"symbolic pairs {pairs}/12 exact, numeric max {worst:.2e} (< 1e-10) on 1000 H, {dt:.2f} s (< 20 s)")
    assert not bad, bad
    assert pairs == 12
    assert dt < 20


# ---------------------------------------------------------------- 3
def test_criterion_03_middle_identity(emit):
    t0 = time.perf_counter()
    prof = make_gluing_profile()
    reps = [middle_identity_residual(_spec(disk_fiber(n), prof), n_points=10_000, tol=1e-9) for n in (1, 2, 3)]
    dt = time.perf_counter() - t0
    worst = _metric(reps, "middle identity")
    ok = not _failed(reps) and dt < 30
    emit(3, "middle identity n=1,2,3", ok, f"max relative {worst:.2e} (< 1e-9) on 10^4 points each, {dt:.2f} s (< 30 s)")
    assert not _failed(reps)
    assert all(c.samples == 10_000 for r in reps for c in r.checks)
    assert dt < 30


# ---------------------------------------------------------------- 4
def test_criterion_04_fold_locus(emit, sphere_specs):
    reps = [fold_locus(sphere_specs[n], tol=1e-9) for n in (1, 2, 3)]
    worst = _metric(reps, "fold locus closed form")
    ok = not _failed(reps)
    emit(4, "fold locus", ok, f"closed form {worst:.2e} (< 1e-9); zero set within one step; sign flip")
    assert ok, _failed(reps)


# ---------------------------------------------------------------- 5
def test_criterion_05_bundle_form(emit):
    reps = [run_scenario(load_config({"scenario": "trivial_torus", "n": n, "monodromy": {"kind": "hamiltonian"}}),
                         threads=1) for n in (1, 2)]
    names = [c.name for r in reps for c in r.checks]
    assert any(nm.startswith("sigma_st volume ratio") for nm in names)
    assert "collar product form exact [identity]" in names and "collar product form [hamiltonian]" in names
    assert "K audit agrees with certification [hamiltonian]" in names
    ident = max(r["collar product form exact [identity]"].metric for r in reps)
    ham = max(r["collar product form [hamiltonian]"].metric for r in reps)
    ratio = _metric(reps, "sigma_st volume ratio")
    ok = not _failed(reps)
    emit(5, "bundle form trivial_torus n=1,2", ok,
         f"ratio dev {ratio:.1e}, collar identity {ident:.1e} (== 0), hamiltonian {ham:.1e} (< 1e-6), audit consistent")
    assert ok, _failed(reps)
    assert ident == 0.0


# ---------------------------------------------------------------- 6
def test_criterion_06_folded_reeb(emit, sphere_specs, profile):
    specs = list(sphere_specs.values()) + [_spec(cotangent_t3_fiber(), profile)]
    reps = [folded_reeb_field(s, assemble_folded_form(s), n_points=10_000, tol=1e-10)[1] for s in specs]
    gen = _metric(reps, "folded Reeb vs generic solver (middle)")
    at0 = _metric(reps, "folded Reeb at t = 0")
    ok = not _failed(reps)
    emit(6, "folded Reeb field", ok, f"vs generic {gen:.2e}, t=0 vs R_alpha/(Ke) {at0:.2e} (< 1e-10)")
    assert ok, _failed(reps)


# ---------------------------------------------------------------- 7
def test_criterion_07_contact_field_Z(emit, sphere_specs, profile):
    specs = list(sphere_specs.values()) + [_spec(cotangent_t3_fiber(), profile)]
    reps = [contact_field_Z(s, assemble_folded_form(s), n_sign=1000)[2] for s in specs]
    required = ["H_Z = z (structural)", "sign pattern of fg/q is (+, 0, -)",
                "Z d_t-component vanishes at t = 0 (structural)", "Z d_z-component vanishes at z = 0 (structural)"]
    status = {nm: all(r[nm].passed for r in reps) for nm in required}
    gz = all(r["H_Z = sigma(Z) = g z (structural)"].passed for r in reps)
    ok = all(status.values())
    info = ", ".join(f"{nm}: {'ok' if v else 'FAILS'}" for nm, v in status.items())
    emit(7, "contact field Z", ok, f"{info}; engine value sigma(Z) = g z holds: {gz}")
    for nm in required:
        assert status[nm], f"{nm} fails: max |sigma(Z) - z| = {max(r[nm].metric for r in reps):.3g}"


# ---------------------------------------------------------------- 8
def test_criterion_08_cotangent_t3_suite(emit, t3_report):
    rep = t3_report
    names = ["Liouville field iota_X d beta = beta (structural)", "(d beta)^3 nonvanishing",
             "alpha(R) = 1 on tangent frames", "iota_R d alpha restricted to TY = 0",
             "rational orbits have nonzero winding", "irrational direction does not close"]
    checks = [rep[nm] for nm in names]
    frames = rep["alpha(R) = 1 on tangent frames"]
    orbits = rep["rational orbits have nonzero winding"]
    ok = all(c.passed for c in checks)
    emit(8, "D*T^3 suite", ok,
         f"frames {frames.samples} samples max {max(frames.metric, rep['iota_R d alpha restricted to TY = 0'].metric):.1e}"
         f" (< 1e-10), {orbits.samples} rational orbits nonzero winding, irrational start open to T=500")
    assert frames.samples == 10_000 and orbits.samples == 200
    assert rep["irrational direction does not close"].anchor.endswith("500")
    assert ok, [c.name for c in checks if not c.passed]


# ---------------------------------------------------------------- 9
def test_criterion_09_exactness(emit, t3_report):
    reps = []
    for n in (1, 2):
        F = disk_fiber(n)
        mono = MonodromyMap(F, default_disk_hamiltonians(F))
        reps.append(verify_exact_symplectomorphism(mono, F.beta, F.sampler(300, 5), F.collar_sampler(200, 4),
                                                   tol=1e-6))
    t3 = [c for c in t3_report.checks if c.name.endswith("[D*T3]") and c.name.startswith(("phi", "d(phi"))]
    per = t3_report["period integrals of phi^* beta - beta"]
    worst = max([c.metric for r in reps for c in r.checks] + [c.metric for c in t3])
    ok = not _failed(reps) and all(c.passed for c in t3) and len(t3) == 3 and per.passed
    emit(9, "exactness evidence", ok, f"max {worst:.2e} (< 1e-6) on D2, D4, D*T3; period integrals {per.metric:.1e} (< 1e-6)")
    assert ok


# ---------------------------------------------------------------- 10
def test_criterion_10_determinism_and_runtime(emit, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "folded_spheres", "n": 2}))
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        env = dict(os.environ, FOLDFORM_THREADS=str(k + 1))
        r = subprocess.run([sys.executable, "-m", "foldform", "verify", "--config", str(cfg), "--no-timestamp",
                            "--out", str(out)], capture_output=True, text=True, env=env)
        assert r.returncode == 0, r.stderr
        outs.append(out.read_bytes())
    identical = outs[0] == outs[1]
    t0 = time.perf_counter()
    # every built-in scenario at its defaults (custom has no default profile), plus the other n
    suite = [{"scenario": "trivial_torus", "n": 1}, {"scenario": "trivial_torus", "n": 2}] + \
            [{"scenario": "folded_spheres", "n": n} for n in (1, 2, 3)] + \
            [{"scenario": "cotangent_t3"}, {"scenario": "folded_t3"}]
    reports = [run_scenario(load_config(c)) for c in suite]
    dt = time.perf_counter() - t0
    numeric = [r.scenario for r in reports if has_numeric_failure(r)]
    status = ", ".join(f"{r.scenario}:{'pass' if r.overall else 'fail'}" for r in reports)
    ok = identical and dt < 120 and not numeric
    emit(10, "determinism and runtime", ok,
         f"byte-identical: {identical} (1 vs 2 threads), default suite {dt:.1f} s (< 120 s) [{status}]")
    assert identical
    assert not numeric
    assert dt < 120
