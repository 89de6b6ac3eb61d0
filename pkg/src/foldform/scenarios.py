"""Built-in verification scenarios.

Each scenario is a list of named tasks.  Tasks run in a thread pool
(``FOLDFORM_THREADS`` caps its size) and their checks are collected in
submission order, so reports do not depend on scheduling.  Shared objects
(profiles, assembled forms, monodromies) are built once on demand.  A task
that raises becomes a failed check carrying the error; arithmetic and
integration failures are flagged ``numeric``.
"""

from __future__ import annotations

import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import _rk
from .config import ScenarioConfig
from .contact import (ConstraintHypersurface, ContactFormRecord, contact_ratio, contact_residual,
                      field_equation_residuals, hamiltonian_to_field, reeb_residuals, restrict_to_hypersurface, wedge_top_numeric)
from .dynamics import DomainExit, detect_periodic, order_check, period_scaling_check
from .exterior.chart import Chart, Coord
from .exterior.expr import as_expr, compile_exprs, cos, is_structural_zero, sin, symbol
from .exterior.forms import VectorField, interior_product
from .fibration import (MappingTorusSpec, MonodromyMap, audit_points, build_bundle_contact_form,
                        build_lambda_beta, bundle_record, certification_points, circle_partition, collar_check,
                        horizontal_subspace, period_integrals, total_points, verify_exact_symplectomorphism)
from .folding import (assemble_folded_form, contact_field_Z, custom_profile, fold_locus, folded_contact_checks,
                      folded_reeb_field, folded_sum, make_cutoff, make_gluing_profile, middle_identity_residual,
                      modified_field, standard_model_fields)
from .models import (boundary_reeb, cotangent_t3_fiber, default_disk_hamiltonians, default_t3_hamiltonians,
                     disk_fiber)
from .report import Check, VerificationReport, bool_check, max_check, min_check

__all__ = ["SCENARIOS", "DESCRIPTIONS", "run_scenario", "pool_size", "has_numeric_failure",
           "scenario_profile", "scenario_flow_field", "t3_ambient_reeb"]

NUMERIC_ERRORS = (ArithmeticError, np.linalg.LinAlgError, _rk.IntegrationError, DomainExit)
ANGLES_T3 = ["th1", "th2", "th3"]


def pool_size() -> int:
    """Worker count: ``FOLDFORM_THREADS`` if set, else the CPU count."""
    v = os.environ.get("FOLDFORM_THREADS", "").strip()
    if v:
        try:
            k = int(v)
        except ValueError:
            raise ValueError(f"FOLDFORM_THREADS must be a positive integer, got {v!r}") from None
        if k < 1:
            raise ValueError(f"FOLDFORM_THREADS must be a positive integer, got {v!r}")
        return k
    return os.cpu_count() or 1


def has_numeric_failure(report: VerificationReport) -> bool:
    return any(not c.passed and c.detail.get("numeric") for c in report.checks)


# ---------------------------------------------------------------- task plumbing
class _Tasks:
    def __init__(self):
        self.items: list[tuple[str, str, Callable]] = []
        self._cache: dict = {}
        self._locks: dict = {}
        self._lock = threading.Lock()
        self._reported: set = set()

    def add(self, name: str, anchor: str, fn: Callable):
        self.items.append((name, anchor, fn))

    def shared(self, key: str, fn: Callable):
        with self._lock:
            lk = self._locks.setdefault(key, threading.Lock())
        with lk:
            if key not in self._cache:
                try:
                    self._cache[key] = (True, fn())
                except Exception as e:  # cached so dependants see the same failure
                    self._cache[key] = (False, e)
            ok, val = self._cache[key]
        if not ok:
            raise val
        return val

    def first_report(self, e) -> bool:
        with self._lock:
            if id(e) in self._reported:
                return False
            self._reported.add(id(e))
            return True


def _as_checks(out) -> list[Check]:
    if isinstance(out, Check):
        return [out]
    if isinstance(out, VerificationReport):
        return list(out.checks)
    checks = []
    for item in out:
        checks.extend(_as_checks(item))
    return checks


def _failure(tasks: _Tasks, name: str, anchor: str, e: Exception) -> list[Check]:
    numeric = isinstance(e, NUMERIC_ERRORS)
    rep = getattr(e, "report", None)
    if isinstance(rep, VerificationReport) and rep.checks and tasks.first_report(e):
        out = [Check(c.name, c.anchor, c.metric, c.threshold, c.samples, c.passed, c.witness,
                     detail={**c.detail, "numeric": numeric}) for c in rep.checks]
        if all(c.passed for c in out):
            out.append(Check(name, anchor, float("inf"), 0.0, 0, False, None,
                             detail={"error": f"{type(e).__name__}: {e}", "numeric": numeric}))
        return out
    w = getattr(e, "witness", None)
    if w is None and isinstance(e, DomainExit):
        w = e.point
    try:
        w = None if w is None else [float(x) for x in np.ravel(w)]
    except (TypeError, ValueError):
        w = None
    return [Check(name, anchor, float("inf"), 0.0, 0, False, w,
                  detail={"error": f"{type(e).__name__}: {e}", "numeric": numeric})]


def _execute(tasks: _Tasks, name: str, anchor: str, fn: Callable) -> list[Check]:
    t0 = time.perf_counter()
    try:
        checks = _as_checks(fn())
    except Exception as e:
        checks = _failure(tasks, name, anchor, e)
    ms = int(round((time.perf_counter() - t0) * 1000))
    for c in checks:
        c.ms = ms
    return checks


def run_scenario(cfg: ScenarioConfig, threads: int | None = None) -> VerificationReport:
    """Run every task of the configured scenario and collect the report."""
    tasks = _Tasks()
    SCENARIOS[cfg.scenario](cfg, tasks)
    workers = pool_size() if threads is None else max(1, int(threads))
    if workers == 1:
        results = [_execute(tasks, *item) for item in tasks.items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_execute, tasks, *item) for item in tasks.items]
            results = [f.result() for f in futs]
    rep = VerificationReport(cfg.scenario, cfg.echo())
    for r in results:
        rep.add(r)
    return rep


# ---------------------------------------------------------------- bundle scenario
def _axis(m):
    return np.linspace(-math.pi, math.pi, m)


def _bundle_tasks(cfg: ScenarioConfig, T: _Tasks, F_key: str, fiber_fn, hams_fn, label: str):
    """K search, collar, exactness and splitting checks for a Hamiltonian monodromy."""
    G, tol = cfg.grid, cfg.tolerances

    def F():
        return T.shared(F_key, fiber_fn)

    def mono():
        return T.shared(f"mono_{label}", lambda: MonodromyMap(F(), hams_fn(F()), tol=tol.flow))

    def spec():
        return T.shared(f"spec_{label}", lambda: MappingTorusSpec(
            F(), mono(), circle_partition(cfg.monodromy.overlap), K=cfg.K, eps=cfg.eps))

    def bf():
        def build():
            s = spec()
            cert = certification_points(s, G.per_coord, G.theta_count, G.max_fiber)
            aud = audit_points(s, G.per_coord, G.theta_count, G.max_fiber, G.halton, G.seed)
            return build_bundle_contact_form(s, cert, aud)
        return T.shared(f"bf_{label}", build)

    def ksearch():
        b = bf()
        cert, aud = b.report.checks
        agree = Check(f"K audit agrees with certification [{label}]",
                      "certified on the grid => positive on the audit grid",
                      0.0 if (aud.passed or not cert.passed) else 1.0, 0.5, aud.samples,
                      aud.passed or not cert.passed, None if aud.passed else aud.witness,
                      detail={"K_min": b.K_min, "K": b.K})
        out = [Check(f"{c.name} [{label}]", c.anchor, c.metric, c.threshold, c.samples, c.passed, c.witness,
                     detail={**c.detail, "K_min": b.K_min, "K": b.K, "history": b.history}) for c in (cert, aud)]
        return out + [agree]

    def collar():
        b = bf()
        cp = total_points(F().collar_sampler(400, 3), _axis(16))
        c = collar_check(b.lam, b.K, cp, tol=tol.collar_flow).checks[0]
        c.name = f"collar product form [{label}]"
        return c

    def exact():
        f = F()
        m = 100 if f.chart.dim >= 6 else 300
        rep = verify_exact_symplectomorphism(mono(), f.beta, f.sampler(m, 5), f.collar_sampler(200, 4),
                                             tol=tol.exactness)
        for c in rep.checks:
            c.name = f"{c.name} [{label}]"
        return rep

    def split():
        b = bf()
        s = spec()
        pts = certification_points(s, max(4, G.per_coord // 2), max(8, G.theta_count // 4), 500)
        return _splitting_check(b.lam, pts, label)

    T.add(f"K search [{label}]", "sigma = lambda_beta + K d theta contact", ksearch)
    T.add(f"collar product form [{label}]", "sigma = beta + K d theta on the collar", collar)
    T.add(f"exact symplectomorphism [{label}]", "phi^* d beta = d beta", exact)
    T.add(f"horizontal splitting [{label}]", "ker d lambda_beta|_vertical", split)
    return F, mono


def _splitting_check(lam, pts, label):
    a, W = lam.jet(pts)
    D = lam.fiber.chart.dim
    u = horizontal_subspace(W, range(D))
    res = np.max(np.abs(np.einsum("ni,nij->nj", u, W)[:, :D]), axis=1)
    scale = max(1.0, float(np.max(np.abs(W))))
    return max_check(f"horizontal splitting [{label}]",
                     "d lambda_beta(u, v) = 0 for vertical v, u_theta = 1", res / scale, 1e-10, pts)


def _trivial_torus(cfg: ScenarioConfig, T: _Tasks):
    n, K = cfg.n, cfg.K
    G, tol = cfg.grid, cfg.tolerances

    def F():
        return T.shared("fiber", lambda: disk_fiber(n, cfg.eps))

    def spec_id():
        return T.shared("spec_id", lambda: MappingTorusSpec(
            F(), MonodromyMap(F(), []), circle_partition(cfg.monodromy.overlap), K=K, eps=cfg.eps))

    def lam_id():
        return T.shared("lam_id", lambda: build_lambda_beta(spec_id()))

    def cert():
        return T.shared("cert", lambda: certification_points(spec_id(), G.per_coord, G.theta_count, G.max_fiber))

    def contact():
        return contact_residual(bundle_record(lam_id(), K), cert(), name=f"sigma_st contact n={n}",
                                anchor="sigma_st ^ (d sigma_st)^n > 0", margin=tol.contact_margin)

    def ratio():
        expected = K * math.factorial(n) * 2 ** n
        r = contact_ratio(bundle_record(lam_id(), K), cert())
        return max_check(f"sigma_st volume ratio = K n! 2^n (n={n})", "sigma_st ^ (d sigma_st)^n = K n! 2^n dvol",
                         r / expected - 1.0, 1e-12, cert(), expected=expected)

    def ksearch():
        aud = audit_points(spec_id(), G.per_coord, G.theta_count, G.max_fiber, G.halton, G.seed)
        b = build_bundle_contact_form(spec_id(), cert(), aud)
        c, a = b.report.checks
        agree = bool_check("K audit agrees with certification [identity]",
                           "certified on the grid => positive on the audit grid", a.passed or not c.passed,
                           samples=a.samples, K_min=b.K_min, K=b.K)
        return [Check(f"{x.name} [identity]", x.anchor, x.metric, x.threshold, x.samples, x.passed, x.witness,
                      detail={**x.detail, "K_min": b.K_min, "K": b.K}) for x in (c, a)] + [agree]

    def collar():
        cp = total_points(F().collar_sampler(400, 3), _axis(16))
        c = collar_check(lam_id(), K, cp).checks[0]
        # identity monodromy: lambda_beta is beta itself, so the difference must vanish exactly
        return Check("collar product form exact [identity]", c.anchor, c.metric, 0.0, c.samples,
                     c.metric == 0.0, c.witness)

    def split():
        pts = certification_points(spec_id(), max(4, G.per_coord // 2), max(8, G.theta_count // 4), 500)
        return _splitting_check(lam_id(), pts, "identity")

    T.add(f"sigma_st contact n={n}", "sigma_st ^ (d sigma_st)^n > 0", contact)
    T.add(f"sigma_st volume ratio n={n}", "sigma_st ^ (d sigma_st)^n = K n! 2^n dvol", ratio)
    T.add("K search [identity]", "sigma = lambda_beta + K d theta contact", ksearch)
    T.add("collar product form exact [identity]", "sigma = beta + K d theta on the collar", collar)
    T.add("horizontal splitting [identity]", "ker d lambda_beta|_vertical", split)
    if cfg.monodromy.kind == "hamiltonian":
        _bundle_tasks(cfg, T, "fiber", lambda: disk_fiber(n, cfg.eps),
                      lambda f: default_disk_hamiltonians(f, cfg.monodromy.amp), "hamiltonian")


# ---------------------------------------------------------------- folded scenarios
def scenario_profile(cfg: ScenarioConfig):
    """Gluing profile of a config (certified; raises ``ProfileError``)."""
    p = cfg.profile
    if p.kind == "custom":
        return custom_profile(p.f, p.g, cfg.K, cfg.eps, cfg.grid.profile_resolution, strict=True)
    return make_gluing_profile(cfg.K, cfg.eps, tuple(p.blend), cfg.grid.profile_resolution)


def _fiber_for(cfg: ScenarioConfig):
    if cfg.scenario in ("cotangent_t3", "folded_t3") or (cfg.scenario == "custom" and cfg.boundary == "t3s2"):
        return cotangent_t3_fiber(cfg.eps)
    return disk_fiber(cfg.n, cfg.eps)


def _folded_tasks(cfg: ScenarioConfig, T: _Tasks, with_fields: bool):
    G, tol = cfg.grid, cfg.tolerances

    def F():
        return T.shared("fiber", lambda: _fiber_for(cfg))

    def prof():
        return T.shared("profile", lambda: scenario_profile(cfg))

    def spec():
        return T.shared("spec", lambda: folded_sum(F(), profile=prof(), reeb_alpha=boundary_reeb(F())))

    def ff():
        return T.shared("ff", lambda: assemble_folded_form(spec()))

    def cutoff():
        return T.shared("cutoff", lambda: make_cutoff(cfg.cutoff.inner, cfg.cutoff.outer))

    def boundary():
        f = F()
        rec = ContactFormRecord(f.y_chart, f.alpha0, name=f.y_chart.name)
        pts = f.y_chart.halton(2000, G.seed)
        e1, e2 = reeb_residuals(rec, boundary_reeb(f), pts)
        return [max_check(f"alpha(R_alpha) = 1 [{f.y_chart.name}]", "alpha(R) = 1", e1, tol.reeb, pts),
                max_check(f"iota_R d alpha = 0 [{f.y_chart.name}]", "iota_R d alpha = 0", e2, tol.reeb, pts)]

    def pieces():
        per = max(3, min(8, G.per_coord // 2))
        return folded_contact_checks(ff(), per_coord=per, n_middle=min(4000, G.middle_points), seed=G.seed)

    def reeb():
        return folded_reeb_field(spec(), ff(), n_points=G.middle_points, tol=tol.reeb)[1]

    def zfield():
        return T.shared("Z", lambda: contact_field_Z(spec(), ff()))

    T.add("gluing profile certification", "conditions (1)-(4) on (f, g)", lambda: prof().report)
    T.add("seams", "f alpha + g d theta equals the collar form of the piece", lambda: ff().seam_report)
    T.add("boundary Reeb field", "alpha(R) = 1, iota_R d alpha = 0", boundary)
    T.add("contact on the pieces", "sigma ^ (d sigma)^n > 0", pieces)
    T.add("middle identity", "sigma ^ (d sigma)^n = n f^{n-1}(f'g - fg') dt ^ alpha ^ (d alpha)^{n-1} ^ d theta",
          lambda: middle_identity_residual(spec(), n_points=G.middle_points, seed=G.seed, tol=tol.identity))
    T.add("fold locus", "[d sigma on a slice]^n = n f' f^{n-1} dt ^ alpha ^ (d alpha)^{n-1}",
          lambda: fold_locus(spec(), G.fold_t, G.fold_y, tol=tol.fold))
    T.add("folded Reeb field", "R_sigma = (-g'/q) R_alpha + (f'/q) d theta", reeb)
    T.add("cutoff certification", "h even, h = 1 near +-1, h = 0 iff t = 0", lambda: cutoff().report)
    if with_fields:
        T.add("contact field Z", "iota_Z d sigma = dH(R) sigma - dH", lambda: zfield()[2])
        T.add("modified field Z'", "H_{Z'} = mu H_Z",
              lambda: modified_field(spec(), cutoff(), ff(), zfield()[0], zfield()[1], tol=tol.roundtrip)[2])


def _folded_spheres(cfg: ScenarioConfig, T: _Tasks):
    _folded_tasks(cfg, T, with_fields=False)


def _folded_t3(cfg: ScenarioConfig, T: _Tasks):
    _folded_tasks(cfg, T, with_fields=True)


def _custom(cfg: ScenarioConfig, T: _Tasks):
    _folded_tasks(cfg, T, with_fields=cfg.boundary == "t3s2")


# ---------------------------------------------------------------- D*T^3
def t3_ambient_reeb(chart) -> VectorField:
    """Reeb field of ``beta`` on the unit cotangent bundle, on the ambient ``T^3 x D^3`` chart."""
    x = [symbol(f"x{k}") for k in (1, 2, 3)]
    return VectorField.from_dict(chart, {"th1": x[0], "th2": -x[1], "th3": x[2]})


def _unit_points(m, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(m, 3))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return np.concatenate([rng.uniform(0, 2 * math.pi, (m, 3)), g], axis=1)


def _roundtrip_basis():
    th1, th2, th3, u, v = (symbol(s) for s in ("th1", "th2", "th3", "u", "v"))
    return [sin(th1), cos(th2), sin(th3) * cos(u), cos(u), sin(u) * cos(v), sin(u) * sin(v) * cos(th1),
            cos(th2 + th3) * sin(u), sin(th1 - th3) * cos(v) + cos(u) ** 2]


def _t3_roundtrip(F, n_samples: int, seed: int, tol: float):
    """``n_samples`` random Hamiltonians ``H = sum_k c_k phi_k`` on the boundary,
    each pushed through ``H -> Z_H`` (numeric solver) and checked at its own point."""
    rec = ContactFormRecord(F.y_chart, F.alpha0, name=F.y_chart.name)
    basis = _roundtrip_basis()
    rng = np.random.default_rng(seed)
    pts = F.y_chart.random(n_samples, seed)
    e1, e2 = np.zeros(n_samples), np.zeros(n_samples)
    for j in range(n_samples):
        c = rng.normal(size=len(basis))
        H = as_expr(0)
        for ck, phi in zip(c, basis):
            H = H + as_expr(float(ck)) * phi
        Z = hamiltonian_to_field(H, rec, mode="numeric")
        r1, r2 = field_equation_residuals(Z, H, rec, pts[j:j + 1])
        e1[j], e2[j] = r1[0], r2[0]
    return [max_check("Hamiltonian round trip alpha(Z_H) = H [T3xS2]", "alpha(Z_H) = H", e1, tol, pts),
            max_check("Hamiltonian round trip iota_Z d alpha [T3xS2]", "iota_Z d alpha = dH(R) alpha - dH",
                      e2, tol, pts)]


def _winding_sweep(F, cfg: ScenarioConfig):
    """Orbits through rational unit directions ``m / |m|``: closed, with winding ``(m1, -m2, m3)/gcd``."""
    D = cfg.dynamics
    R = t3_ambient_reeb(F.chart)
    rng = np.random.default_rng(D.seed)
    M = D.max_component
    per_err, bad, records = [], [], []
    for _ in range(D.orbits):
        while True:
            m = rng.integers(-M, M + 1, size=3)
            if np.any(m):
                break
        g = math.gcd(math.gcd(int(abs(m[0])), int(abs(m[1]))), int(abs(m[2])))
        nm = float(np.linalg.norm(m))
        x0 = np.concatenate([rng.uniform(0, 2 * math.pi, 3), m / nm])
        o = detect_periodic(R, x0, D.T_max, D.closure_tol, D.tol, angle_coords=ANGLES_T3)
        want = (int(m[0]) // g, -int(m[1]) // g, int(m[2]) // g)
        Tp = 2 * math.pi * nm / g
        if o.period is None:
            bad.append(x0.tolist())
            per_err.append(np.inf)
            continue
        per_err.append(abs(o.period - Tp) / Tp)
        if o.winding.vector != want or not any(o.winding.vector):
            bad.append(x0.tolist())
        records.append({"x0": x0.tolist(), "period": o.period, "winding": list(o.winding.vector)})
    wind = Check("rational orbits have nonzero winding", "[gamma] = (m1, -m2, m3)/gcd != 0 in H_1(T^3)",
                 float(len(bad)), 0.5, D.orbits, not bad, bad[0] if bad else None,
                 detail={"verdict": "non-contractible (nonzero torus class)" if not bad else "failed",
                         "orbits": records})
    per = max_check("rational orbit periods", "T = 2 pi |m| / gcd(m)", per_err, 1e-8)
    return [wind, per]


def _irrational(F, cfg: ScenarioConfig):
    D = cfg.dynamics
    v = np.array([1.0, math.sqrt(2.0), 0.0]) / math.sqrt(3.0)
    x0 = np.concatenate([np.zeros(3), v])
    o = detect_periodic(t3_ambient_reeb(F.chart), x0, D.T_max, D.closure_tol, D.tol)
    steps = int(o.trajectory.stats.get("accepted", len(o.trajectory.times)))
    return bool_check("irrational direction does not close", f"no return within T_max = {D.T_max:g}",
                      o.period is None, samples=steps, witness=x0.tolist(), period=o.period)


def _cotangent_t3(cfg: ScenarioConfig, T: _Tasks):
    G, tol = cfg.grid, cfg.tolerances

    def F():
        return T.shared("fiber", lambda: cotangent_t3_fiber(cfg.eps))

    def liouville():
        f = F()
        lv = interior_product(f.liouville, f.beta.d()) - f.beta
        ok = all(is_structural_zero(c) for c in lv.terms.values())
        return bool_check("Liouville field iota_X d beta = beta (structural)", "iota_X d beta = beta", ok)

    def volume():
        f = F()
        pts = f.grid(G.per_coord, max_points=G.max_fiber)
        db = f.beta.d()
        vol = wedge_top_numeric([db.at(pts)] * 3, pts.shape[0])
        return min_check("(d beta)^3 nonvanishing", "(d beta)^3 != 0", np.abs(vol), 0.0, pts)

    def outward():
        f = F()
        pts = _unit_points(2000, G.seed)
        xl = f.liouville.apply(f.boundary)
        vals = np.broadcast_to(compile_exprs([xl], f.chart.names)(*[pts[:, i] for i in range(6)])[0], (len(pts),))
        return min_check("Liouville field outward on the boundary", "X(|x|^2 - 1) > 0 on |x| = 1", vals, 0.0, pts)

    def frames():
        f = F()
        Y = ConstraintHypersurface(f.chart, f.boundary)
        pts = _unit_points(G.frame_samples, G.seed + 1)
        R = t3_ambient_reeb(f.chart)
        rv = R.evaluate(pts)
        a = f.beta.at(pts)
        av = np.stack([np.broadcast_to(a.terms.get((i,), 0.0), (len(pts),)) for i in range(6)], axis=1)
        e1 = np.abs(np.einsum("ni,ni->n", av, rv) - 1.0)
        _, vals = restrict_to_hypersurface(interior_product(R, f.beta.d()), Y, pts)
        e2 = np.max(np.abs(vals), axis=1)
        _, grad = Y.values_and_gradients(pts)
        e3 = np.abs(np.einsum("ni,ni->n", grad, rv))
        return [max_check("alpha(R) = 1 on tangent frames", "beta(R) = 1 on |x| = 1", e1, tol.frame, pts),
                max_check("iota_R d alpha restricted to TY = 0", "iota_R d beta|_TY = 0", e2, tol.frame, pts),
                max_check("R tangent to Y", "d(|x|^2)(R) = 0", e3, tol.frame, pts)]

    T.add("Liouville field", "iota_X d beta = beta", liouville)
    T.add("(d beta)^3 nonvanishing", "(d beta)^3 != 0", volume)
    T.add("Liouville field outward", "X(|x|^2 - 1) > 0 on |x| = 1", outward)
    T.add("Reeb field on tangent frames", "beta(R) = 1, iota_R d beta|_TY = 0", frames)

    def boundary():
        f = F()
        rec = ContactFormRecord(f.y_chart, f.alpha0, name=f.y_chart.name)
        pts = f.y_chart.halton(2000, G.seed)
        e1, e2 = reeb_residuals(rec, boundary_reeb(f), pts)
        return [max_check("alpha(R_alpha) = 1 [T3xS2]", "alpha(R) = 1", e1, tol.reeb, pts),
                max_check("iota_R d alpha = 0 [T3xS2]", "iota_R d alpha = 0", e2, tol.reeb, pts)]

    T.add("boundary Reeb field", "alpha(R) = 1, iota_R d alpha = 0", boundary)
    T.add("standard model fields n=2", "Z_H = Z for the standard table", lambda: standard_model_fields(2)[3])
    T.add("standard model fields n=3", "Z_H = Z for the standard table", lambda: standard_model_fields(3)[3])
    T.add("Hamiltonian round trip", "alpha(Z_H) = H",
          lambda: _t3_roundtrip(F(), 1000, G.seed, tol.roundtrip))
    T.add("winding sweep", "[gamma] != 0 in H_1(T^3)", lambda: _winding_sweep(F(), cfg))
    T.add("irrational direction", "no closed orbit", lambda: _irrational(F(), cfg))

    _, mono = _bundle_tasks(cfg, T, "fiber", lambda: cotangent_t3_fiber(cfg.eps),
                            lambda f: default_t3_hamiltonians(f, cfg.monodromy.amp), "D*T3")

    def periods():
        f = F()
        base = f.sampler(20, 7)
        P = period_integrals(mono(), f.beta, base, ANGLES_T3)
        return max_check("period integrals of phi^* beta - beta", "int_c (phi^* beta - beta) = 0",
                         P, tol.exactness, np.repeat(base, 3, axis=0))

    T.add("period integrals", "int_c (phi^* beta - beta) = 0", periods)
    T.add("integrator order", "embedded Runge-Kutta order check", order_check)

    def scaling():
        d = disk_fiber(1, cfg.eps)
        return period_scaling_check(ContactFormRecord(d.y_chart, d.alpha0), math.e)

    T.add("Reeb period scaling", "R_{c alpha} = R_alpha / c", scaling)


# ---------------------------------------------------------------- registry
SCENARIOS = {
    "trivial_torus": _trivial_torus,
    "folded_spheres": _folded_spheres,
    "cotangent_t3": _cotangent_t3,
    "folded_t3": _folded_t3,
    "custom": _custom,
}

DESCRIPTIONS = {
    "trivial_torus": "disk fiber D^{2n} x S^1: sigma_st = beta + K d theta, K search, collar, splitting",
    "folded_spheres": "two disk fibers folded along S^{2n-1}: profile, seams, middle identity, fold, Reeb field",
    "cotangent_t3": "unit cotangent disk bundle of T^3: Liouville, Reeb frames, orbit windings, monodromy",
    "folded_t3": "two D*T^3 fibers folded along T^3 x S^2, with the contact fields Z and Z'",
    "custom": "folded sum with user-supplied profile strings f(t), g(t)",
}


def scenario_flow_field(cfg: ScenarioConfig):
    """Vector field integrated by ``foldform flow`` for a scenario."""
    if cfg.scenario == "trivial_torus":
        F = disk_fiber(cfg.n, cfg.eps)
        # identity monodromy: the total space is a product, so theta can be an angle
        ch = Chart(f"{F.name}xS1", list(F.chart.coords) + [Coord("theta", "angle")],
                   list(F.chart.orientation) + ["theta"])
        return VectorField.coordinate(ch, "theta", 1.0 / cfg.K)
    F = _fiber_for(cfg)
    if cfg.scenario == "cotangent_t3":
        return t3_ambient_reeb(F.chart)
    spec = folded_sum(F, profile=scenario_profile(cfg), reeb_alpha=boundary_reeb(F))
    fields, _ = folded_reeb_field(spec, assemble_folded_form(spec), n_points=100)
    return fields["middle"]
