"""Trajectories of Reeb and contact fields, closed-orbit detection and
winding vectors on torus factors."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _rk
from ._rk import IntegrationError
from .exterior.chart import Chart
from .report import Check, VerificationReport, bool_check, max_check

__all__ = [
    "DomainExit",
    "WindingError",
    "Trajectory",
    "ReebOrbitRecord",
    "Winding",
    "integrate",
    "detect_periodic",
    "winding_vector",
    "order_check",
    "period_scaling_check",
    "IntegrationError",
]

TWO_PI = 2 * math.pi


class DomainExit(RuntimeError):
    def __init__(self, time, face, point):
        super().__init__(f"trajectory left the chart through {face} at t={time:.6g}")
        self.time = time
        self.face = face
        self.point = point


class WindingError(ArithmeticError):
    pass


def _angle_mask(chart: Chart) -> np.ndarray:
    return np.array([c.kind == "angle" for c in chart.coords])


def _line_bounds(chart: Chart):
    idx = [i for i, c in enumerate(chart.coords) if c.kind != "angle"]
    lo = np.array([chart.coords[i].lo for i in idx])
    hi = np.array([chart.coords[i].hi for i in idx])
    return np.array(idx, dtype=int), lo, hi


@dataclass
class Trajectory:
    """Accepted-step samples of one integral curve.

    ``states`` holds the integrated coordinates, where angle coordinates are
    never wrapped, so their columns are the continuous lifts.
    """

    field: object
    x0: np.ndarray
    times: np.ndarray
    states: np.ndarray
    tol: float
    stats: dict = field(default_factory=dict)
    exit: DomainExit | None = None

    @property
    def chart(self) -> Chart:
        return self.field.chart

    @property
    def points(self) -> np.ndarray:
        """States with angle coordinates reduced to the chart's period."""
        p = self.states.copy()
        m = _angle_mask(self.chart)
        lo = np.array([c.lo for c in self.chart.coords])[m]
        p[:, m] = lo + np.mod(p[:, m] - lo, TWO_PI)
        return p

    def lifts(self, names: Sequence[str] | None = None) -> np.ndarray:
        ch = self.chart
        names = [c.name for c in ch.coords if c.kind == "angle"] if names is None else list(names)
        return self.states[:, [ch.index(n) for n in names]]

    def state_at(self, s: float) -> np.ndarray:
        """Re-integrate from the nearest earlier sample to time ``s``."""
        i = int(np.searchsorted(self.times, s, side="right") - 1)
        i = max(0, min(i, len(self.times) - 1))
        t0, y0 = self.times[i], self.states[i]
        if s == t0:
            return y0.copy()
        y, _ = _rk.integrate_batch(_rhs(self.field), y0[None, :], s, rtol=self.tol, atol=self.tol, t0=t0)
        return y[0]

    def to_csv(self, path) -> None:
        """Write time, wrapped coordinates and angle lifts (path or open text stream)."""
        ch = self.chart
        angles = [c.name for c in ch.coords if c.kind == "angle"]
        pts = self.points
        lifts = self.lifts(angles)
        fh = path if hasattr(path, "write") else open(path, "w", newline="")
        try:
            w = csv.writer(fh)
            w.writerow(["time"] + list(ch.names) + [f"lift_{a}" for a in angles])
            for k in range(len(self.times)):
                w.writerow([repr(float(self.times[k]))] + [repr(float(v)) for v in pts[k]]
                           + [repr(float(v)) for v in lifts[k]])
        finally:
            if fh is not path:
                fh.close()


def _rhs(v):
    def rhs(t, y):
        return np.asarray(v.evaluate(y), dtype=float)
    return rhs


def _default_max_step(v, x0) -> float:
    """Cap steps so angle lifts move by well under pi per step."""
    speed = float(np.max(np.abs(v.evaluate(np.atleast_2d(x0)))))
    return 0.5 if speed == 0 else min(0.5, 0.5 / speed)


def integrate(v, x0, T: float, tol: float = 1e-10, max_step: float | None = None,
              on_step=None, raise_on_exit: bool = True) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) trajectory with ``rtol = atol = tol``.

    Leaving the box of a line coordinate raises :class:`DomainExit` (or, with
    ``raise_on_exit=False``, truncates the trajectory and records the exit).
    """
    ch = v.chart
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != ch.dim:
        raise ValueError(f"x0 has {x0.size} coordinates, chart {ch.name!r} has {ch.dim}")
    ch.check_points(x0[None, :])
    idx, lo, hi = _line_bounds(ch)
    hmax = _default_max_step(v, x0) if max_step is None else float(max_step)
    times, states = [0.0], [x0.copy()]
    info = {"exit": None}

    def step(t, y):
        y1 = y[0]
        if idx.size:
            below, above = y1[idx] < lo, y1[idx] > hi
            if below.any() or above.any():
                k = int(np.argmax(below | above))
                info["exit"] = (k, bool(below[k]))
                return True
        times.append(float(t))
        states.append(y1.copy())
        return bool(on_step(t, y1)) if on_step is not None else False

    _, stats = _rk.integrate_batch(_rhs(v), x0[None, :], float(T), rtol=tol, atol=tol,
                                   max_step=hmax, on_step=step)
    traj = Trajectory(v, x0, np.array(times), np.array(states), tol, stats)
    if info["exit"] is not None:
        k, low = info["exit"]
        face = f"{ch.coords[idx[k]].name}={'lo' if low else 'hi'}"
        traj.exit = _locate_exit(traj, idx[k], lo[k] if low else hi[k], face)
        if raise_on_exit:
            raise traj.exit
    return traj


def _locate_exit(traj: Trajectory, i: int, bound: float, face: str) -> DomainExit:
    """Crossing time of coordinate ``i`` through ``bound`` after the last sample."""
    t0 = float(traj.times[-1])
    hmax = _default_max_step(traj.field, traj.states[-1])
    gap = lambda s: traj.state_at(s)[i] - bound
    g0 = gap(t0)
    t1 = t0 + hmax
    while np.sign(gap(t1)) == np.sign(g0) and t1 < t0 + 64 * hmax:
        t1 += hmax
    try:
        s = brentq(gap, t0, t1, xtol=1e-12)
    except ValueError:
        s = t1
    return DomainExit(float(s), face, traj.state_at(s).tolist())


def _distance(chart: Chart, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.atleast_2d(a) - np.atleast_2d(b)
    m = _angle_mask(chart)
    d[:, m] = (d[:, m] + math.pi) % TWO_PI - math.pi
    return np.sqrt(np.sum(d * d, axis=1))


@dataclass
class ReebOrbitRecord:
    trajectory: Trajectory
    period: float | None
    closure: float | None
    stationary: bool = False
    winding: "Winding | None" = None

    @property
    def periodic(self) -> bool:
        return self.period is not None or self.stationary


def detect_periodic(v, x0, T_max: float = 500.0, closure_tol: float = 1e-6, tol: float = 1e-10,
                    max_step: float | None = None, angle_coords: Sequence[str] | None = None) -> ReebOrbitRecord:
    """Smallest return time with ``|x(T) - x0| < closure_tol`` (angles mod 2 pi).

    Coarse scan over accepted steps (capped length), then bounded scalar
    minimisation of the distance to the start on the bracketing pair of
    steps, with the state re-integrated from the preceding sample.
    """
    ch = v.chart
    x0 = np.asarray(x0, dtype=float).ravel()
    speed0 = float(np.max(np.abs(v.evaluate(x0[None, :]))))
    if speed0 == 0.0:
        traj = Trajectory(v, x0, np.array([0.0]), x0[None, :].copy(), tol)
        rec = ReebOrbitRecord(traj, None, 0.0, stationary=True)
        return rec
    hmax = _default_max_step(v, x0) if max_step is None else float(max_step)
    state = {"left": False, "prev": [(0.0, 0.0)], "hit": None}
    coarse = 2.0 * hmax * max(speed0, 1e-300) * 1.5

    def on_step(t, y):
        d = float(_distance(ch, y, x0)[0])
        hist = state["prev"]
        hist.append((t, d))
        if not state["left"]:
            if d > coarse:
                state["left"] = True
            return False
        if len(hist) >= 3:
            (ta, da), (tb, db), (tc, dc) = hist[-3:]
            if db <= da and db <= dc and db < coarse:
                state["hit"] = (ta, tc)
                return True
        return False

    # integrate until a candidate minimum; resume from there if it does not close
    t_start, y_start = 0.0, x0.copy()
    all_t, all_y = [0.0], [x0.copy()]
    stats_acc = {"accepted": 0, "rejected": 0}
    while True:
        state["hit"] = None
        tr = integrate(v, y_start, T_max - t_start, tol=tol, max_step=hmax,
                       on_step=lambda t, y, _s=t_start: on_step(t + _s, y))
        all_t.extend((tr.times[1:] + t_start).tolist())
        all_y.extend(tr.states[1:])
        stats_acc["accepted"] += tr.stats["accepted"]
        stats_acc["rejected"] += tr.stats["rejected"]
        traj = Trajectory(v, x0, np.array(all_t), np.array(all_y), tol, dict(stats_acc))
        if state["hit"] is None:
            return ReebOrbitRecord(traj, None, None)
        ta, tc = state["hit"]

        def dist(s):
            return float(_distance(ch, traj.state_at(s), x0)[0])
        res = minimize_scalar(dist, bounds=(ta, tc), method="bounded", options={"xatol": 1e-12, "maxiter": 200})
        T = _polish(v, traj, x0, float(res.x), ta, tc)
        dT = dist(T)
        if dT < closure_tol:
            end = traj.state_at(T)
            keep = traj.times < T
            traj = Trajectory(v, x0, np.append(traj.times[keep], T), np.vstack([traj.states[keep], end]), tol,
                              dict(stats_acc))
            rec = ReebOrbitRecord(traj, T, dT)
            if angle_coords is not None:
                rec.winding = winding_vector(rec, angle_coords)
            return rec
        t_start, y_start = all_t[-1], np.array(all_y[-1])
        if t_start >= T_max:
            return ReebOrbitRecord(traj, None, None)


def _polish(v, traj, x0, s, lo, hi, iters: int = 4) -> float:
    """Projection steps on ``(x(s) - x0) . v(x(s)) = 0``; the bounded
    minimiser alone stops at a relative tolerance of about ``sqrt(eps)``."""
    ch = v.chart
    m = _angle_mask(ch)
    for _ in range(iters):
        y = traj.state_at(s)
        d = y - x0
        d[m] = (d[m] + math.pi) % TWO_PI - math.pi
        w = v.evaluate(y[None, :])[0]
        ww = float(w @ w)
        if ww == 0:
            break
        step = float(d @ w) / ww
        s_new = min(max(s - step, lo), hi)
        if abs(s_new - s) < 1e-15 * max(1.0, abs(s)):
            s = s_new
            break
        s = s_new
    return s


@dataclass
class Winding:
    vector: tuple
    residual: float
    verdict: str
    names: tuple


def winding_vector(orbit: ReebOrbitRecord, angle_coords: Sequence[str] | None = None) -> Winding:
    """Integer lift differences over one period, per angle coordinate.

    ``non-contractible (nonzero torus class)`` iff the vector is nonzero;
    a zero vector is reported ``inconclusive``.
    """
    ch = orbit.trajectory.chart
    names = tuple(c.name for c in ch.coords if c.kind == "angle") if angle_coords is None else tuple(angle_coords)
    if orbit.stationary:
        return Winding(tuple(0 for _ in names), 0.0, "inconclusive", names)
    if orbit.period is None:
        raise WindingError("orbit is not periodic")
    L = orbit.trajectory.lifts(names)
    raw = (L[-1] - L[0]) / TWO_PI
    w = np.rint(raw)
    resid = float(np.max(np.abs(raw - w))) if raw.size else 0.0
    if resid >= 0.01:
        raise WindingError(f"rounding residual {resid:.3g} >= 0.01 (period too inaccurate)")
    vec = tuple(int(x) for x in w)
    verdict = "non-contractible (nonzero torus class)" if any(vec) else "inconclusive"
    return Winding(vec, resid, verdict, names)


# ---------------------------------------------------------------- integrator checks
def _circle_rhs(t, y):
    return np.stack([-y[:, 1], y[:, 0]], axis=1)


def order_check(steps: Sequence[int] = (12, 24, 48, 96)) -> Check:
    """Fixed-step closure error of the unit circle orbit after ``2 pi``.

    Halving the step must shrink the error by at least ``order - 1`` on a
    log-log fit (the local error estimate of the embedded pair is tied to
    the step, so the step is halved rather than the tolerance).
    """
    x0 = np.array([[1.0, 0.0]])
    hs, errs = [], []
    for n in steps:
        y = _rk.fixed_step(_circle_rhs, x0, TWO_PI, int(n))
        errs.append(float(np.linalg.norm(y - x0)))
        hs.append(TWO_PI / n)
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    need = _rk.ORDER - 1
    return Check("integrator order (circle orbit)", "embedded Runge-Kutta order check", slope, need,
                 len(steps), slope >= need, None, detail={"errors": errs, "steps": list(steps)})


def period_scaling_check(circle_record, scale: float, T_max: float = 100.0, closure_tol: float = 1e-6,
                         tol: float = 1e-10, rel_tol: float = 1e-6) -> VerificationReport:
    """Scaling the contact form by ``scale`` scales the Reeb period by ``scale``."""
    from .contact import reeb_field

    x0 = np.array([c.lo for c in circle_record.chart.coords]) + 0.1
    o1 = detect_periodic(reeb_field(circle_record), x0, T_max, closure_tol, tol)
    o2 = detect_periodic(reeb_field(circle_record.scaled(scale)), x0, T_max, closure_tol, tol)
    rep = VerificationReport()
    if o1.period is None or o2.period is None:
        rep.add(bool_check("Reeb period scaling", "R_{c alpha} = R_alpha / c, so periods scale by c", False,
                           detail_periods=[o1.period, o2.period]))
        return rep
    rel = abs(o2.period / o1.period - scale) / scale
    rep.add(max_check("Reeb period scaling", "R_{c alpha} = R_alpha / c, so periods scale by c", [rel], rel_tol,
                      periods=[o1.period, o2.period], scale=scale))
    return rep
