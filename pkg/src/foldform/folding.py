"""Folded sums of two contact mapping tori along a common convex boundary.

A gluing profile ``(f, g)`` on ``(-1-eps, 1+eps)`` blends the collar form
``K e^{t+1} alpha + K d theta`` of the first piece into the collar form of
the second (with reversed circle direction) through ``f(t) alpha + g(t) d theta``
on ``(-1-eps, 1+eps) x Y x S^1``.  The four profile conditions

1. ``f`` even and ``f = K e^{t+1}`` on ``(-1-eps, -1]``,
2. ``g`` odd and ``g = K`` on ``(-1-eps, -1]``,
3. ``f'g - fg' > 0`` everywhere,
4. ``f'(t) = 0`` iff ``t = 0``,

make the middle form contact with volume ``n f^{n-1}(f'g - fg') dt ^ alpha ^
(d alpha)^{n-1} ^ d theta``, and its exterior derivative restricted to the
slices ``theta = const`` degenerates exactly on ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .contact import (ContactFormRecord, contact_residual, field_equation_residuals,
                      field_to_hamiltonian, hamiltonian_to_field, reeb_field, wedge_top_numeric)
from .exterior.chart import Chart, Coord
from .exterior.expr import (ONE, ZERO, Expr, as_expr, as_fraction, bump, compile_exprs, exp, is_structural_zero,
                            symbol)
from .exterior.forms import DifferentialForm, NumericVectorField, VectorField
from .exterior.maps import SmoothMap, pullback
from .exterior.parse import parse_expr
from .fibration import THETA, FiberData
from .report import Check, VerificationReport, bool_check, max_check, min_check

__all__ = [
    "ProfileError",
    "GluingProfile",
    "certify_profile",
    "make_gluing_profile",
    "custom_profile",
    "interpolate_profiles",
    "CutoffProfile",
    "make_cutoff",
    "FoldedSumSpec",
    "FoldedForm",
    "folded_sum",
    "assemble_folded_form",
    "middle_identity_residual",
    "fold_locus",
    "folded_reeb_field",
    "contact_field_Z",
    "modified_field",
    "interior_contact_field",
    "standard_model_fields",
    "folded_contact_checks",
    "piece_points",
    "middle_points",
    "fold_points",
]

T = "t"
Z_NAME = "z"


class ProfileError(ValueError):
    """A profile violates one of its defining conditions."""

    def __init__(self, report: VerificationReport):
        bad = report.failures()
        c = bad[0] if bad else None
        msg = "profile rejected" if c is None else (
            f"profile rejected: {c.name} fails (metric {c.metric:.3e}, witness t = {c.witness})")
        super().__init__(msg)
        self.report = report
        self.condition = None if c is None else c.name
        self.witness = None if c is None else c.witness


# ---------------------------------------------------------------- profiles
def _sweep(eps: float, resolution: int) -> np.ndarray:
    m = resolution if resolution % 2 == 1 else resolution + 1  # keep t = 0 on the grid
    return np.linspace(-1 - eps, 1 + eps, m)


def _parity_check(name, anchor, e: Expr, odd: bool, ts) -> Check:
    flipped = e.subs({T: -symbol(T)})
    diff = flipped + e if odd else flipped - e
    if is_structural_zero(diff):
        return bool_check(name, anchor, True, samples=len(ts))
    r = compile_exprs([diff], [T])(ts)[0]
    r = np.broadcast_to(r, ts.shape)
    i = int(np.argmax(np.abs(r)))
    return Check(name, anchor, float(abs(r[i])), 0.0, len(ts), False, [float(ts[i])],
                 detail={"structural": False})


def _band_check(name, anchor, e: Expr, target: Expr, eps: float, ts) -> Check:
    band = ts[ts <= -1.0]
    diff = e.on_interval(T, -1 - eps, -1) - target
    if is_structural_zero(diff):
        return bool_check(name, anchor, True, samples=len(band))
    r = np.broadcast_to(compile_exprs([e - target], [T])(band)[0], band.shape)
    i = int(np.argmax(np.abs(r)))
    return Check(name, anchor, float(abs(r[i])), 0.0, len(band), False, [float(band[i])],
                 detail={"structural": False})


def certify_profile(f, g, K: float, eps: float, resolution: int = 100_000) -> VerificationReport:
    """Machine-check the four profile conditions.

    Conditions (1), (2) and ``f'(0) = 0`` are structural (exact expression
    identities).  Positivity of ``q = f'g - fg'`` uses a sweep plus a
    first-order bound on every sweep cell: with ``L`` an upper bound of
    ``|q'|`` on the cell (endpoint values plus a second-derivative margin),
    ``min q >= (q_i + q_{i+1})/2 - L h/2``.
    """
    f, g = as_expr(f), as_expr(g)
    t = symbol(T)
    ts = _sweep(eps, resolution)
    rep = VerificationReport()
    rep.add(_parity_check("(1) f even", "f is an even function", f, False, ts))
    rep.add(_band_check("(1) f = K e^{t+1} on the collar band", "f(t) = K e^{t+1} on (-1-eps, -1]",
                        f, as_expr(K) * exp(t + 1), eps, ts))
    rep.add(_parity_check("(2) g odd", "g is an odd function", g, True, ts))
    rep.add(_band_check("(2) g = K on the collar band", "g(t) = K on (-1-eps, -1]", g, as_expr(K), eps, ts))

    fp, gp = f.diff(T), g.diff(T)
    q = fp * g - f * gp
    qp = q.diff(T)
    qpp = qp.diff(T)
    vals = compile_exprs([q, qp, qpp, fp], [T])(ts)
    qv, qpv, qppv, fpv = (np.broadcast_to(v, ts.shape).astype(float) for v in vals)
    rep.add(min_check("(3) f'g - fg' > 0 (sweep)", "f'g - fg' > 0 everywhere", qv, 0.0, ts[:, None]))
    h = ts[1] - ts[0]
    M2 = 2.0 * float(np.max(np.abs(qppv))) if qppv.size else 0.0
    L = np.maximum(np.abs(qpv[:-1]), np.abs(qpv[1:])) + M2 * h
    lower = 0.5 * (qv[:-1] + qv[1:]) - 0.5 * L * h
    rep.add(min_check("(3) f'g - fg' > 0 (cell bound)", "f'g - fg' > 0 everywhere", lower, 0.0,
                      (0.5 * (ts[:-1] + ts[1:]))[:, None], step=float(h)))

    neg, pos = ts < 0, ts > 0
    rep.add(min_check("(4) f' > 0 for t < 0", "f'(t) = 0 if and only if t = 0", fpv[neg], 0.0, ts[neg][:, None]))
    rep.add(min_check("(4) f' < 0 for t > 0", "f'(t) = 0 if and only if t = 0", -fpv[pos], 0.0, ts[pos][:, None]))
    f0 = fp.subs({T: 0})
    rep.add(bool_check("(4) f'(0) = 0", "f'(t) = 0 if and only if t = 0", is_structural_zero(f0),
                       metric=abs(float(f0)) if f0.is_constant or not f0.free else None, witness=[0.0]))
    return rep


@dataclass
class GluingProfile:
    f: Expr
    g: Expr
    K: float
    eps: float
    resolution: int = 100_000
    report: VerificationReport | None = None
    params: dict = field(default_factory=dict)

    @property
    def q(self) -> Expr:
        """``f'g - fg'``."""
        return self.f.diff(T) * self.g - self.f * self.g.diff(T)

    @property
    def certified(self) -> bool:
        return self.report is not None and self.report.overall

    def certify(self) -> VerificationReport:
        self.report = certify_profile(self.f, self.g, self.K, self.eps, self.resolution)
        return self.report

    def values(self, ts):
        """``f, g, f', g'`` at ``ts``."""
        ts = np.asarray(ts, dtype=float)
        fn = compile_exprs([self.f, self.g, self.f.diff(T), self.g.diff(T)], [T])
        return [np.broadcast_to(v, ts.shape) for v in fn(ts)]


def _default_fg(K, blend=(-1.0, -0.5)):
    t = symbol(T)
    Kx = as_expr(K)
    a, b = blend
    W = 1 - bump(t, a, b)
    Wm = 1 - bump(-t, a, b)
    E = exp(ONE)
    c0 = Kx * E
    c2 = Kx * (E - 1) * as_expr(0.5)
    cap = c0 - c2 * t * t
    f = W * Kx * exp(t + 1) + Wm * Kx * exp(1 - t) + (1 - W - Wm) * cap
    Tb = lambda s: bump(s, -1, 1)
    g = Kx * (Tb(-t) - Tb(t))
    return f, g


def make_gluing_profile(K: float = 1.0, eps: float = 0.2, blend=(-1.0, -0.5),
                        resolution: int = 100_000) -> GluingProfile:
    """Default profile.

    ``f`` blends ``K e^{t+1}``, the even cap ``K e - K (e-1) t^2 / 2`` and
    ``K e^{1-t}`` with smooth steps on the bands ``blend`` and ``-blend``;
    ``g = K (s(-t) - s(t))`` with ``s`` the smooth step from ``-1`` to ``1``.
    On the left band both pieces of ``f`` increase and the cap lies above
    the exponential, so ``f' > 0`` for ``t < 0``.  Raises :class:`ProfileError`.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    a, b = blend
    if not (-1 <= a < b <= -0.1):
        raise ValueError("blend band must lie inside [-1, -0.1]")
    f, g = _default_fg(K, blend)
    p = GluingProfile(f, g, float(K), float(eps), resolution, params={"kind": "default", "blend": list(blend)})
    if not p.certify().overall:
        raise ProfileError(p.report)
    return p


def custom_profile(f, g, K: float, eps: float, resolution: int = 100_000, strict: bool = True) -> GluingProfile:
    """Profile from expressions or strings in ``t``; certified on creation."""
    if isinstance(f, str):
        f = parse_expr(f, [T])
    if isinstance(g, str):
        g = parse_expr(g, [T])
    p = GluingProfile(as_expr(f), as_expr(g), float(K), float(eps), resolution, params={"kind": "custom"})
    p.certify()
    if strict and not p.report.overall:
        raise ProfileError(p.report)
    return p


def interpolate_profiles(p0: GluingProfile, p1: GluingProfile, s_values=None, resolution: int = 20_001):
    """Certify each member ``(1-s)(f0, g0) + s(f1, g1)`` of the linear family.

    Returns ``(profiles, report)``; the report holds one check per ``s``.
    """
    if p0.K != p1.K or p0.eps != p1.eps:
        raise ValueError("profiles must share K and eps")
    s_values = np.round(np.linspace(0, 1, 11), 12) if s_values is None else s_values
    out, rep = [], VerificationReport()
    for s in s_values:
        sx = as_expr(float(s))
        f = (1 - sx) * p0.f + sx * p1.f
        g = (1 - sx) * p0.g + sx * p1.g
        p = GluingProfile(f, g, p0.K, p0.eps, resolution)
        r = p.certify()
        out.append(p)
        bad = r.failures()
        rep.add(Check(f"profile family s={float(s):.2f}", "conditions (1)-(4) along the family",
                      float(len(bad)), 0.5, len(r), r.overall, None if r.overall else bad[0].witness,
                      detail={"failed": [c.name for c in bad]}))
    return out, rep


# ---------------------------------------------------------------- cutoff
@dataclass
class CutoffProfile:
    h: Expr
    inner: float
    outer: float
    report: VerificationReport | None = None

    def certify(self, resolution: int = 20_001) -> VerificationReport:
        ts = np.linspace(-1, 1, resolution if resolution % 2 else resolution + 1)
        rep = VerificationReport()
        rep.add(_parity_check("h even", "h is even", self.h, False, ts))
        plateau = self.h.on_interval(T, self.outer, 1) - 1
        rep.add(bool_check("h = 1 near t = +-1", "h = 1 near t = +-1", is_structural_zero(plateau),
                           samples=1, witness=[self.outer]))
        h0 = self.h.subs({T: 0})
        rep.add(bool_check("h(0) = 0", "h(t) = 0 if and only if t = 0", is_structural_zero(h0), witness=[0.0]))
        hv = np.broadcast_to(compile_exprs([self.h], [T])(ts)[0], ts.shape)
        nz = ts != 0
        rep.add(min_check("h > 0 for t != 0", "h(t) = 0 if and only if t = 0", hv[nz], 0.0, ts[nz][:, None]))
        self.report = rep
        return rep

    def mu(self) -> Expr:
        """``mu`` on the middle chart: ``h(t)``, which is already ``1`` for ``|t| >= outer``."""
        return self.h


def make_cutoff(inner: float = 0.5, outer: float = 0.8) -> CutoffProfile:
    """``h = B + (1 - B) t^2 / outer^2`` with ``B`` the smooth step of ``t^2``
    from ``inner^2`` to ``outer^2``: ``h = t^2/outer^2`` near 0 and ``1`` for ``|t| >= outer``."""
    if not 0 < inner < outer < 1:
        raise ValueError("need 0 < inner < outer < 1")
    t = symbol(T)
    a, b = as_fraction(inner) ** 2, as_fraction(outer) ** 2  # exact, so the plateau is structural
    B = bump(t * t, a, b)
    h = B + (1 - B) * t * t * as_expr(1 / b)
    c = CutoffProfile(h, inner, outer)
    if not c.certify().overall:
        raise ProfileError(c.report)
    return c


# ---------------------------------------------------------------- assembly
def _shift(form: DifferentialForm, chart: Chart, offset: int) -> DifferentialForm:
    return DifferentialForm(chart, form.degree, {tuple(i + offset for i in idx): c for idx, c in form.terms.items()})


def _middle_chart(y_chart: Chart, eps: float, last: Coord, name: str) -> Chart:
    coords = [Coord(T, "line", -1 - eps, 1 + eps)] + list(y_chart.coords) + [last]
    return Chart(name, coords, [T] + list(y_chart.orientation) + [last.name])


@dataclass
class FoldedSumSpec:
    """Two fibers sharing the boundary ``(Y, alpha)``; identity monodromies.

    ``z_extent`` bounds the line coordinate that replaces ``theta`` when the
    circle is punctured (contact-field checks).
    """

    fiber1: FiberData
    fiber2: FiberData
    profile: GluingProfile
    y_chart: Chart
    alpha: DifferentialForm
    reeb_alpha: VectorField | None = None
    z_extent: float = 2.0

    @property
    def n(self) -> int:
        return (self.y_chart.dim + 1) // 2

    @property
    def K(self) -> float:
        return self.profile.K

    @property
    def eps(self) -> float:
        return self.profile.eps

    def middle_chart(self) -> Chart:
        return _middle_chart(self.y_chart, self.eps, Coord(THETA, "angle"), f"mid_{self.y_chart.name}")

    def middle_z_chart(self) -> Chart:
        zc = Coord(Z_NAME, "line", -self.z_extent, self.z_extent)
        return _middle_chart(self.y_chart, self.eps, zc, f"midz_{self.y_chart.name}")

    def piece_chart(self, i: int) -> Chart:
        fib = self.fiber1 if i == 1 else self.fiber2
        o = list(fib.chart.orientation) + [THETA]
        if i == 2:  # reversed circle direction
            o[0], o[1] = o[1], o[0]
        return Chart(f"M{i}_{fib.name}", list(fib.chart.coords) + [Coord(THETA, "angle")], o)


def folded_sum(fiber1: FiberData, fiber2: FiberData | None = None, profile: GluingProfile | None = None,
               reeb_alpha: VectorField | None = None, z_extent: float = 2.0) -> FoldedSumSpec:
    fiber2 = fiber1 if fiber2 is None else fiber2
    if fiber1.y_chart.names != fiber2.y_chart.names:
        raise ValueError("fibers must share the boundary chart")
    a2 = DifferentialForm(fiber1.y_chart, 1, fiber2.alpha0.terms)
    if not fiber1.alpha0.structurally_equal(a2):
        raise ValueError("fibers must induce the same boundary contact form")
    profile = make_gluing_profile() if profile is None else profile
    if not profile.certified:
        raise ProfileError(profile.report or certify_profile(profile.f, profile.g, profile.K, profile.eps))
    return FoldedSumSpec(fiber1, fiber2, profile, fiber1.y_chart, fiber1.alpha0, reeb_alpha, z_extent)


@dataclass
class FoldedForm:
    spec: FoldedSumSpec
    pieces: dict
    middle_z: ContactFormRecord
    seam_report: VerificationReport

    @property
    def middle(self) -> ContactFormRecord:
        return self.pieces["middle"]


def _middle_form(spec: FoldedSumSpec, chart: Chart, last: str) -> DifferentialForm:
    a = _shift(spec.alpha, chart, 1)
    return a * spec.profile.f + DifferentialForm.dcoord(chart, last) * spec.profile.g


def _piece_form(spec: FoldedSumSpec, i: int) -> DifferentialForm:
    chart = spec.piece_chart(i)
    fib = spec.fiber1 if i == 1 else spec.fiber2
    K = as_expr(spec.K)
    sign = 1 if i == 1 else -1
    return DifferentialForm(chart, 1, fib.beta.terms) * K + DifferentialForm.dcoord(chart, THETA) * (K * sign)


def _seam(spec: FoldedSumSpec, i: int, mid: DifferentialForm, piece: DifferentialForm, samples: int = 400):
    """Compare the middle form with the collar pullback of piece ``i`` on its band."""
    eps = spec.eps
    lo, hi = (-1 - eps, -1.0) if i == 1 else (1.0, 1 + eps)
    mchart = mid.chart
    coords = [Coord(T, "line", lo, hi)] + list(mchart.coords[1:])
    band = Chart(f"seam{i}", coords, mchart.orientation)
    fib = spec.fiber1 if i == 1 else spec.fiber2
    t = symbol(T)
    tt = t if i == 1 else -t
    rules = [r.subs({T: tt}) for r in fib.collar_map.rules] + [symbol(THETA)]
    m = SmoothMap(band, piece.chart, rules)
    pulled = pullback(m, piece)
    mid_b = DifferentialForm(band, 1, mid.terms)
    structural = mid_b.on_interval(T, lo, hi).structurally_equal(pulled)

    rng = np.random.default_rng(11 + i)
    yp = spec.y_chart.random(samples, rng)
    edge = -1.0 if i == 1 else 1.0
    diff = pulled - mid_b
    keys = list(diff.terms)
    exprs = [diff.terms[k] for k in keys] + [diff.terms[k].diff(T) for k in keys]
    res = []
    for tv in (edge, 0.5 * (edge + (lo if i == 1 else hi))):
        p = np.concatenate([np.full((samples, 1), tv), yp, rng.uniform(0, 2 * math.pi, (samples, 1))], axis=1)
        if exprs:
            vals = compile_exprs(exprs, band.names)(*[p[:, j] for j in range(band.dim)])
            res.append(np.max(np.abs(np.stack([np.broadcast_to(v, (samples,)) for v in vals])), axis=0))
        else:
            res.append(np.zeros(samples))
    res = np.concatenate(res)
    side = "t = -1" if i == 1 else "t = +1"
    return [
        bool_check(f"seam {side}: structural match on the collar band",
                   "f alpha + g d theta equals the collar form of the piece", structural),
        max_check(f"seam {side}: values and t-derivatives", "f alpha + g d theta equals the collar form of the piece",
                  res, 1e-9),
    ]


def assemble_folded_form(spec: FoldedSumSpec) -> FoldedForm:
    """Three pieces: ``K(beta + d theta)`` on ``M1``, ``f alpha + g d theta`` on the
    middle, ``K(beta - d theta)`` on ``M2``; seams checked on both collar bands."""
    mchart = spec.middle_chart()
    mid = _middle_form(spec, mchart, THETA)
    p1, p2 = _piece_form(spec, 1), _piece_form(spec, 2)
    seam = VerificationReport()
    seam.add(_seam(spec, 1, mid, p1))
    seam.add(_seam(spec, 2, mid, p2))
    zchart = spec.middle_z_chart()
    midz = _middle_form(spec, zchart, Z_NAME)
    pieces = {
        "M1": ContactFormRecord(p1.chart, p1, name=p1.chart.name),
        "middle": ContactFormRecord(mchart, mid, name=mchart.name),
        "M2": ContactFormRecord(p2.chart, p2, name=p2.chart.name),
    }
    return FoldedForm(spec, pieces, ContactFormRecord(zchart, midz, name=zchart.name), seam)


def piece_points(spec: FoldedSumSpec, i: int, per_coord: int = 8, theta_count: int = 8,
                 max_fiber: int = 4000) -> np.ndarray:
    fib = spec.fiber1 if i == 1 else spec.fiber2
    fp = fib.grid(per_coord, max_points=max_fiber)
    th = np.linspace(0, 2 * math.pi, theta_count, endpoint=False)
    return np.concatenate([np.repeat(fp, len(th), axis=0), np.tile(th, len(fp))[:, None]], axis=1)


def middle_points(spec: FoldedSumSpec, n_points: int, seed: int = 0, chart: Chart | None = None) -> np.ndarray:
    chart = spec.middle_chart() if chart is None else chart
    return chart.halton(n_points, seed)


def folded_contact_checks(ff: FoldedForm, per_coord: int = 8, n_middle: int = 4000, seed: int = 0):
    """contact_residual on both interior pieces and a seam-straddling middle sample."""
    spec = ff.spec
    rep = VerificationReport()
    rep.add(contact_residual(ff.pieces["M1"], piece_points(spec, 1, per_coord),
                             anchor="sigma_1 = K(beta + d theta) contact on M1"))
    rep.add(contact_residual(ff.middle, middle_points(spec, n_middle, seed),
                             anchor="f alpha + g d theta contact on the middle piece"))
    rep.add(contact_residual(ff.pieces["M2"], piece_points(spec, 2, per_coord),
                             anchor="sigma_2 = K(beta - d theta) contact on reversed M2"))
    return rep


# ---------------------------------------------------------------- identities
def _y_volume(spec: FoldedSumSpec, yp: np.ndarray) -> np.ndarray:
    """``alpha ^ (d alpha)^{n-1}`` against the orientation of ``Y``."""
    n = spec.n
    a = spec.alpha.at(yp)
    da = spec.alpha.d().at(yp)
    return wedge_top_numeric([a] + [da] * (n - 1), yp.shape[0])


def middle_identity_residual(spec: FoldedSumSpec, points=None, n_points: int = 10_000, seed: int = 0,
                             tol: float = 1e-9) -> VerificationReport:
    """Relative deviation of the engine's ``sigma ^ (d sigma)^n`` from
    ``n f^{n-1} (f'g - fg') dt ^ alpha ^ (d alpha)^{n-1} ^ d theta``."""
    chart = spec.middle_chart()
    p = middle_points(spec, n_points, seed) if points is None else np.atleast_2d(points)
    N = p.shape[0]
    sig = _middle_form(spec, chart, THETA)
    lhs = wedge_top_numeric([sig.at(p)] + [sig.d().at(p)] * spec.n, N)
    f, g, fp, gp = spec.profile.values(p[:, 0])
    n = spec.n
    rhs = n * f ** (n - 1) * (fp * g - f * gp) * _y_volume(spec, p[:, 1:-1])
    rel = np.abs(lhs - rhs) / np.abs(rhs)
    return VerificationReport(checks=[max_check(
        f"middle identity n={n}", "sigma ^ (d sigma)^n = n f^{n-1}(f'g - fg') dt ^ alpha ^ (d alpha)^{n-1} ^ d theta",
        rel, tol, p, min_rhs=float(np.min(rhs)))])


def fold_points(spec: FoldedSumSpec, t_count: int = 201, y_count: int = 50, seed: int = 3) -> np.ndarray:
    """Product of a symmetric ``t`` grid on ``[-1, 1]`` (containing 0) and Halton ``Y`` points."""
    tc = t_count if t_count % 2 else t_count + 1
    ts = np.linspace(-1, 1, tc)
    yp = spec.y_chart.halton(y_count, seed)
    return np.concatenate([np.repeat(ts, len(yp))[:, None], np.tile(yp, (len(ts), 1))], axis=1), ts[1] - ts[0]


def fold_locus(spec: FoldedSumSpec, t_count: int = 201, y_count: int = 50, tol: float = 1e-9,
               zero_tol: float = 1e-12) -> VerificationReport:
    """Top power of ``d sigma`` on the slices ``theta = const`` versus
    ``n f' f^{n-1} dt ^ alpha ^ (d alpha)^{n-1}``; the zero set must sit
    within one grid step of ``t = 0`` and the sign must flip there."""
    fchart = Chart(f"slice_{spec.y_chart.name}", [Coord(T, "line", -1 - spec.eps, 1 + spec.eps)]
                   + list(spec.y_chart.coords), [T] + list(spec.y_chart.orientation))
    p, step = fold_points(spec, t_count, y_count)
    N = p.shape[0]
    ds = _middle_form(spec, spec.middle_chart(), THETA).d().drop([THETA])
    ds_slice = DifferentialForm(fchart, 2, ds.terms)
    val = wedge_top_numeric([ds_slice.at(p)] * spec.n, N)
    n = spec.n
    f, g, fp, gp = spec.profile.values(p[:, 0])
    closed = n * fp * f ** (n - 1) * _y_volume(spec, p[:, 1:])
    scale = float(np.max(np.abs(closed)))
    rel = np.abs(val - closed) / scale
    zeros = np.abs(val) <= zero_tol * scale
    t = p[:, 0]
    rep = VerificationReport()
    anchor = "[d sigma restricted to a slice]^n = n f' f^{n-1} dt ^ alpha ^ (d alpha)^{n-1}"
    rep.add(max_check(f"fold locus closed form n={n}", anchor, rel, tol, p))
    far = np.abs(t[zeros]) if zeros.any() else np.zeros(0)
    rep.add(Check(f"fold zero set within a grid step of t = 0 n={n}", "degenerate exactly on t = 0",
                  float(far.max()) if far.size else 0.0, float(step), int(zeros.sum()),
                  bool(far.size and far.max() < step), None))
    at0 = np.abs(t) < 0.5 * step
    rep.add(bool_check(f"fold degenerate on the t = 0 slice n={n}", "degenerate exactly on t = 0",
                       bool(np.all(zeros[at0])), samples=int(at0.sum())))
    left, right = t < -0.5 * step, t > 0.5 * step
    ok = bool(np.all(val[left] > 0) and np.all(val[right] < 0))
    rep.add(bool_check(f"fold sign flip across t = 0 n={n}", "sign of f' changes at the fold", ok,
                       samples=int(left.sum() + right.sum())))
    return rep


# ---------------------------------------------------------------- Reeb
def _reeb_alpha(spec: FoldedSumSpec):
    if spec.reeb_alpha is not None:
        return spec.reeb_alpha
    return reeb_field(ContactFormRecord(spec.y_chart, spec.alpha))


def folded_reeb_field(spec: FoldedSumSpec, ff: FoldedForm | None = None, n_points: int = 10_000,
                      seed: int = 5, tol: float = 1e-10):
    """Piecewise Reeb field ``{(1/K) d theta, (-g'/q) R_alpha + (f'/q) d theta, -(1/K) d theta}``
    and a report cross-checking it against the generic solver."""
    if not spec.profile.certified:
        raise ProfileError(spec.profile.report)
    ff = assemble_folded_form(spec) if ff is None else ff
    mchart = spec.middle_chart()
    Ra = _reeb_alpha(spec)
    f, g = spec.profile.f, spec.profile.g
    q = spec.profile.q
    invq = ONE / q
    ca = -g.diff(T) * invq
    cth = f.diff(T) * invq
    D = mchart.dim
    if isinstance(Ra, VectorField) and Ra.is_symbolic:
        comps = [ZERO] + [ca * c for c in Ra.components] + [cth]
        R_mid = VectorField(mchart, comps)
    else:
        cf = compile_exprs([ca, cth], [T])

        def fn(p):
            a, b = (np.broadcast_to(v, (p.shape[0],)) for v in cf(p[:, 0]))
            out = np.zeros((p.shape[0], D))
            out[:, 1:-1] = a[:, None] * Ra.evaluate(p[:, 1:-1])
            out[:, -1] = b
            return out
        R_mid = NumericVectorField(mchart, fn)
    K = as_expr(spec.K)
    R1 = VectorField.coordinate(ff.pieces["M1"].chart, THETA, ONE / K)
    R2 = VectorField.coordinate(ff.pieces["M2"].chart, THETA, -ONE / K)
    fields = {"M1": R1, "middle": R_mid, "M2": R2}

    rep = VerificationReport()
    p = middle_points(spec, n_points, seed)
    generic = reeb_field(ff.middle, mode="numeric").evaluate(p)
    rep.add(max_check("folded Reeb vs generic solver (middle)", "R_sigma = (-g'/q) R_alpha + (f'/q) d theta",
                      np.max(np.abs(R_mid.evaluate(p) - generic), axis=1), tol, p))
    yp = spec.y_chart.halton(500, seed + 1)
    p0 = np.concatenate([np.zeros((500, 1)), yp, np.zeros((500, 1))], axis=1)
    target = np.zeros((500, D))
    target[:, 1:-1] = Ra.evaluate(yp) / (spec.K * math.e)
    rep.add(max_check("folded Reeb at t = 0 equals R_alpha / (K e)", "f(0) = Ke and g(0) = 0",
                      np.max(np.abs(R_mid.evaluate(p0) - target), axis=1), tol, p0))
    for key, R in (("M1", R1), ("M2", R2)):
        rec = ff.pieces[key]
        pp = piece_points(spec, 1 if key == "M1" else 2, 5, 4)
        gen = reeb_field(rec, mode="numeric").evaluate(pp)
        rep.add(max_check(f"folded Reeb vs generic solver ({key})", "(1/K) d theta on the interior pieces",
                          np.max(np.abs(R.evaluate(pp) - gen), axis=1), tol, pp))
    return fields, rep


# ---------------------------------------------------------------- contact fields
def contact_field_Z(spec: FoldedSumSpec, ff: FoldedForm | None = None, n_sign: int = 1000, seed: int = 7):
    """``Z = (f g / q) d_t + z d_z`` on the punctured middle piece.

    Returns ``(Z, H_Z, report)`` with ``H_Z = sigma(Z)`` computed by the engine.
    """
    ff = assemble_folded_form(spec) if ff is None else ff
    rec = ff.middle_z
    chart = rec.chart
    f, g = spec.profile.f, spec.profile.g
    ct = f * g * (ONE / spec.profile.q)
    z = symbol(Z_NAME)
    comps = [ct] + [ZERO] * spec.y_chart.dim + [z]
    Z = VectorField(chart, comps)
    HZ = field_to_hamiltonian(Z, rec)

    rep = VerificationReport()
    rng = np.random.default_rng(seed)
    pts = chart.random(2000, rng)
    hz_vals = np.broadcast_to(compile_exprs([HZ - z], chart.names)(*[pts[:, i] for i in range(chart.dim)])[0],
                              (pts.shape[0],))
    ok = is_structural_zero(HZ - z)
    i = int(np.argmax(np.abs(hz_vals)))
    rep.add(Check("H_Z = z (structural)", "H_Z = sigma(Z) = z",
                  float(abs(hz_vals[i])), 0.0, pts.shape[0], ok, None if ok else pts[i].tolist(),
                  detail={"engine_H_Z": "sigma(Z)"}))
    gz = g * z
    rep.add(bool_check("H_Z = sigma(Z) = g z (structural)", "H_Z := sigma(Z) for the middle form f alpha + g dz",
                       is_structural_zero(HZ - gz)))
    e1, e2 = field_equation_residuals(Z, HZ, rec, pts)
    rep.add(max_check("Z is the contact field of sigma(Z)", "sigma(Z) = H, iota_Z d sigma = dH(R) sigma - dH",
                      np.maximum(e1, e2), 1e-9, pts))

    for i in (1, 2):
        Zi, reci = interior_contact_field(spec, i)
        fib = spec.fiber1 if i == 1 else spec.fiber2
        pp = np.concatenate([fib.sampler(500, seed + i), rng.uniform(-spec.z_extent, spec.z_extent, (500, 1))], axis=1)
        Hi = field_to_hamiltonian(Zi, reci)
        e1, e2 = field_equation_residuals(Zi, Hi, reci, pp)
        rep.add(max_check(f"Z = X_{i} + z d_z is contact on M{i}", "X_i + z d_z on the interior pieces",
                          np.maximum(e1, e2), 1e-9, pp))

    # sign pattern of f g / q on [-1, 0), {0}, (0, 1]
    m = n_sign
    ts = np.concatenate([-rng.uniform(0, 1, m // 2 - 1) - 0.0, [0.0], rng.uniform(0, 1, m - m // 2)])
    ts[: m // 2 - 1] = np.where(ts[: m // 2 - 1] == 0, -1.0, ts[: m // 2 - 1])
    ts[m // 2:] = np.where(ts[m // 2:] == 0, 1.0, ts[m // 2:])
    cv = np.broadcast_to(compile_exprs([ct], [T])(ts)[0], ts.shape)
    ok = bool(np.all(cv[ts < 0] > 0) and np.all(cv[ts == 0] == 0) and np.all(cv[ts > 0] < 0))
    rep.add(bool_check("sign pattern of fg/q is (+, 0, -)", "fg/(f'g-fg') > 0, = 0, < 0 on [-1,0), {0}, (0,1]",
                       ok, samples=len(ts)))
    rep.add(bool_check("Z d_t-component vanishes at t = 0 (structural)", "Z^t = 0 on t = 0",
                       is_structural_zero(ct.subs({T: 0}))))
    rep.add(bool_check("Z d_z-component vanishes at z = 0 (structural)", "Z^z = 0 on z = 0",
                       is_structural_zero(z.subs({Z_NAME: 0}))))
    return Z, HZ, rep


def interior_contact_field(spec: FoldedSumSpec, i: int):
    """``(X_i + z d_z, record of K(beta +- dz))`` on the punctured interior piece ``i``."""
    fib = spec.fiber1 if i == 1 else spec.fiber2
    if fib.liouville is None:
        raise ValueError(f"fiber {fib.name!r} has no Liouville field")
    zc = Coord(Z_NAME, "line", -spec.z_extent, spec.z_extent)
    o = list(fib.chart.orientation) + [Z_NAME]
    if i == 2:
        o[0], o[1] = o[1], o[0]
    chart = Chart(f"M{i}z_{fib.name}", list(fib.chart.coords) + [zc], o)
    K = as_expr(spec.K)
    sign = 1 if i == 1 else -1
    form = DifferentialForm(chart, 1, fib.beta.terms) * K + DifferentialForm.dcoord(chart, Z_NAME) * (K * sign)
    Z = VectorField(chart, list(fib.liouville.components) + [symbol(Z_NAME)])
    return Z, ContactFormRecord(chart, form, name=chart.name)


def modified_field(spec: FoldedSumSpec, cutoff: CutoffProfile, ff: FoldedForm | None = None,
                   Z: VectorField | None = None, HZ: Expr | None = None, n_points: int = 2000, seed: int = 9,
                   tol: float = 1e-10):
    """``Z'`` with ``H_{Z'} = mu H_Z``, ``mu = h(t)`` on the middle piece."""
    if cutoff.report is None or not cutoff.report.overall:
        raise ProfileError(cutoff.report or cutoff.certify())
    ff = assemble_folded_form(spec) if ff is None else ff
    if Z is None or HZ is None:
        Z, HZ, _ = contact_field_Z(spec, ff)
    rec = ff.middle_z
    chart = rec.chart
    H2 = cutoff.mu() * HZ
    Z2 = hamiltonian_to_field(H2, rec, mode="numeric")
    rng = np.random.default_rng(seed)
    rep = VerificationReport()

    pts = chart.random(n_points, rng)
    off = pts.copy()
    side = np.where(rng.random(n_points) < 0.5, -1.0, 1.0)
    off[:, 0] = side * rng.uniform(cutoff.outer, 1 + spec.eps, n_points)
    rep.add(max_check("Z' = Z off the cutoff band", "mu = 1 off the band",
                      np.max(np.abs(Z2.evaluate(off) - Z.evaluate(off)), axis=1), tol, off))
    on0 = pts.copy()
    on0[:, 0] = 0.0
    rep.add(max_check("Z' d_t-component vanishes at t = 0", "h(t) = 0 if and only if t = 0",
                      Z2.evaluate(on0)[:, 0], tol, on0))
    hv = compile_exprs([H2], chart.names)(*[pts[:, i] for i in range(chart.dim)])[0]
    hv = np.broadcast_to(hv, (n_points,))
    rt = np.abs(np.einsum("ni,ni->n", rec.jet(pts)[0], Z2.evaluate(pts)) - hv)
    rep.add(max_check("round trip H_{Z'} = mu H_Z", "H_{Z'} = mu H_Z", rt, tol, pts))
    hv0 = compile_exprs([H2], chart.names)(*[on0[:, i] for i in range(chart.dim)])[0]
    rep.add(max_check("H_{Z'} = 0 along the fold", "h(0) = 0", np.broadcast_to(hv0, (n_points,)), tol, on0))
    return Z2, H2, rep


# ---------------------------------------------------------------- standard model
def standard_model_fields(n: int):
    """``(chart, alpha, [(Z_i, H_i)], report)`` on ``(R^{2n+1}, dz + sum x_i dy_i)``.

    ``Z_i = d_{y_i}`` with ``H_i = x_i``; ``Z_{n+i} = d_{x_i} - y_i d_z`` with
    ``H_{n+i} = -y_i``; ``Z_{2n+1} = d_z`` with ``H_{2n+1} = 1``.
    """
    if n < 2:
        raise ValueError("standard_model_fields needs n >= 2")
    from .models import standard_model

    chart, alpha = standard_model(n)
    rec = ContactFormRecord(chart, alpha)
    pairs = []
    for i in range(1, n + 1):
        pairs.append((VectorField.from_dict(chart, {f"y{i}": ONE}), symbol(f"x{i}")))
    for i in range(1, n + 1):
        pairs.append((VectorField.from_dict(chart, {f"x{i}": ONE, "z": -symbol(f"y{i}")}), -symbol(f"y{i}")))
    pairs.append((VectorField.from_dict(chart, {"z": ONE}), ONE))

    rep = VerificationReport()
    for k, (Zk, Hk) in enumerate(pairs, start=1):
        Hz = field_to_hamiltonian(Zk, rec)
        ok1 = is_structural_zero(Hz - Hk)
        Zh = hamiltonian_to_field(Hk, rec, mode="symbolic")
        ok2 = Zh.structurally_equal(Zk)
        rep.add(bool_check(f"standard model pair {k}: alpha(Z) = H", "H_Z := alpha(Z)", ok1))
        rep.add(bool_check(f"standard model pair {k}: Z_H = Z", "iota_Z d alpha = dH(R) alpha - dH", ok2))
    # component matrix: rows = fields, columns = chart coordinates
    Mx = [[c for c in Zk.components] for Zk, _ in pairs]
    det = _symbolic_det(Mx)
    ok = det.is_constant and abs(float(det)) == 1.0
    rep.add(bool_check("standard model fields independent (det = +-1)", "2n+1 linearly independent contact fields",
                       ok, metric=0.0 if ok else 1.0))
    return chart, alpha, pairs, rep


def _symbolic_det(M: Sequence[Sequence[Expr]]) -> Expr:
    """Determinant by cofactor expansion along sparse rows (fine for unit-triangular patterns)."""
    n = len(M)
    if n == 1:
        return M[0][0]
    row = min(range(n), key=lambda r: sum(not c.is_zero for c in M[r]))
    total = ZERO
    for j, c in enumerate(M[row]):
        if c.is_zero:
            continue
        minor = [[M[r][k] for k in range(n) if k != j] for r in range(n) if r != row]
        total = total + c * _symbolic_det(minor) * (1 if (row + j) % 2 == 0 else -1)
    return total
