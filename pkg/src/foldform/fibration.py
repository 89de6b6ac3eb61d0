"""Mapping tori of compactly supported exact symplectomorphisms and their
bundle contact forms ``sigma = lambda_beta + K d theta``.

Total-space chart
-----------------
Fiber coordinates followed by ``theta`` as a line coordinate on
``[-pi, pi]``.  The mapping torus is this box with ``(p, -pi)`` glued to
``(phi(p), pi)``.  With the two-arc partition ``f1 + f2 = 1`` (``f1 = 1``
near ``theta = 0``, ``f2 = 1`` near ``theta = pi``) the fiberwise form is

    lambda_beta = beta + s(theta) (phi^* beta - beta),
    s = f2 on theta < 0,  s = 0 on theta >= 0,

which is smooth across ``theta = 0`` (``f2`` vanishes there) and agrees
with the gluing at ``theta = +-pi``.  Hence

    d lambda_beta = d beta + s (phi^* d beta - d beta) + s' d theta ^ (phi^* beta - beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .contact import ContactFormRecord, contact_ratio, wedge_top_numeric
from .exterior.chart import Chart, ChartError, Coord
from .exterior.expr import Expr, ZERO, as_expr, bump, compile_exprs, cos, symbol
from .exterior.forms import (DifferentialForm, VectorField, interior_product, one_form_vector,
                             two_form_matrix, wedge)
from .exterior.linsolve import solve_symbolic
from .exterior.maps import ComposedMap, FlowMap, SmoothMap, pullback_at, pullback_numeric
from .report import Check, VerificationReport, bool_check, max_check, min_check

__all__ = [
    "CirclePartition",
    "circle_partition",
    "FiberData",
    "MonodromyMap",
    "monodromy_from_hamiltonians",
    "hamiltonian_vector_field",
    "verify_exact_symplectomorphism",
    "MappingTorusSpec",
    "LambdaBeta",
    "build_lambda_beta",
    "BundleForm",
    "build_bundle_contact_form",
    "collar_check",
    "horizontal_subspace",
    "DegenerateVerticalForm",
    "period_integrals",
    "certification_points",
    "audit_points",
    "total_points",
    "bundle_record",
    "KSearchDiverged",
]

THETA = "theta"


@dataclass(frozen=True)
class CirclePartition:
    """Two arcs ``U1`` (around 0) and ``U2`` (around pi) with a smooth
    subordinate partition of unity; ``f2`` is defined as ``1 - f1``."""

    overlap: float
    f1: Expr
    f2: Expr
    arcs: tuple

    def values(self, theta):
        fn = compile_exprs([self.f1, self.f2, self.f1.diff(THETA)], [THETA])
        return fn(np.asarray(theta, dtype=float))


def circle_partition(overlap: float) -> CirclePartition:
    """Partition with ``f1 = bump(cos theta; -s0, s0)``, ``s0 = sin(overlap/4)``.

    ``f1 = 1`` on ``|theta| <= pi/2 - overlap/4`` and ``0`` on
    ``|theta| >= pi/2 + overlap/4``; arcs have half-width ``(pi + overlap)/2``.
    """
    if not (0 < overlap < math.pi):
        raise ValueError(f"overlap must lie in (0, pi), got {overlap}")
    s0 = math.sin(overlap / 4)
    th = symbol(THETA)
    f1 = bump(cos(th), -s0, s0)
    half = (math.pi + overlap) / 2
    arcs = ((-half, half), (math.pi - half, math.pi + half))
    return CirclePartition(float(overlap), f1, 1 - f1, arcs)


@dataclass
class FiberData:
    """A compact exact symplectic fiber with a collar of its convex boundary.

    Attributes
    ----------
    chart : fiber chart (a box containing the fiber domain)
    beta : Liouville 1-form
    liouville : Liouville field ``X`` with ``iota_X d beta = beta``
    boundary : level expression of ``partial Sigma`` (``0`` on the boundary, ``< 0`` inside)
    collar_map : SmoothMap ``(t, y) -> fiber`` from the collar chart,
        with ``collar_map^* beta = e^{t+1} alpha0``
    alpha0 : contact form of ``beta`` on the boundary chart (the collar map at ``t = -1``)
    inside : vectorised predicate for points of the fiber domain
    collar_radius : points with ``radius(p) >= collar_radius`` lie in the collar
    radius : vectorised radial function (distance-like, ``1`` on the boundary)
    sampler : ``sampler(n, seed) -> points`` in the fiber domain
    """

    name: str
    chart: Chart
    beta: DifferentialForm
    liouville: VectorField
    boundary: Expr
    y_chart: Chart
    collar_chart: Chart
    collar_map: SmoothMap
    alpha0: DifferentialForm
    inside: Callable
    radius: Callable
    collar_radius: float
    sampler: Callable
    collar_sampler: Callable

    @property
    def n(self) -> int:
        return self.chart.dim // 2

    def grid(self, per_coord: int, max_points: int = 20000) -> np.ndarray:
        pts = self.chart.grid(per_coord, max_points=max_points)
        return pts[self.inside(pts)]


def hamiltonian_vector_field(h, beta: DifferentialForm) -> VectorField:
    """``X_h`` with ``iota_{X_h} d beta = -dh`` (closed form)."""
    chart = beta.chart
    h = as_expr(h)
    w = beta.d()
    D = chart.dim
    W = [[ZERO] * D for _ in range(D)]
    for (i, j), c in w.terms.items():
        W[i][j] = c
        W[j][i] = -c
    M = [[W[j][i] for j in range(D)] for i in range(D)]
    rhs = [-h.diff(nm) for nm in chart.names]
    sol = solve_symbolic(M, rhs)
    if sol is None:
        raise ArithmeticError("d beta is degenerate; no Hamiltonian field")
    return VectorField(chart, sol)


class MonodromyMap:
    """Composition of time-1 flows of compactly supported Hamiltonians."""

    def __init__(self, fiber: FiberData, hamiltonians: Sequence, tol: float = 1e-10,
                 collar_samples: int = 4000):
        self.fiber = fiber
        self.hamiltonians = [as_expr(h) for h in hamiltonians]
        self.tol = float(tol)
        chart = fiber.chart
        if self.hamiltonians:
            cpts = fiber.collar_sampler(collar_samples, 7)
            names = chart.names
            for k, h in enumerate(self.hamiltonians):
                extra = h.free - set(names)
                if extra:
                    raise ChartError(f"Hamiltonian {k} uses unknown symbols {sorted(extra)}")
                vals = compile_exprs([h] + [h.diff(nm) for nm in names], names)(
                    *[cpts[:, i] for i in range(chart.dim)])
                # rounding in the mollifier ratio leaves ~1e-16 on plateaus
                worst = max(float(np.max(np.abs(v))) for v in vals)
                if worst > 1e-12:
                    i = int(np.argmax(np.abs(vals[0]) + sum(np.abs(v) for v in vals[1:])))
                    raise ValueError(
                        f"Hamiltonian {k} does not vanish on the boundary collar "
                        f"(|h|+|dh| = {worst:.3e} at {cpts[i].tolist()})")
        self.fields = [hamiltonian_vector_field(h, fiber.beta) for h in self.hamiltonians]
        self.map = ComposedMap([FlowMap(X, 1.0, self.tol) for X in self.fields], chart=chart)

    @property
    def is_identity(self) -> bool:
        return not self.hamiltonians

    def apply(self, points):
        return self.map.apply(points)

    def apply_with_jacobian(self, points):
        return self.map.apply_with_jacobian(points)

    @property
    def source(self):
        return self.fiber.chart

    target = source


def monodromy_from_hamiltonians(hs, fiber: FiberData, tol: float = 1e-10) -> MonodromyMap:
    return MonodromyMap(fiber, hs, tol)


_FD6 = [(-3, -1 / 60), (-2, 9 / 60), (-1, -45 / 60), (1, 45 / 60), (2, -9 / 60), (3, 1 / 60)]


def _fd_closedness(mono: MonodromyMap, beta: DifferentialForm, points, h: float = 1e-4):
    """Max over points of the components of ``d(phi^* beta - beta)`` by
    sixth-order central differences of the pulled-back components.

    All stencil points are integrated in one batch, so they share a step
    sequence and the integration error is smooth across the stencil.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    n, D = p.shape
    stacked = [p]
    for k in range(D):
        for s, _ in _FD6:
            q = p.copy()
            q[:, k] += s * h
            stacked.append(q)
    allp = np.concatenate(stacked)
    pulled = pullback_at(mono.map, beta, allp)
    diff = one_form_vector(pulled, allp.shape[0]) - one_form_vector(beta.at(allp), allp.shape[0])
    blocks = diff.reshape(1 + D * len(_FD6), n, D)
    deriv = np.zeros((n, D, D))  # deriv[:, k, j] = d/dx_k (component j)
    b = 1
    for k in range(D):
        acc = np.zeros((n, D))
        for _, w in _FD6:
            acc += w * blocks[b]
            b += 1
        deriv[:, k, :] = acc / h
    curl = deriv - np.swapaxes(deriv, 1, 2)
    return np.max(np.abs(curl), axis=(1, 2))


def period_integrals(mono: MonodromyMap, beta: DifferentialForm, base_points, angle_names,
                     samples: int = 64) -> np.ndarray:
    """Integrals of ``phi^* beta - beta`` around each coordinate angle loop
    through the base points (trapezoid rule, spectrally accurate for
    periodic integrands).  Returns ``(N, len(angle_names))``."""
    chart = beta.chart
    p = np.atleast_2d(np.asarray(base_points, dtype=float))
    out = np.zeros((p.shape[0], len(angle_names)))
    s = 2 * np.pi * np.arange(samples) / samples
    for a, name in enumerate(angle_names):
        k = chart.index(name)
        loop = np.repeat(p, samples, axis=0)
        loop[:, k] = np.tile(s, p.shape[0])
        pulled = pullback_at(mono.map, beta, loop)
        comp = np.broadcast_to(pulled.terms.get((k,), 0.0), (loop.shape[0],)) - \
            np.broadcast_to(beta.at(loop).terms.get((k,), 0.0), (loop.shape[0],))
        out[:, a] = comp.reshape(p.shape[0], samples).mean(axis=1) * 2 * np.pi
    return out


def verify_exact_symplectomorphism(mono, beta: DifferentialForm, points, collar_points=None,
                                   tol: float = 1e-6, fd_points: int = 200) -> VerificationReport:
    """(i) ``phi^* d beta = d beta``, (ii) ``d(phi^* beta - beta) = 0``
    (finite differences), (iii) ``phi = id`` on the collar."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    dbeta = beta.d()
    phi = mono.map if isinstance(mono, MonodromyMap) else mono
    pulled = pullback_at(phi, dbeta, p)
    ref = dbeta.at(p)
    n = p.shape[0]
    res = np.max(np.abs(two_form_matrix(pulled, n) - two_form_matrix(ref, n)), axis=(1, 2))
    rep = VerificationReport()
    rep.add(max_check("phi^* d beta = d beta", "phi^*(d beta) = d beta", res, tol, p))
    sub = p[:: max(1, n // fd_points)]
    if isinstance(mono, MonodromyMap):
        closed = _fd_closedness(mono, beta, sub)
    else:
        closed = _fd_closedness(_Wrap(phi), beta, sub)
    rep.add(max_check("d(phi^* beta - beta) = 0", "d(phi^* beta - beta) = 0", closed, tol, sub,
                      method="6th-order central differences, h=1e-4"))
    if collar_points is not None:
        c = np.atleast_2d(collar_points)
        moved = np.max(np.abs(phi.apply(c) - c), axis=1)
        rep.add(max_check("phi = id on collar", "phi = id near boundary", moved, tol, c))
    return rep


class _Wrap:
    def __init__(self, m):
        self.map = m


@dataclass
class MappingTorusSpec:
    fiber: FiberData
    monodromy: MonodromyMap
    partition: CirclePartition
    K: float = 1.0
    eps: float = 0.2

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("K must be positive")
        if not (0 < self.eps < 1):
            raise ValueError("collar width eps must lie in (0, 1)")

    def total_chart(self) -> Chart:
        f = self.fiber.chart
        return Chart(f"{f.name}xS1", list(f.coords) + [Coord(THETA, "line", -math.pi, math.pi)],
                     list(f.orientation) + [THETA])


def _lift(form: DifferentialForm, chart: Chart) -> DifferentialForm:
    """Numeric fiber form viewed on the total chart (fiber indices coincide)."""
    out = DifferentialForm(chart, form.degree, {})
    out.terms = dict(form.terms)
    return out


class LambdaBeta:
    """Pointwise evaluator of ``lambda_beta`` and ``d lambda_beta``."""

    def __init__(self, spec: MappingTorusSpec):
        self.spec = spec
        self.chart = spec.total_chart()
        self.fiber = spec.fiber
        self.beta = spec.fiber.beta
        self.dbeta = self.beta.d()
        f2 = spec.partition.f2
        self._s = compile_exprs([f2, f2.diff(THETA)], [THETA])

    def s_values(self, theta):
        theta = np.asarray(theta, dtype=float)
        f2, df2 = self._s(theta)
        neg = theta < 0
        return np.where(neg, f2, 0.0), np.where(neg, df2, 0.0)

    def jet(self, points):
        """Numeric ``(lambda_beta, d lambda_beta)`` on the total chart."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        N = p.shape[0]
        D = self.fiber.chart.dim
        x, th = p[:, :D], p[:, D]
        s, ds = self.s_values(th)
        lam = one_form_vector(self.beta.at(x), N)
        dlam = two_form_matrix(self.dbeta.at(x), N)
        twist = (s != 0) | (ds != 0)
        if twist.any() and not self.spec.monodromy.is_identity:
            xt = x[twist]
            # the monodromy acts on the fiber only: integrate once per distinct fiber point
            uniq, back = np.unique(xt, axis=0, return_inverse=True)
            back = np.ravel(back)
            F, J = self.spec.monodromy.apply_with_jacobian(uniq)
            m = uniq.shape[0]
            pb = one_form_vector(pullback_numeric(self.beta.at(F), J, self.fiber.chart), m)[back]
            pdb = two_form_matrix(pullback_numeric(self.dbeta.at(F), J, self.fiber.chart), m)[back]
            diff1 = pb - lam[twist]
            lam[twist] = lam[twist] + s[twist, None] * diff1
            dlam[twist] = dlam[twist] + s[twist, None, None] * (pdb - dlam[twist])
            full = np.zeros((N, D + 1, D + 1))
            full[:, :D, :D] = dlam
            # s' d theta ^ diff1: component (theta, j) = s' diff1_j
            full[twist, D, :D] = ds[twist, None] * diff1
            full[twist, :D, D] = -ds[twist, None] * diff1
        else:
            full = np.zeros((N, D + 1, D + 1))
            full[:, :D, :D] = dlam
        a = np.zeros((N, D + 1))
        a[:, :D] = lam
        return a, full

    def forms(self, points, K: float = 0.0):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a, W = self.jet(p)
        a = a.copy()
        a[:, -1] += K
        return _forms_from_arrays(self.chart, a, W)


def _forms_from_arrays(chart, a, W):
    D = chart.dim
    one = DifferentialForm(chart, 1, {})
    one.terms = {(i,): a[:, i] for i in range(D)}
    two = DifferentialForm(chart, 2, {})
    two.terms = {(i, j): W[:, i, j] for i in range(D) for j in range(i + 1, D)}
    return one, two


def build_lambda_beta(spec: MappingTorusSpec) -> LambdaBeta:
    return LambdaBeta(spec)


@dataclass
class BundleForm:
    record: ContactFormRecord
    K: float
    K_min: float
    lam: LambdaBeta
    report: VerificationReport
    history: list = field(default_factory=list)


def _ratio_parts(lam: LambdaBeta, points):
    """``ratio(K) = A + K B`` for ``sigma = lambda_beta + K d theta``."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    N = p.shape[0]
    a, W = lam.jet(p)
    one, two = _forms_from_arrays(lam.chart, a, W)
    n = lam.fiber.n
    A = wedge_top_numeric([one] + [two] * n, N)
    dth = DifferentialForm(lam.chart, 1, {})
    dth.terms = {(lam.chart.dim - 1,): np.ones(N)}
    B = wedge_top_numeric([dth] + [two] * n, N)
    return A, B


def _passes(ratio, margin=1e-8):
    top = float(np.max(np.abs(ratio))) if ratio.size else 0.0
    return bool(ratio.size) and float(np.min(ratio)) > margin * top


def bundle_record(lam: LambdaBeta, K: float, name: str = "") -> ContactFormRecord:
    def jet(p):
        return lam.forms(p, K)
    return ContactFormRecord(lam.chart, jet=jet, name=name or f"sigma [{lam.chart.name}]")


def total_points(fiber_points, thetas) -> np.ndarray:
    fp = np.atleast_2d(fiber_points)
    th = np.asarray(thetas, dtype=float)
    x = np.repeat(fp, th.size, axis=0)
    t = np.tile(th, fp.shape[0])
    return np.concatenate([x, t[:, None]], axis=1)


def _theta_axis(m: int) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, m)


def certification_points(spec: MappingTorusSpec, per_coord: int = 16, theta_count: int = 64,
                         max_fiber: int = 4000) -> np.ndarray:
    """Fiber product grid times a base-circle grid.

    The base coordinate gets more points than the fiber ones because the
    partition-of-unity derivative concentrates in two narrow bands.
    """
    fp = spec.fiber.grid(per_coord, max_points=max_fiber)
    return total_points(fp, _theta_axis(theta_count))


def audit_points(spec: MappingTorusSpec, per_coord: int = 16, theta_count: int = 64,
                 max_fiber: int = 4000, halton: int = 2000, seed: int = 1, refine_cap: int = 8) -> np.ndarray:
    """Grid with twice the resolution in every coordinate plus Halton points.

    The fiber part may hold at most ``refine_cap * max_fiber`` points, so in
    high dimension the fiber refinement is less than twofold per coordinate.
    """
    cap = min(2 ** spec.fiber.chart.dim, refine_cap) * max_fiber
    fp = spec.fiber.grid(2 * per_coord, max_points=cap)
    fine = total_points(fp, _theta_axis(2 * theta_count))
    hp = spec.fiber.sampler(halton, seed)
    th = spec.total_chart().halton(halton, seed)[:, -1]
    return np.concatenate([fine, np.concatenate([hp, th[:, None]], axis=1)])


def build_bundle_contact_form(spec: MappingTorusSpec, cert_points=None, audit=None,
                              K_cap: float = 2.0 ** 30) -> BundleForm:
    """Doubling search for the smallest grid-certified ``K`` (from 1), then
    ``K = 2 K_min`` with an audit on a finer grid plus Halton points."""
    lam = build_lambda_beta(spec)
    cert = certification_points(spec) if cert_points is None else np.atleast_2d(cert_points)
    aud = audit_points(spec) if audit is None else np.atleast_2d(audit)
    A, B = _ratio_parts(lam, cert)
    K = 1.0
    history = []
    while True:
        ratio = A + K * B
        ok = _passes(ratio)
        history.append((K, float(np.min(ratio))))
        if ok:
            break
        K *= 2
        if K > K_cap:
            i = int(np.argmin(A + K_cap * B))
            rep = VerificationReport(checks=[Check(
                "K search", "sigma = lambda_beta + K d theta contact for large K", float(np.min(A + K_cap * B)),
                0.0, cert.shape[0], False, cert[i].tolist(), detail={"error": "K search diverged"})])
            raise KSearchDiverged(rep, cert[i].tolist())
    K_min = K
    K_final = 2 * K_min
    rc = A + K_final * B
    Aa, Ba = _ratio_parts(lam, aud)
    ra = Aa + K_final * Ba
    rep = VerificationReport()
    rep.add(min_check("K certification grid", "sigma ^ (d sigma)^n > 0 for K = 2 K_min", rc,
                      1e-8 * float(np.max(np.abs(rc))), cert, K_min=K_min, K=K_final))
    rep.add(min_check("K audit grid (2x finer + Halton)", "sigma ^ (d sigma)^n > 0 for K = 2 K_min", ra,
                      1e-8 * float(np.max(np.abs(ra))), aud, K=K_final))
    return BundleForm(bundle_record(lam, K_final), K_final, K_min, lam, rep, history)


class KSearchDiverged(ArithmeticError):
    def __init__(self, report, witness):
        super().__init__(f"K search diverged; witness {witness}")
        self.report = report
        self.witness = witness


def collar_check(lam: LambdaBeta, K: float, collar_points, tol: float = 1e-9) -> VerificationReport:
    """``|sigma - (beta + K d theta)|`` componentwise on collar points of the total space."""
    p = np.atleast_2d(np.asarray(collar_points, dtype=float))
    N = p.shape[0]
    one, _ = lam.forms(p, K)
    sv = one_form_vector(one, N)
    D = lam.fiber.chart.dim
    ref = np.zeros_like(sv)
    ref[:, :D] = one_form_vector(lam.beta.at(p[:, :D]), N)
    ref[:, D] = K
    res = np.max(np.abs(sv - ref), axis=1)
    return VerificationReport(checks=[max_check(
        f"collar product form [{lam.chart.name}]", "sigma = beta + K d theta on the collar", res, tol, p)])


class DegenerateVerticalForm(ArithmeticError):
    pass


def horizontal_subspace(dlam, fiber_indices: Sequence[int], rel_tol: float = 1e-8) -> np.ndarray:
    """Horizontal vectors ``u`` (``u_base = 1``) with ``dlam(u, v) = 0`` for all
    fiber-tangent ``v``.

    ``dlam`` is an ``(N, D, D)`` array (or a numeric 2-form); the base
    direction is the single index not in ``fiber_indices``.
    """
    W = dlam if isinstance(dlam, np.ndarray) else None
    if W is None:
        n = next(iter(dlam.terms.values())).shape[0] if dlam.terms else 1
        W = two_form_matrix(dlam, n)
    W = np.atleast_3d(W) if W.ndim == 2 else W
    if W.ndim == 2:
        W = W[None]
    D = W.shape[1]
    F = list(fiber_indices)
    base = [i for i in range(D) if i not in F]
    if len(base) != 1:
        raise ValueError("exactly one base direction expected")
    b = base[0]
    Wff = W[:, F][:, :, F]
    scale = np.max(np.abs(Wff), axis=(1, 2)) ** len(F)
    det = np.linalg.det(Wff)
    if np.any(np.abs(det) <= rel_tol * np.maximum(scale, 1e-300)):
        raise DegenerateVerticalForm("degenerate vertical form: d lambda restricted to the fiber is singular")
    # dlam(u, e_i) = sum_j u_j W[j, i] = 0 for i in F, u_b = 1
    rhs = -W[:, b, F]
    w = np.linalg.solve(np.swapaxes(Wff, 1, 2), rhs[..., None])[..., 0]
    u = np.zeros((W.shape[0], D))
    u[:, F] = w
    u[:, b] = 1.0
    return u
