"""Built-in fibers and boundary charts.

* ``disk_fiber(n)``: ``D^{2n}`` with ``lambda_st = sum x_i dy_i - y_i dx_i``.
  Its Liouville field is ``r/2 d/dr``, so the collar is
  ``x = e^{(t+1)/2} u`` with ``u`` on the unit sphere.
* ``cotangent_t3_fiber()``: the unit codisk bundle of ``T^3`` with
  ``beta = x1 d th1 - x2 d th2 + x3 d th3`` and Liouville field ``sum x_i d/dx_i``;
  collar ``x = e^{t+1} u`` with ``u`` on ``S^2``.

Boundary charts: the sphere ``S^{2n-1}`` in Hopf-type coordinates
``r_1 = cos eta_1, r_2 = sin eta_1 cos eta_2, ..., x_k + i y_k = r_k e^{i phi_k}``
(for ``n = 1`` just the angle ``phi_1``), and ``T^3 x S^2`` with polar angles
``(u, v)`` on ``S^2``.  Polar ranges stay away from the coordinate
singularities.
"""

from __future__ import annotations

import math

import numpy as np

from .contact import ContactFormRecord, contact_ratio
from .exterior.chart import Chart, Coord
from .exterior.expr import ONE, Expr, as_expr, bump, cos, exp, sin, symbol
from .exterior.forms import DifferentialForm, VectorField
from .exterior.maps import SmoothMap, pullback
from .fibration import FiberData

__all__ = [
    "disk_fiber",
    "cotangent_t3_fiber",
    "sphere_boundary_chart",
    "t3s2_boundary_chart",
    "radial_bump_hamiltonian",
    "default_disk_hamiltonians",
    "default_t3_hamiltonians",
    "standard_model",
    "boundary_reeb",
]

ETA_MARGIN = 0.15
POLAR_MARGIN = 0.15


def _orient_for_contact(chart: Chart, alpha: DifferentialForm) -> Chart:
    """Reorder the chart orientation (swap the first two coordinates if
    needed) so that ``alpha ^ (d alpha)^{n-1}`` is positive."""
    if chart.dim == 1:
        return chart
    rec = ContactFormRecord(chart, DifferentialForm(chart, 1, alpha.terms))
    pts = chart.grid(3)
    sign = np.sign(np.median(contact_ratio(rec, pts)))
    if sign > 0:
        return chart
    o = list(chart.orientation)
    o[0], o[1] = o[1], o[0]
    return chart.with_orientation(o)


def _rechart(form: DifferentialForm, chart: Chart) -> DifferentialForm:
    return DifferentialForm(chart, form.degree, form.terms)


def sphere_boundary_chart(n: int):
    """``(chart, radii, angles)`` for ``S^{2n-1}``; radii are Exprs ``r_k``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    coords = [Coord(f"eta{k}", "line", ETA_MARGIN, math.pi / 2 - ETA_MARGIN) for k in range(1, n)]
    coords += [Coord(f"phi{k}", "angle", 0.0, 2 * math.pi) for k in range(1, n + 1)]
    chart = Chart(f"S{2 * n - 1}", coords)
    etas = [symbol(f"eta{k}") for k in range(1, n)]
    radii = []
    prod = ONE
    for k in range(n):
        if k < n - 1:
            radii.append(prod * cos(etas[k]))
            prod = prod * sin(etas[k])
        else:
            radii.append(prod)
    phis = [symbol(f"phi{k}") for k in range(1, n + 1)]
    return chart, radii, phis


def disk_fiber(n: int, eps: float = 0.2) -> FiberData:
    names = []
    for k in range(1, n + 1):
        names += [f"x{k}", f"y{k}"]
    chart = Chart(f"D{2 * n}", [Coord(nm, "line", -1.0, 1.0) for nm in names])
    xs = [symbol(f"x{k}") for k in range(1, n + 1)]
    ys = [symbol(f"y{k}") for k in range(1, n + 1)]
    beta = DifferentialForm(chart, 1, {})
    half = as_expr(0.5)
    comps = []
    for k in range(n):
        beta = beta + DifferentialForm.from_names(chart, {f"y{k + 1}": xs[k], f"x{k + 1}": -ys[k]})
        comps += [half * xs[k], half * ys[k]]
    X = VectorField(chart, comps)
    level = sum((x * x + y * y for x, y in zip(xs, ys)), as_expr(0)) - 1

    ychart, radii, phis = sphere_boundary_chart(n)
    cchart = Chart(f"collar_{ychart.name}", [Coord("t", "line", -1.0 - eps, -1.0)] + list(ychart.coords))
    t = symbol("t")
    rho = exp((t + 1) * as_expr(0.5))
    rules = []
    for k in range(n):
        rules += [rho * radii[k] * cos(phis[k]), rho * radii[k] * sin(phis[k])]
    cmap = SmoothMap(cchart, chart, rules)
    pulled = pullback(cmap, beta)
    alpha0 = DifferentialForm(ychart, 1, {})
    for idx, c in pulled.terms.items():
        if idx == (0,):
            continue
        alpha0 = alpha0 + DifferentialForm(ychart, 1, {(idx[0] - 1,): c.subs({"t": -1})})
    ychart = _orient_for_contact(ychart, alpha0)
    alpha0 = _rechart(alpha0, ychart)
    cchart = Chart(cchart.name, cchart.coords, ["t"] + list(ychart.orientation))
    cmap = SmoothMap(cchart, chart, rules)

    rc = math.exp(-eps / 2)
    dim = 2 * n

    def inside(p):
        p = np.atleast_2d(p)
        return np.sum(p[:, :dim] ** 2, axis=1) <= 1.0 + 1e-12

    def radius(p):
        return np.sqrt(np.sum(np.atleast_2d(p)[:, :dim] ** 2, axis=1))

    def sampler(m, seed):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(m, dim))
        g /= np.linalg.norm(g, axis=1)[:, None]
        return g * rng.random(m)[:, None] ** (1.0 / dim)

    def collar_sampler(m, seed):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(m, dim))
        g /= np.linalg.norm(g, axis=1)[:, None]
        return g * rng.uniform(rc, 1.0, m)[:, None]

    return FiberData(f"D{dim}", chart, beta, X, level, ychart, cchart, cmap, alpha0,
                     inside, radius, rc, sampler, collar_sampler)


def t3s2_boundary_chart():
    coords = [Coord(f"th{k}", "angle", 0.0, 2 * math.pi) for k in (1, 2, 3)]
    coords += [Coord("u", "line", POLAR_MARGIN, math.pi - POLAR_MARGIN), Coord("v", "angle", 0.0, 2 * math.pi)]
    chart = Chart("T3xS2", coords)
    u, v = symbol("u"), symbol("v")
    unit = [sin(u) * cos(v), sin(u) * sin(v), cos(u)]
    return chart, unit


def cotangent_t3_fiber(eps: float = 0.2) -> FiberData:
    chart = Chart("DT3", [Coord("th1", "angle"), Coord("th2", "angle"), Coord("th3", "angle"),
                          Coord("x1", "line", -1.0, 1.0), Coord("x2", "line", -1.0, 1.0),
                          Coord("x3", "line", -1.0, 1.0)],
                  orientation=["th1", "x1", "th2", "x2", "th3", "x3"])
    x = [symbol(f"x{k}") for k in (1, 2, 3)]
    beta = DifferentialForm.from_names(chart, {"th1": x[0], "th2": -x[1], "th3": x[2]})
    X = VectorField.from_dict(chart, {"x1": x[0], "x2": x[1], "x3": x[2]})
    level = x[0] ** 2 + x[1] ** 2 + x[2] ** 2 - 1

    ychart, unit = t3s2_boundary_chart()
    cchart = Chart("collar_T3xS2", [Coord("t", "line", -1.0 - eps, -1.0)] + list(ychart.coords))
    t = symbol("t")
    rho = exp(t + 1)
    th = [symbol(f"th{k}") for k in (1, 2, 3)]
    rules = th + [rho * c for c in unit]
    cmap = SmoothMap(cchart, chart, rules)
    pulled = pullback(cmap, beta)
    alpha0 = DifferentialForm(ychart, 1, {})
    for idx, c in pulled.terms.items():
        if idx == (0,):
            continue
        alpha0 = alpha0 + DifferentialForm(ychart, 1, {(idx[0] - 1,): c.subs({"t": -1})})
    ychart = _orient_for_contact(ychart, alpha0)
    alpha0 = _rechart(alpha0, ychart)
    cchart = Chart(cchart.name, cchart.coords, ["t"] + list(ychart.orientation))
    cmap = SmoothMap(cchart, chart, rules)
    rc = math.exp(-eps)

    def inside(p):
        p = np.atleast_2d(p)
        return np.sum(p[:, 3:6] ** 2, axis=1) <= 1.0 + 1e-12

    def radius(p):
        return np.sqrt(np.sum(np.atleast_2d(p)[:, 3:6] ** 2, axis=1))

    def _sample(m, seed, lo):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(m, 3))
        g /= np.linalg.norm(g, axis=1)[:, None]
        r = rng.uniform(lo, 1.0, m) if lo > 0 else rng.random(m) ** (1 / 3)
        ang = rng.uniform(0, 2 * math.pi, (m, 3))
        return np.concatenate([ang, g * r[:, None]], axis=1)

    return FiberData("DT3", chart, beta, X, level, ychart, cchart, cmap, alpha0, inside, radius, rc,
                     lambda m, seed: _sample(m, seed, 0.0), lambda m, seed: _sample(m, seed, rc))


def radial_bump_hamiltonian(fiber: FiberData, amp: float, r_in: float, r_out: float,
                            center=None, angular: Expr | None = None) -> Expr:
    """``amp * (1 - bump(|p - c|^2; r_in^2, r_out^2))`` in the radial
    coordinates of the fiber, optionally times an angular factor."""
    chart = fiber.chart
    if fiber.name.startswith("D") and fiber.name != "DT3":
        radial_names = list(chart.names)
    else:
        radial_names = ["x1", "x2", "x3"]
    center = center or [0.0] * len(radial_names)
    rho2 = sum(((symbol(nm) - c) ** 2 for nm, c in zip(radial_names, center)), as_expr(0))
    h = as_expr(amp) * (1 - bump(rho2, r_in ** 2, r_out ** 2))
    if angular is not None:
        h = h * angular
    return h


def default_disk_hamiltonians(fiber: FiberData, amp: float = 0.05):
    """A radial twist plus a weaker off-centre bump, both supported in ``r < 0.85``.

    The bumps are as wide as the collar allows: mollifier transitions have
    slope ``~ 2 / width^2`` so narrow ones need very fine sampling grids and
    many integration steps.
    """
    off = [0.1] + [0.0] * (fiber.chart.dim - 1)
    return [radial_bump_hamiltonian(fiber, amp, 0.0, 0.85),
            radial_bump_hamiltonian(fiber, 0.4 * amp, 0.0, 0.7, center=off)]


def default_t3_hamiltonians(fiber: FiberData, amp: float = 0.05):
    return [radial_bump_hamiltonian(fiber, amp, 0.0, 0.75, angular=sin(symbol("th1")) + cos(symbol("th2")))]


def standard_model(n: int):
    """``(chart, alpha)`` for ``dz + sum x_i dy_i`` on ``R^{2n+1}``, oriented
    so that ``alpha ^ (d alpha)^n > 0``."""
    names = [f"x{i}" for i in range(1, n + 1)] + [f"y{i}" for i in range(1, n + 1)] + ["z"]
    orient = ["z"]
    for i in range(1, n + 1):
        orient += [f"x{i}", f"y{i}"]
    chart = Chart(f"R{2 * n + 1}", [Coord(nm, "line", -2.0, 2.0) for nm in names], orientation=orient)
    alpha = DifferentialForm.dcoord(chart, "z")
    for i in range(1, n + 1):
        alpha = alpha + symbol(f"x{i}") * DifferentialForm.dcoord(chart, f"y{i}")
    return chart, alpha


def boundary_reeb(fiber: FiberData) -> VectorField:
    """Closed-form Reeb field of the boundary form ``alpha0``.

    Spheres: ``alpha0 = sum r_k^2 d phi_k`` with ``sum r_k^2 = 1``, so
    ``R = sum d/d phi_k``.  ``T^3 x S^2``: ``R = x1 d th1 - x2 d th2 + x3 d th3``
    with ``x`` the unit vector of ``(u, v)``.
    """
    ch = fiber.y_chart
    if fiber.name == "DT3":
        u, v = symbol("u"), symbol("v")
        return VectorField.from_dict(ch, {"th1": sin(u) * cos(v), "th2": -sin(u) * sin(v), "th3": cos(u)})
    return VectorField.from_dict(ch, {nm: ONE for nm in ch.names if nm.startswith("phi")})
