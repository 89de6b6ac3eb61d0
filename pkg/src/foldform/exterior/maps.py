"""Smooth maps between charts, numeric flow maps, and pullback of forms."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .._rk import integrate_batch
from .chart import Chart, ChartError
from .expr import Expr, as_expr, compile_exprs
from .forms import DifferentialForm, VectorField, wedge

__all__ = ["SmoothMap", "FlowMap", "ComposedMap", "pullback", "pullback_at", "identity_map"]


class SmoothMap:
    """Closed-form map: one expression in source coordinates per target coordinate."""

    numeric_flow = False

    def __init__(self, source: Chart, target: Chart, rules: Sequence):
        rules = [as_expr(r) for r in rules]
        if len(rules) != target.dim:
            raise ValueError(f"map needs {target.dim} rules, got {len(rules)}")
        extra = set().union(*(r.free for r in rules)) - set(source.names) if rules else set()
        if extra:
            raise ChartError(f"map rules use symbols {sorted(extra)} not in chart {source.name!r}")
        self.source = source
        self.target = target
        self.rules = rules
        self._fn = None
        self._jac = None

    def apply(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self._fn is None:
            self._fn = compile_exprs(self.rules, self.source.names)
        vals = self._fn(*[p[:, i] for i in range(self.source.dim)])
        return np.stack(vals, axis=1) if vals else np.zeros((p.shape[0], 0))

    def jacobian(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self._jac is None:
            exprs = [r.diff(n) for r in self.rules for n in self.source.names]
            self._jac = compile_exprs(exprs, self.source.names)
        vals = self._jac(*[p[:, i] for i in range(self.source.dim)])
        return np.stack(vals, axis=1).reshape(p.shape[0], self.target.dim, self.source.dim)

    def apply_with_jacobian(self, points):
        return self.apply(points), self.jacobian(points)

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """``self o inner``."""
        if inner.target != self.source:
            raise ChartError(f"cannot compose: {inner.target.name!r} is not {self.source.name!r}")
        mapping = dict(zip(self.source.names, inner.rules))
        return SmoothMap(inner.source, self.target, [r.subs(mapping) for r in self.rules])


def identity_map(chart: Chart) -> SmoothMap:
    return SmoothMap(chart, chart, chart.symbols())


class FlowMap:
    """Time-``T`` flow of a symbolic vector field, realised numerically.

    The Jacobian comes from the variational equations ``J' = Dv(x) J``
    integrated with the flow, so it carries the flow tolerance.
    """

    numeric_flow = True

    def __init__(self, field: VectorField, T: float = 1.0, tol: float = 1e-11):
        if not field.is_symbolic:
            raise TypeError("FlowMap needs a symbolic vector field")
        self.field = field
        self.source = field.chart
        self.target = field.chart
        self.T = float(T)
        self.tol = float(tol)
        names = field.chart.names
        d = field.chart.dim
        self._v = compile_exprs(field.components, names)
        self._dv = compile_exprs([c.diff(n) for c in field.components for n in names], names)
        self.stats = {}

    def _rhs(self, t, y):
        d = self.source.dim
        n = y.shape[0]
        x = y[:, :d]
        J = y[:, d:].reshape(n, d, d)
        cols = [x[:, i] for i in range(d)]
        v = np.stack(self._v(*cols), axis=1)
        dv = np.stack(self._dv(*cols), axis=1).reshape(n, d, d)
        return np.concatenate([v, np.einsum("nij,njk->nik", dv, J).reshape(n, d * d)], axis=1)

    def apply_with_jacobian(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        n, d = p.shape
        y0 = np.concatenate([p, np.broadcast_to(np.eye(d).ravel(), (n, d * d))], axis=1)
        y1, self.stats = integrate_batch(self._rhs, y0, self.T, rtol=self.tol, atol=self.tol * 1e-2)
        return y1[:, :d], y1[:, d:].reshape(n, d, d)

    def apply(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        d = self.source.dim
        y1, _ = integrate_batch(lambda t, x: np.stack(self._v(*[x[:, i] for i in range(d)]), axis=1),
                                p, self.T, rtol=self.tol, atol=self.tol * 1e-2)
        return y1

    def jacobian(self, points):
        return self.apply_with_jacobian(points)[1]


class ComposedMap:
    """``maps[-1] o ... o maps[0]`` (the first map is applied first)."""

    def __init__(self, maps: Sequence, chart: Chart | None = None):
        self.maps = list(maps)
        if not self.maps and chart is None:
            raise ValueError("empty composition needs a chart")
        self.source = self.maps[0].source if self.maps else chart
        self.target = self.maps[-1].target if self.maps else chart
        for a, b in zip(self.maps, self.maps[1:]):
            if a.target != b.source:
                raise ChartError(f"cannot compose: {a.target.name!r} is not {b.source.name!r}")
        self.numeric_flow = any(getattr(m, "numeric_flow", False) for m in self.maps)
        self.tol = max([getattr(m, "tol", 0.0) for m in self.maps] + [0.0])

    def apply_with_jacobian(self, points):
        x = np.atleast_2d(np.asarray(points, dtype=float))
        J = np.broadcast_to(np.eye(self.source.dim), (x.shape[0], self.source.dim, self.source.dim)).copy()
        for m in self.maps:
            x, Jm = m.apply_with_jacobian(x)
            J = np.einsum("nij,njk->nik", Jm, J)
        return x, J

    def apply(self, points):
        x = np.atleast_2d(np.asarray(points, dtype=float))
        for m in self.maps:
            x = m.apply(x)
        return x

    def jacobian(self, points):
        return self.apply_with_jacobian(points)[1]


def pullback(m, a: DifferentialForm) -> DifferentialForm:
    """Symbolic pullback along a closed-form map."""
    if getattr(m, "numeric_flow", False):
        raise TypeError("numeric-flow maps only support pointwise pullback (pullback_at)")
    if isinstance(m, ComposedMap):
        out = a
        for sub in reversed(m.maps):
            out = pullback(sub, out)
        return out
    if a.chart != m.target:
        raise ChartError(f"form lives on {a.chart.name!r}, map targets {m.target.name!r}")
    src = m.source
    mapping = dict(zip(m.target.names, m.rules))
    dF = [DifferentialForm(src, 1, {(j,): r.diff(n) for j, n in enumerate(src.names)}) for r in m.rules]
    out = DifferentialForm(src, a.degree, {})
    for idx, c in a.terms.items():
        term = DifferentialForm(src, 0, {(): c.subs(mapping)})
        for i in idx:
            term = wedge(term, dF[i])
            if term.is_zero:
                break
        out = out + term
    return out


def pullback_at(m, a: DifferentialForm, points) -> DifferentialForm:
    """Pointwise pullback; works for closed-form and numeric-flow maps.

    Returns a numeric form on the source chart with coefficient arrays.
    """
    if a.chart != m.target:
        raise ChartError(f"form lives on {a.chart.name!r}, map targets {m.target.name!r}")
    p = np.atleast_2d(np.asarray(points, dtype=float))
    F, J = m.apply_with_jacobian(p)
    return pullback_numeric(a.at(F), J, m.source)


def pullback_numeric(a_at_F: DifferentialForm, J: np.ndarray, source: Chart) -> DifferentialForm:
    """Pull back a numeric form sampled at image points through Jacobians ``J``."""
    k = a_at_F.degree
    n = J.shape[0]
    if k == 0:
        out = DifferentialForm(source, 0, {})
        out.terms = {(): np.broadcast_to(a_at_F.terms.get((), np.zeros(n)), (n,))}
        return out
    terms = {}
    for S in itertools.combinations(range(source.dim), k):
        total = np.zeros(n)
        for I, c in a_at_F.terms.items():
            sub = J[:, list(I), :][:, :, list(S)]
            total = total + np.broadcast_to(c, (n,)) * (np.linalg.det(sub) if k > 1 else sub[:, 0, 0])
        terms[S] = total
    out = DifferentialForm(source, k, {})
    out.terms = terms
    return out
