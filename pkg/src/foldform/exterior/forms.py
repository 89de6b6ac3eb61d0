"""Differential forms and vector fields on a chart.

Coefficients are either :class:`Expr` (symbolic forms) or numpy arrays of
shape ``(N,)`` holding values at ``N`` sample points (numeric forms).  The
algebra (sum, wedge, interior product) is shared by both kinds; ``d`` needs a
symbolic form.  ``form.at(points)`` turns a symbolic form into a numeric one.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from .chart import Chart, ChartError, permutation_sign
from .expr import Expr, ZERO, as_expr, compile_exprs, is_structural_zero

__all__ = [
    "DifferentialForm",
    "VectorField",
    "NumericVectorField",
    "wedge",
    "exterior_derivative",
    "interior_product",
    "evaluate",
    "wedge_power",
    "one_form_vector",
    "two_form_matrix",
]


def _zero(c) -> bool:
    if isinstance(c, Expr):
        return c.is_zero
    if np.isscalar(c):
        return c == 0
    return False


def _symbolic(c) -> bool:
    return isinstance(c, Expr)


class DifferentialForm:
    """Degree-``k`` form ``sum_I c_I dx^I`` with strictly increasing ``I``."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping | None = None):
        if degree < 0:
            raise ValueError("form degree must be >= 0")
        self.chart = chart
        self.degree = int(degree)
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index {idx} is not strictly increasing")
            if idx and (idx[0] < 0 or idx[-1] >= chart.dim):
                raise ValueError(f"index {idx} out of range for chart {chart.name!r}")
            if isinstance(c, (int, float)) and not isinstance(c, bool):
                c = as_expr(c)
            if not _zero(c):
                clean[idx] = c
        self.terms = clean

    # ------------------------------------------------------------- builders
    @classmethod
    def zero(cls, chart, degree):
        return cls(chart, degree, {})

    @classmethod
    def function(cls, chart, f):
        return cls(chart, 0, {(): as_expr(f) if not isinstance(f, np.ndarray) else f})

    @classmethod
    def dcoord(cls, chart, name: str) -> "DifferentialForm":
        """The coordinate differential ``d(name)``."""
        return cls(chart, 1, {(chart.index(name),): as_expr(1)})

    @classmethod
    def from_names(cls, chart, terms: Mapping[Sequence[str] | str, object]) -> "DifferentialForm":
        """Build from ``{("x", "y"): coeff, ...}``; unsorted names are reordered
        with the permutation sign."""
        out: dict = {}
        degree = None
        for names, c in terms.items():
            if isinstance(names, str):
                names = (names,)
            idx = [chart.index(n) for n in names]
            if degree is None:
                degree = len(idx)
            elif degree != len(idx):
                raise ValueError("mixed degrees in from_names")
            if len(set(idx)) != len(idx):
                continue
            order = sorted(range(len(idx)), key=lambda k: idx[k])
            sign = permutation_sign(order)
            key = tuple(sorted(idx))
            c = as_expr(c) if not isinstance(c, np.ndarray) else c
            out[key] = out.get(key, 0) + (c if sign > 0 else -c)
        return cls(chart, degree or 0, out)

    # ------------------------------------------------------------ properties
    @property
    def is_symbolic(self) -> bool:
        return all(_symbolic(c) for c in self.terms.values())

    @property
    def is_zero(self) -> bool:
        """Structural zero (symbolic) or all coefficients exactly 0 (numeric)."""
        for c in self.terms.values():
            if _symbolic(c):
                if not c.is_zero:
                    return False
            elif np.any(np.asarray(c) != 0):
                return False
        return True

    def coeff(self, idx) -> object:
        if idx and isinstance(idx[0], str):
            return DifferentialForm.from_names(self.chart, {tuple(idx): 1}).pair(self)
        return self.terms.get(tuple(idx), ZERO if self.is_symbolic else 0.0)

    def pair(self, other: "DifferentialForm"):
        """Coefficient of ``other`` along the single basis element of ``self``."""
        (idx, c), = self.terms.items()
        got = other.terms.get(idx, ZERO if other.is_symbolic else 0.0)
        return got * c

    def _check(self, other):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.chart != self.chart:
            raise ChartError(f"chart mismatch: {self.chart.name!r} vs {other.chart.name!r}")

    def __repr__(self):
        return f"DifferentialForm({self.chart.name!r}, degree={self.degree}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.chart.names
        parts = []
        for idx, c in sorted(self.terms.items()):
            basis = "^".join("d" + names[i] for i in idx)
            cs = str(c) if _symbolic(c) else f"<array{np.shape(c)}>"
            parts.append(f"({cs})" + (f" {basis}" if basis else ""))
        return " + ".join(parts)

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        self._check(other)
        if other.degree != self.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self.terms)
        for idx, c in other.terms.items():
            out[idx] = out[idx] + c if idx in out else c
        return DifferentialForm(self.chart, self.degree, out)

    def __neg__(self):
        return DifferentialForm(self.chart, self.degree, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, DifferentialForm):
            raise TypeError("use wedge() for products of forms")
        if isinstance(f, (int, float)) and not isinstance(f, bool):
            f = as_expr(f) if self.is_symbolic else float(f)
        return DifferentialForm(self.chart, self.degree, {i: c * f for i, c in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    # ---------------------------------------------------------------- calculus
    def d(self) -> "DifferentialForm":
        return exterior_derivative(self)

    def map_coeffs(self, fn) -> "DifferentialForm":
        return DifferentialForm(self.chart, self.degree, {i: fn(c) for i, c in self.terms.items()})

    def subs(self, mapping) -> "DifferentialForm":
        return self.map_coeffs(lambda c: c.subs(mapping))

    def on_interval(self, name, lo, hi) -> "DifferentialForm":
        return self.map_coeffs(lambda c: c.on_interval(name, lo, hi))

    def structurally_equal(self, other) -> bool:
        diff = self - other
        return all(is_structural_zero(c) for c in diff.terms.values())

    def drop(self, names: Sequence[str]) -> "DifferentialForm":
        """Remove every term containing one of the named differentials
        (restriction to the coordinate slice where those coordinates are fixed)."""
        bad = {self.chart.index(n) for n in names}
        return DifferentialForm(self.chart, self.degree,
                                {i: c for i, c in self.terms.items() if not bad.intersection(i)})

    def at(self, points) -> "DifferentialForm":
        """Numeric form with coefficient arrays at ``points`` (shape ``(N, dim)``)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.is_symbolic:
            return self
        keys = list(self.terms)
        fn = compile_exprs([self.terms[k] for k in keys], self.chart.names)
        vals = fn(*[p[:, i] for i in range(self.chart.dim)])
        out = DifferentialForm(self.chart, self.degree, {})
        out.terms = dict(zip(keys, vals))
        return out

    def top_coefficient(self, n_points: int | None = None):
        """Coefficient against the chart's orientation volume form."""
        if self.degree != self.chart.dim:
            raise ValueError("top_coefficient needs a top-degree form")
        c = self.terms.get(tuple(range(self.chart.dim)))
        if c is None:
            return ZERO if self.is_symbolic else np.zeros(n_points or 1)
        return c * self.chart.orientation_sign


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    a._check(b)
    k = a.degree + b.degree
    if k > a.chart.dim:
        return DifferentialForm(a.chart, k, {})
    out: dict = {}
    for i1, c1 in a.terms.items():
        s1 = set(i1)
        for i2, c2 in b.terms.items():
            if s1.intersection(i2):
                continue
            merged = i1 + i2
            order = sorted(range(k), key=lambda j: merged[j])
            sign = permutation_sign(order)
            key = tuple(merged[j] for j in order)
            term = c1 * c2
            if sign < 0:
                term = -term
            out[key] = out[key] + term if key in out else term
    return DifferentialForm(a.chart, k, out)


def wedge_power(a: DifferentialForm, k: int) -> DifferentialForm:
    if k < 0:
        raise ValueError("negative wedge power")
    if k == 0:
        one = as_expr(1) if a.is_symbolic else np.ones_like(next(iter(a.terms.values()), np.ones(1)))
        return DifferentialForm(a.chart, 0, {(): one})
    out = a
    for _ in range(k - 1):
        out = wedge(out, a)
    return out


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    if not a.is_symbolic:
        raise TypeError("exterior derivative needs symbolic coefficients")
    chart = a.chart
    k = a.degree + 1
    out: dict = {}
    if k > chart.dim:
        return DifferentialForm(chart, k, {})
    for idx, c in a.terms.items():
        for j, name in enumerate(chart.names):
            if j in idx:
                continue
            dc = c.diff(name)
            if dc.is_zero:
                continue
            pos = sum(1 for i in idx if i < j)
            key = idx[:pos] + (j,) + idx[pos:]
            term = dc if pos % 2 == 0 else -dc
            out[key] = out[key] + term if key in out else term
    return DifferentialForm(chart, k, out)


def interior_product(v, a: DifferentialForm) -> DifferentialForm:
    """``iota_v a`` (contraction in the first slot)."""
    if a.degree == 0:
        raise ValueError("interior product of a 0-form is undefined")
    comps = v.components if isinstance(v, VectorField) else list(v)
    if isinstance(v, VectorField) and v.chart != a.chart:
        raise ChartError(f"chart mismatch: {v.chart.name!r} vs {a.chart.name!r}")
    if len(comps) != a.chart.dim:
        raise ValueError("vector has the wrong number of components")
    out: dict = {}
    for idx, c in a.terms.items():
        for j, i in enumerate(idx):
            vi = comps[i]
            if _zero(vi):
                continue
            key = idx[:j] + idx[j + 1:]
            term = c * vi
            if j % 2:
                term = -term
            out[key] = out[key] + term if key in out else term
    return DifferentialForm(a.chart, a.degree - 1, out)


def evaluate(a: DifferentialForm, points, frame: Sequence) -> np.ndarray:
    """Value of ``a`` at each point on a frame of ``deg(a)`` tangent vectors.

    Each frame vector has shape ``(dim,)`` or ``(N, dim)``.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[1] != a.chart.dim:
        raise ChartError("point dimension does not match the chart")
    if a.is_symbolic:
        a.chart.check_points(p)
    if len(frame) != a.degree:
        raise ValueError(f"frame has {len(frame)} vectors, form has degree {a.degree}")
    n = p.shape[0]
    num = a.at(p)
    vecs = [np.broadcast_to(np.asarray(v, dtype=float), (n, a.chart.dim)) for v in frame]
    total = np.zeros(n)
    for idx, c in num.terms.items():
        if a.degree == 0:
            total = total + np.broadcast_to(c, (n,))
            continue
        m = np.stack([np.stack([v[:, i] for v in vecs], axis=-1) for i in idx], axis=-2)
        total = total + np.broadcast_to(c, (n,)) * np.linalg.det(m)
    return total


def one_form_vector(a: DifferentialForm, n: int) -> np.ndarray:
    """Numeric 1-form as an ``(N, dim)`` array of components."""
    if a.degree != 1:
        raise ValueError("expected a 1-form")
    out = np.zeros((n, a.chart.dim))
    for (i,), c in a.terms.items():
        out[:, i] = c
    return out


def two_form_matrix(a: DifferentialForm, n: int) -> np.ndarray:
    """Numeric 2-form as antisymmetric ``(N, dim, dim)`` with ``W[i,j] = a(e_i, e_j)``."""
    if a.degree != 2:
        raise ValueError("expected a 2-form")
    out = np.zeros((n, a.chart.dim, a.chart.dim))
    for (i, j), c in a.terms.items():
        out[:, i, j] = c
        out[:, j, i] = -np.asarray(c)
    return out


class VectorField:
    """Vector field with one component per chart coordinate (Expr or arrays)."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Sequence):
        comps = [as_expr(c) if isinstance(c, (int, float)) and not isinstance(c, bool) else c
                 for c in components]
        if len(comps) != chart.dim:
            raise ValueError(f"vector field on {chart.name!r} needs {chart.dim} components, got {len(comps)}")
        self.chart = chart
        self.components = comps

    @classmethod
    def coordinate(cls, chart, name, scale=1):
        comps = [as_expr(0)] * chart.dim
        comps[chart.index(name)] = as_expr(scale)
        return cls(chart, comps)

    @classmethod
    def from_dict(cls, chart, comps: Mapping[str, object]):
        out = [as_expr(0)] * chart.dim
        for k, v in comps.items():
            out[chart.index(k)] = as_expr(v)
        return cls(chart, out)

    @property
    def is_symbolic(self) -> bool:
        return all(_symbolic(c) for c in self.components)

    def __getitem__(self, name):
        return self.components[self.chart.index(name)]

    def __add__(self, other):
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return VectorField(self.chart, [-a for a in self.components])

    def __mul__(self, f):
        return VectorField(self.chart, [a * f for a in self.components])

    __rmul__ = __mul__

    def map_coeffs(self, fn):
        return VectorField(self.chart, [fn(c) for c in self.components])

    def subs(self, mapping):
        return self.map_coeffs(lambda c: c.subs(mapping))

    def structurally_equal(self, other) -> bool:
        return all(is_structural_zero(a - b) for a, b in zip(self.components, other.components))

    def apply(self, f: Expr) -> Expr:
        """Directional derivative ``v(f)``."""
        f = as_expr(f)
        out = ZERO
        for name, c in zip(self.chart.names, self.components):
            df = f.diff(name)
            if not df.is_zero:
                out = out + c * df
        return out

    def evaluate(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.is_symbolic:
            return np.stack([np.broadcast_to(c, (p.shape[0],)) for c in self.components], axis=1)
        fn = compile_exprs(self.components, self.chart.names)
        return np.stack(fn(*[p[:, i] for i in range(self.chart.dim)]), axis=1)

    def jacobian(self, points) -> np.ndarray:
        """``J[n, i, j] = d v_i / d x_j`` at each point (symbolic fields only)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        names = self.chart.names
        exprs = [c.diff(nm) for c in self.components for nm in names]
        fn = compile_exprs(exprs, names)
        vals = fn(*[p[:, i] for i in range(self.chart.dim)])
        d = self.chart.dim
        return np.stack(vals, axis=1).reshape(p.shape[0], d, d)

    def at(self, points) -> "VectorField":
        v = self.evaluate(points)
        return VectorField(self.chart, [v[:, i] for i in range(self.chart.dim)])

    def __repr__(self):
        if self.is_symbolic:
            body = ", ".join(f"{n}: {c}" for n, c in zip(self.chart.names, self.components) if not c.is_zero)
        else:
            body = "numeric"
        return f"VectorField({self.chart.name!r}, {{{body}}})"


class NumericVectorField:
    """Vector field known only through a pointwise evaluator ``fn(points) -> (N, dim)``."""

    def __init__(self, chart: Chart, fn, info: dict | None = None):
        self.chart = chart
        self._fn = fn
        self.info = info or {}

    is_symbolic = False

    def evaluate(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self._fn(p), dtype=float)

    def at(self, points) -> VectorField:
        v = self.evaluate(points)
        return VectorField(self.chart, [v[:, i] for i in range(self.chart.dim)])

    def __repr__(self):
        return f"NumericVectorField({self.chart.name!r})"


def basis_indices(dim: int, k: int):
    return list(itertools.combinations(range(dim), k))
