"""Contact forms: positivity certificates, Reeb fields, contact Hamiltonians,
restriction to level-set hypersurfaces and contactomorphism checks.

Pointwise linear algebra uses the square system ``M = W^T + a a^T`` where
``a`` holds the components of ``alpha`` and ``W[i, j] = d alpha(e_i, e_j)``.
``M`` is invertible exactly when ``alpha`` is contact at the point:
``M v = 0`` forces ``a.v = 0`` (pair with ``v``) and then ``iota_v d alpha = 0``.
The Reeb field solves ``M R = a`` and the field of a Hamiltonian ``H`` solves
``M Z = dH(R) a - dH + H a``.
"""

from __future__ import annotations

import math

import numpy as np

from .exterior.chart import Chart, ChartError
from .exterior.expr import Expr, ZERO, as_expr, compile_exprs, is_structural_zero
from .exterior.forms import (DifferentialForm, NumericVectorField, VectorField, interior_product,
                             one_form_vector, two_form_matrix, wedge, wedge_power)
from .exterior.linsolve import solve_batch, solve_symbolic
from .exterior.maps import pullback_at
from .report import Check, VerificationReport, bool_check, max_check, min_check

__all__ = [
    "ContactFormRecord",
    "ConstraintHypersurface",
    "NotContactError",
    "contact_ratio",
    "contact_residual",
    "reeb_field",
    "reeb_residuals",
    "hamiltonian_to_field",
    "field_to_hamiltonian",
    "hamiltonian_values",
    "restrict_to_hypersurface",
    "verify_contactomorphism",
    "wedge_top_numeric",
]


class NotContactError(ArithmeticError):
    """Singular pointwise system: the form is not contact at ``witness``."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class ContactFormRecord:
    """A candidate contact form on a ``(2n+1)``-dimensional chart.

    Either ``alpha`` (a symbolic 1-form) or ``jet`` (a callable returning
    numeric ``(alpha, d alpha)`` forms at given points) must be supplied.
    Positivity is always measured against ``chart.orientation``.
    """

    def __init__(self, chart: Chart, alpha: DifferentialForm | None = None, jet=None, name: str = ""):
        if chart.dim % 2 != 1:
            raise ChartError(f"contact chart {chart.name!r} must be odd-dimensional, has dim {chart.dim}")
        if alpha is None and jet is None:
            raise ValueError("need alpha or jet")
        if alpha is not None:
            if alpha.degree != 1:
                raise ValueError("alpha must be a 1-form")
            if alpha.chart != chart:
                raise ChartError(f"alpha lives on {alpha.chart.name!r}, not {chart.name!r}")
        self.chart = chart
        self.alpha = alpha
        self._jet = jet
        self._dalpha = None
        self.n = (chart.dim - 1) // 2
        self.name = name or chart.name

    @property
    def is_symbolic(self) -> bool:
        return self.alpha is not None and self.alpha.is_symbolic

    @property
    def dalpha(self) -> DifferentialForm:
        if self.alpha is None:
            raise TypeError("record has no symbolic alpha")
        if self._dalpha is None:
            self._dalpha = self.alpha.d()
        return self._dalpha

    def forms_at(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if self._jet is not None:
            return self._jet(p)
        return self.alpha.at(p), self.dalpha.at(p)

    def jet(self, points):
        """``(a, W)``: component arrays ``(N, D)`` and ``(N, D, D)``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a, da = self.forms_at(p)
        return one_form_vector(a, p.shape[0]), two_form_matrix(da, p.shape[0])

    def scaled(self, c) -> "ContactFormRecord":
        if self.alpha is not None and self._jet is None:
            return ContactFormRecord(self.chart, self.alpha * as_expr(c), name=self.name)
        c = float(c)
        base = self

        def jet(p):
            a, da = base.forms_at(p)
            return a * c, da * c
        return ContactFormRecord(self.chart, jet=jet, name=self.name)


def wedge_top_numeric(forms, n_points: int) -> np.ndarray:
    """Top coefficient (against orientation) of a wedge of numeric forms."""
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    chart = out.chart
    if out.degree != chart.dim:
        raise ValueError("wedge is not a top form")
    c = out.terms.get(tuple(range(chart.dim)))
    if c is None:
        return np.zeros(n_points)
    return np.broadcast_to(c, (n_points,)) * chart.orientation_sign


def contact_ratio(r: ContactFormRecord, points) -> np.ndarray:
    """Pointwise ``alpha ^ (d alpha)^n / vol`` against the chart orientation."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a, da = r.forms_at(p)
    return wedge_top_numeric([a] + [da] * r.n, p.shape[0])


def contact_residual(r: ContactFormRecord, points, name: str | None = None,
                     anchor: str = "alpha ^ (d alpha)^n > 0", margin: float = 1e-8) -> VerificationReport:
    """Positivity certificate: pass iff ``min ratio > margin * max ratio``."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    if p.shape[0] == 0:
        raise ValueError("contact_residual needs a nonempty grid")
    ratio = contact_ratio(r, p)
    finite = np.isfinite(ratio)
    top = float(np.max(np.abs(ratio[finite]))) if finite.any() else 0.0
    chk = min_check(name or f"contact positivity [{r.name}]", anchor, ratio, margin * top, p,
                    max_ratio=top)
    chk.detail["min_ratio"] = chk.metric
    return VerificationReport(checks=[chk])


def _symbolic_system(r: ContactFormRecord):
    a = r.alpha
    da = r.dalpha
    D = r.chart.dim
    avec = [a.terms.get((i,), ZERO) for i in range(D)]
    W = [[ZERO] * D for _ in range(D)]
    for (i, j), c in da.terms.items():
        W[i][j] = c
        W[j][i] = -c
    M = [[W[j][i] + avec[i] * avec[j] for j in range(D)] for i in range(D)]
    return avec, W, M


def _verify_symbolic_reeb(r, comps) -> bool:
    R = VectorField(r.chart, comps)
    if not is_structural_zero(interior_product(R, r.alpha).terms.get((), ZERO) - 1):
        return False
    ir = interior_product(R, r.dalpha)
    return all(is_structural_zero(c) for c in ir.terms.values())


def _numeric_solve(M, b, points):
    try:
        x, cond = solve_batch(M, b)
    except np.linalg.LinAlgError:
        dets = np.abs(np.linalg.det(M))
        i = int(np.argmin(dets))
        raise NotContactError("singular Reeb system: form is not contact at a sample point",
                              np.atleast_2d(points)[i].tolist()) from None
    bad = ~np.isfinite(cond) | (cond > 1e14)
    if bad.any():
        i = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
        raise NotContactError("singular Reeb system: form is not contact at a sample point",
                              np.atleast_2d(points)[i].tolist())
    return x, cond


def _numeric_reeb(r: ContactFormRecord) -> NumericVectorField:
    info = {"max_cond": 0.0}

    def fn(p):
        a, W = r.jet(p)
        M = np.swapaxes(W, 1, 2) + a[:, :, None] * a[:, None, :]
        x, cond = _numeric_solve(M, a, p)
        info["max_cond"] = max(info["max_cond"], float(np.max(cond)))
        return x
    return NumericVectorField(r.chart, fn, info)


def reeb_field(r: ContactFormRecord, mode: str = "auto", max_terms: int = 200):
    """Reeb field of ``r``: ``alpha(R) = 1`` and ``iota_R d alpha = 0``.

    ``mode`` is ``"auto"`` (closed form when the linear system solves and the
    defining equations verify structurally, else numeric), ``"symbolic"`` or
    ``"numeric"``.
    """
    if mode not in ("auto", "symbolic", "numeric"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "numeric" and r.is_symbolic:
        avec, W, M = _symbolic_system(r)
        sol = solve_symbolic(M, avec, max_terms=max_terms)
        if sol is not None and _verify_symbolic_reeb(r, sol):
            return VectorField(r.chart, sol)
        if mode == "symbolic":
            raise ArithmeticError("no closed-form Reeb field found")
    elif mode == "symbolic":
        raise TypeError("symbolic Reeb field needs a symbolic alpha")
    return _numeric_reeb(r)


def reeb_residuals(r: ContactFormRecord, R, points):
    """Max over points of ``|alpha(R) - 1|`` and of ``|iota_R d alpha|`` (componentwise)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a, W = r.jet(p)
    v = R.evaluate(p)
    e1 = np.abs(np.einsum("ni,ni->n", a, v) - 1)
    e2 = np.max(np.abs(np.einsum("nij,ni->nj", W, v)), axis=1)
    return e1, e2


def _grad_exprs(H: Expr, chart: Chart):
    return [H.diff(n) for n in chart.names]


def hamiltonian_to_field(H, r: ContactFormRecord, mode: str = "auto", max_terms: int = 200):
    """The unique ``Z_H`` with ``alpha(Z) = H`` and
    ``iota_Z d alpha = dH(R) alpha - dH``."""
    H = as_expr(H)
    extra = H.free - set(r.chart.names)
    if extra:
        raise ChartError(f"Hamiltonian uses symbols {sorted(extra)} not in chart {r.chart.name!r}")
    grad = _grad_exprs(H, r.chart)
    if mode != "numeric" and r.is_symbolic:
        R = reeb_field(r, mode="auto", max_terms=max_terms)
        if isinstance(R, VectorField):
            avec, W, M = _symbolic_system(r)
            dHR = sum((gi * ri for gi, ri in zip(grad, R.components)), ZERO)
            rhs = [dHR * ai - gi + H * ai for ai, gi in zip(avec, grad)]
            sol = solve_symbolic(M, rhs, max_terms=max_terms)
            if sol is not None:
                Z = VectorField(r.chart, sol)
                if _verify_hamiltonian(r, Z, H, R):
                    return Z
        if mode == "symbolic":
            raise ArithmeticError("no closed-form contact field found")
    elif mode == "symbolic":
        raise TypeError("symbolic contact field needs a symbolic alpha")

    names = r.chart.names
    fn = compile_exprs([H] + grad, names)
    Rn = _numeric_reeb(r)
    info = {"max_cond": 0.0}

    def field(p):
        cols = [p[:, i] for i in range(r.chart.dim)]
        vals = fn(*cols)
        h = vals[0]
        g = np.stack(vals[1:], axis=1)
        a, W = r.jet(p)
        M = np.swapaxes(W, 1, 2) + a[:, :, None] * a[:, None, :]
        Rv, cond = _numeric_solve(M, a, p)
        dHR = np.einsum("ni,ni->n", g, Rv)
        b = dHR[:, None] * a - g + h[:, None] * a
        z, cond2 = _numeric_solve(M, b, p)
        info["max_cond"] = max(info["max_cond"], float(np.max(cond)))
        return z
    return NumericVectorField(r.chart, field, info)


def _verify_hamiltonian(r, Z, H, R) -> bool:
    if not is_structural_zero(field_to_hamiltonian(Z, r) - H):
        return False
    dH = DifferentialForm(r.chart, 1, {(i,): H.diff(n) for i, n in enumerate(r.chart.names)})
    dHR = R.apply(H)
    lhs = interior_product(Z, r.dalpha)
    rhs = r.alpha * dHR - dH
    return lhs.structurally_equal(rhs)


def field_to_hamiltonian(Z, r: ContactFormRecord):
    """``H_Z = alpha(Z)``: an :class:`Expr` for symbolic inputs, else a
    callable returning values at points."""
    if Z.chart != r.chart:
        raise ChartError(f"field lives on {Z.chart.name!r}, form on {r.chart.name!r}")
    if isinstance(Z, VectorField) and Z.is_symbolic and r.is_symbolic:
        return interior_product(Z, r.alpha).terms.get((), ZERO)
    return lambda points: hamiltonian_values(Z, r, points)


def hamiltonian_values(Z, r: ContactFormRecord, points) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    a, _ = r.jet(p)
    return np.einsum("ni,ni->n", a, Z.evaluate(p))


def field_equation_residuals(Z, H, r: ContactFormRecord, points):
    """Residuals of both defining equations of ``Z_H`` at points."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    H = as_expr(H)
    names = r.chart.names
    vals = compile_exprs([H] + _grad_exprs(H, r.chart), names)(*[p[:, i] for i in range(r.chart.dim)])
    h, g = vals[0], np.stack(vals[1:], axis=1)
    a, W = r.jet(p)
    M = np.swapaxes(W, 1, 2) + a[:, :, None] * a[:, None, :]
    Rv, _ = _numeric_solve(M, a, p)
    z = Z.evaluate(p)
    e1 = np.abs(np.einsum("ni,ni->n", a, z) - h)
    dHR = np.einsum("ni,ni->n", g, Rv)
    e2 = np.max(np.abs(np.einsum("nij,ni->nj", W, z) - (dHR[:, None] * a - g)), axis=1)
    return e1, e2


class ConstraintHypersurface:
    """``Y = {level = 0}`` inside an ambient chart."""

    def __init__(self, ambient: Chart, level, tol: float = 1e-8, on_surface_tol: float = 1e-8):
        self.ambient = ambient
        self.level = as_expr(level)
        self.tol = float(tol)
        self.on_surface_tol = float(on_surface_tol)
        self._fn = compile_exprs([self.level] + [self.level.diff(n) for n in ambient.names], ambient.names)

    def values_and_gradients(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        vals = self._fn(*[p[:, i] for i in range(self.ambient.dim)])
        return vals[0], np.stack(vals[1:], axis=1)

    def tangent_frames(self, points) -> np.ndarray:
        """Orthonormal tangent frames ``(N, D-1, D)``: Gram-Schmidt of the
        coordinate basis against the unit normal (done as a QR factorisation
        of ``[normal, e_1, ..., e_{D-1}]``)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        lv, grad = self.values_and_gradients(p)
        off = np.abs(lv) >= self.on_surface_tol
        if off.any():
            i = int(np.argmax(off))
            raise ValueError(f"point {p[i].tolist()} is off the hypersurface (level={lv[i]:.3e})")
        gn = np.linalg.norm(grad, axis=1)
        if np.any(gn < self.tol):
            i = int(np.argmin(gn))
            raise ValueError(f"degenerate gradient {gn[i]:.3e} at {p[i].tolist()}")
        D = self.ambient.dim
        A = np.zeros((p.shape[0], D, D))
        A[:, :, 0] = grad / gn[:, None]
        A[:, :, 1:] = np.eye(D)[:, : D - 1]
        Q, _ = np.linalg.qr(A)
        return np.swapaxes(Q[:, :, 1:], 1, 2)


def restrict_to_hypersurface(a: DifferentialForm, Y: ConstraintHypersurface, points):
    """Tangent frames and the values of ``a`` on them.

    Returns ``(frames, values)`` with ``values`` of shape ``(N,)``,
    ``(N, D-1)`` or ``(N, D-1, D-1)`` for degree 0, 1, 2.
    """
    if a.chart != Y.ambient:
        raise ChartError(f"form lives on {a.chart.name!r}, hypersurface in {Y.ambient.name!r}")
    p = np.atleast_2d(np.asarray(points, dtype=float))
    frames = Y.tangent_frames(p)
    n = p.shape[0]
    num = a.at(p)
    if a.degree == 0:
        return frames, np.broadcast_to(num.terms.get((), np.zeros(n)), (n,)).copy()
    if a.degree == 1:
        v = one_form_vector(num, n)
        return frames, np.einsum("nkd,nd->nk", frames, v)
    if a.degree == 2:
        W = two_form_matrix(num, n)
        return frames, np.einsum("nkd,nde,nle->nkl", frames, W, frames)
    raise ValueError("restriction implemented for degrees 0, 1, 2")


def verify_contactomorphism(m, src: ContactFormRecord, tgt: ContactFormRecord, points,
                            tol: float = 1e-9) -> VerificationReport:
    """Check ``m^* alpha_tgt = lam * alpha_src`` with ``lam > 0`` on a grid."""
    if m.source != src.chart or m.target != tgt.chart:
        raise ChartError("map charts do not match the contact records")
    p = np.atleast_2d(np.asarray(points, dtype=float))
    n = p.shape[0]
    if tgt.alpha is not None:
        pulled = pullback_at(m, tgt.alpha, p)
    else:
        from .exterior.maps import pullback_numeric
        F, J = m.apply_with_jacobian(p)
        pulled = pullback_numeric(tgt.forms_at(F)[0], J, src.chart)
    a_src, _ = src.forms_at(p)
    av = one_form_vector(a_src, n)
    pv = one_form_vector(pulled, n)
    norm = np.linalg.norm(av, axis=1)
    if np.any(norm == 0):
        i = int(np.argmin(norm))
        raise ValueError(f"alpha_src vanishes at {p[i].tolist()}")
    wedge_res = np.max(np.abs(pv[:, :, None] * av[:, None, :] - av[:, :, None] * pv[:, None, :]), axis=(1, 2))
    scale = np.maximum(1.0, np.linalg.norm(pv, axis=1) * norm)
    k = np.argmax(np.abs(av), axis=1)
    lam = pv[np.arange(n), k] / av[np.arange(n), k]
    rep = VerificationReport()
    rep.add(max_check("pullback wedge alpha_src", "m^*alpha_tgt ^ alpha_src = 0", wedge_res / scale, tol, p))
    rep.add(min_check("conformal factor positive", "m^*alpha_tgt = lam alpha_src, lam > 0", lam, 0.0, p,
                      lam_min=float(np.min(lam)), lam_max=float(np.max(lam))))
    return rep
