import math

import numpy as np
import pytest

from foldform.contact import (ConstraintHypersurface, ContactFormRecord, NotContactError, contact_ratio,
                              contact_residual, field_equation_residuals, field_to_hamiltonian,
                              hamiltonian_to_field, hamiltonian_values, reeb_field, reeb_residuals,
                              restrict_to_hypersurface, verify_contactomorphism)
from foldform.exterior import (Chart, ChartError, DifferentialForm, SmoothMap, VectorField, as_expr,
                               compile_exprs, cos, exp, identity_map, sin, symbol)
from foldform.models import boundary_reeb, disk_fiber, standard_model

x, y, z = symbol("x"), symbol("y"), symbol("z")
R3 = Chart("R3", [("x", "line", -2, 2), ("y", "line", -2, 2), ("z", "line", -2, 2)], orientation=["z", "x", "y"])
ALPHA = DifferentialForm.from_names(R3, {"z": 1, "y": x})  # dz + x dy


def _std():
    return ContactFormRecord(R3, ALPHA, name="std")


def test_standard_reeb_is_d_z():
    R = reeb_field(_std(), mode="symbolic")
    assert [c.constant_value() for c in R.components] == [0, 0, 1]
    Rn = reeb_field(_std(), mode="numeric")
    pts = R3.random(100, 0)
    np.testing.assert_allclose(Rn.evaluate(pts), np.tile([0.0, 0.0, 1.0], (100, 1)), atol=1e-14)


def test_contact_positivity():
    pts = R3.random(200, 1)
    np.testing.assert_allclose(contact_ratio(_std(), pts), 1.0)
    assert contact_residual(_std(), pts).overall
    # reversed orientation makes the same form negative
    flip = R3.with_orientation(["x", "z", "y"])
    bad = ContactFormRecord(flip, DifferentialForm(flip, 1, ALPHA.terms))
    assert not contact_residual(bad, pts).overall


def test_degenerate_form_raises():
    r = ContactFormRecord(R3, DifferentialForm.dcoord(R3, "z"))
    pts = R3.random(10, 0)
    assert np.allclose(contact_ratio(r, pts), 0.0)
    with pytest.raises(NotContactError):
        reeb_field(r, mode="numeric").evaluate(pts)
    with pytest.raises(ArithmeticError):
        reeb_field(r, mode="symbolic")


def test_even_dimension_rejected():
    with pytest.raises(ChartError):
        ContactFormRecord(Chart("R2", [("a", "line"), ("b", "line")]), jet=lambda p: None)


def _oracle_Z(H):
    # For dz + x dy: Z_H = (x H_z - H_y) d_x + H_x d_y + (H - x H_x) d_z (solved by hand)
    Hx, Hy, Hz = H.diff("x"), H.diff("y"), H.diff("z")
    return [x * Hz - Hy, Hx, H - x * Hx]


@pytest.mark.parametrize("H", [x * y + z, sin(x) * exp(z * as_expr(0.5)) + y * y, cos(x + y) * z - x * x * x])
def test_hamiltonian_field_against_hand_solution(H):
    r = _std()
    pts = R3.random(300, 4)
    want = np.stack([np.broadcast_to(v, (300,)) for v in
                     compile_exprs(_oracle_Z(H), R3.names)(*pts.T)], axis=1)
    for mode in ("symbolic", "numeric"):
        Z = hamiltonian_to_field(H, r, mode=mode)
        np.testing.assert_allclose(Z.evaluate(pts), want, atol=1e-11)
        e1, e2 = field_equation_residuals(Z, H, r, pts)
        assert e1.max() < 1e-11 and e2.max() < 1e-11
    Zs = hamiltonian_to_field(H, r, mode="symbolic")
    assert (field_to_hamiltonian(Zs, r) - H).is_zero
    hv = compile_exprs([H], R3.names)(*pts.T)[0]
    np.testing.assert_allclose(hamiltonian_values(Zs, r, pts), hv, atol=1e-12)


def test_reeb_is_hamiltonian_field_of_one():
    Z = hamiltonian_to_field(as_expr(1), _std(), mode="symbolic")
    assert [c.constant_value() for c in Z.components] == [0, 0, 1]


def test_unknown_symbol_in_hamiltonian():
    with pytest.raises(ChartError):
        hamiltonian_to_field(symbol("w"), _std())


def test_sphere_boundary_reeb():
    # on S^3 with alpha0 = r1^2 dphi1 + r2^2 dphi2 the Reeb field is d_phi1 + d_phi2
    F = disk_fiber(2)
    rec = ContactFormRecord(F.y_chart, F.alpha0)
    pts = F.y_chart.random(500, 3)
    want = np.zeros((500, 3))
    want[:, F.y_chart.index("phi1")] = 1.0
    want[:, F.y_chart.index("phi2")] = 1.0
    np.testing.assert_allclose(reeb_field(rec, mode="numeric").evaluate(pts), want, atol=1e-12)
    np.testing.assert_allclose(boundary_reeb(F).evaluate(pts), want, atol=1e-15)
    e1, e2 = reeb_residuals(rec, boundary_reeb(F), pts)
    assert e1.max() < 1e-13 and e2.max() < 1e-13
    assert contact_residual(rec, pts).overall


def test_standard_model_orientation():
    for n in (1, 2, 3):
        ch, alpha = standard_model(n)
        rec = ContactFormRecord(ch, alpha)
        np.testing.assert_allclose(contact_ratio(rec, ch.random(20, n)), math.factorial(n))


def test_tangent_frames_unit_sphere():
    Y = ConstraintHypersurface(R3, x * x + y * y + z * z - 1)
    rng = np.random.default_rng(0)
    p = rng.normal(size=(100, 3))
    p /= np.linalg.norm(p, axis=1)[:, None]
    F = Y.tangent_frames(p)
    assert F.shape == (100, 2, 3)
    np.testing.assert_allclose(np.einsum("nkd,nd->nk", F, p), 0.0, atol=1e-14)
    np.testing.assert_allclose(np.einsum("nkd,nld->nkl", F, F), np.broadcast_to(np.eye(2), (100, 2, 2)),
                               atol=1e-14)
    with pytest.raises(ValueError):
        Y.tangent_frames(np.array([[0.5, 0.0, 0.0]]))


def test_restriction_to_hypersurface():
    Y = ConstraintHypersurface(R3, z)  # the plane z = 0
    pts = np.column_stack([np.linspace(-1, 1, 7), np.linspace(0, 1, 7), np.zeros(7)])
    frames, vals = restrict_to_hypersurface(DifferentialForm.dcoord(R3, "z"), Y, pts)
    np.testing.assert_allclose(vals, 0.0, atol=1e-15)
    _, w = restrict_to_hypersurface(ALPHA.d(), Y, pts)
    # dx^dy restricted to the plane is the area form, so |det| = 1 on an orthonormal frame
    np.testing.assert_allclose(np.abs(w[:, 0, 1]), 1.0, atol=1e-14)


def test_verify_contactomorphism():
    pts = R3.random(100, 9)
    src = _std()
    assert verify_contactomorphism(identity_map(R3), src, src, pts).overall
    assert verify_contactomorphism(identity_map(R3), src, src.scaled(2.0), pts).overall
    assert not verify_contactomorphism(identity_map(R3), src, src.scaled(-1.0), pts).overall
    # (x, y, z) -> (x, y + 1, z) and (x, y, z) -> (x, y, z + y) are contactomorphisms / not
    shift = SmoothMap(R3, R3, [x, y + 1, z])
    assert verify_contactomorphism(shift, src, src, pts).overall
    shear = SmoothMap(R3, R3, [x, y, z + y])
    assert not verify_contactomorphism(shear, src, src, pts).overall
