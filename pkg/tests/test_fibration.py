import math

import numpy as np
import pytest

from foldform.contact import contact_ratio
from foldform.exterior import (DifferentialForm, as_expr, compile_exprs, interior_product, is_structural_zero,
                               symbol)
from foldform.fibration import (DegenerateVerticalForm, KSearchDiverged, MappingTorusSpec, MonodromyMap,
                                audit_points, build_bundle_contact_form, build_lambda_beta, certification_points,
                                circle_partition, collar_check, hamiltonian_vector_field, horizontal_subspace,
                                total_points, verify_exact_symplectomorphism)
from foldform.models import default_disk_hamiltonians, disk_fiber, radial_bump_hamiltonian


@pytest.fixture(scope="module")
def disk():
    return disk_fiber(1)


def test_partition_of_unity():
    P = circle_partition(3.0)
    assert is_structural_zero(P.f1 + P.f2 - 1)
    th = np.linspace(-math.pi, math.pi, 2001)
    f1, f2, _ = P.values(th)
    assert np.all((f1 >= 0) & (f1 <= 1))
    inner = np.abs(th) <= math.pi / 2 - 0.75
    outer = np.abs(th) >= math.pi / 2 + 0.75
    np.testing.assert_allclose(f1[inner], 1.0)
    np.testing.assert_allclose(f1[outer], 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        circle_partition(4.0)


def test_hamiltonian_field_equation(disk):
    h = symbol("x1") ** 2 * symbol("y1") + symbol("y1")
    X = hamiltonian_vector_field(h, disk.beta)
    lhs = interior_product(X, disk.beta.d())
    dh = DifferentialForm(disk.chart, 1, {(i,): h.diff(n) for i, n in enumerate(disk.chart.names)})
    assert (lhs + dh).is_zero


def test_radial_monodromy_is_rotation(disk):
    # h = h(r^2): X_h = h'(r^2) (-y, x) for d beta = 2 dx^dy, so phi rotates by angle h'(r^2)
    h = radial_bump_hamiltonian(disk, 0.3, 0.0, 0.85)
    mono = MonodromyMap(disk, [h], tol=1e-12)
    rng = np.random.default_rng(3)
    r = rng.uniform(0.05, 0.95, 40)
    a = rng.uniform(0, 2 * math.pi, 40)
    p = np.column_stack([r * np.cos(a), r * np.sin(a)])
    fn = compile_exprs([h], ["x1", "y1"])
    d = 1e-5
    dh_dr = (fn(r + d, 0 * r)[0] - fn(r - d, 0 * r)[0]) / (2 * d)
    omega = dh_dr / (2 * r)
    want = np.column_stack([r * np.cos(a + omega), r * np.sin(a + omega)])
    np.testing.assert_allclose(mono.apply(p), want, atol=1e-8)


def test_monodromy_must_vanish_on_collar(disk):
    with pytest.raises(ValueError):
        MonodromyMap(disk, [symbol("x1")])


def test_exact_symplectomorphism(disk):
    mono = MonodromyMap(disk, default_disk_hamiltonians(disk))
    rep = verify_exact_symplectomorphism(mono, disk.beta, disk.sampler(200, 1), disk.collar_sampler(100, 2))
    assert rep.overall, rep.summary()


def _spec(F, hams=(), K=1.0):
    return MappingTorusSpec(F, MonodromyMap(F, list(hams)), circle_partition(3.0), K=K)


@pytest.mark.parametrize("n", [1, 2])
def test_identity_monodromy_volume_ratio(n):
    # sigma = beta + K d theta, so sigma ^ (d sigma)^n = K n! 2^n vol
    F = disk_fiber(n)
    spec = _spec(F)
    b = build_bundle_contact_form(spec, certification_points(spec, 6, 16, 300), audit_points(spec, 6, 16, 300, 100))
    assert b.K_min == 1.0 and b.report.overall
    pts = total_points(F.sampler(50, 0), np.linspace(-3, 3, 7))
    np.testing.assert_allclose(contact_ratio(b.record, pts), b.K * math.factorial(n) * 2 ** n, rtol=1e-12)
    col = total_points(F.collar_sampler(50, 1), np.linspace(-3, 3, 5))
    assert collar_check(b.lam, b.K, col, tol=0.0).checks[0].metric == 0.0


def test_k_search_with_twist(disk):
    spec = _spec(disk, default_disk_hamiltonians(disk, 0.5))
    cert = certification_points(spec, 8, 32, 500)
    b = build_bundle_contact_form(spec, cert, audit_points(spec, 8, 32, 500, 200))
    assert b.K_min > 1 and b.K == 2 * b.K_min
    assert b.report.overall
    # K_min is the first doubling that certifies: K_min / 2 fails on the same grid
    Ks = [k for k, _ in b.history]
    assert Ks == [2.0 ** i for i in range(len(Ks))] and b.history[-2][1] <= 0
    col = total_points(disk.collar_sampler(100, 1), np.linspace(-3, 3, 9))
    assert collar_check(b.lam, b.K, col, tol=1e-6).overall
    with pytest.raises(KSearchDiverged) as ei:
        build_bundle_contact_form(spec, cert, cert, K_cap=2.0)
    assert not ei.value.report.overall


def test_lambda_beta_is_beta_off_the_gluing_arc(disk):
    spec = _spec(disk, default_disk_hamiltonians(disk))
    lam = build_lambda_beta(spec)
    fp = disk.sampler(30, 4)
    pts = total_points(fp, np.array([0.3, 1.0, 2.5]))  # theta >= 0: s = 0
    one, _ = lam.forms(pts, 0.0)
    ref = spec.fiber.beta.at(pts[:, :2])
    for k in ((0,), (1,)):
        np.testing.assert_allclose(np.broadcast_to(one.terms.get(k, 0.0), (len(pts),)),
                                   np.broadcast_to(ref.terms.get(k, 0.0), (len(pts),)), atol=1e-15)


def test_horizontal_subspace():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(20, 3, 3))
    W = A - np.swapaxes(A, 1, 2)
    u = horizontal_subspace(W, [0, 1])
    np.testing.assert_allclose(u[:, 2], 1.0)
    np.testing.assert_allclose(np.einsum("nj,nji->ni", u, W)[:, :2], 0.0, atol=1e-12)
    W[:, 0, 1] = W[:, 1, 0] = 0.0
    with pytest.raises(DegenerateVerticalForm):
        horizontal_subspace(W, [0, 1])
    with pytest.raises(ValueError):
        horizontal_subspace(W, [0])


def test_spec_validation(disk):
    with pytest.raises(ValueError):
        _spec(disk, K=0.0)
