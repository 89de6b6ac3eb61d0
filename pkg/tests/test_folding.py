import math

import numpy as np
import pytest

from foldform.contact import ContactFormRecord, contact_ratio, field_to_hamiltonian, reeb_field
from foldform.exterior import (Chart, Coord, DifferentialForm, compile_exprs, is_structural_zero, parse_expr, symbol,
                               wedge)
from foldform.folding import (ProfileError, assemble_folded_form, certify_profile, contact_field_Z,
                              custom_profile, fold_locus, folded_contact_checks, folded_reeb_field, folded_sum,
                              interpolate_profiles, make_cutoff, make_gluing_profile, middle_identity_residual,
                              modified_field, standard_model_fields)
from foldform.models import boundary_reeb, cotangent_t3_fiber, disk_fiber

t = symbol("t")


@pytest.fixture(scope="module")
def prof():
    return make_gluing_profile()


@pytest.fixture(scope="module")
def spec1(prof):
    F = disk_fiber(1)
    return folded_sum(F, profile=prof, reeb_alpha=boundary_reeb(F))


def test_polynomial_profile_middle_volume():
    # f = 2 - t^2, g = -t on (t, phi, theta): sigma ^ d sigma = (f'g - fg') dt^dphi^dtheta = (t^2 + 2) vol
    f, g = parse_expr("2 - t^2", ["t"]), parse_expr("-t", ["t"])
    ch = Chart("mid", [Coord("t", "line", -1.2, 1.2), Coord("phi", "angle"), Coord("theta", "angle")])
    sig = DifferentialForm.from_names(ch, {"phi": f, "theta": g})
    vol = wedge(sig, sig.d())
    assert is_structural_zero(vol.top_coefficient() - (t * t + 2))
    pts = ch.random(100, 0)
    np.testing.assert_allclose(contact_ratio(ContactFormRecord(ch, sig), pts), pts[:, 0] ** 2 + 2, rtol=1e-14)


def test_polynomial_profile_certification():
    rep = certify_profile(parse_expr("2 - t^2", ["t"]), parse_expr("-t", ["t"]), K=1.0, eps=0.2, resolution=2001)
    status = {c.name: c.passed for c in rep}
    assert status["(1) f even"] and status["(2) g odd"]
    assert not status["(1) f = K e^{t+1} on the collar band"]
    assert not status["(2) g = K on the collar band"]
    assert status["(3) f'g - fg' > 0 (sweep)"] and status["(3) f'g - fg' > 0 (cell bound)"]
    assert status["(4) f' > 0 for t < 0"] and status["(4) f' < 0 for t > 0"] and status["(4) f'(0) = 0"]
    with pytest.raises(ProfileError) as ei:
        custom_profile("2 - t^2", "-t", 1.0, 0.2, 2001)
    assert ei.value.condition.startswith("(1)")
    assert not custom_profile("2 - t^2", "-t", 1.0, 0.2, 2001, strict=False).certified


def test_default_profile(prof):
    assert prof.certified and len(prof.report) == 9
    f, g, fp, gp = prof.values(np.array([-1.1, -1.0, 0.0, 1.0, 1.1]))
    np.testing.assert_allclose(f, [math.exp(-0.1), 1.0, math.e, 1.0, math.exp(-0.1)], rtol=1e-14)
    np.testing.assert_allclose(g, [1, 1, 0, -1, -1], atol=1e-15)
    # q = f'g - fg' > 0 on the sweep, and condition (4) sign pattern
    ts = np.linspace(-1.2, 1.2, 2401)
    f, g, fp, gp = prof.values(ts)
    assert np.all(fp * g - f * gp > 0)
    assert np.all(fp[ts < -1e-12] > 0) and np.all(fp[ts > 1e-12] < 0)


@pytest.mark.parametrize("K", [0.5, 3.0])
def test_default_profile_scales_with_K(K):
    p = make_gluing_profile(K=K, resolution=20_001)
    p1 = make_gluing_profile(K=1.0, resolution=20_001)
    ts = np.linspace(-1.2, 1.2, 101)
    for a, b in zip(p.values(ts), p1.values(ts)):
        np.testing.assert_allclose(a, K * b, rtol=1e-13, atol=1e-15)


def test_profile_condition_4_violation():
    # f = e * (1 + t^4) style: f' vanishes only at 0 but has the wrong sign
    rep = certify_profile(parse_expr("exp(1) + t^4", ["t"]), parse_expr("-t", ["t"]), 1.0, 0.2, 2001)
    status = {c.name: c.passed for c in rep}
    assert not status["(4) f' > 0 for t < 0"] and not status["(4) f' < 0 for t > 0"]


def test_bad_profile_arguments():
    with pytest.raises(ValueError):
        make_gluing_profile(K=-1)
    with pytest.raises(ValueError):
        make_gluing_profile(blend=(-0.5, -1.0))


def test_interpolated_profiles(prof):
    other = make_gluing_profile(blend=(-0.9, -0.4), resolution=prof.resolution)
    _, rep = interpolate_profiles(prof, other, s_values=[0.0, 0.5, 1.0], resolution=20_001)
    assert rep.overall, rep.summary()
    with pytest.raises(ValueError):
        interpolate_profiles(prof, make_gluing_profile(K=2.0, resolution=2001))


def test_cutoff():
    c = make_cutoff(0.5, 0.8)
    assert c.report.overall
    v = compile_exprs([c.h], ["t"])(np.array([0.0, 0.25, 0.85, -0.95]))[0]
    np.testing.assert_allclose(v, [0.0, 0.25 ** 2 / 0.64, 1.0, 1.0], atol=1e-15)
    with pytest.raises(ValueError):
        make_cutoff(0.8, 0.5)


def test_folded_sum_validation(prof):
    with pytest.raises(ValueError):
        folded_sum(disk_fiber(1), disk_fiber(2), profile=prof)
    bad = custom_profile("2 - t^2", "-t", 1.0, 0.2, 2001, strict=False)
    with pytest.raises(ProfileError):
        folded_sum(disk_fiber(1), profile=bad)


def test_assembled_form_n1(spec1):
    ff = assemble_folded_form(spec1)
    assert ff.seam_report.overall, ff.seam_report.summary()
    assert folded_contact_checks(ff, per_coord=6, n_middle=1000).overall
    assert middle_identity_residual(spec1, n_points=2000).overall
    assert fold_locus(spec1, t_count=101, y_count=20).overall


def test_folded_reeb_value_at_fold():
    # at t = 0: g = 0, so q = -f g' and R = R_alpha / f(0) = R_alpha / (K e)
    K = 2.0
    F = disk_fiber(1)
    spec = folded_sum(F, profile=make_gluing_profile(K=K, resolution=20_001), reeb_alpha=boundary_reeb(F))
    fields, rep = folded_reeb_field(spec, n_points=1000)
    assert rep.overall, rep.summary()
    p = np.array([[0.0, 1.0, 2.0], [0.0, 4.0, 0.5]])
    np.testing.assert_allclose(fields["middle"].evaluate(p), [[0, 1 / (K * math.e), 0]] * 2, atol=1e-15)
    # interior pieces: +-(1/K) d theta is the Reeb field of K(beta +- d theta)
    q = np.array([[0.1, 0.2, 1.0]])
    np.testing.assert_allclose(fields["M1"].evaluate(q), [[0, 0, 1 / K]])
    np.testing.assert_allclose(fields["M2"].evaluate(q), [[0, 0, -1 / K]])
    np.testing.assert_allclose(reeb_field(assemble_folded_form(spec).pieces["M2"], mode="numeric").evaluate(q),
                               [[0, 0, -1 / K]], atol=1e-14)


def test_contact_field_Z_value(spec1):
    # Z = (fg/q) d_t + z d_z and sigma = f alpha + g dz, so sigma(Z) = g z
    Z, HZ, rep = contact_field_Z(spec1, n_sign=200)
    g = spec1.profile.g
    assert is_structural_zero(HZ - g * symbol("z"))
    assert rep["H_Z = sigma(Z) = g z (structural)"].passed
    assert not rep["H_Z = z (structural)"].passed
    for name in ("Z is the contact field of sigma(Z)", "Z = X_1 + z d_z is contact on M1",
                 "Z = X_2 + z d_z is contact on M2", "sign pattern of fg/q is (+, 0, -)",
                 "Z d_t-component vanishes at t = 0 (structural)", "Z d_z-component vanishes at z = 0 (structural)"):
        assert rep[name].passed, name


def test_modified_field(spec1):
    Z2, H2, rep = modified_field(spec1, make_cutoff(), n_points=300)
    assert rep.overall, rep.summary()


@pytest.mark.parametrize("n", [2, 3])
def test_standard_model_fields(n):
    _, _, pairs, rep = standard_model_fields(n)
    assert len(pairs) == 2 * n + 1 and rep.overall


def test_t3_folded_sum_builds(prof):
    F = cotangent_t3_fiber()
    spec = folded_sum(F, profile=prof, reeb_alpha=boundary_reeb(F))
    assert spec.n == 3
    assert middle_identity_residual(spec, n_points=500).overall
