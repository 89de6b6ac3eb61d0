import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldform.contact import ContactFormRecord
from foldform.dynamics import (DomainExit, WindingError, detect_periodic, integrate, order_check,
                               period_scaling_check, winding_vector)
from foldform.exterior import Chart, DifferentialForm, VectorField, as_expr, symbol

PLANE = Chart("R2", [("x", "line", -2, 2), ("y", "line", -2, 2)])
OSC = VectorField(PLANE, [-symbol("y"), symbol("x")])


def _torus(k):
    return Chart(f"T{k}", [(f"a{i}", "angle") for i in range(1, k + 1)])


def test_harmonic_oscillator():
    tr = integrate(OSC, [1.0, 0.0], 10.0, tol=1e-11)
    tt = tr.times
    want = np.column_stack([np.cos(tt), np.sin(tt)])
    np.testing.assert_allclose(tr.states, want, atol=1e-8)
    assert tr.times[-1] == pytest.approx(10.0)
    np.testing.assert_allclose(tr.state_at(2.5), [math.cos(2.5), math.sin(2.5)], atol=1e-9)


def test_domain_exit():
    v = VectorField(PLANE, [as_expr(1), as_expr(0)])
    with pytest.raises(DomainExit) as ei:
        integrate(v, [0.0, 0.0], 5.0)
    assert ei.value.time == pytest.approx(2.0, abs=1e-9)
    assert ei.value.point[0] == pytest.approx(2.0, abs=1e-9) and ei.value.face == "x=hi"
    tr = integrate(v, [0.0, 0.0], 5.0, raise_on_exit=False)
    assert tr.exit is not None and tr.times[-1] <= 2.0 + 1e-6
    with pytest.raises(ValueError):
        integrate(v, [0.0], 1.0)


def test_circle_period_and_winding():
    ch = _torus(1)
    rec = detect_periodic(VectorField(ch, [as_expr(1)]), [0.3], T_max=20.0)
    assert rec.period == pytest.approx(2 * math.pi, abs=1e-9)
    assert winding_vector(rec).vector == (1,)


def test_oscillator_period():
    rec = detect_periodic(OSC, [0.5, 0.0], T_max=20.0)
    assert rec.period == pytest.approx(2 * math.pi, abs=1e-8)
    assert winding_vector(rec).verdict == "inconclusive"  # no angle coordinates


@settings(max_examples=12, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_rational_torus_flow(p, q):
    # constant field (p, q) on T^2 closes at 2 pi / gcd(p, q) with winding (p, q) / gcd
    if p == 0 and q == 0:
        return
    g = math.gcd(p, q)
    v = VectorField(_torus(2), [as_expr(p), as_expr(q)])
    rec = detect_periodic(v, [0.1, 0.2], T_max=20.0)
    assert rec.period == pytest.approx(2 * math.pi / g, abs=1e-8)
    assert winding_vector(rec).vector == (p // g, q // g)


def test_irrational_torus_flow_does_not_close():
    v = VectorField(_torus(2), [as_expr(1), as_expr(math.sqrt(2))])
    rec = detect_periodic(v, [0.0, 0.0], T_max=100.0)
    assert rec.period is None and not rec.periodic
    with pytest.raises(WindingError):
        winding_vector(rec)


def test_stationary_point():
    rec = detect_periodic(OSC, [0.0, 0.0], T_max=10.0)
    assert rec.stationary and rec.periodic
    assert winding_vector(rec).verdict == "inconclusive"


def test_order_check():
    c = order_check()
    assert c.passed and c.metric > 4


def test_period_scaling():
    ch = _torus(1)
    rec = ContactFormRecord(ch, DifferentialForm.dcoord(ch, "a1"))
    assert period_scaling_check(rec, 3.0, T_max=30.0).overall


def test_to_csv(tmp_path):
    v = VectorField(_torus(1), [as_expr(1)])
    tr = integrate(v, [6.0], 1.0)
    buf = io.StringIO()
    tr.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,a1,lift_a1"
    last = [float(x) for x in lines[-1].split(",")]
    assert last[2] == pytest.approx(7.0) and last[1] == pytest.approx(7.0 - 2 * math.pi)
    path = tmp_path / "t.csv"
    tr.to_csv(path)
    assert path.read_text().replace("\r\n", "\n") == buf.getvalue().replace("\r\n", "\n")
