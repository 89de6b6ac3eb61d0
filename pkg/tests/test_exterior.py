import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings

from strategies import NAMES, box_chart, forms, random_expr_pair

from foldform.exterior import (Chart, ChartError, DifferentialForm, FlowMap, ParseError, SmoothMap, VectorField,
                               as_expr, compile_exprs, cos, evaluate, exterior_derivative, identity_map,
                               interior_product, is_structural_zero, parse_expr, pullback, pullback_at, sin,
                               symbol, wedge, wedge_power)

CHART = box_chart(4)


def _call(fn, pts):
    out = fn(*[pts[:, i] for i in range(pts.shape[1])])
    return [np.broadcast_to(np.asarray(v, dtype=float), (pts.shape[0],)) for v in out]


@pytest.mark.parametrize("seed", range(25))
def test_derivative_and_compile_match_sympy(seed):
    rng = np.random.default_rng(seed)
    e, ref = random_expr_pair(rng, NAMES)
    k = int(rng.integers(4))
    syms = sp.symbols(NAMES)
    pts = CHART.random(200, seed)
    got = _call(compile_exprs([e, e.diff(NAMES[k])], NAMES), pts)
    want_f = sp.lambdify(syms, ref, "numpy")(*pts.T)
    want_d = sp.lambdify(syms, sp.diff(ref, syms[k]), "numpy")(*pts.T)
    np.testing.assert_allclose(got[0], np.broadcast_to(want_f, (200,)), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(got[1], np.broadcast_to(want_d, (200,)), rtol=1e-11, atol=1e-11)


def test_subs_matches_sympy():
    rng = np.random.default_rng(7)
    e, ref = random_expr_pair(rng, NAMES)
    got = e.subs({"x0": as_expr(0.5), "x1": symbol("x2")})
    ref = ref.subs({sp.Symbol("x0"): sp.Rational(1, 2), sp.Symbol("x1"): sp.Symbol("x2")})
    pts = CHART.random(50, 3)
    want = sp.lambdify(sp.symbols(NAMES), ref, "numpy")(*pts.T)
    np.testing.assert_allclose(_call(compile_exprs([got], NAMES), pts)[0], np.broadcast_to(want, (50,)), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(forms())
def test_d_squared_is_structurally_zero(w):
    assert exterior_derivative(exterior_derivative(w)).is_zero


@settings(max_examples=30, deadline=None)
@given(forms(degree=1), forms(degree=2))
def test_wedge_graded_commutative(a, b):
    lhs = wedge(a, b)
    rhs = wedge(b, a)
    assert lhs.structurally_equal(rhs)  # (-1)^(1*2) = +1
    assert wedge(a, a).is_zero


@settings(max_examples=30, deadline=None)
@given(forms(degree=1), forms(degree=1))
def test_leibniz_rule(a, b):
    lhs = exterior_derivative(wedge(a, b))
    rhs = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)) * -1
    assert (lhs + rhs * -1).is_zero


@settings(max_examples=30, deadline=None)
@given(forms(degree=1), forms(degree=2))
def test_interior_product_antiderivation(a, b):
    v = VectorField(CHART, [symbol("x1"), as_expr(1), cos(symbol("x0")), as_expr(0)])
    lhs = interior_product(v, wedge(a, b))
    rhs = wedge(interior_product(v, a), b) + wedge(a, interior_product(v, b)) * -1
    assert (lhs + rhs * -1).is_zero


def test_top_coefficient_and_orientation():
    ch = Chart("R3", [("x", "line"), ("y", "line"), ("z", "line")])
    vol = wedge(wedge(DifferentialForm.dcoord(ch, "x"), DifferentialForm.dcoord(ch, "y")),
                DifferentialForm.dcoord(ch, "z"))
    assert vol.top_coefficient().constant_value() == 1
    flipped = ch.with_orientation(["y", "x", "z"])
    vol2 = DifferentialForm(flipped, 3, vol.terms)
    assert vol2.top_coefficient().constant_value() == -1


def test_wedge_power_of_symplectic_form():
    # (dx1^dy1 + dx2^dy2)^2 = 2 dx1^dy1^dx2^dy2
    ch = Chart("R4", [("x1", "line"), ("y1", "line"), ("x2", "line"), ("y2", "line")])
    w = DifferentialForm.from_names(ch, {("x1", "y1"): 1, ("x2", "y2"): 1})
    top = wedge_power(w, 2)
    assert top.top_coefficient().constant_value() == 2


def test_evaluate_on_frames():
    ch = Chart("R2", [("x", "line"), ("y", "line")])
    w = DifferentialForm.from_names(ch, {("x", "y"): symbol("x")})
    pts = np.array([[0.5, 0.0], [-0.25, 0.3]])
    vals = evaluate(w, pts, [np.array([1.0, 0.0]), np.array([0.0, 2.0])])
    np.testing.assert_allclose(vals, [1.0, -0.5])


def test_pullback_polar_coordinates():
    # x dy - y dx pulls back to r^2 dphi under (r, phi) -> (r cos phi, r sin phi)
    polar = Chart("polar", [("r", "line", 0.1, 1.0), ("phi", "angle")])
    plane = Chart("plane", [("x", "line", -1, 1), ("y", "line", -1, 1)])
    r, phi = symbol("r"), symbol("phi")
    m = SmoothMap(polar, plane, [r * cos(phi), r * sin(phi)])
    x, y = symbol("x"), symbol("y")
    lam = DifferentialForm.from_names(plane, {"y": x, "x": -y})
    pb = pullback(m, lam)
    pts = polar.random(100, 2)
    num = pb.at(pts)
    np.testing.assert_allclose(num.coeff((1,)), pts[:, 0] ** 2, atol=1e-13)
    np.testing.assert_allclose(np.broadcast_to(num.coeff((0,)), (100,)), 0.0, atol=1e-13)
    # pullback commutes with d
    lhs = exterior_derivative(pullback(m, lam)).at(pts)
    rhs = pullback(m, exterior_derivative(lam)).at(pts)
    np.testing.assert_allclose(lhs.coeff((0, 1)), rhs.coeff((0, 1)), atol=1e-12)
    np.testing.assert_allclose(lhs.coeff((0, 1)), 2 * pts[:, 0], atol=1e-12)
    np.testing.assert_allclose(pullback_at(m, lam, pts).coeff((1,)), pts[:, 0] ** 2, atol=1e-13)


def test_identity_map_pullback_is_identity():
    ch = box_chart(3)
    w = DifferentialForm.from_names(ch, {("x0", "x2"): sin(symbol("x1"))})
    assert pullback(identity_map(ch), w).structurally_equal(w)


def test_flow_map_rotation():
    ch = Chart("R2", [("x", "line", -2, 2), ("y", "line", -2, 2)])
    v = VectorField(ch, [-symbol("y"), symbol("x")])
    fm = FlowMap(v, T=math.pi / 3, tol=1e-12)
    p = np.array([[1.0, 0.0], [0.3, -0.4]])
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    want = p @ np.array([[c, s], [-s, c]])
    np.testing.assert_allclose(fm.apply(p), want, atol=1e-10)
    J = fm.jacobian(p)
    np.testing.assert_allclose(J[0], [[c, -s], [s, c]], atol=1e-9)


def test_parse_expr():
    e = parse_expr("2 - t^2", ["t"])
    assert (e - (2 - symbol("t") ** 2)).is_zero
    e2 = parse_expr("exp(t/2)*sin(3*t) + cos(t)**2", ["t"])
    t = np.linspace(-1, 1, 11)
    got = compile_exprs([e2], ["t"])(t)[0]
    np.testing.assert_allclose(got, np.exp(t / 2) * np.sin(3 * t) + np.cos(t) ** 2, rtol=1e-14)
    for bad in ("u + 1", "t +", "__import__('os')", "t if t else 1"):
        with pytest.raises(ParseError):
            parse_expr(bad, ["t"])


def test_structural_zero_detects_cancellation():
    x = symbol("x")
    assert is_structural_zero((x + 1) * (x - 1) - (x * x - 1))
    assert not is_structural_zero(x * x - x)


def test_chart_errors():
    with pytest.raises(ChartError):
        Chart("bad", [("x", "line"), ("x", "line")])
    with pytest.raises(ChartError):
        Chart("bad", [("x", "line")], orientation=["y"])
    with pytest.raises(ChartError):
        box_chart(2).index("nope")


def test_chart_sampling_inside_box():
    ch = Chart("c", [("a", "line", -2, 3), ("th", "angle")])
    for pts in (ch.random(100, 1), ch.halton(100, 1), ch.grid(5)):
        assert ch.contains(pts).all()
