"""Charts, scalar expressions, forms, vector fields and maps."""

from .chart import Chart, ChartError, Coord
from .expr import (ONE, ZERO, Expr, as_expr, bump, compile_exprs, const, cos, exp, psi, sin,
                   symbol, zero_status, is_structural_zero, clear_denominators)
from .forms import (DifferentialForm, NumericVectorField, VectorField, evaluate,
                    exterior_derivative, interior_product, one_form_vector, two_form_matrix,
                    wedge, wedge_power)
from .maps import ComposedMap, FlowMap, SmoothMap, identity_map, pullback, pullback_at
from .parse import ParseError, parse_expr


def partial(e, name, chart=None):
    """Exact partial derivative; with a chart, unknown coordinates are rejected."""
    if chart is not None:
        chart.index(name)
    return as_expr(e).diff(name)


__all__ = [
    "Chart", "ChartError", "Coord", "Expr", "ONE", "ZERO", "as_expr", "bump", "compile_exprs",
    "const", "cos", "exp", "psi", "sin", "symbol", "zero_status", "is_structural_zero", "clear_denominators", "DifferentialForm",
    "NumericVectorField", "VectorField", "evaluate", "exterior_derivative", "interior_product",
    "one_form_vector", "two_form_matrix", "wedge", "wedge_power", "ComposedMap", "FlowMap",
    "SmoothMap", "identity_map", "pullback", "pullback_at", "ParseError", "parse_expr", "partial",
]
