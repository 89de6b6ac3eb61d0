"""Parse expression strings such as ``"2 - t**2"`` or ``"bump(t, -1, 1)"``."""

from __future__ import annotations

import ast
import math

from .expr import Expr, as_expr, bump, const, cos, exp, psi, sin, symbol

__all__ = ["parse_expr", "ParseError"]


class ParseError(ValueError):
    pass


_FUNCS = {"exp": exp, "sin": sin, "cos": cos, "bump": bump, "psi": psi}
_CONSTS = {"pi": math.pi, "e": math.e}


def parse_expr(text: str, symbols=None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    Only numbers, the given symbols, ``+ - * / **`` (integer exponents,
    ``^`` is read as ``**``) and ``exp, sin, cos, bump(s, a, b), psi(k, u)``
    are accepted.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    allowed = None if symbols is None else set(symbols)

    def num(node):
        v = walk(node)
        c = v.constant_value()
        if c is None:
            raise ParseError(f"expected a numeric constant in {text!r}")
        return c

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return const(node.value)
        if isinstance(node, ast.Name):
            if node.id in _CONSTS:
                return const(_CONSTS[node.id])
            if allowed is not None and node.id not in allowed:
                raise ParseError(f"unknown symbol {node.id!r} in {text!r}")
            return symbol(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = num(node.right)
                if k.denominator != 1:
                    raise ParseError(f"only integer powers are allowed in {text!r}")
                return walk(node.left) ** int(k)
            a, b = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            fn = _FUNCS.get(node.func.id)
            if fn is None:
                raise ParseError(f"unknown function {node.func.id!r} in {text!r}")
            if fn is bump:
                if len(node.args) != 3:
                    raise ParseError("bump takes (s, a, b)")
                return bump(walk(node.args[0]), num(node.args[1]), num(node.args[2]))
            if fn is psi:
                if len(node.args) != 2:
                    raise ParseError("psi takes (k, u)")
                return psi(int(num(node.args[0])), walk(node.args[1]))
            if len(node.args) != 1:
                raise ParseError(f"{node.func.id} takes one argument")
            return fn(walk(node.args[0]))
        raise ParseError(f"unsupported syntax in {text!r}: {ast.dump(node)[:60]}")

    return as_expr(walk(tree))
