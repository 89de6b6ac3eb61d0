"""Smooth scalar expressions with exact symbolic differentiation.

An :class:`Expr` is kept in a canonical sum-of-products form: a mapping from
monomials to exact rational coefficients, where a monomial is a sorted tuple
of ``(atom, exponent)`` pairs.  Atoms are interned, so two expressions built
along different routes compare equal exactly when their canonical forms agree.

Atoms
-----
``sym``   a coordinate symbol
``exp``   ``exp(u)``; products of exponentials are merged into one atom
``sin``   ``sin(u)``; powers ``>= 2`` are rewritten with ``sin^2 = 1 - cos^2``
``cos``   ``cos(u)``
``psi``   ``psi_k(u) = exp(-1/u) * u**(-k)`` for ``u > 0`` and ``0`` otherwise
``inv``   ``1/P`` for a polynomial ``P`` with more than one term

The ``psi`` family is closed under differentiation,
``d/du psi_k = psi_{k+2} - k psi_{k+1}``, which keeps derivatives of the
C-infinity mollifier :func:`bump` inside the grammar and finite everywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expr",
    "ZERO",
    "ONE",
    "as_expr",
    "as_fraction",
    "symbol",
    "const",
    "exp",
    "sin",
    "cos",
    "psi",
    "bump",
    "compile_exprs",
    "zero_status",
    "is_structural_zero",
    "clear_denominators",
]

SYM, EXP, SIN, COS, PSI, INV = "sym", "exp", "sin", "cos", "psi", "inv"


def as_fraction(x) -> Fraction:
    """Exact rational for ``x``; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"non-finite constant {x!r}")
        return Fraction(repr(x))
    raise TypeError(f"cannot use {type(x).__name__} as an exact constant")


class Atom:
    """Interned primitive factor.  Identity is equality."""

    __slots__ = ("kind", "args", "skey", "free", "_diff")
    _table: dict = {}

    def __new__(cls, kind, args):
        key = (kind, args)
        atom = cls._table.get(key)
        if atom is not None:
            return atom
        atom = object.__new__(cls)
        atom.kind = kind
        atom.args = args
        if kind == SYM:
            atom.skey = args[0]
            atom.free = frozenset(args)
        elif kind == PSI:
            atom.skey = f"psi{args[0]}({args[1].skey})"
            atom.free = args[1].free
        else:
            atom.skey = f"{kind}({args[0].skey})"
            atom.free = args[0].free
        atom._diff = {}
        cls._table[key] = atom
        return atom

    def __repr__(self):
        return f"Atom({self.skey})"

    def __str__(self):
        if self.kind == SYM:
            return self.args[0]
        if self.kind == PSI:
            return f"psi{self.args[0]}({self.args[1]})"
        if self.kind == INV:
            return f"1/({self.args[0]})"
        return f"{self.kind}({self.args[0]})"

    def diff(self, name: str) -> "Expr":
        if name not in self.free:
            return ZERO
        got = self._diff.get(name)
        if got is not None:
            return got
        kind = self.kind
        if kind == SYM:
            out = ONE
        elif kind == EXP:
            out = _atom_expr(self) * self.args[0].diff(name)
        elif kind == SIN:
            out = cos(self.args[0]) * self.args[0].diff(name)
        elif kind == COS:
            out = -sin(self.args[0]) * self.args[0].diff(name)
        elif kind == PSI:
            k, u = self.args
            out = (psi(k + 2, u) - k * psi(k + 1, u)) * u.diff(name)
        else:  # INV
            p = self.args[0]
            out = -p.diff(name) * Expr({((self, 2),): Fraction(1)})
        self._diff[name] = out
        return out


_mono_key_cache: dict = {}


def _mono_key(mono) -> str:
    key = _mono_key_cache.get(mono)
    if key is None:
        key = "*".join(f"{a.skey}^{e}" for a, e in mono)
        _mono_key_cache[mono] = key
    return key


def _sort_mono(items) -> tuple:
    return tuple(sorted(items, key=lambda ae: ae[0].skey))


def _normalize(factors: dict) -> dict:
    """Canonical monomials (with coefficients) for a raw atom->exponent map."""
    factors = {a: e for a, e in factors.items() if e != 0}
    exps = [a for a in factors if a.kind == EXP]
    needs_work = (
        len(exps) > 1
        or (exps and factors[exps[0]] != 1)
        or any(
            (a.kind == SIN and e >= 2) or (a.kind == INV and e < 0)
            for a, e in factors.items()
        )
    )
    if not needs_work:
        return {_sort_mono(factors.items()): Fraction(1)}

    if len(exps) > 1 or (exps and factors[exps[0]] != 1):
        total = ZERO
        for a in exps:
            total = total + factors.pop(a) * a.args[0]
        if not total.is_zero:
            factors[Atom(EXP, (total,))] = 1

    poly = ONE
    for a in [a for a, e in factors.items() if a.kind == INV and e < 0]:
        poly = poly * a.args[0] ** (-factors.pop(a))

    partial = [(factors, Fraction(1))]
    for a in [a for a, e in factors.items() if a.kind == SIN and e >= 2]:
        e = factors[a]
        c_atom = Atom(COS, a.args)
        nxt = []
        for fac, coef in partial:
            half, rest = divmod(e, 2)
            for j in range(half + 1):
                g = dict(fac)
                if rest:
                    g[a] = 1
                else:
                    g.pop(a, None)
                ce = g.get(c_atom, 0) + 2 * j
                if ce:
                    g[c_atom] = ce
                else:
                    g.pop(c_atom, None)
                nxt.append((g, coef * math.comb(half, j) * (-1) ** j))
        partial = nxt

    out: dict = {}
    for fac, coef in partial:
        mono = _sort_mono((a, e) for a, e in fac.items() if e != 0)
        v = out.get(mono, 0) + coef
        if v:
            out[mono] = v
        else:
            out.pop(mono, None)
    if poly is not ONE:
        out = (Expr(out) * poly).terms
    return out


_mul_cache: dict = {}


def _mono_mul(m1, m2) -> dict:
    if not m1:
        return {m2: Fraction(1)}
    if not m2:
        return {m1: Fraction(1)}
    key = (m1, m2)
    got = _mul_cache.get(key)
    if got is not None:
        return got
    fac = dict(m1)
    for a, e in m2:
        fac[a] = fac.get(a, 0) + e
    got = _normalize(fac)
    _mul_cache[key] = got
    if len(_mul_cache) > 400_000:
        _mul_cache.clear()
    return got


def _acc(into: dict, terms: dict, scale=1):
    for m, c in terms.items():
        v = into.get(m, 0) + c * scale
        if v:
            into[m] = v
        else:
            into.pop(m, None)


class Expr:
    """Immutable scalar expression in canonical form."""

    __slots__ = ("terms", "_hash", "_skey", "_free", "_dcache")
    __array_ufunc__ = None  # keep numpy from broadcasting over Expr objects

    def __init__(self, terms: dict):
        self.terms = terms
        self._hash = None
        self._skey = None
        self._free = None
        self._dcache = None

    # ------------------------------------------------------------------ basics
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> Fraction | None:
        """Exact value if the expression is a rational constant."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        return None

    @property
    def free(self) -> frozenset:
        if self._free is None:
            names = set()
            for m in self.terms:
                for a, _ in m:
                    names |= a.free
            self._free = frozenset(names)
        return self._free

    @property
    def size(self) -> int:
        return len(self.terms)

    @property
    def skey(self) -> str:
        if self._skey is None:
            parts = sorted(
                (_mono_key(m), c) for m, c in self.terms.items()
            )
            self._skey = "+".join(f"{c}*[{k}]" for k, c in parts)
        return self._skey

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __bool__(self):
        raise TypeError("truth value of an Expr is ambiguous; use .is_zero")

    def __repr__(self):
        return f"Expr({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m in sorted(self.terms, key=_mono_key):
            c = self.terms[m]
            body = "*".join(
                str(a) if e == 1 else f"{'(' + str(a) + ')' if a.kind == INV else a}**{e}"
                for a, e in m
            )
            if not body:
                pieces.append(str(c))
            elif c == 1:
                pieces.append(body)
            elif c == -1:
                pieces.append("-" + body)
            else:
                pieces.append(f"{c}*{body}")
        return " + ".join(pieces).replace("+ -", "- ")

    # -------------------------------------------------------------- arithmetic
    def __neg__(self):
        return Expr({m: -c for m, c in self.terms.items()})

    def __pos__(self):
        return self

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        _acc(out, other.terms)
        return Expr(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        _acc(out, other.terms, -1)
        return Expr(out)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def scale(self, c) -> "Expr":
        c = as_fraction(c)
        if c == 0:
            return ZERO
        if c == 1:
            return self
        return Expr({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return ZERO
        if len(b) == 1 and () in b:
            return self.scale(b[()])
        if len(a) == 1 and () in a:
            return other.scale(a[()])
        out: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                c12 = c1 * c2
                for m, c in _mono_mul(m1, m2).items():
                    v = out.get(m, 0) + c * c12
                    if v:
                        out[m] = v
                    else:
                        out.pop(m, None)
        return Expr(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("only integer powers are in the grammar")
        k = int(k)
        if k == 0:
            return ONE
        if k < 0:
            return _inverse(self) ** (-k)
        if k == 1:
            return self
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            fac: dict = {}
            for a, e in m:
                fac[a] = e * k
            return Expr(_normalize(fac)).scale(c ** k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.terms:
            raise ZeroDivisionError("division by the zero expression")
        cv = other.constant_value()
        if cv is not None:
            return self.scale(1 / cv)
        if not self.terms:
            return ZERO
        ratio = _constant_ratio(self, other)
        if ratio is not None:
            return const(ratio)
        return self * _inverse(other)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    # ---------------------------------------------------------------- calculus
    def diff(self, name: str) -> "Expr":
        """Exact partial derivative with respect to the symbol ``name``."""
        if name not in self.free:
            return ZERO
        if self._dcache is None:
            self._dcache = {}
        got = self._dcache.get(name)
        if got is not None:
            return got
        out: dict = {}
        for m, c in self.terms.items():
            for i, (a, e) in enumerate(m):
                if name not in a.free:
                    continue
                da = a.diff(name)
                if da.is_zero:
                    continue
                rest = m[:i] + m[i + 1:] if e == 1 else m[:i] + ((a, e - 1),) + m[i + 1:]
                _acc(out, (Expr({rest: c * e}) * da).terms)
        got = Expr(out)
        self._dcache[name] = got
        return got

    def subs(self, mapping: Mapping[str, object]) -> "Expr":
        """Substitute expressions (or numbers) for symbols."""
        mapping = {k: as_expr(v) for k, v in mapping.items() if k in self.free}
        if not mapping:
            return self

        def hook(atom):
            if atom.kind == SYM:
                return mapping.get(atom.args[0])
            return None

        return _rewrite(self, hook, set(mapping), {})

    def on_interval(self, name: str, lo, hi) -> "Expr":
        """Simplify using ``name in [lo, hi]``: mollifier atoms whose argument
        is a rational polynomial in ``name`` that is ``<= 0`` there vanish."""
        lo, hi = as_fraction(lo), as_fraction(hi)

        def hook(atom):
            if atom.kind == PSI:
                u = atom.args[1]
                if u.free <= {name}:
                    bound = _interval(u, name, lo, hi)
                    if bound is not None and bound[1] <= 0:
                        return ZERO
            return None

        return _rewrite(self, hook, {name}, {})

    # --------------------------------------------------------------- numerics
    def __call__(self, **values):
        names = sorted(self.free)
        missing = [n for n in names if n not in values]
        if missing:
            raise KeyError(f"no value for symbols {missing}")
        fn = compile_exprs([self], names)
        return fn(*[values[n] for n in names])[0]

    def __float__(self):
        if self.free:
            raise TypeError(f"expression depends on {sorted(self.free)}")
        return float(compile_exprs([self], [])()[0])


def _atom_expr(atom: Atom) -> Expr:
    return Expr({((atom, 1),): Fraction(1)})


def _coerce(x):
    if isinstance(x, Expr):
        return x
    try:
        return const(x)
    except TypeError:
        return NotImplemented


def as_expr(x) -> Expr:
    got = _coerce(x)
    if got is NotImplemented:
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")
    return got


def const(c) -> Expr:
    c = as_fraction(c)
    if c == 0:
        return ZERO
    return Expr({(): c})


ZERO = Expr({})
ONE = Expr({(): Fraction(1)})


def symbol(name: str) -> Expr:
    if not isinstance(name, str) or not name.isidentifier():
        raise ValueError(f"bad symbol name {name!r}")
    return _atom_expr(Atom(SYM, (name,)))


def _leading_coeff(e: Expr) -> Fraction:
    first = min(e.terms, key=_mono_key)
    return e.terms[first]


def _constant_ratio(a: Expr, b: Expr):
    if len(a.terms) != len(b.terms) or a.terms.keys() != b.terms.keys():
        return None
    m0 = next(iter(b.terms))
    r = a.terms[m0] / b.terms[m0]
    if all(a.terms[m] == r * c for m, c in b.terms.items()):
        return r
    return None


def _inverse(p: Expr) -> Expr:
    if not p.terms:
        raise ZeroDivisionError("inverse of the zero expression")
    if len(p.terms) == 1:
        (m, c), = p.terms.items()
        fac = {a: -e for a, e in m}
        return Expr(_normalize(fac)).scale(1 / c)
    lead = _leading_coeff(p)
    monic = p.scale(1 / lead)
    return _atom_expr(Atom(INV, (monic,))).scale(1 / lead)


def exp(u) -> Expr:
    u = as_expr(u)
    if u.is_zero:
        return ONE
    return _atom_expr(Atom(EXP, (u,)))


def sin(u) -> Expr:
    u = as_expr(u)
    if u.is_zero:
        return ZERO
    if _leading_coeff(u) < 0:
        return -_atom_expr(Atom(SIN, (-u,)))
    return _atom_expr(Atom(SIN, (u,)))


def cos(u) -> Expr:
    u = as_expr(u)
    if u.is_zero:
        return ONE
    if _leading_coeff(u) < 0:
        u = -u
    return _atom_expr(Atom(COS, (u,)))


def psi(k: int, u) -> Expr:
    """``exp(-1/u) * u**(-k)`` for ``u > 0``, identically zero for ``u <= 0``."""
    if int(k) != k or k < 0:
        raise ValueError("psi order must be a non-negative integer")
    u = as_expr(u)
    cv = u.constant_value()
    if cv is not None and cv <= 0:
        return ZERO
    return _atom_expr(Atom(PSI, (int(k), u)))


def bump(s, a, b) -> Expr:
    """Smooth step: ``0`` for ``s <= a``, ``1`` for ``s >= b``, C-infinity."""
    a, b = as_fraction(a), as_fraction(b)
    if not a < b:
        raise ValueError(f"bump needs a < b, got a={a}, b={b}")
    s = as_expr(s)
    left, right = psi(0, s - a), psi(0, b - s)
    return left / (left + right)


# ---------------------------------------------------------------- rewriting
def _rebuild(atom: Atom, args) -> Expr:
    kind = atom.kind
    if kind == EXP:
        return exp(args[0])
    if kind == SIN:
        return sin(args[0])
    if kind == COS:
        return cos(args[0])
    if kind == PSI:
        return psi(atom.args[0], args[0])
    if kind == INV:
        return ONE / args[0]
    raise AssertionError(kind)


def _rewrite(e: Expr, hook: Callable, names: set, cache: dict) -> Expr:
    out: dict = {}
    for m, c in e.terms.items():
        kept = []
        prod = None
        for a, k in m:
            if not (a.free & names):
                kept.append((a, k))
                continue
            got = cache.get(a)
            if got is None:
                got = hook(a)
                if got is None:
                    if a.kind == SYM:
                        got = _atom_expr(a)
                    else:
                        inner = a.args[1] if a.kind == PSI else a.args[0]
                        got = _rebuild(a, (_rewrite(inner, hook, names, cache),))
                cache[a] = got
            piece = got ** k
            prod = piece if prod is None else prod * piece
            if prod.is_zero:
                break
        if prod is not None and prod.is_zero:
            continue
        base = Expr({tuple(kept): c})
        _acc(out, (base if prod is None else base * prod).terms)
    return Expr(out)


def _interval(u: Expr, name: str, lo: Fraction, hi: Fraction):
    """Exact enclosure of a rational polynomial in one variable, else None."""
    total_lo = total_hi = Fraction(0)
    for m, c in u.terms.items():
        ilo = ihi = Fraction(1)
        for a, e in m:
            if a.kind != SYM or e < 0:
                return None
            plo, phi = _ipow(lo, hi, e)
            cands = (ilo * plo, ilo * phi, ihi * plo, ihi * phi)
            ilo, ihi = min(cands), max(cands)
        if c >= 0:
            total_lo += c * ilo
            total_hi += c * ihi
        else:
            total_lo += c * ihi
            total_hi += c * ilo
    return total_lo, total_hi


def _ipow(lo, hi, e):
    a, b = lo ** e, hi ** e
    if e % 2 == 0 and lo < 0 < hi:
        return Fraction(0), max(a, b)
    return min(a, b), max(a, b)


# ------------------------------------------------------------- compilation
def _psi_eval(k, u):
    u = np.asarray(u, dtype=float)
    pos = u > 0
    safe = np.where(pos, u, 1.0)
    return np.where(pos, np.exp(-1.0 / safe) * safe ** (-k), 0.0)


_compile_cache: dict = {}


def compile_exprs(exprs: Sequence[Expr], names: Sequence[str]) -> Callable:
    """Vectorised numpy evaluator ``fn(*arrays) -> list of arrays``.

    Sub-expressions shared between the inputs (atoms, atom arguments) are
    evaluated once per call.
    """
    exprs = tuple(as_expr(e) for e in exprs)
    names = tuple(names)
    key = (exprs, names)
    got = _compile_cache.get(key)
    if got is not None:
        return got
    index = {n: i for i, n in enumerate(names)}
    lines: list[str] = []
    atom_var: dict = {}
    expr_var: dict = {}
    counter = [0]

    def fresh(prefix):
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def atom_code(a: Atom) -> str:
        v = atom_var.get(a)
        if v is not None:
            return v
        if a.kind == SYM:
            name = a.args[0]
            if name not in index:
                raise KeyError(f"symbol {name!r} is not among {list(names)}")
            v = f"x{index[name]}"
        else:
            if a.kind == PSI:
                inner = expr_code(a.args[1])
                code = f"_psi({a.args[0]}, {inner})"
            elif a.kind == INV:
                code = f"1.0 / {expr_code(a.args[0])}"
            else:
                code = f"_np.{a.kind}({expr_code(a.args[0])})"
            v = fresh("a")
            lines.append(f"    {v} = {code}")
        atom_var[a] = v
        return v

    def expr_code(e: Expr) -> str:
        v = expr_var.get(e)
        if v is not None:
            return v
        monos = sorted(e.terms, key=_mono_key)
        pieces = []
        for m in monos:
            # denominators become true divisions so that x/x evaluates to exactly 1
            num = [repr(float(e.terms[m]))]
            den = []
            for a, k in m:
                if a.kind == INV:
                    pv = expr_code(a.args[0])
                    (den if k > 0 else num).append(pv if abs(k) == 1 else f"{pv}**{abs(k)}")
                    continue
                av = atom_code(a)
                (num if k > 0 else den).append(av if abs(k) == 1 else f"{av}**{abs(k)}")
            piece = "*".join(num)
            if den:
                piece = f"{piece}/({'*'.join(den)})"
            pieces.append(piece)
        v = fresh("e")
        if not pieces:
            lines.append(f"    {v} = 0.0")
        else:
            for j in range(0, len(pieces), 64):
                chunk = " + ".join(pieces[j:j + 64])
                lines.append(f"    {v} = {chunk}" if j == 0 else f"    {v} = {v} + {chunk}")
        expr_var[e] = v
        return v

    outs = [expr_code(e) for e in exprs]
    args = ", ".join(f"x{i}" for i in range(len(names)))
    src = f"def _fn({args}):\n" + "\n".join(lines) + f"\n    return ({', '.join(outs)}{',' if len(outs) == 1 else ''})\n"
    scope = {"_np": np, "_psi": _psi_eval}
    exec(compile(src, "<foldform-expr>", "exec"), scope)
    raw = scope["_fn"]

    def fn(*arrays):
        if len(arrays) != len(names):
            raise TypeError(f"expected {len(names)} arrays, got {len(arrays)}")
        arrays = [np.asarray(x, dtype=float) for x in arrays]
        shape = np.broadcast_shapes(*(x.shape for x in arrays)) if arrays else ()
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            res = raw(*arrays)
        return [np.broadcast_to(np.asarray(r, dtype=float), shape).copy() for r in res]

    fn.source = src
    _compile_cache[key] = fn
    if len(_compile_cache) > 5000:
        _compile_cache.clear()
    return fn


def clear_denominators(e: Expr) -> Expr:
    """Multiply ``e`` by the product of its top-level denominators.

    Every ``inv(P)`` atom is cancelled against the matching power of ``P``,
    which lets rational identities such as ``q * (1/q) - 1 = 0`` be decided
    structurally.  Denominators are nonzero wherever ``e`` is defined, so
    the result vanishes exactly when ``e`` does.
    """
    e = as_expr(e)
    top: dict = {}
    for m in e.terms:
        for a, k in m:
            if a.kind == INV and k > 0:
                top[a] = max(top.get(a, 0), k)
    if not top:
        return e
    out: dict = {}
    for m, c in e.terms.items():
        kept = []
        prod = const(c)
        used = {}
        for a, k in m:
            if a in top and k > 0:
                used[a] = k
            else:
                kept.append((a, k))
        for a, kmax in top.items():
            power = kmax - used.get(a, 0)
            if power:
                prod = prod * a.args[0] ** power
        _acc(out, (Expr({tuple(kept): Fraction(1)}) * prod).terms)
    return Expr(out)


def is_structural_zero(e: Expr) -> bool:
    """Exact zero test on the canonical form, after clearing denominators."""
    e = as_expr(e)
    if e.is_zero:
        return True
    return clear_denominators(e).is_zero


def zero_status(e: Expr, sampler: Callable[[int], Mapping[str, np.ndarray]] | None = None,
                probes: int = 64, tol: float = 1e-9) -> str:
    """``"zero"`` (structural), ``"nonzero"``, or ``"not provably zero"``.

    Structural zero is decided on the canonical form.  Otherwise a seeded
    numeric probe is run; a numerically vanishing but structurally nonzero
    expression is reported as not provably zero, never as zero.
    """
    if is_structural_zero(e):
        return "zero"
    names = sorted(e.free)
    if sampler is None:
        rng = np.random.default_rng(20240611)
        values = {n: rng.uniform(-1.0, 1.0, probes) for n in names}
    else:
        values = sampler(probes)
    fn = compile_exprs([e], names)
    vals = fn(*[values[n] for n in names])[0]
    scale = max(1.0, max(abs(float(c)) for c in e.terms.values()))
    if np.all(np.isfinite(vals)) and np.max(np.abs(vals)) <= tol * scale:
        return "not provably zero"
    return "nonzero"


def free_symbols(exprs: Iterable[Expr]) -> frozenset:
    out = frozenset()
    for e in exprs:
        out |= as_expr(e).free
    return out
