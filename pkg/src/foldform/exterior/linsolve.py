"""Small dense linear systems: exact (Expr entries) and batched numeric."""

from __future__ import annotations

import numpy as np

from .expr import Expr, ZERO, as_expr

__all__ = ["solve_symbolic", "solve_batch"]


def solve_symbolic(M, b, max_terms: int = 400):
    """Gauss-Jordan elimination over expressions.

    Pivots are chosen among structurally nonzero entries, preferring
    constants and then the smallest expressions.  Returns the solution
    list, or ``None`` when no structural pivot exists or an intermediate
    entry grows beyond ``max_terms`` terms.  A structurally nonzero pivot can
    still vanish at isolated points; callers verify the result.
    """
    n = len(M)
    A = [[as_expr(M[i][j]) for j in range(n)] + [as_expr(b[i])] for i in range(n)]
    for col in range(n):
        best, best_key = None, None
        for r in range(col, n):
            e = A[r][col]
            if e.is_zero:
                continue
            key = (0 if e.is_constant else 1, e.size)
            if best_key is None or key < best_key:
                best, best_key = r, key
        if best is None:
            return None
        A[col], A[best] = A[best], A[col]
        piv = A[col][col]
        inv = 1 / piv if not piv.is_constant else None
        row = [A[col][j] / piv if inv is None else A[col][j] * inv for j in range(n + 1)]
        A[col] = row
        for r in range(n):
            if r == col:
                continue
            fac = A[r][col]
            if fac.is_zero:
                continue
            new = []
            for j in range(n + 1):
                if row[j].is_zero:
                    new.append(A[r][j])
                    continue
                e = A[r][j] - fac * row[j]
                if e.size > max_terms:
                    return None
                new.append(e)
            A[r] = new
    return [A[i][n] for i in range(n)]


def solve_batch(M: np.ndarray, b: np.ndarray):
    """Batched LU solve (partial pivoting) with per-point condition numbers.

    Parameters
    ----------
    M : (N, d, d) array
    b : (N, d) array

    Returns
    -------
    x : (N, d) array
    cond : (N,) array of 2-norm condition numbers
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    cond = np.linalg.cond(M)
    x = np.linalg.solve(M, b[..., None])[..., 0]
    return x, cond
