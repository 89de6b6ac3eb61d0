"""Batch Dormand-Prince 5(4) stepping with a max-norm error controller.

scipy's ``solve_ivp`` measures the local error with an RMS norm over the
whole state, which lets one badly resolved sample hide among thousands of
well resolved ones when many points are integrated together.  Here all
points share a step size and the worst point drives the controller.  The
tableau is the one scipy ships for ``RK45``.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import RK45

_A = RK45.A
_B = RK45.B
_C = RK45.C
_E = RK45.E
ORDER = RK45.order


class IntegrationError(RuntimeError):
    """Step-size underflow or non-finite state."""


def _stages(rhs, t, y, f0, h):
    k = [f0]
    for s in range(1, 6):
        dy = sum(_A[s, j] * k[j] for j in range(s))
        k.append(rhs(t + _C[s] * h, y + h * dy))
    y_new = y + h * sum(_B[j] * k[j] for j in range(6))
    f_new = rhs(t + h, y_new)
    k.append(f_new)
    err = h * sum(_E[j] * k[j] for j in range(7))
    return y_new, f_new, err


def integrate_batch(rhs, y0, t1: float, rtol: float = 1e-10, atol: float = 1e-12,
                    t0: float = 0.0, max_steps: int = 200_000, max_step: float = np.inf,
                    on_step=None):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` for a batch state.

    Returns ``(y1, stats)`` where stats counts accepted and rejected steps.
    ``on_step(t, y)`` is called after every accepted step; a true return
    value stops the integration there (``stats["t"]`` holds the stop time).
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = float(t1) - t
    stats = {"accepted": 0, "rejected": 0}
    if span == 0:
        return y, stats
    direction = np.sign(span)
    f = rhs(t, y)
    scale0 = atol + rtol * np.abs(y)
    d0 = np.max(np.abs(y) / scale0)
    d1 = np.max(np.abs(f) / scale0)
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-4
    h = min(abs(h), abs(span), max_step)
    stats["t"] = t
    while direction * (t1 - t) > 0:
        if stats["accepted"] + stats["rejected"] > max_steps:
            raise IntegrationError(f"too many steps integrating to t={t1}")
        h = min(h, abs(t1 - t))
        y_new, f_new, err = _stages(rhs, t, y, f, direction * h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        en = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if not np.isfinite(en):
            en = np.inf
        if en <= 1.0:
            t = t + direction * h if abs(t1 - t) > h else float(t1)
            y, f = y_new, f_new
            stats["accepted"] += 1
            stats["t"] = t
            if on_step is not None and on_step(t, y):
                break
            factor = 5.0 if en == 0 else min(5.0, 0.9 * en ** (-1.0 / ORDER))
        else:
            stats["rejected"] += 1
            factor = 0.2 if not np.isfinite(en) else max(0.2, 0.9 * en ** (-1.0 / ORDER))
        h = min(h * factor, max_step)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t}")
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite state")
    return y, stats


def fixed_step(rhs, y0, t1: float, steps: int, t0: float = 0.0):
    """Plain fifth-order steps of equal length (used for order checks)."""
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / steps
    t = t0
    f = rhs(t, y)
    for _ in range(steps):
        y, f, _err = _stages(rhs, t, y, f, h)
        t += h
    return y
