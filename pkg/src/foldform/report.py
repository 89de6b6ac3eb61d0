"""Named verification checks and the report that collects them."""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = ["Check", "VerificationReport", "max_check", "min_check", "bool_check", "timed"]

_BIG = 1e300


def _finite(x) -> float:
    x = float(x)
    if math.isnan(x):
        return _BIG
    return max(-_BIG, min(_BIG, x))


@dataclass
class Check:
    name: str
    anchor: str
    metric: float
    threshold: float
    samples: int
    passed: bool
    witness: list | None = None
    ms: int = 0
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.anchor:
            raise ValueError(f"check {self.name!r} needs a non-empty anchor")
        self.metric = _finite(self.metric)
        self.threshold = _finite(self.threshold)
        self.samples = int(self.samples)
        self.passed = bool(self.passed)
        if self.witness is not None:
            self.witness = [_finite(v) for v in np.ravel(self.witness)]

    def to_dict(self, timestamps: bool = True) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "metric": self.metric,
            "threshold": self.threshold,
            "samples": self.samples,
            "passed": self.passed,
            "witness": self.witness,
            "ms": int(self.ms) if timestamps else 0,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: metric={self.metric:.3e} threshold={self.threshold:.3e} n={self.samples}"


class VerificationReport:
    """Ordered collection of checks; passes iff every check passes."""

    def __init__(self, scenario: str = "", config: dict | None = None, checks: Sequence[Check] = ()):
        self.scenario = scenario
        self.config = dict(config or {})
        self.checks: list[Check] = list(checks)

    @property
    def overall(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, item):
        if isinstance(item, VerificationReport):
            self.checks.extend(item.checks)
        elif isinstance(item, Check):
            self.checks.append(item)
        else:
            for c in item:
                self.add(c)
        return self

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self):
        return len(self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self, timestamps: bool = True) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "checks": [c.to_dict(timestamps) for c in self.checks],
            "overall": self.overall,
        }

    def to_json(self, timestamps: bool = True) -> str:
        return json.dumps(self.to_dict(timestamps), indent=2, sort_keys=False, allow_nan=False) + "\n"

    def summary(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def _witness(points, i):
    if points is None:
        return None
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return p[i].tolist()


def max_check(name, anchor, residuals, threshold, points=None, strict=True, **detail) -> Check:
    """Pass iff the largest residual is below ``threshold`` (``<=`` when not strict)."""
    r = np.abs(np.ravel(np.asarray(residuals, dtype=float)))
    if r.size == 0:
        return Check(name, anchor, _BIG, threshold, 0, False, None, detail={"error": "no samples", **detail})
    bad = ~np.isfinite(r)
    i = int(np.argmax(np.where(bad, np.inf, r)))
    metric = _BIG if bad.any() else float(r[i])
    ok = (metric < threshold) if strict else (metric <= threshold)
    return Check(name, anchor, metric, threshold, r.size, ok, None if ok else _witness(points, i), detail=detail)


def min_check(name, anchor, values, threshold, points=None, **detail) -> Check:
    """Pass iff the smallest value exceeds ``threshold``."""
    v = np.ravel(np.asarray(values, dtype=float))
    if v.size == 0:
        return Check(name, anchor, -_BIG, threshold, 0, False, None, detail={"error": "no samples", **detail})
    bad = ~np.isfinite(v)
    i = int(np.argmin(np.where(bad, -np.inf, v)))
    metric = -_BIG if bad.any() else float(v[i])
    ok = metric > threshold
    return Check(name, anchor, metric, threshold, v.size, ok, None if ok else _witness(points, i), detail=detail)


def bool_check(name, anchor, ok: bool, samples: int = 1, metric: float | None = None,
               witness=None, **detail) -> Check:
    """Structural (yes/no) check; metric is 0 on success and 1 on failure unless given."""
    m = (0.0 if ok else 1.0) if metric is None else metric
    return Check(name, anchor, m, 0.5, samples, bool(ok), None if ok else witness, detail=detail)


@contextmanager
def timed(holder: dict):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        holder["ms"] = int(round(1000 * (time.perf_counter() - t0)))
