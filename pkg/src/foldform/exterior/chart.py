"""Coordinate charts and sample-point generation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .expr import Expr, symbol

__all__ = ["Coord", "Chart", "ChartError", "permutation_sign"]

TWO_PI = 2.0 * math.pi


class ChartError(ValueError):
    pass


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation given as a sequence of distinct integers."""
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Coord:
    name: str
    kind: str = "line"  # "line" or "angle"
    lo: float | None = None  # defaults: [-1, 1] for lines, [0, 2 pi) for angles
    hi: float | None = None

    def __post_init__(self):
        if self.kind not in ("line", "angle"):
            raise ChartError(f"coordinate {self.name!r}: kind must be 'line' or 'angle'")
        lo0, hi0 = (0.0, TWO_PI) if self.kind == "angle" else (-1.0, 1.0)
        object.__setattr__(self, "lo", float(lo0 if self.lo is None else self.lo))
        object.__setattr__(self, "hi", float(hi0 if self.hi is None else self.hi))
        if not self.name.isidentifier():
            raise ChartError(f"bad coordinate name {self.name!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ChartError(f"coordinate {self.name!r}: empty interval [{self.lo}, {self.hi}]")


class Chart:
    """A box chart with optional angle coordinates.

    Parameters
    ----------
    name : str
    coords : list of Coord or (name, kind[, lo, hi]) tuples
        Angle coordinates default to ``[0, 2*pi)`` and are periodic.
    orientation : list of coordinate names, optional
        Ordered coordinates whose wedge of differentials is the positive
        volume form.  Defaults to the coordinate order.
    """

    def __init__(self, name: str, coords, orientation: Sequence[str] | None = None):
        parsed = []
        for c in coords:
            if isinstance(c, Coord):
                parsed.append(c)
                continue
            c = tuple(c)
            if len(c) == 2 and c[1] == "angle":
                parsed.append(Coord(c[0], "angle", 0.0, TWO_PI))
            elif len(c) == 2:
                parsed.append(Coord(c[0], c[1]))
            else:
                parsed.append(Coord(c[0], c[1], float(c[2]), float(c[3])))
        names = [c.name for c in parsed]
        if len(set(names)) != len(names):
            raise ChartError(f"chart {name!r}: duplicate coordinate names {names}")
        self.name = name
        self.coords = tuple(parsed)
        self.names = tuple(names)
        self._index = {n: i for i, n in enumerate(names)}
        orientation = list(orientation) if orientation is not None else list(names)
        if sorted(orientation) != sorted(names):
            raise ChartError(f"chart {name!r}: orientation {orientation} is not a permutation of {names}")
        self.orientation = tuple(orientation)
        self.orientation_sign = permutation_sign([self._index[n] for n in orientation])

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ChartError(f"chart {self.name!r} has no coordinate {name!r}") from None

    def symbols(self) -> list[Expr]:
        return [symbol(n) for n in self.names]

    def sym(self, name: str) -> Expr:
        self.index(name)
        return symbol(name)

    @property
    def angle_mask(self) -> np.ndarray:
        return np.array([c.kind == "angle" for c in self.coords])

    @property
    def lower(self) -> np.ndarray:
        return np.array([c.lo for c in self.coords])

    @property
    def upper(self) -> np.ndarray:
        return np.array([c.hi for c in self.coords])

    def with_orientation(self, orientation, name=None) -> "Chart":
        return Chart(name or self.name, self.coords, orientation)

    def __repr__(self):
        return f"Chart({self.name!r}, {list(self.names)})"

    def __eq__(self, other):
        return isinstance(other, Chart) and (self.name, self.coords, self.orientation) == (
            other.name, other.coords, other.orientation)

    def __hash__(self):
        return hash((self.name, self.coords))

    # ----------------------------------------------------------- sampling
    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        """Boolean mask of points inside the box; angles always qualify
        when the coordinate spans a full period."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.all(np.isfinite(p), axis=1)
        for i, c in enumerate(self.coords):
            if c.kind == "angle" and c.hi - c.lo >= TWO_PI - 1e-12:
                continue
            ok &= (p[:, i] >= c.lo - tol) & (p[:, i] <= c.hi + tol)
        return ok

    def check_points(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if p.shape[1] != self.dim:
            raise ChartError(f"chart {self.name!r}: points have {p.shape[1]} coordinates, expected {self.dim}")
        bad = ~self.contains(p)
        if bad.any():
            raise ChartError(f"chart {self.name!r}: point {p[bad][0].tolist()} is outside the domain")
        return p

    def grid(self, n: int | Sequence[int], max_points: int | None = None) -> np.ndarray:
        """Uniform product grid; angle coordinates omit the duplicate endpoint.

        With ``max_points`` the per-coordinate count is lowered until the
        grid size fits.
        """
        counts = [int(n)] * self.dim if np.isscalar(n) else [int(k) for k in n]
        if len(counts) != self.dim:
            raise ChartError("grid counts do not match the chart dimension")
        if min(counts, default=1) < 1:
            raise ChartError("grid needs at least one point per coordinate")
        if max_points is not None:
            while math.prod(counts) > max_points and max(counts) > 2:
                k = counts.index(max(counts))
                counts[k] -= 1
        axes = []
        for c, k in zip(self.coords, counts):
            if c.kind == "angle" and c.hi - c.lo >= TWO_PI - 1e-12:
                axes.append(c.lo + (c.hi - c.lo) * np.arange(k) / k)
            elif k == 1:
                axes.append(np.array([(c.lo + c.hi) / 2]))
            else:
                axes.append(np.linspace(c.lo, c.hi, k))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1) if axes else np.zeros((1, 0))

    def halton(self, n: int, seed: int = 0) -> np.ndarray:
        """Scrambled Halton points mapped into the box (deterministic)."""
        sampler = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        u = sampler.random(n)
        return self.lower + u * (self.upper - self.lower)

    def random(self, n: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)

    def columns(self, points) -> list[np.ndarray]:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return [p[:, i] for i in range(self.dim)]
