"""Combine upper-bound curves into their lower convex hull.

Several valid upper bounds on a convex quantity can be merged into a
single tighter one: take the pointwise minimum and then the lower convex
hull.  Curves are piecewise linear over their grids; the hull is computed
on the intersection of domains (no extrapolation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BoundCurve:
    """Sampled curve: strictly increasing finite grid with finite values."""

    grid: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or v.ndim != 1 or len(g) != len(v):
            raise ValueError("grid and values must be 1-d and of equal length")
        if len(g) < 2:
            raise ValueError("a curve needs at least two points")
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(v)):
            raise ValueError("grid and values must be finite")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def at(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.grid, self.values)


def lower_convex_hull(curves: Sequence[BoundCurve]) -> BoundCurve:
    """Lower convex hull of the pointwise minimum of the given curves.

    The result is evaluated on the union grid restricted to the common
    domain; it is pointwise below every input and convex.  Non-overlapping
    domains are an error.
    """
    if not curves:
        raise ValueError("need at least one curve")
    lo = max(float(c.grid[0]) for c in curves)
    hi = min(float(c.grid[-1]) for c in curves)
    if lo >= hi:
        raise ValueError("curve domains do not overlap")
    points = np.unique(np.concatenate([c.grid for c in curves] + [np.array([lo, hi])]))
    points = points[(points >= lo) & (points <= hi)]
    env = np.min(np.vstack([c.at(points) for c in curves]), axis=0)

    hull_x, hull_y = _lower_hull(points, env)
    out = np.interp(points, hull_x, hull_y)
    label = "hull(" + ",".join(c.label or "?" for c in curves) + ")"
    return BoundCurve(points, out, label)


def _lower_hull(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # monotone chain keeping only the lower boundary
    keep: list[int] = []
    for i in range(len(x)):
        while len(keep) >= 2:
            i0, i1 = keep[-2], keep[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (x[i] - x[i0]) * (y[i1] - y[i0])
            if cross <= 0:  # middle point lies on or above the chord
                keep.pop()
            else:
                break
        keep.append(i)
    return x[keep], y[keep]
