"""Sampled one-dimensional functions: closure by lower hulls and the linear-time Legendre transform."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .base import INF, ConvexFn, ImproperFunctionError, MinResult
from .pwl import PWL1D


def _strict_grid(grid, what="grid") -> np.ndarray:
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0:
        raise ValueError(f"{what} is empty")
    if not np.isfinite(g).all():
        raise ValueError(f"{what} must be finite")
    if (np.diff(g) <= 0).any():
        raise ValueError(f"{what} must be strictly increasing")
    return g


class Sampled1D(ConvexFn):
    """Values on a grid, read as the piecewise-linear interpolant.

    ``limits`` optionally gives, per grid point, the value approached from the
    neighbouring cells when the sample itself sits higher (an open epigraph
    at that point).  Cells adjacent to a ``+inf`` limit are ``+inf``.
    """

    dim = 1
    exact = False

    def __init__(self, grid: Sequence[float], values: Sequence[float], limits: Optional[Sequence[float]] = None):
        self.grid = _strict_grid(grid)
        self.values = np.asarray(values, dtype=float).ravel()
        if self.values.shape != self.grid.shape:
            raise ValueError("grid and values differ in length")
        self.limits = self.values.copy() if limits is None else np.asarray(limits, dtype=float).ravel()
        if self.limits.shape != self.grid.shape:
            raise ValueError("grid and limits differ in length")
        if np.isnan(self.values).any() or np.isnan(self.limits).any():
            raise ValueError("values must not be NaN")
        if (self.values == -INF).any() or (self.limits == -INF).any():
            raise ImproperFunctionError("values unbounded below: no proper minorant")
        self.lower = np.minimum(self.values, self.limits)
        if not np.isfinite(self.lower).any():
            raise ImproperFunctionError("all sampled values are +inf")

    def value(self, x):
        x = float(np.ravel(x)[0])
        g = self.grid
        if x < g[0] or x > g[-1]:
            return INF
        k = int(np.searchsorted(g, x))
        if g[k] == x:
            return float(self.values[k])
        a, b = self.limits[k - 1], self.limits[k]
        if a == INF or b == INF:
            return INF
        t = (x - g[k - 1]) / (g[k] - g[k - 1])
        return float((1 - t) * a + t * b)

    def is_convex(self, tol: float = 1e-12) -> bool:
        fin = np.isfinite(self.values)
        idx = np.flatnonzero(fin)
        if idx.size and (idx[-1] - idx[0] + 1) != idx.size:
            return False
        x, v = self.grid[fin], self.values[fin]
        if x.size < 3:
            return True
        s = np.diff(v) / np.diff(x)
        return bool((np.diff(s) >= -tol * (1 + np.abs(s[:-1]))).all())

    def closure(self) -> PWL1D:
        """Closed convex hull of the samples as an exact PWL function on the grid's hull."""
        x, v = _hull(self.grid, self.lower, keep_collinear=False)
        if x.size == 1:
            return PWL1D([x[0]], [-INF, INF], (x[0], v[0]))
        slopes = np.diff(v) / np.diff(x)
        return PWL1D(list(x), [-INF] + list(slopes) + [INF], (x[0], v[0]))

    def conjugate(self) -> PWL1D:
        return self.closure().conjugate()

    def domain1d(self):
        fin = np.flatnonzero(np.isfinite(self.lower))
        return float(self.grid[fin[0]]), float(self.grid[fin[-1]])

    def minimize(self) -> MinResult:
        fin = np.isfinite(self.values)
        v = np.where(fin, self.values, INF)
        k = int(np.argmin(v))
        w = np.array([self.grid[k]])
        at_edge = k in (0, self.grid.size - 1) and self.grid.size > 1
        if at_edge:
            nb = 1 if k == 0 else self.grid.size - 2
            if self.values[nb] > v[k]:
                side = "left" if k == 0 else "right"
                return MinResult(float(v[k]), w, False, exact=False,
                                 note=f"not attained within grid, decreasing toward {side} boundary")
        return MinResult(float(v[k]), w, True, exact=False, note="grid minimum")

    def __repr__(self):
        return f"Sampled1D(n={self.grid.size}, range=[{self.grid[0]}, {self.grid[-1]}])"


def _hull(x, v, keep_collinear: bool):
    """Lower convex hull of the finite points ``(x_i, v_i)``, ``x`` increasing."""
    fin = np.isfinite(v)
    xs, vs = x[fin], v[fin]
    hx: list[float] = []
    hv: list[float] = []
    for xi, vi in zip(xs, vs):
        while len(hx) >= 2:
            cross = (hx[-1] - hx[-2]) * (vi - hv[-2]) - (hv[-1] - hv[-2]) * (xi - hx[-2])
            if cross < 0 or (cross == 0 and not keep_collinear):
                hx.pop()
                hv.pop()
            else:
                break
        hx.append(float(xi))
        hv.append(float(vi))
    return np.array(hx), np.array(hv)


def conjugate_sampled_llt(f: Sampled1D, dual_grid: Sequence[float]) -> Sampled1D:
    """Discrete Legendre transform ``g(s_j) = max_i (s_j x_i - f(x_i))``.

    A lower-hull pass followed by one monotone merge over the sorted dual grid;
    linear in the two grid sizes.  The final comparison scans a small window
    of hull vertices so ties are broken exactly as in the double loop.
    """
    s = _strict_grid(dual_grid, "dual grid")
    x, v = _hull(f.grid, f.lower, keep_collinear=True)
    n = x.size
    out = np.empty(s.size)
    j = 0
    for t, sj in enumerate(s):
        while j + 1 < n and sj * x[j + 1] - v[j + 1] >= sj * x[j] - v[j]:
            j += 1
        lo, hi = max(0, j - 2), min(n, j + 3)
        out[t] = max(sj * x[i] - v[i] for i in range(lo, hi))
    return Sampled1D(s, out)


def conjugate_sampled_brute(f: Sampled1D, dual_grid: Sequence[float]) -> np.ndarray:
    """The O(n m) double loop, kept as a reference."""
    s = _strict_grid(dual_grid, "dual grid")
    fin = np.isfinite(f.lower)
    return np.array([max(sj * xi - vi for xi, vi in zip(f.grid[fin], f.lower[fin])) for sj in s])


def sample(fn, grid) -> Sampled1D:
    """Sample a callable on a grid."""
    g = _strict_grid(grid)
    return Sampled1D(g, [float(np.ravel(fn(np.array([t])))[0]) for t in g])
