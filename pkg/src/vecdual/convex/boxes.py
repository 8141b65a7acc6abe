"""Indicators of coordinate boxes and their support functions."""
from __future__ import annotations

import numpy as np

from .base import INF, ConvexFn, ImproperFunctionError, Interval, MinResult, as_vec


def _bounds(lower, upper):
    lo = np.atleast_1d(np.asarray(lower, dtype=float)).ravel()
    hi = np.atleast_1d(np.asarray(upper, dtype=float)).ravel()
    if lo.shape != hi.shape:
        raise ValueError("lower and upper bounds differ in length")
    if np.isnan(lo).any() or np.isnan(hi).any():
        raise ValueError("bounds must not be NaN")
    if (lo == INF).any() or (hi == -INF).any():
        raise ValueError("lower bounds must be < +inf and upper bounds > -inf")
    if (lo > hi).any():
        raise ImproperFunctionError(f"empty box in coordinate {int(np.argmax(lo > hi))}")
    return lo, hi


class IndicatorBox(ConvexFn):
    """``0`` on ``{lower <= x <= upper}``, ``+inf`` elsewhere."""

    exact = True

    def __init__(self, lower, upper):
        self.lower, self.upper = _bounds(lower, upper)
        self.dim = self.lower.size

    def value(self, x):
        return 0.0 if bool(np.all((self.lower <= x) & (x <= self.upper))) else INF

    def conjugate(self) -> "SupportBox":
        return SupportBox(self.lower, self.upper)

    def contains(self, x) -> bool:
        return self.value(as_vec(x, self.dim)) == 0.0

    def domain1d(self):
        return float(self.lower[0]), float(self.upper[0])

    def one_sided(self, x):
        x = float(np.ravel(x)[0])
        lo, hi = self.domain1d()
        if x < lo:
            return -INF, -INF
        if x > hi:
            return INF, INF
        return (-INF if x == lo else 0.0), (INF if x == hi else 0.0)

    def subdifferential_at(self, x) -> Interval:
        if self.value(as_vec(x, self.dim)) == INF:
            return Interval.empty_set()
        return Interval(*self.one_sided(x))

    def minimize(self) -> MinResult:
        w = np.clip(np.zeros(self.dim), self.lower, self.upper)
        argmin = Interval(*self.domain1d()) if self.dim == 1 else None
        return MinResult(0.0, w, True, argmin=argmin)

    def cvx(self, var):
        cons = []
        for i in range(self.dim):
            if np.isfinite(self.lower[i]):
                cons.append(var[i] >= self.lower[i])
            if np.isfinite(self.upper[i]):
                cons.append(var[i] <= self.upper[i])
        return 0.0 * var[0], cons

    def same_function(self, other) -> bool:
        return (isinstance(other, IndicatorBox) and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __repr__(self):
        return f"IndicatorBox({self.lower.tolist()}, {self.upper.tolist()})"


class SupportBox(ConvexFn):
    """``y -> sup {<x, y> : lower <= x <= upper}``."""

    exact = True

    def __init__(self, lower, upper):
        self.lower, self.upper = _bounds(lower, upper)
        self.dim = self.lower.size

    def value(self, y):
        total = 0.0
        for lo, hi, t in zip(self.lower, self.upper, y):
            if t > 0:
                if hi == INF:
                    return INF
                total += hi * t
            elif t < 0:
                if lo == -INF:
                    return INF
                total += lo * t
        return float(total)

    def conjugate(self) -> IndicatorBox:
        return IndicatorBox(self.lower, self.upper)

    def domain1d(self):
        lo, hi = float(self.lower[0]), float(self.upper[0])
        return (0.0 if lo == -INF else -INF), (0.0 if hi == INF else INF)

    def one_sided(self, y):
        y = float(np.ravel(y)[0])
        a, b = self.domain1d()
        if y < a:
            return -INF, -INF
        if y > b:
            return INF, INF
        lo, hi = float(self.lower[0]), float(self.upper[0])
        if y < 0:
            return lo, lo
        if y > 0:
            return hi, hi
        return lo, hi

    def subdifferential_at(self, y) -> Interval:
        if self.value(as_vec(y, self.dim)) == INF:
            return Interval.empty_set()
        return Interval(*self.one_sided(y))

    def minimize(self) -> MinResult:
        if bool(np.all((self.lower <= 0) & (0 <= self.upper))):
            argmin = None
            if self.dim == 1:
                lo, hi = float(self.lower[0]), float(self.upper[0])
                argmin = Interval(0.0 if lo < 0 else -INF, 0.0 if hi > 0 else INF)
            return MinResult(0.0, np.zeros(self.dim), True, argmin=argmin)
        return MinResult(-INF, None, False, note="box does not contain the origin")

    def cvx(self, var):
        import cvxpy as cp

        terms, cons = [], []
        for i in range(self.dim):
            lo, hi = self.lower[i], self.upper[i]
            t = var[i]
            if lo == -INF and hi == INF:
                cons.append(t == 0)
            elif lo == -INF:
                cons.append(t >= 0)
                terms.append(hi * t)
            elif hi == INF:
                cons.append(t <= 0)
                terms.append(lo * t)
            else:
                terms.append(cp.maximum(lo * t, hi * t))
        expr = sum(terms[1:], terms[0]) if terms else 0.0 * var[0]
        return expr, cons

    def same_function(self, other) -> bool:
        return (isinstance(other, SupportBox) and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __repr__(self):
        return f"SupportBox({self.lower.tolist()}, {self.upper.tolist()})"
