"""Exact piecewise-linear convex functions of one variable.

A function is stored by its breakpoints, its slopes (one more than the
breakpoints; ``-inf`` / ``+inf`` at the ends encode domain walls) and a
Fenchel anchor: a point ``x0`` of the domain, a finite subgradient ``s0`` at
``x0`` and the symmetric offset ``e = f(x0) - x0 * s0 / 2``.  The conjugate has
breakpoints equal to the finite slopes, slopes equal to the breakpoints, anchor
``(s0, x0)`` and offset ``-e``, so conjugation moves fields around and never
rounds.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import INF, ConvexFn, ImproperFunctionError, Interval, MinResult

_NEG = -INF


class PWL1D(ConvexFn):
    dim = 1
    exact = True

    def __init__(self, breakpoints: Sequence[float], slopes: Sequence[float], anchor: tuple[float, float]):
        bp, sl = _validate(breakpoints, slopes)
        bp, sl = _drop_redundant(bp, sl)
        x_a, f_a = float(anchor[0]), float(anchor[1])
        if not np.isfinite(f_a):
            raise ImproperFunctionError("anchor value must be finite")
        lo, hi = _domain(bp, sl)
        if not lo <= x_a <= hi:
            raise ValueError(f"anchor point {x_a} lies outside the domain [{lo}, {hi}]")
        self.breakpoints, self.slopes = bp, sl
        # evaluate at the canonical anchor through a temporary anchor at x_a
        x0, s0 = _canonical_pair(bp, sl)
        tmp_vals = _breakpoint_values(bp, sl, x_a, f_a)
        f0 = _eval(bp, sl, tmp_vals, x_a, f_a, x0)
        self._set_anchor(x0, s0, f0 - x0 * s0 / 2.0)

    @classmethod
    def _raw(cls, bp, sl, x0, s0, e) -> "PWL1D":
        obj = cls.__new__(cls)
        obj.breakpoints, obj.slopes = tuple(bp), tuple(sl)
        obj._set_anchor(x0, s0, e)
        return obj

    def _set_anchor(self, x0, s0, e):
        self.x0, self.s0, self.offset = float(x0), float(s0), float(e)
        self.f0 = self.offset + self.x0 * self.s0 / 2.0
        self._vals = _breakpoint_values(self.breakpoints, self.slopes, self.x0, self.f0)

    # representation -------------------------------------------------------
    @property
    def anchor(self) -> tuple[float, float]:
        return self.x0, self.f0

    def normalized(self) -> "PWL1D":
        """Same function with the canonical anchor."""
        return PWL1D(self.breakpoints, self.slopes, self.anchor)

    def fields(self) -> tuple:
        return (self.breakpoints, self.slopes, self.x0, self.s0, self.offset)

    def same_function(self, other: "PWL1D", rtol: float = 1e-9) -> bool:
        """Equal breakpoints and slopes and matching values at the breakpoints."""
        if self.breakpoints != other.breakpoints or self.slopes != other.slopes:
            return False
        pts = list(self.breakpoints) or [self.x0]
        return all(abs(self(p) - other(p)) <= rtol * (1 + abs(self(p))) for p in pts)

    def __repr__(self):
        return f"PWL1D(breakpoints={list(self.breakpoints)}, slopes={list(self.slopes)}, anchor={self.anchor})"

    # evaluation -------------------------------------------------------------
    def value(self, x):
        return _eval(self.breakpoints, self.slopes, self._vals, self.x0, self.f0, float(np.ravel(x)[0]))

    def domain1d(self):
        return _domain(self.breakpoints, self.slopes)

    def one_sided(self, x: float) -> tuple[float, float]:
        x = float(x)
        lo, hi = self.domain1d()
        if x < lo:
            return _NEG, _NEG
        if x > hi:
            return INF, INF
        bp, sl = self.breakpoints, self.slopes
        k = bisect.bisect_left(bp, x)
        if k < len(bp) and bp[k] == x:
            return sl[k], sl[k + 1]
        return sl[k], sl[k]

    def subdifferential_at(self, x: float) -> Interval:
        if self.value(np.array([x])) == INF:
            return Interval.empty_set()
        lo, hi = self.one_sided(x)
        return Interval(lo, hi)

    def pieces(self) -> list[tuple[float, float]]:
        """Affine pieces ``(slope, intercept)`` over the finite-slope regions."""
        out = []
        bp, sl = self.breakpoints, self.slopes
        if not bp:
            return [(sl[0], self.f0 - sl[0] * self.x0)]
        for k, s in enumerate(sl):
            if not np.isfinite(s):
                continue
            ref = bp[k] if k < len(bp) else bp[k - 1]
            vref = self._vals[k] if k < len(bp) else self._vals[k - 1]
            out.append((s, vref - s * ref))
        return out

    # calculus ---------------------------------------------------------------
    def conjugate(self) -> "PWL1D":
        bp, sl = self.breakpoints, self.slopes
        new_bp = [s for s in sl if np.isfinite(s)]
        new_sl = ([_NEG] if np.isfinite(sl[0]) else []) + list(bp) + ([INF] if np.isfinite(sl[-1]) else [])
        return PWL1D._raw(new_bp, new_sl, self.s0, self.x0, -self.offset)

    def minimize(self) -> MinResult:
        bp, sl = self.breakpoints, self.slopes
        if sl[0] > 0 or sl[-1] < 0:
            return MinResult(_NEG, None, False, note="unbounded below along a tail")
        if not bp:
            return MinResult(self.f0, np.array([self.x0]), True, argmin=Interval(_NEG, INF))
        # first piece with slope >= 0
        k = next(i for i, s in enumerate(sl) if s >= 0)
        if sl[k] == 0:
            lo = bp[k - 1] if k > 0 else _NEG
            hi = bp[k] if k < len(bp) else INF
        else:
            lo = hi = bp[k - 1]
        w = lo if np.isfinite(lo) else hi
        return MinResult(self.value(w), np.array([w]), True, argmin=Interval(lo, hi))

    def add(self, other: "PWL1D") -> "PWL1D":
        lo1, hi1 = self.domain1d()
        lo2, hi2 = other.domain1d()
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            raise ImproperFunctionError("sum of functions with disjoint domains")
        pts = sorted({p for p in self.breakpoints + other.breakpoints if lo <= p <= hi}
                     | ({lo} if np.isfinite(lo) else set()) | ({hi} if np.isfinite(hi) else set()))
        a = lo if np.isfinite(lo) else (hi if np.isfinite(hi) else (pts[0] if pts else 0.0))
        fa = self.value(a) + other.value(a)
        if not pts:
            return PWL1D([], [self.slopes[0] + other.slopes[0]], (a, fa))
        if lo == hi:
            return PWL1D([lo], [_NEG, INF], (lo, fa))
        sl = []
        sl.append(_NEG if np.isfinite(lo) and pts[0] == lo else self._piece_slope(pts[0] - 1.0) + other._piece_slope(pts[0] - 1.0))
        for p, q in zip(pts[:-1], pts[1:]):
            m = 0.5 * (p + q)
            sl.append(self._piece_slope(m) + other._piece_slope(m))
        sl.append(INF if np.isfinite(hi) and pts[-1] == hi else self._piece_slope(pts[-1] + 1.0) + other._piece_slope(pts[-1] + 1.0))
        return PWL1D(pts, sl, (a, fa))

    def _piece_slope(self, t: float) -> float:
        k = bisect.bisect_right(self.breakpoints, t)
        return self.slopes[k]

    def affine_precompose(self, a: float, c: float) -> "PWL1D":
        """``x -> f(a x + c)``."""
        a, c = float(a), float(c)
        if a == 0.0:
            v = self.value(c)
            if v == INF:
                raise ImproperFunctionError("composition with a constant map outside the domain")
            return PWL1D([], [0.0], (0.0, v))
        bp = [(b - c) / a for b in self.breakpoints]
        sl = [a * s for s in self.slopes]
        if a < 0:
            bp, sl = bp[::-1], sl[::-1]
        x_a = (self.x0 - c) / a
        return PWL1D(bp, sl, (x_a, self.f0))

    def scale(self, c: float) -> "PWL1D":
        if not c > 0:
            raise ValueError("scale must be positive")
        return PWL1D(self.breakpoints, [c * s for s in self.slopes], (self.x0, c * self.f0))

    def add_affine(self, s: float, beta: float = 0.0) -> "PWL1D":
        return PWL1D(self.breakpoints, [t + s for t in self.slopes], (self.x0, self.f0 + s * self.x0 + beta))

    def cvx(self, var):
        import cvxpy as cp

        x = var if getattr(var, "ndim", 0) == 0 else var[0]
        pieces = [s * x + c for s, c in self.pieces()]
        expr = pieces[0] if len(pieces) == 1 else cp.maximum(*pieces)
        lo, hi = self.domain1d()
        cons = []
        if np.isfinite(lo):
            cons.append(x >= lo)
        if np.isfinite(hi):
            cons.append(x <= hi)
        if not pieces:
            expr = 0 * x + self.f0
        return expr, cons


def _validate(breakpoints, slopes):
    bp = tuple(float(b) for b in breakpoints)
    sl = tuple(float(s) for s in slopes)
    if len(sl) != len(bp) + 1:
        raise ValueError(f"need {len(bp) + 1} slopes for {len(bp)} breakpoints, got {len(sl)}")
    if any(not np.isfinite(b) for b in bp):
        raise ValueError("breakpoints must be finite")
    for k in range(1, len(bp)):
        if not bp[k - 1] < bp[k]:
            raise ValueError(f"breakpoints must be strictly increasing (breakpoint {k})")
    if any(np.isnan(s) for s in sl):
        raise ValueError("slopes must not be NaN")
    if sl[0] == INF or sl[-1] == _NEG:
        raise ValueError("a wall slope points the wrong way")
    for k in range(1, len(sl) - 1):
        if not np.isfinite(sl[k]):
            raise ValueError(f"only the end slopes may be infinite (slope {k})")
    if not bp and not np.isfinite(sl[0]):
        raise ValueError("a domain wall needs a breakpoint")
    for k in range(len(bp)):
        if sl[k] > sl[k + 1]:
            raise ValueError(f"convexity violated at breakpoint {k}")
    return bp, sl


def _drop_redundant(bp, sl):
    keep_bp, keep_sl = [], [sl[0]]
    for k, b in enumerate(bp):
        if sl[k] == sl[k + 1] and np.isfinite(sl[k]):
            continue
        keep_bp.append(b)
        keep_sl.append(sl[k + 1])
    return tuple(keep_bp), tuple(keep_sl)


def _domain(bp, sl):
    lo = bp[0] if sl[0] == _NEG else _NEG
    hi = bp[-1] if sl[-1] == INF else INF
    return lo, hi


def _canonical_pair(bp, sl):
    if not bp:
        return 0.0, sl[0]
    x0 = bp[0]
    if np.isfinite(sl[1]):
        return x0, sl[1]
    if np.isfinite(sl[0]):
        return x0, sl[0]
    return x0, 0.0


def _breakpoint_values(bp, sl, xa, fa):
    n = len(bp)
    vals = [0.0] * n
    if n == 0:
        return vals
    k = bisect.bisect_left(bp, xa)
    if k < n and bp[k] == xa:
        vals[k] = fa
        start_hi = start_lo = k
    else:
        # xa is inside the open piece k (between bp[k-1] and bp[k])
        start_lo, start_hi = k - 1, k
        if k < n:
            vals[k] = fa + sl[k] * (bp[k] - xa)
        if k - 1 >= 0:
            vals[k - 1] = fa - sl[k] * (xa - bp[k - 1])
    for j in range(start_hi + 1, n):
        vals[j] = vals[j - 1] + sl[j] * (bp[j] - bp[j - 1])
    for j in range(start_lo - 1, -1, -1):
        vals[j] = vals[j + 1] - sl[j + 1] * (bp[j + 1] - bp[j])
    return vals


def _eval(bp, sl, vals, xa, fa, x):
    if not bp:
        return fa + sl[0] * (x - xa)
    k = bisect.bisect_left(bp, x)
    if k < len(bp) and bp[k] == x:
        return vals[k]
    s = sl[k]
    if not np.isfinite(s):
        return INF
    if k < len(bp):
        return vals[k] - s * (bp[k] - x)
    return vals[k - 1] + s * (x - bp[k - 1])


# -- epigraph roundtrip ------------------------------------------------------


@dataclass(frozen=True)
class Epigraph1D:
    """The region ``{(x, t): f(x) <= t}`` of a PWL function."""

    fn: PWL1D
    closed: bool = True

    def contains(self, x: float, t: float) -> bool:
        v = self.fn(x)
        return v <= t if self.closed else v < t

    @classmethod
    def from_halfplanes(cls, rows: Sequence[tuple[float, float, float]]) -> "Epigraph1D":
        """Build from constraints ``alpha * x + beta * t <= gamma``.

        Rows with ``beta > 0`` bound ``t`` from above and are rejected; the region
        must also admit some lower bound on ``t``.
        """
        lines, lo, hi = [], _NEG, INF
        for alpha, beta, gamma in rows:
            if beta > 0:
                raise ValueError("region is not stable under upward translation")
            if beta < 0:
                # t >= (alpha x - gamma) / (-beta)
                lines.append((alpha / -beta, -gamma / -beta))
            elif alpha > 0:
                hi = min(hi, gamma / alpha)
            elif alpha < 0:
                lo = max(lo, gamma / alpha)
            elif gamma < 0:
                raise ValueError("region is empty")
        if lo > hi:
            raise ValueError("region is empty")
        if not lines:
            raise ImproperFunctionError("region contains vertical lines; its lower bound function is -inf")
        return cls(max_affine(lines, lo, hi))


def max_affine(lines: Sequence[tuple[float, float]], lo: float = _NEG, hi: float = INF) -> PWL1D:
    """Pointwise maximum of affine functions ``s * x + c`` restricted to ``[lo, hi]``."""
    best: dict[float, float] = {}
    for s, c in lines:
        best[float(s)] = max(best.get(float(s), _NEG), float(c))
    hull: list[tuple[float, float]] = []
    for s, c in sorted(best.items()):
        while len(hull) >= 2:
            (s1, c1), (s2, c2) = hull[-2], hull[-1]
            # line 2 is useless if lines 1 and 3 cross at or above it
            if (c - c1) * (s2 - s1) >= (c2 - c1) * (s - s1):
                hull.pop()
            else:
                break
        hull.append((s, c))
    bps = [(c1 - c2) / (s2 - s1) for (s1, c1), (s2, c2) in zip(hull[:-1], hull[1:])]
    slopes = [s for s, _ in hull]
    fn = PWL1D(bps, slopes, (0.0, max(c for _, c in hull)))
    if np.isfinite(lo) or np.isfinite(hi):
        fn = fn.add(interval_indicator(lo, hi))
    return fn


def interval_indicator(lo: float, hi: float) -> PWL1D:
    """Indicator of ``[lo, hi]`` (either end may be infinite)."""
    if lo > hi:
        raise ImproperFunctionError("empty interval")
    if lo == hi:
        return PWL1D([lo], [_NEG, INF], (lo, 0.0))
    bp = ([lo] if np.isfinite(lo) else []) + ([hi] if np.isfinite(hi) else [])
    sl = ([_NEG] if np.isfinite(lo) else []) + [0.0] + ([INF] if np.isfinite(hi) else [])
    return PWL1D(bp, sl, (lo if np.isfinite(lo) else (hi if np.isfinite(hi) else 0.0), 0.0))


def from_epigraph(H: Epigraph1D) -> PWL1D:
    """Lower bound function of a closed upward-stable epigraph."""
    if not H.closed:
        raise ValueError("the epigraph must be closed")
    return H.fn
