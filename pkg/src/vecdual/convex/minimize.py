"""Minimization with exact paths where the representation allows them.

Order of attempts:

1. sampled components: grid scan with the boundary heuristic,
2. reduction to an exact 1-D PWL function: breakpoint scan,
3. reduction to a 1-D PWL function plus a strictly convex quadratic: piece scan,
4. reduction to a (restricted) quadratic: stationarity,
5. one-dimensional bisection on one-sided derivatives,
6. a conic model solved with cvxpy, with box-radius refinement to tell
   attainment, non-attainment and unboundedness apart.
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .base import INF, ConjugateOf, ConvexFn, ImproperFunctionError, Interval, MinResult, Precompose, Scaled, Sum, NotExactError
from .boxes import IndicatorBox, SupportBox
from .pwl import PWL1D, interval_indicator
from .quadratic import Quadratic, point_indicator, precompose_quadratic, sum_quadratics
from .sampled import Sampled1D
from .special import PolyhedronIndicator

log = logging.getLogger(__name__)

BOX_RADII = (10.0, 100.0, 1000.0)


# -- reductions ----------------------------------------------------------------

def as_pwl(f: ConvexFn) -> Optional[PWL1D]:
    """Exact PWL1D form of a one-dimensional function, or None."""
    if f.dim != 1:
        return None
    if isinstance(f, PWL1D):
        return f
    if isinstance(f, IndicatorBox):
        return interval_indicator(float(f.lower[0]), float(f.upper[0]))
    if isinstance(f, SupportBox):
        lo, hi = float(f.lower[0]), float(f.upper[0])
        if lo == -INF and hi == INF:
            return PWL1D([0.0], [-INF, INF], (0.0, 0.0))
        return PWL1D([0.0], [lo, hi], (0.0, 0.0))
    if isinstance(f, PolyhedronIndicator):
        return interval_indicator(*f.interval())
    if isinstance(f, Quadratic):
        lo, hi = f.domain1d()
        if lo == hi:
            return PWL1D([lo], [-INF, INF], (lo, f.value(np.array([lo]))))
        if f.Q[0, 0] == 0.0:
            return PWL1D([], [float(f.b[0])], (0.0, f.c))
        return None
    if isinstance(f, Sum):
        parts = [as_pwl(p) for p in f.parts]
        if any(p is None for p in parts):
            return None
        out = parts[0]
        for p in parts[1:]:
            out = out.add(p)
        return out
    if isinstance(f, Precompose) and f.f.dim == 1:
        inner = as_pwl(f.f)
        return None if inner is None else inner.affine_precompose(f.matrix[0, 0], f.shift[0])
    if isinstance(f, Scaled):
        inner = as_pwl(f.f)
        return None if inner is None else inner.scale(f.c)
    if isinstance(f, ConjugateOf):
        inner = as_pwl(f.h)
        return None if inner is None else inner.conjugate()
    return None


def as_quadratic(f: ConvexFn) -> Optional[Quadratic]:
    """Exact restricted-quadratic form, or None."""
    if isinstance(f, Quadratic):
        return f
    n = f.dim
    if isinstance(f, IndicatorBox):
        free = (f.lower == -INF) & (f.upper == INF)
        fixed = f.lower == f.upper
        if not (free | fixed).all():
            return None
        rows = np.eye(n)[fixed]
        return Quadratic(np.zeros((n, n)), None, 0.0, rows if rows.size else None, f.lower[fixed] if rows.size else None)
    if isinstance(f, SupportBox):
        free = (f.lower == -INF) & (f.upper == INF)
        fixed = f.lower == f.upper
        if not (free | fixed).all():
            return None
        b = np.where(fixed, f.lower, 0.0)
        rows = np.eye(n)[free]
        return Quadratic(np.zeros((n, n)), b, 0.0, rows if rows.size else None, np.zeros(rows.shape[0]) if rows.size else None)
    if isinstance(f, PWL1D):
        if not f.breakpoints:
            return Quadratic([[0.0]], [f.slopes[0]], f.f0 - f.slopes[0] * f.x0)
        if len(f.breakpoints) == 1 and f.slopes == (-INF, INF):
            return point_indicator([f.breakpoints[0]], f.f0)
        return None
    if isinstance(f, Sum):
        parts = [as_quadratic(p) for p in f.parts]
        return None if any(p is None for p in parts) else sum_quadratics(parts)
    if isinstance(f, Precompose):
        inner = as_quadratic(f.f)
        return None if inner is None else precompose_quadratic(inner, f.matrix, f.shift)
    if isinstance(f, Scaled):
        inner = as_quadratic(f.f)
        if inner is None:
            return None
        return Quadratic(f.c * inner.Q, f.c * inner.b, f.c * inner.c,
                         inner.E if inner.constrained else None, inner.e if inner.constrained else None)
    if isinstance(f, ConjugateOf):
        inner = as_quadratic(f.h)
        return None if inner is None else inner.conjugate()
    return None


def split_pwl_quadratic(f: ConvexFn):
    """Write a 1-D function as ``PWL + quadratic``; returns ``(pwl, quad)`` or None."""
    if f.dim != 1:
        return None
    p = as_pwl(f)
    if p is not None:
        return p, None
    q = as_quadratic(f)
    if q is not None:
        return None, q
    if isinstance(f, Sum):
        pw, qs = [], []
        for part in f.parts:
            s = split_pwl_quadratic(part)
            if s is None:
                return None
            if s[0] is not None:
                pw.append(s[0])
            if s[1] is not None:
                qs.append(s[1])
        pwl = None
        for p in pw:
            pwl = p if pwl is None else pwl.add(p)
        return pwl, (sum_quadratics(qs) if qs else None)
    if isinstance(f, Precompose) and f.f.dim == 1:
        s = split_pwl_quadratic(f.f)
        if s is None:
            return None
        a, c = float(f.matrix[0, 0]), float(f.shift[0])
        return (None if s[0] is None else s[0].affine_precompose(a, c),
                None if s[1] is None else precompose_quadratic(s[1], f.matrix, f.shift))
    if isinstance(f, Scaled):
        s = split_pwl_quadratic(f.f)
        if s is None:
            return None
        q = s[1]
        return (None if s[0] is None else s[0].scale(f.c),
                None if q is None else Quadratic(f.c * q.Q, f.c * q.b, f.c * q.c))
    return None


def _min_pwl_plus_quadratic(p: PWL1D, q: Quadratic) -> MinResult:
    """Exact minimizer of ``p + q`` where ``q`` is a 1-D quadratic with positive curvature."""
    a, b = float(q.Q[0, 0]), float(q.b[0])
    if q.constrained:
        lo, hi = q.domain1d()
        return as_pwl(q).add(p).minimize()
    bp, sl = p.breakpoints, p.slopes
    edges = [-INF, *bp, INF]
    best = None
    for k, s in enumerate(sl):
        if np.isfinite(s):
            x = -(b + s) / a
            if edges[k] < x < edges[k + 1]:
                best = x
                break
        if k < len(bp):
            t = bp[k]
            if a * t + b + sl[k] <= 0 <= a * t + b + sl[k + 1]:
                best = t
                break
    if best is None:  # rounding put the stationary point on no piece; take the best candidate
        lo, hi = p.domain1d()
        cands = [t for t in bp] + [min(max(-(b + s) / a, lo), hi) for s in sl if np.isfinite(s)]
        best = min(cands, key=lambda t: p.value(t) + q.value(np.array([t])))
    val = p.value(best) + q.value(np.array([best]))
    return MinResult(val, np.array([best]), True, argmin=Interval(best, best))


# -- numeric fallbacks -------------------------------------------------------------

def _has_sampled(f: ConvexFn) -> bool:
    return any(isinstance(leaf, Sampled1D) for leaf in f.leaves())


def _sampled_scan(f: ConvexFn) -> MinResult:
    """Scan sampled grids plus PWL breakpoints; the boundary heuristic decides attainment."""
    pts: set[float] = set()
    for leaf in f.leaves():
        if isinstance(leaf, Sampled1D):
            pts.update(float(t) for t in leaf.grid)
        elif isinstance(leaf, PWL1D):
            pts.update(leaf.breakpoints)
    if not pts:
        raise NotExactError("nothing to scan")
    # express leaf grids in the caller's coordinates for simple compositions
    if isinstance(f, Precompose):
        a, c = float(f.matrix[0, 0]), float(f.shift[0])
        pts = {(t - c) / a for t in pts} if a != 0 else {0.0}
    grid = np.array(sorted(pts))
    vals = np.array([f.value(np.array([t])) for t in grid])
    if not np.isfinite(vals).any():
        raise ImproperFunctionError("function is +inf on every scanned point")
    k = int(np.argmin(vals))
    w = np.array([grid[k]])
    if grid.size > 1 and k in (0, grid.size - 1):
        nb = 1 if k == 0 else grid.size - 2
        if vals[nb] > vals[k]:
            side = "left" if k == 0 else "right"
            return MinResult(float(vals[k]), w, False, exact=False,
                             note=f"not attained within grid, decreasing toward {side} boundary")
    return MinResult(float(vals[k]), w, True, exact=False, note="grid minimum")


def _has_1d_hooks(f: ConvexFn) -> bool:
    try:
        f.domain1d()
        f.one_sided(0.0)
    except (NotImplementedError, AttributeError):
        return False
    return True


def _bisect(f: ConvexFn, tol: float) -> MinResult:
    lo, hi = f.domain1d()
    if lo > hi:
        raise ImproperFunctionError("empty domain")
    x = min(max(0.0, lo), hi)
    left, right = f.one_sided(x)
    if left <= 0 <= right:
        return MinResult(f.value(np.array([x])), np.array([x]), True, exact=False, argmin=Interval(x, x), note="bisection")
    direction = 1.0 if right < 0 else -1.0
    step, a = 1.0, x
    trace = []
    while True:
        b = a + direction * step
        if direction > 0 and b >= hi:
            b = hi
        if direction < 0 and b <= lo:
            b = lo
        l_b, r_b = f.one_sided(b)
        trace.append((b, f.value(np.array([b]))))
        if (direction > 0 and r_b >= 0) or (direction < 0 and l_b <= 0) or b in (lo, hi):
            break
        if abs(b) > 1e9:
            return _tail_verdict(trace)
        a, step = b, 2 * step
    a, b = (a, b) if a < b else (b, a)
    for _ in range(200):
        if b - a <= tol * (1 + abs(a) + abs(b)) * 1e-3:
            break
        m = 0.5 * (a + b)
        l_m, r_m = f.one_sided(m)
        if r_m < 0:
            a = m
        elif l_m > 0:
            b = m
        else:
            a = b = m
            break
    cands = [a, b, 0.5 * (a + b)]
    w = min(cands, key=lambda t: f.value(np.array([t])))
    return MinResult(f.value(np.array([w])), np.array([w]), True, exact=False, argmin=Interval(w, w), note="bisection")


def _tail_verdict(trace) -> MinResult:
    """Decide between a finite unattained infimum and ``-inf`` from values along a ray."""
    vals = [v for _, v in trace[-3:]]
    d1, d2 = vals[0] - vals[1], vals[1] - vals[2]
    if d1 > 0 and d2 >= 0 and d2 <= 0.5 * d1:
        r = d2 / d1
        est = vals[2] - d2 * r / (1 - r)
        return MinResult(est, None, False, exact=False, note="not attained: decrease vanishes along a ray", trace=trace)
    return MinResult(-INF, None, False, exact=False, note="unbounded below along a ray", trace=trace)


def _solve(prob):
    import cvxpy as cp

    for solver in ("CLARABEL", "SCS"):
        try:
            prob.solve(solver=solver)
            return prob.status
        except cp.error.SolverError:
            continue
    return "solver_error"


def _snap(f: ConvexFn, xv: np.ndarray, v: float):
    """Round a solver point until exact constraints (walls, equalities) accept it."""
    for digits in (None, 12, 10, 8, 6):
        cand = xv if digits is None else np.round(xv, digits) + 0.0
        fv = f.value(cand)
        if np.isfinite(fv) and abs(fv - v) <= 1e-5 * (1 + abs(v)):
            return cand, fv
    return xv, f.value(xv)


def _cvx_minimize(f: ConvexFn, tol: float) -> MinResult:
    import cvxpy as cp

    x = cp.Variable(f.dim)
    try:
        expr, cons = f.cvx(x)
    except NotImplementedError as err:
        raise NotExactError(f"no exact or numeric method for {f!r}: {err}") from err
    prob = cp.Problem(cp.Minimize(expr), cons)
    status = _solve(prob)
    if status in ("infeasible", "infeasible_inaccurate"):
        raise ImproperFunctionError("function is +inf everywhere")
    if status in ("unbounded", "unbounded_inaccurate"):
        return MinResult(-INF, None, False, exact=False, note="conic solver: unbounded below")
    trace = []
    for R in BOX_RADII:
        p = cp.Problem(cp.Minimize(expr), cons + [cp.norm(x, "inf") <= R])
        st = _solve(p)
        if st not in ("optimal", "optimal_inaccurate"):
            raise RuntimeError(f"conic solver failed with status {st}")
        xv = np.asarray(x.value, dtype=float).ravel()
        v = float(p.value)
        trace.append((R, v, xv))
        if np.abs(xv).max(initial=0.0) < 0.9 * R:
            xv, fv = _snap(f, xv, v)
            val = fv if np.isfinite(fv) else v
            return MinResult(val, xv, True, exact=False, note=f"conic solver, interior solution at radius {R:g}", trace=[t[:2] for t in trace])
    r = _tail_verdict([(R, v) for R, v, _ in trace])
    r.trace = [t[:2] for t in trace]
    r.note = "conic solver with box refinement: " + r.note
    return r


# -- entry point -------------------------------------------------------------

def minimize(f: ConvexFn, tol: float = 1e-9) -> MinResult:
    """Infimum of ``f`` with a witness when it is attained."""
    if f.dim == 1 and _has_sampled(f):
        try:
            return _sampled_scan(f)
        except NotExactError:
            pass
    p = as_pwl(f)
    if p is not None:
        return p.minimize()
    s = split_pwl_quadratic(f)
    if s is not None and s[0] is not None and s[1] is not None and s[1].Q[0, 0] > 0:
        return _min_pwl_plus_quadratic(s[0], s[1])
    q = as_quadratic(f)
    if q is not None:
        return q.minimize()
    if hasattr(f, "minimize") and not isinstance(f, (Sum, Precompose, Scaled, ConjugateOf)):
        return f.minimize()
    if f.dim == 1 and _has_1d_hooks(f):
        return _bisect(f, tol)
    return _cvx_minimize(f, tol)
