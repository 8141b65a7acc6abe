"""Closed convex functions with known conjugates that fall outside the PWL/quadratic/box classes."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp, xlogy

from .base import INF, ConvexFn, ImproperFunctionError, Precompose, as_vec

FEAS_TOL = 1e-9


class HyperbolaIndicator(ConvexFn):
    """Indicator of ``C = {(a, b): a > 0, a * b >= 1}``, the closed convex hull of the hyperbola."""

    dim = 2
    exact = True

    def value(self, x):
        a, b = float(x[0]), float(x[1])
        return 0.0 if a > 0 and a * b >= 1.0 - FEAS_TOL else INF

    def conjugate(self):
        return HyperbolaSupport()

    def cvx(self, var):
        import cvxpy as cp

        return 0.0 * var[0], [var[1] >= cp.inv_pos(var[0])]

    def __repr__(self):
        return "HyperbolaIndicator()"


class HyperbolaSupport(ConvexFn):
    """Support function of the hyperbola region: ``-2 sqrt(u1 u2)`` on the nonpositive quadrant."""

    dim = 2
    exact = True

    def value(self, u):
        u1, u2 = float(u[0]), float(u[1])
        if u1 > 0 or u2 > 0:
            return INF
        return -2.0 * float(np.sqrt(max(u1 * u2, 0.0)))

    def conjugate(self):
        return HyperbolaIndicator()

    def cvx(self, var):
        import cvxpy as cp

        return -2.0 * cp.geo_mean(cp.hstack([-var[0], -var[1]])), [var <= 0]

    def __repr__(self):
        return "HyperbolaSupport()"


def _probs(p):
    p = np.atleast_1d(np.asarray(p, dtype=float)).ravel()
    if p.size == 0 or (p <= 0).any() or not np.isfinite(p).all():
        raise ValueError("probabilities must be positive and finite")
    return p / p.sum()


class EntropicRisk(ConvexFn):
    """``x -> (1/gamma) log sum_j p_j exp(-gamma x_j)``."""

    exact = True

    def __init__(self, probs, gamma: float):
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        self.probs, self.gamma = _probs(probs), float(gamma)
        self.dim = self.probs.size

    def value(self, x):
        return float(logsumexp(-self.gamma * np.asarray(x, dtype=float), b=self.probs) / self.gamma)

    def conjugate(self):
        return RelativeEntropy(self.probs, self.gamma)

    def cvx(self, var):
        import cvxpy as cp

        return cp.log_sum_exp(-self.gamma * var + np.log(self.probs)) / self.gamma, []

    def __repr__(self):
        return f"EntropicRisk({self.probs.tolist()}, {self.gamma})"


class RelativeEntropy(ConvexFn):
    """Conjugate of :class:`EntropicRisk`: ``(1/gamma) KL(-y || p)`` on the negative simplex."""

    exact = True

    def __init__(self, probs, gamma: float):
        self.probs, self.gamma = _probs(probs), float(gamma)
        self.dim = self.probs.size

    def value(self, y):
        q = -np.asarray(y, dtype=float)
        if (q < -FEAS_TOL).any() or abs(q.sum() - 1.0) > FEAS_TOL * self.dim:
            return INF
        q = np.clip(q, 0.0, None)
        return float(np.sum(xlogy(q, q) - xlogy(q, self.probs)) / self.gamma)

    def conjugate(self):
        return EntropicRisk(self.probs, self.gamma)

    def cvx(self, var):
        import cvxpy as cp

        return cp.sum(cp.rel_entr(-var, self.probs)) / self.gamma, [cp.sum(var) == -1]

    def __repr__(self):
        return f"RelativeEntropy({self.probs.tolist()}, {self.gamma})"


class CVaRRisk(ConvexFn):
    """Conditional value at risk at tail level ``alpha`` of the loss ``-x``.

    ``rho(x) = max {<q, -x> : 0 <= q <= p / alpha, sum q = 1}``.
    """

    exact = True

    def __init__(self, probs, alpha: float):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.probs, self.alpha = _probs(probs), float(alpha)
        self.dim = self.probs.size

    def envelope_weights(self, x) -> np.ndarray:
        """A maximizing density in the risk envelope (greedy over sorted losses)."""
        loss = -np.asarray(x, dtype=float)
        order = np.argsort(-loss, kind="stable")
        q = np.zeros(self.dim)
        left = 1.0
        for j in order:
            take = min(self.probs[j] / self.alpha, left)
            q[j] = take
            left -= take
            if left <= 0:
                break
        return q

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.envelope_weights(x) @ (-x))

    def conjugate(self):
        n = self.dim
        # y = -q with q in the envelope
        A = np.vstack([np.eye(n), -np.eye(n)])
        b = np.concatenate([np.zeros(n), self.probs / self.alpha])
        return PolyhedronIndicator(A, b, np.ones((1, n)), [-1.0])

    def cvx(self, var):
        import cvxpy as cp

        t = cp.Variable()
        return t + cp.sum(cp.multiply(self.probs, cp.pos(-var - t))) / self.alpha, []

    def __repr__(self):
        return f"CVaRRisk({self.probs.tolist()}, {self.alpha})"


def _poly_data(A, b, Aeq, beq, dim=None):
    A = None if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    Aeq = None if Aeq is None else np.atleast_2d(np.asarray(Aeq, dtype=float))
    n = dim or (A.shape[1] if A is not None else Aeq.shape[1])
    A = np.zeros((0, n)) if A is None else A.reshape(-1, n)
    Aeq = np.zeros((0, n)) if Aeq is None else Aeq.reshape(-1, n)
    b = np.asarray(b if b is not None else [], dtype=float).ravel()
    beq = np.asarray(beq if beq is not None else [], dtype=float).ravel()
    if b.size != A.shape[0] or beq.size != Aeq.shape[0]:
        raise ValueError("constraint rows and right-hand sides differ in length")
    return A, b, Aeq, beq, n


def _lp(c, A, b, Aeq, beq):
    kw = {}
    if A.shape[0]:
        kw.update(A_ub=A, b_ub=b)
    if Aeq.shape[0]:
        kw.update(A_eq=Aeq, b_eq=beq)
    return linprog(c, bounds=[(None, None)] * len(c), method="highs", **kw)


class PolyhedronIndicator(ConvexFn):
    """Indicator of ``{x : A x <= b, Aeq x = beq}``."""

    exact = True

    def __init__(self, A=None, b=None, Aeq=None, beq=None, dim=None):
        self.A, self.b, self.Aeq, self.beq, self.dim = _poly_data(A, b, Aeq, beq, dim)
        res = _lp(np.zeros(self.dim), self.A, self.b, self.Aeq, self.beq)
        if res.status == 2:
            raise ImproperFunctionError("the polyhedron is empty")

    def contains(self, x, tol: float = FEAS_TOL) -> bool:
        x = as_vec(x, self.dim)
        scale = 1.0 + float(np.abs(x).max(initial=0.0))
        if self.A.shape[0] and (self.A @ x - self.b).max() > tol * scale:
            return False
        if self.Aeq.shape[0] and np.abs(self.Aeq @ x - self.beq).max() > tol * scale:
            return False
        return True

    def value(self, x):
        return 0.0 if self.contains(x) else INF

    def conjugate(self):
        return PolyhedronSupport(self.A, self.b, self.Aeq, self.beq, self.dim)

    def interval(self) -> tuple[float, float]:
        """For ``dim == 1``: the interval the polyhedron describes."""
        lo, hi = -INF, INF
        for (a,), r in zip(self.A, self.b):
            if a > 0:
                hi = min(hi, r / a)
            elif a < 0:
                lo = max(lo, r / a)
        for (a,), r in zip(self.Aeq, self.beq):
            if a != 0:
                lo, hi = max(lo, r / a), min(hi, r / a)
        return lo, hi

    def cvx(self, var):
        cons = []
        if self.A.shape[0]:
            cons.append(self.A @ var <= self.b)
        if self.Aeq.shape[0]:
            cons.append(self.Aeq @ var == self.beq)
        return 0.0 * var[0], cons

    def __repr__(self):
        return f"PolyhedronIndicator(A={self.A.tolist()}, b={self.b.tolist()}, Aeq={self.Aeq.tolist()}, beq={self.beq.tolist()})"


class PolyhedronSupport(ConvexFn):
    """``y -> sup {<x, y> : A x <= b, Aeq x = beq}`` by linear programming."""

    exact = True

    def __init__(self, A=None, b=None, Aeq=None, beq=None, dim=None):
        self.A, self.b, self.Aeq, self.beq, self.dim = _poly_data(A, b, Aeq, beq, dim)
        if _lp(np.zeros(self.dim), self.A, self.b, self.Aeq, self.beq).status == 2:
            raise ImproperFunctionError("the polyhedron is empty")

    def value(self, y):
        y = np.asarray(y, dtype=float)
        res = _lp(-y, self.A, self.b, self.Aeq, self.beq)
        if res.status == 3:
            return INF
        if res.status != 0:
            raise RuntimeError(f"linear program failed: {res.message}")
        return float(-res.fun)

    def maximizer(self, y) -> np.ndarray:
        res = _lp(-np.asarray(y, dtype=float), self.A, self.b, self.Aeq, self.beq)
        return None if res.status != 0 else res.x

    def conjugate(self):
        return PolyhedronIndicator(self.A, self.b, self.Aeq, self.beq, self.dim)

    def cvx(self, var):
        import cvxpy as cp

        # LP duality: sigma(y) = min {b'l + beq'm : A'l + Aeq'm = y, l >= 0}
        expr, lhs, cons = 0.0, 0.0, []
        if self.A.shape[0]:
            lam = cp.Variable(self.A.shape[0], nonneg=True)
            expr, lhs = expr + self.b @ lam, lhs + self.A.T @ lam
        if self.Aeq.shape[0]:
            mu = cp.Variable(self.Aeq.shape[0])
            expr, lhs = expr + self.beq @ mu, lhs + self.Aeq.T @ mu
        if isinstance(lhs, float):
            return 0.0 * var[0], [var == 0]
        return expr, cons + [lhs == var]

    def __repr__(self):
        return f"PolyhedronSupport(A={self.A.tolist()}, b={self.b.tolist()}, Aeq={self.Aeq.tolist()}, beq={self.beq.tolist()})"


class ComposedConjugate(ConvexFn):
    """Conjugate of ``x -> h(M x + s)`` for ``M`` with full row rank.

    Equals ``h*(z) - <s, z>`` at the unique ``z`` with ``M' z = y`` and ``+inf``
    when ``y`` is outside the range of ``M'``.
    """

    exact = True

    def __init__(self, h_conj: ConvexFn, matrix, shift, original: ConvexFn | None = None):
        self.hc = h_conj
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.shift = np.asarray(shift, dtype=float).ravel()
        self.dim = self.matrix.shape[1]
        self.original = original
        self._pinv = np.linalg.pinv(self.matrix.T)

    def _z(self, y):
        z = self._pinv @ y
        if np.abs(self.matrix.T @ z - y).max(initial=0.0) > FEAS_TOL * (1.0 + np.abs(y).max(initial=0.0)):
            return None
        return z

    def value(self, y):
        z = self._z(np.asarray(y, dtype=float))
        if z is None:
            return INF
        v = self.hc.value(z)
        return v if v == INF else float(v - self.shift @ z)

    def conjugate(self):
        if self.original is not None:
            return self.original
        return Precompose(self.hc.conjugate(), self.matrix, self.shift)

    def cvx(self, var):
        import cvxpy as cp

        z = cp.Variable(self.matrix.shape[0])
        e, cons = self.hc.cvx(z)
        return e - self.shift @ z, cons + [self.matrix.T @ z == var]

    def __repr__(self):
        return f"ComposedConjugate({self.hc!r}, {self.matrix.tolist()}, {self.shift.tolist()})"
