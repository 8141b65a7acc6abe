"""Convex quadratics restricted to affine subspaces.

``Quadratic(Q, b, c, E, e)`` is ``x -> 0.5 x'Qx + b'x + c`` on ``{x: E x = e}``
and ``+inf`` elsewhere.  The family contains affine functions, points and
ordinary quadratics and is closed under conjugation, which keeps
biconjugation exact up to rounding.
"""
from __future__ import annotations


import numpy as np
from scipy import linalg

from .base import INF, ConvexFn, ImproperFunctionError, Interval, MinResult, as_vec

RTOL = 1e-9


class DegenerateQuadraticError(ValueError):
    """Singular quadratic whose linear term leaves the range of Q."""


def _null_space(m: np.ndarray, n: int) -> np.ndarray:
    if m.size == 0:
        return np.eye(n)
    return linalg.null_space(m, rcond=1e-12)


class Quadratic(ConvexFn):
    exact = True

    def __init__(self, Q, b=None, c: float = 0.0, E=None, e=None):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        n = Q.shape[0]
        if Q.shape != (n, n):
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, rtol=RTOL, atol=RTOL):
            raise ValueError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        if n and np.linalg.eigvalsh(Q).min() < -RTOL * max(1.0, np.abs(Q).max()):
            raise ValueError("Q must be positive semidefinite")
        self.Q = Q
        self.b = np.zeros(n) if b is None else as_vec(b, n)
        self.c = float(c)
        if not (np.all(np.isfinite(self.Q)) and np.all(np.isfinite(self.b)) and np.isfinite(self.c)):
            raise ValueError("quadratic coefficients must be finite")
        if E is None:
            self.E, self.e = np.zeros((0, n)), np.zeros(0)
        else:
            self.E = np.atleast_2d(np.asarray(E, dtype=float)).reshape(-1, n)
            self.e = as_vec(e, self.E.shape[0])
        self.dim = n
        self._setup()

    def _setup(self):
        n = self.dim
        if self.E.shape[0]:
            x0, *_ = np.linalg.lstsq(self.E, self.e, rcond=None)
            if np.linalg.norm(self.E @ x0 - self.e) > 1e-8 * (1 + np.linalg.norm(self.e)):
                raise ImproperFunctionError("the affine constraint set is empty")
        else:
            x0 = np.zeros(n)
        self._x0 = x0
        self._B = _null_space(self.E, n)

    @property
    def constrained(self) -> bool:
        return self.E.shape[0] > 0

    def _feasible(self, x) -> bool:
        if not self.constrained:
            return True
        r = self.E @ x - self.e
        return float(np.abs(r).max()) <= RTOL * (1.0 + float(np.abs(self.e).max()) + float(np.abs(x).max()))

    def value(self, x):
        if not self._feasible(x):
            return INF
        return float(0.5 * x @ self.Q @ x + self.b @ x + self.c)

    def gradient(self, x) -> np.ndarray:
        x = as_vec(x, self.dim)
        return self.Q @ x + self.b

    # one-dimensional hooks
    def one_sided(self, x):
        x = float(np.ravel(x)[0])
        lo, hi = self.domain1d()
        if x < lo:
            return -INF, -INF
        if x > hi:
            return INF, INF
        if lo == hi:
            return -INF, INF
        g = float(self.Q[0, 0] * x + self.b[0])
        return g, g

    def domain1d(self):
        if self.dim != 1:
            raise NotImplementedError("domain1d needs dim 1")
        if self.constrained and self._B.shape[1] == 0:
            p = float(self._x0[0])
            return p, p
        return -INF, INF

    def subdifferential_at(self, x) -> Interval:
        """For ``dim == 1``: the subdifferential interval."""
        if self.value(as_vec(x, self.dim)) == INF:
            return Interval.empty_set()
        lo, hi = self.one_sided(x)
        return Interval(lo, hi)

    # reduced form on the affine subspace x = x0 + B z
    def reduced(self):
        B, x0 = self._B, self._x0
        M = B.T @ self.Q @ B
        m = B.T @ (self.Q @ x0 + self.b)
        k = float(0.5 * x0 @ self.Q @ x0 + self.b @ x0 + self.c)
        return B, x0, 0.5 * (M + M.T), m, k

    def is_degenerate(self) -> bool:
        """True for an unconstrained, nonzero, singular Q with ``b`` outside its range."""
        if self.constrained or not np.any(self.Q):
            return False
        N = _null_space(self.Q, self.dim)
        return N.shape[1] > 0 and np.linalg.norm(N.T @ self.b) > RTOL * (1 + np.linalg.norm(self.b))

    def conjugate(self, strict: bool = False) -> "Quadratic":
        if strict and self.is_degenerate():
            raise DegenerateQuadraticError(
                "singular Q with b outside range(Q): the function is affine and unbounded along "
                "null(Q); pass strict=False for the exact conjugate restricted to b + range(Q)")
        B, x0, M, m, k = self.reduced()
        Mp = np.linalg.pinv(M, rcond=1e-12, hermitian=True) if M.size else M
        N = _null_space(M, M.shape[0]) if M.size else np.zeros((0, 0))
        Qc = B @ Mp @ B.T
        bc = x0 - B @ (Mp @ m)
        cc = float(0.5 * m @ Mp @ m - k)
        Ec = (B @ N).T if N.size else np.zeros((0, self.dim))
        ec = N.T @ m if N.size else np.zeros(0)
        return Quadratic(Qc, bc, cc, Ec if Ec.shape[0] else None, ec if Ec.shape[0] else None)

    def minimize(self) -> MinResult:
        B, x0, M, m, k = self.reduced()
        if M.size == 0:
            return MinResult(k, x0.copy(), True, argmin=_point_interval(x0))
        Mp = np.linalg.pinv(M, rcond=1e-12, hermitian=True)
        z = -Mp @ m
        if np.linalg.norm(M @ z + m) > 1e-9 * (1 + np.linalg.norm(m)):
            return MinResult(-INF, None, False, note="unbounded below along a flat direction")
        x = x0 + B @ z
        val = float(k - 0.5 * m @ Mp @ m)
        argmin = None
        if self.dim == 1:
            flat = _null_space(M, M.shape[0]).shape[1] > 0
            argmin = Interval(-INF, INF) if flat else _point_interval(x)
        return MinResult(val, x, True, argmin=argmin)

    def canonical(self):
        """Data that determine the function: projector, base point, reduced coefficients."""
        P = self._B @ self._B.T
        x0 = self._x0
        return P, x0, P @ self.Q @ P, P @ (self.Q @ x0 + self.b), self.value(x0)

    def same_function(self, other: "Quadratic", rtol: float = RTOL) -> bool:
        if self.dim != other.dim:
            return False
        for a, b in zip(self.canonical(), other.canonical()):
            a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
            if np.abs(a - b).max(initial=0.0) > rtol * (1.0 + max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))):
                return False
        return True

    def cvx(self, var):
        import cvxpy as cp

        w, V = np.linalg.eigh(self.Q)
        keep = w > RTOL * max(1.0, float(np.abs(w).max(initial=0.0)))
        L = V[:, keep] * np.sqrt(w[keep])
        expr = self.b @ var + self.c
        if keep.any():
            expr = expr + 0.5 * cp.sum_squares(L.T @ var)
        cons = [self.E @ var == self.e] if self.constrained else []
        return expr, cons

    def restrict(self, E, e) -> "Quadratic":
        E = np.atleast_2d(np.asarray(E, dtype=float)).reshape(-1, self.dim)
        return Quadratic(self.Q, self.b, self.c, np.vstack([self.E, E]), np.concatenate([self.e, np.ravel(e)]))

    def __repr__(self):
        s = f"Quadratic(Q={self.Q.tolist()}, b={self.b.tolist()}, c={self.c}"
        if self.constrained:
            s += f", E={self.E.tolist()}, e={self.e.tolist()}"
        return s + ")"


def _point_interval(x):
    if np.size(x) == 1:
        p = float(np.ravel(x)[0])
        return Interval(p, p)
    return None


class Affine(Quadratic):
    """``x -> a'x + beta``."""

    def __init__(self, a, beta: float = 0.0):
        a = np.atleast_1d(np.asarray(a, dtype=float)).ravel()
        super().__init__(np.zeros((a.size, a.size)), a, beta)

    @property
    def slope(self) -> np.ndarray:
        return self.b

    def __repr__(self):
        return f"Affine({self.b.tolist()}, {self.c})"


def point_indicator(p, value: float = 0.0) -> Quadratic:
    """``value`` at ``p`` and ``+inf`` elsewhere."""
    p = np.atleast_1d(np.asarray(p, dtype=float)).ravel()
    n = p.size
    return Quadratic(np.zeros((n, n)), np.zeros(n), value, np.eye(n), p)


def sum_quadratics(parts) -> Quadratic:
    parts = list(parts)
    Q = sum(p.Q for p in parts)
    b = sum(p.b for p in parts)
    c = sum(p.c for p in parts)
    Es = [p.E for p in parts if p.constrained]
    es = [p.e for p in parts if p.constrained]
    if Es:
        return Quadratic(Q, b, c, np.vstack(Es), np.concatenate(es))
    return Quadratic(Q, b, c)


def precompose_quadratic(q: Quadratic, M, s) -> Quadratic:
    """``x -> q(M x + s)``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    s = np.asarray(s, dtype=float).ravel()
    Q = M.T @ q.Q @ M
    b = M.T @ (q.Q @ s + q.b)
    c = float(0.5 * s @ q.Q @ s + q.b @ s + q.c)
    if q.constrained:
        return Quadratic(Q, b, c, q.E @ M, q.e - q.E @ s)
    return Quadratic(Q, b, c)
