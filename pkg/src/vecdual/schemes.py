"""Fenchel and Fenchel-Lagrange duality schemes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .convex import (INF, ConvexFn, ImproperFunctionError, IndicatorBox, PolyhedronIndicator, PolyhedronSupport,
                     SupportBox, as_pwl)
from .duality import (CompositePerturbation, DualityReport, FLPerturbation, FeasibilityError, duality_report,
                      primal_conjugate, _dual_min)
from .measure import MeasureSpace, Partition, ext_add
from .scenario import L0Point, ScenarioFn


@dataclass(frozen=True)
class LinearOp:
    matrix: np.ndarray

    def __init__(self, matrix):
        object.__setattr__(self, "matrix", np.atleast_2d(np.asarray(matrix, dtype=float)))

    @property
    def shape(self):
        return self.matrix.shape

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.ravel(x)

    def adjoint(self) -> "LinearOp":
        return LinearOp(self.matrix.T)

    def apply_adjoint(self, w) -> np.ndarray:
        return self.matrix.T @ np.ravel(w)


# -- constraint sets ------------------------------------------------------------

class ConstraintSet:
    dim: int

    def indicator(self) -> ConvexFn:
        raise NotImplementedError

    def support(self) -> ConvexFn:
        raise NotImplementedError

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        return self.indicator().value(x) == 0.0


class Box(ConstraintSet):
    def __init__(self, lower, upper):
        self._ind = IndicatorBox(lower, upper)
        self.lower, self.upper, self.dim = self._ind.lower, self._ind.upper, self._ind.dim

    def indicator(self):
        return self._ind

    def support(self):
        return SupportBox(self.lower, self.upper)

    def __repr__(self):
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"


class Halfspaces(ConstraintSet):
    """``{x : A x <= b, Aeq x = beq}``."""

    def __init__(self, A=None, b=None, Aeq=None, beq=None, dim=None):
        try:
            self._ind = PolyhedronIndicator(A, b, Aeq, beq, dim)
        except ImproperFunctionError as err:
            raise FeasibilityError("the constraint set is empty") from err
        self.dim = self._ind.dim

    @property
    def A(self):
        return self._ind.A

    @property
    def b(self):
        return self._ind.b

    @property
    def Aeq(self):
        return self._ind.Aeq

    @property
    def beq(self):
        return self._ind.beq

    def indicator(self):
        return self._ind

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self._ind.contains(x, tol)

    def support(self):
        return PolyhedronSupport(self.A, self.b, self.Aeq, self.beq, self.dim)

    def intersect(self, other: "Halfspaces") -> "Halfspaces":
        return Halfspaces(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]),
                          np.vstack([self.Aeq, other.Aeq]), np.concatenate([self.beq, other.beq]), self.dim)


class ConeSupport(ConvexFn):
    """Support function of ``{x : E[x | block] >= threshold}``.

    Finite only on ``y = -lambda_B * p`` blockwise with ``lambda_B >= 0``, where
    it equals ``-threshold * sum_B lambda_B p(B)``.
    """

    exact = True

    def __init__(self, probs: np.ndarray, partition: Partition, threshold: float, tol: float = 1e-9):
        self.probs, self.partition, self.threshold, self.tol = probs, partition, float(threshold), tol
        self.dim = probs.size

    def multipliers(self, y) -> Optional[np.ndarray]:
        y = np.asarray(y, dtype=float)
        lam = []
        for idx in self.partition.blocks():
            p = self.probs[idx]
            c = float(y[idx] @ p / (p @ p))
            if np.abs(y[idx] - c * p).max() > self.tol * (1 + np.abs(y[idx]).max()) or c > self.tol:
                return None
            lam.append(max(-c, 0.0))
        return np.array(lam)

    def value(self, y):
        lam = self.multipliers(y)
        if lam is None:
            return INF
        mass = np.array([self.probs[idx].sum() for idx in self.partition.blocks()])
        return float(-self.threshold * lam @ mass) if self.threshold != 0 else 0.0

    def cvx(self, var):
        import cvxpy as cp

        blocks = self.partition.blocks()
        lam = cp.Variable(len(blocks), nonneg=True)
        cons = []
        for k, idx in enumerate(blocks):
            cons.append(var[idx] == -lam[k] * self.probs[idx])
        mass = np.array([self.probs[idx].sum() for idx in blocks])
        return -self.threshold * (mass @ lam), cons

    def __repr__(self):
        return f"ConeSupport(blocks={self.partition.block_count}, threshold={self.threshold})"


class ConditionalExpectationCone(ConstraintSet):
    """``{x in R^N : E[x | block] >= threshold}`` for a partition of the atoms."""

    def __init__(self, space: MeasureSpace, partition: Partition, threshold: float = 0.0):
        if partition.atom_count != space.atom_count:
            raise ValueError("partition and space have different atom counts")
        self.space, self.partition, self.threshold = space, partition, float(threshold)
        self.dim = space.atom_count
        self.probs = space.as_array()

    def rows(self):
        A, b = [], []
        for idx in self.partition.blocks():
            row = np.zeros(self.dim)
            row[idx] = -self.probs[idx]
            A.append(row)
            b.append(-self.threshold * self.probs[idx].sum())
        return np.array(A), np.array(b)

    def as_halfspaces(self) -> Halfspaces:
        A, b = self.rows()
        return Halfspaces(A, b)

    def indicator(self):
        A, b = self.rows()
        return PolyhedronIndicator(A, b)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.indicator().contains(x, tol)

    def support(self):
        return ConeSupport(self.probs, self.partition, self.threshold)

    def __repr__(self):
        return f"ConditionalExpectationCone(blocks={self.partition.block_count}, threshold={self.threshold})"


def support_function(S: ConstraintSet) -> ConvexFn:
    """``y -> sup_{x in S} <x, y>``."""
    return S.support()


# -- Fenchel scheme ---------------------------------------------------------------

def _as_op(A) -> np.ndarray:
    return A.matrix if isinstance(A, LinearOp) else np.atleast_2d(np.asarray(A, dtype=float))


def _surface(phi, grid, lhs_fn):
    rows = []
    for y in grid:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lhs, rhs, att = [], [], []
        for i in range(phi.atom_count):
            lhs.append(lhs_fn(i, y))
            r = _dual_min(phi, i, y)
            rhs.append(r.value)
            att.append(bool(r.attained) or r.value == INF)
        rows.append({"y": y.tolist(), "lhs": lhs, "rhs": rhs, "attained": att})
    return rows


def _scheme_grid(phi, parts) -> list:
    if phi.dx != 1:
        return [np.zeros(phi.dx)]
    pts: set[float] = {0.0}
    for fn in parts:
        p = as_pwl(fn)
        if p is not None:
            pts.update(p.breakpoints)
    srt = sorted(pts)
    mids = [0.5 * (a + b) for a, b in zip(srt[:-1], srt[1:])]
    return [np.array([t]) for t in sorted(set(srt) | set(mids))]


def fenchel_dual_solve(f: ScenarioFn, g: ScenarioFn, A, tol: float = 1e-9, x_grid=None) -> DualityReport:
    """``inf_x f(x) + g(A x)`` against ``sup_w -f*(-A' w) - g*(w)``, atom by atom."""
    phi = CompositePerturbation(f, g, _as_op(A))
    rep = duality_report(phi, tol)
    if x_grid is None:
        parts = []
        for i in range(len(f)):
            parts.append(f.conjugate_components()[i])
            parts.append(g.conjugate_components()[i])
        x_grid = _scheme_grid(phi, parts)
    rep.surface = {"kind": "fenchel", "rows": _surface(phi, x_grid, lambda i, y: -primal_conjugate(phi, i, y).value)}
    return rep


@dataclass
class CertificateCheck:
    ok: bool
    residuals: list  # per atom: (first condition, second condition)
    diagnostics: list = field(default_factory=list)


def fenchel_optimality_check(f: ScenarioFn, g: ScenarioFn, A, x_bar, w_star, tol: float = 1e-9) -> CertificateCheck:
    """``f(x) + f*(-A'w) = -<Ax, w>`` and ``g(Ax) + g*(w) = <Ax, w>`` on every atom."""
    M = _as_op(A)
    x = np.atleast_1d(np.asarray(x_bar, dtype=float)).ravel()
    W = w_star.coords if isinstance(w_star, L0Point) else np.asarray(w_star, dtype=float).reshape(len(f), -1)
    Ax = M @ x
    out, diags = [], []
    for i in range(len(f)):
        w = W[i]
        r1 = ext_add(ext_add(f[i].value(x), f.conjugate_components()[i].value(-M.T @ w)), float(Ax @ w))
        r2 = ext_add(ext_add(g[i].value(Ax), g.conjugate_components()[i].value(w)), -float(Ax @ w))
        out.append((r1, r2))
        if not (np.isfinite(r1) and abs(r1) <= tol and np.isfinite(r2) and abs(r2) <= tol):
            diags.append(f"atom {i}: residuals ({r1!r}, {r2!r})")
    return CertificateCheck(not diags, out, diags)


# -- Fenchel-Lagrange scheme ---------------------------------------------------------

def fenchel_lagrange_solve(f: ScenarioFn, S: ConstraintSet, tol: float = 1e-9, y_grid=None) -> DualityReport:
    """``inf_{x in S} f(x)`` against ``sup_v -f*(v) - sigma_S(-v)``, atom by atom."""
    phi = FLPerturbation(f, S)
    rep = duality_report(phi, tol)
    if y_grid is None:
        parts = [f.conjugate_components()[i] for i in range(len(f))] + [S.support()]
        y_grid = _scheme_grid(phi, parts)
    rep.surface = {"kind": "fenchel-lagrange", "rows": _surface(phi, y_grid, lambda i, y: -primal_conjugate(phi, i, y).value)}
    return rep


def fl_optimality_check(f: ScenarioFn, S: ConstraintSet, x_bar, v_bar, tol: float = 1e-9) -> CertificateCheck:
    """``f(x) + f*(v) = <x, v>`` and ``sigma_S(-v) = -<x, v>`` on every atom, with ``x`` in ``S``."""
    x = np.atleast_1d(np.asarray(x_bar, dtype=float)).ravel()
    if not S.contains(x):
        return CertificateCheck(False, [], ["x_bar is not in S"])
    V = v_bar.coords if isinstance(v_bar, L0Point) else np.asarray(v_bar, dtype=float).reshape(len(f), -1)
    sup = S.support()
    out, diags = [], []
    for i in range(len(f)):
        v = V[i]
        r1 = ext_add(ext_add(f[i].value(x), f.conjugate_components()[i].value(v)), -float(x @ v))
        r2 = ext_add(sup.value(-v), float(x @ v))
        out.append((r1, r2))
        if not (np.isfinite(r1) and abs(r1) <= tol and np.isfinite(r2) and abs(r2) <= tol):
            diags.append(f"atom {i}: residuals ({r1!r}, {r2!r})")
    return CertificateCheck(not diags, out, diags)
