"""Kernel integral operators, conditional risk measures and the constrained portfolio problem."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .convex import (ConvexFn, CVaRRisk, EntropicRisk, Precompose, Scaled, Sum, as_pwl, as_quadratic)
from .convex.quadratic import sum_quadratics
from .measure import MeasureSpace, Partition, make_space
from .scenario import ScenarioFn
from .schemes import ConditionalExpectationCone, ConstraintSet, Halfspaces


@dataclass
class KernelTable:
    """Kernels ``k[i][j]`` for outer atom ``i`` and inner atom ``j`` with inner weights ``nu``."""

    outer: MeasureSpace
    nu: Sequence[float]
    kernels: Sequence[Sequence[ConvexFn]]

    def __post_init__(self):
        self.nu = tuple(float(v) for v in self.nu)
        if any(not (v > 0 and np.isfinite(v)) for v in self.nu):
            raise ValueError("inner weights must be positive and finite")
        if len(self.kernels) != self.outer.atom_count:
            raise ValueError("need one kernel row per outer atom")
        for i, row in enumerate(self.kernels):
            if len(row) != len(self.nu):
                raise ValueError(f"kernel row {i} has {len(row)} entries, expected {len(self.nu)}")
            if any(k.dim != 1 for k in row):
                raise ValueError("kernels act on R")


def _weighted_sum(row: Sequence[ConvexFn], nu: Sequence[float]):
    pw = [as_pwl(k) for k in row]
    if all(p is not None for p in pw):
        out = None
        for p, w in zip(pw, nu):
            p = p.scale(w)
            out = p if out is None else out.add(p)
        return out, None
    qs = [as_quadratic(k) for k in row]
    if all(q is not None for q in qs):
        from .convex import Quadratic

        return sum_quadratics([Quadratic(w * q.Q, w * q.b, w * q.c, q.E if q.constrained else None,
                                         q.e if q.constrained else None) for q, w in zip(qs, nu)]), None
    msg = "mixed kernel variants: the sum is kept as a lazy composite with numeric minimization"
    return Sum([Scaled(k, w) for k, w in zip(row, nu)]), msg


def integral_operator(K: KernelTable) -> ScenarioFn:
    """Component ``i`` is ``x -> sum_j nu_j k_ij(x)``; exact when all kernels of a row share a family."""
    comps, notes = [], []
    for i, row in enumerate(K.kernels):
        fn, msg = _weighted_sum(row, K.nu)
        comps.append(fn)
        if msg:
            notes.append(f"atom {i}: {msg}")
            warnings.warn(msg, stacklevel=2)
    F = ScenarioFn(K.outer, comps)
    F.notes = notes
    return F


@dataclass
class RiskSpec:
    """A conditional risk measure on a probability space with block structure."""

    kind: str
    level: float
    partition: Partition
    space: MeasureSpace
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("cvar", "entropic"):
            raise ValueError(f"unknown risk kind {self.kind!r}")
        if self.kind == "cvar" and not 0 < self.level < 1:
            raise ValueError("cvar level must lie in (0, 1)")
        if self.kind == "entropic" and not self.level > 0:
            raise ValueError("entropic gamma must be positive")
        if not self.space.is_probability(1e-9):
            raise ValueError("the underlying weights must sum to 1")
        if self.partition.atom_count != self.space.atom_count:
            raise ValueError("partition and space have different atom counts")


def risk_component(spec: RiskSpec, block: np.ndarray) -> ConvexFn:
    probs = spec.space.as_array()[block]
    inner = CVaRRisk(probs, spec.level) if spec.kind == "cvar" else EntropicRisk(probs, spec.level)
    select = np.eye(spec.space.atom_count)[block]
    return Precompose(inner, select)


def conditional_risk(spec: RiskSpec) -> ScenarioFn:
    """Block ``B`` gets the risk of ``x`` restricted to ``B`` under the block-conditional probability."""
    blocks = spec.partition.blocks()
    probs = spec.space.as_array()
    block_space = make_space([float(probs[b].sum()) for b in blocks])
    return ScenarioFn(block_space, [risk_component(spec, b) for b in blocks])


def portfolio_instance(spec: RiskSpec, payoff_cap: Optional[float] = None) -> tuple[ScenarioFn, ConstraintSet]:
    """Risk minimization over ``{x : E[x | block] >= 0}``, optionally with ``x <= payoff_cap``.

    Without the cap the risk is unbounded below along constant payoffs; the cap
    gives a finite problem with the same constraint structure.
    """
    f = conditional_risk(spec)
    S: ConstraintSet = ConditionalExpectationCone(spec.space, spec.partition, 0.0)
    if payoff_cap is not None:
        n = spec.space.atom_count
        cap = Halfspaces(np.eye(n), np.full(n, float(payoff_cap)))
        S = S.as_halfspaces().intersect(cap)
    return f, S


def cvar_envelope_indicator(probs, alpha: float, y, tol: float = 1e-9) -> float:
    """Indicator of ``{y : -y in risk envelope}`` evaluated directly."""
    q = -np.asarray(y, dtype=float)
    p = np.asarray(probs, dtype=float)
    p = p / p.sum()
    ok = (q >= -tol).all() and (q <= p / alpha + tol).all() and abs(q.sum() - 1) <= tol
    return 0.0 if ok else float("inf")
