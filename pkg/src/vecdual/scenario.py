"""Functions from R^d to extended-real vectors indexed by atoms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap
from .convex import INF, ConvexFn, ImproperFunctionError, Interval, MinResult, Quadratic, Sum, conjugate, minimize
from .measure import L0Ext, MeasureSpace, Partition, ext_add


class L0Point:
    """One point of R^d per atom."""

    __slots__ = ("space", "coords")

    def __init__(self, space: MeasureSpace, coords):
        c = np.asarray(coords, dtype=float)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if c.shape[0] != space.atom_count:
            raise ValueError(f"expected {space.atom_count} atom coordinates, got {c.shape[0]}")
        if not np.isfinite(c).all():
            raise ValueError("coordinates must be finite")
        c.setflags(write=False)
        self.space, self.coords = space, c

    @classmethod
    def constant(cls, space: MeasureSpace, x) -> "L0Point":
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        return cls(space, np.tile(x, (space.atom_count, 1)))

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self.coords[i]

    def __len__(self):
        return self.coords.shape[0]

    def __eq__(self, other):
        return isinstance(other, L0Point) and np.array_equal(self.coords, other.coords)

    def __repr__(self):
        return f"L0Point({self.coords.tolist()})"

    def tolist(self):
        return self.coords.tolist()


def paste_points(pieces: Sequence[L0Point], blocks: Partition) -> L0Point:
    if len(pieces) != blocks.block_count:
        raise ValueError("need one piece per block")
    out = np.array(pieces[0].coords)
    for k, idx in enumerate(blocks.blocks()):
        out[idx] = pieces[k].coords[idx]
    return L0Point(pieces[0].space, out)


class ScenarioFn:
    """A family of convex functions on a common R^d, one per atom.

    ``conjugates`` may supply closed-form conjugates per atom (used by the
    perturbation classes, whose structure gives the conjugate directly).
    """

    def __init__(self, space: MeasureSpace, components: Sequence[ConvexFn], conjugates: Optional[Sequence[ConvexFn]] = None):
        comps = list(components)
        if len(comps) != space.atom_count:
            raise ValueError(f"need {space.atom_count} components, got {len(comps)}")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ValueError(f"components have different dimensions: {sorted(dims)}")
        self.space, self.components, self.dim = space, comps, comps[0].dim
        self._conj = None if conjugates is None else list(conjugates)
        self._domain_point: Optional[np.ndarray] = None
        self.notes: list[str] = []

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> ConvexFn:
        return self.components[i]

    def __call__(self, x) -> L0Ext:
        return extend_eval(self, L0Point.constant(self.space, x))

    def conjugate_components(self) -> list[ConvexFn]:
        if self._conj is None:
            self._conj = pmap(conjugate, self.components)
        return self._conj

    def domain_point(self) -> np.ndarray:
        """A point where every component is finite; raises if none exists."""
        if self._domain_point is None:
            reg = Quadratic(np.eye(self.dim))
            r = minimize(Sum(list(self.components) + [reg]))
            if r.witness is None or not np.isfinite(r.value):
                raise ImproperFunctionError("components have no common finite point")
            self._domain_point = np.asarray(r.witness, dtype=float)
        return self._domain_point

    def check_proper(self) -> "ScenarioFn":
        self.domain_point()
        return self


def _check(F: ScenarioFn, x: L0Point):
    if x.space != F.space:
        raise ValueError("point and function live on different spaces")
    if x.dim != F.dim:
        raise ValueError(f"point dimension {x.dim} differs from function dimension {F.dim}")


def extend_eval(F: ScenarioFn, x: L0Point) -> L0Ext:
    """``(F(x))_i = f_i(x_i)``: the stable extension to atom-dependent arguments."""
    _check(F, x)
    return L0Ext(pmap(lambda i: F.components[i].value(np.asarray(x[i])), range(len(F))))


def vec_conjugate(F: ScenarioFn) -> ScenarioFn:
    """Atomwise conjugate; the essential supremum over X splits over atoms."""
    conj = F.conjugate_components()
    return ScenarioFn(F.space, conj, conjugates=F.components)


def young_fenchel_gap(F: ScenarioFn, x, y: L0Point) -> L0Ext:
    """``f*(y) + f(x) - <x, y>`` per atom; nonnegative, zero exactly at subgradients."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    _check(F, y)
    conj = F.conjugate_components()

    def one(i):
        fx = F.components[i].value(x)
        fy = conj[i].value(np.asarray(y[i]))
        return ext_add(ext_add(fx, fy), -float(x @ y[i]))

    return L0Ext(pmap(one, range(len(F))))


def is_subgradient(F: ScenarioFn, x, y: L0Point, tol: float = 1e-9) -> list[bool]:
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    gap = young_fenchel_gap(F, x, y)
    out = []
    for i, g in enumerate(gap):
        fx = F.components[i].value(x)
        out.append(bool(np.isfinite(fx) and g <= tol))
    return out


@dataclass
class PrimalResult:
    """Componentwise infimum with an optional simultaneous minimizer."""

    value: L0Ext
    minimizer: Optional[np.ndarray]
    per_atom: list = field(default_factory=list)
    exact: bool = True
    note: str = ""

    def argmin_descriptors(self) -> list:
        out = []
        for r in self.per_atom:
            if r.argmin is not None:
                out.append({"interval": [r.argmin.lo, r.argmin.hi]})
            elif r.witness is not None:
                out.append({"point": np.asarray(r.witness).tolist()})
            else:
                out.append(None)
        return out


def solve_primal(F: ScenarioFn, tol: float = 1e-9) -> PrimalResult:
    """``inf_x f_i(x)`` per atom and, when one exists, a point attaining all of them."""
    results: list[MinResult] = pmap(minimize, F.components)
    value = L0Ext([r.value for r in results])
    exact = all(r.exact for r in results)
    if any(r.value == -INF or not r.attained for r in results):
        return PrimalResult(value, None, results, exact, note="some component infimum is not attained")
    # d = 1 with exact argmin intervals: intersect
    if F.dim == 1 and all(r.argmin is not None for r in results):
        box = Interval(-INF, INF)
        for r in results:
            box = box.intersect(r.argmin)
        if box.empty:
            return PrimalResult(value, None, results, exact, note="argmin sets do not intersect")
        w = box.lo if np.isfinite(box.lo) else (box.hi if np.isfinite(box.hi) else 0.0)
        if exact:
            return PrimalResult(value, np.array([w]), results, exact)
    # any minimizer of the sum attains every component when a simultaneous one exists
    check_tol = tol if exact else max(tol, 1e-6)
    try:
        s = minimize(Sum(list(F.components)))
    except ImproperFunctionError:
        return PrimalResult(value, None, results, exact, note="components have no common finite point")
    if s.witness is None:
        return PrimalResult(value, None, results, exact, note="sum of components has no minimizer")
    w = np.asarray(s.witness, dtype=float)
    ok = all(F.components[i].value(w) - r.value <= check_tol * (1 + abs(r.value)) for i, r in enumerate(results))
    if ok:
        return PrimalResult(value, w, results, exact and s.exact)
    return PrimalResult(value, None, results, exact, note="no single point attains every component")
