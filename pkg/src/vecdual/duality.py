"""Perturbational duality: primal and dual values, reports, identities and certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap
from .convex import (INF, ConvexFn, ImproperFunctionError, MinResult, NotExactError, Precompose, Quadratic,
                     Sum, as_pwl, conjugate, minimize)
from .measure import L0Ext, MeasureSpace, ext_add, ext_sub
from .scenario import L0Point, PrimalResult, ScenarioFn, is_subgradient, solve_primal

VERIFIED, FAILED, UNDETERMINED = "verified", "failed", "undetermined"


class FeasibilityError(ValueError):
    """``0`` is not in the projection of the domain onto the perturbation space."""

    def __init__(self, message: str, atom: Optional[int] = None):
        super().__init__(message)
        self.atom = atom


class RegularityRequired(RuntimeError):
    """An operation needs verified regularity and the probe could not verify it."""


def _embed(dx: int, dw: int, which: str) -> np.ndarray:
    if which == "x":
        return np.vstack([np.eye(dx), np.zeros((dw, dx))])
    return np.vstack([np.zeros((dx, dw)), np.eye(dw)])


class Perturbation:
    """Per-atom convex functions of ``(x, w)`` on ``R^dx x R^dw``.

    Subclasses with structure override the slices; the generic class works
    from the joint components and numeric conjugates.
    """

    def __init__(self, space: MeasureSpace, dx: int, dw: int, components: Sequence[ConvexFn], check: bool = True):
        comps = list(components)
        if len(comps) != space.atom_count:
            raise ValueError(f"need {space.atom_count} components, got {len(comps)}")
        for c in comps:
            if c.dim != dx + dw:
                raise ValueError(f"component dimension {c.dim} differs from dx + dw = {dx + dw}")
        self.space, self.dx, self.dw, self.components = space, dx, dw, comps
        self._conj: Optional[list] = None
        if check:
            self.check_feasible()

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    # values ------------------------------------------------------------------
    def value(self, i: int, x, w) -> float:
        return self.components[i].value(np.concatenate([np.ravel(x), np.ravel(w)]).astype(float))

    def conj_value(self, i: int, y, z) -> float:
        return self.conjugate_component(i).value(np.concatenate([np.ravel(y), np.ravel(z)]).astype(float))

    def conjugate_component(self, i: int) -> ConvexFn:
        if self._conj is None:
            self._conj = pmap(conjugate, self.components)
        return self._conj[i]

    # slices ----------------------------------------------------------------
    def primal_component(self, i: int) -> ConvexFn:
        """``x -> Phi_i(x, 0)``."""
        return Precompose(self.components[i], _embed(self.dx, self.dw, "x"))

    def dual_component(self, i: int, y) -> ConvexFn:
        """``z -> Phi_i*(y, z)``."""
        shift = np.concatenate([np.ravel(y), np.zeros(self.dw)]).astype(float)
        return Precompose(self.conjugate_component(i), _embed(self.dx, self.dw, "w"), shift)

    def primal_slice(self) -> ScenarioFn:
        return ScenarioFn(self.space, [self.primal_component(i) for i in range(self.atom_count)])

    def joint(self) -> ScenarioFn:
        """The perturbation as a scenario function of ``(x, w)`` with its closed-form conjugates."""
        return ScenarioFn(self.space, self.components, conjugates=[self.conjugate_component(i) for i in range(self.atom_count)])

    def check_feasible(self):
        """``0`` lies in the projection of each domain, and one ``x`` serves every atom."""
        for i in range(self.atom_count):
            try:
                minimize(Sum([self.primal_component(i), Quadratic(np.eye(self.dx))]))
            except ImproperFunctionError as err:
                raise FeasibilityError(f"Phi(., 0) is +inf everywhere on atom {i}", atom=i) from err
        try:
            self.primal_slice().domain_point()
        except ImproperFunctionError as err:
            raise FeasibilityError("no x makes Phi(x, 0) finite on every atom") from err


class CompositePerturbation(Perturbation):
    """``Phi_i(x, w) = f_i(x) + g_i(A x + w)``."""

    def __init__(self, f: ScenarioFn, g: ScenarioFn, A, check: bool = True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape != (g.dim, f.dim):
            raise ValueError(f"operator shape {A.shape} does not map R^{f.dim} to R^{g.dim}")
        if f.space != g.space:
            raise ValueError("f and g live on different spaces")
        self.f, self.g, self.A = f, g, A
        dx, dw = f.dim, g.dim
        comps = [Sum([Precompose(f[i], np.hstack([np.eye(dx), np.zeros((dx, dw))])),
                      Precompose(g[i], np.hstack([A, np.eye(dw)]))]) for i in range(len(f))]
        super().__init__(f.space, dx, dw, comps, check=False)
        if check:
            self.check_feasible()

    def primal_component(self, i):
        return Sum([self.f[i], Precompose(self.g[i], self.A)])

    def dual_component(self, i, y):
        fc, gc = self.f.conjugate_components()[i], self.g.conjugate_components()[i]
        return Sum([Precompose(fc, -self.A.T, np.ravel(y)), gc])

    def conj_value(self, i, y, z):
        fc, gc = self.f.conjugate_components()[i], self.g.conjugate_components()[i]
        y, z = np.ravel(y).astype(float), np.ravel(z).astype(float)
        return ext_add(fc.value(y - self.A.T @ z), gc.value(z))

    def conjugate_component(self, i):
        fc, gc = self.f.conjugate_components()[i], self.g.conjugate_components()[i]
        dx, dw = self.dx, self.dw
        return Sum([Precompose(fc, np.hstack([np.eye(dx), -self.A.T])),
                    Precompose(gc, np.hstack([np.zeros((dw, dx)), np.eye(dw)]))])


class FLPerturbation(Perturbation):
    """``Phi_i(x, u) = f_i(x + u)`` for ``x`` in ``S``, ``+inf`` otherwise."""

    def __init__(self, f: ScenarioFn, S, check: bool = True):
        if S.dim != f.dim:
            raise ValueError(f"constraint set dimension {S.dim} differs from function dimension {f.dim}")
        self.f, self.S = f, S
        n = f.dim
        self._ind, self._sup = S.indicator(), S.support()
        comps = [Sum([Precompose(f[i], np.hstack([np.eye(n), np.eye(n)])),
                      Precompose(self._ind, np.hstack([np.eye(n), np.zeros((n, n))]))]) for i in range(len(f))]
        super().__init__(f.space, n, n, comps, check=False)
        if check:
            self.check_feasible()

    def primal_component(self, i):
        return Sum([self.f[i], self._ind])

    def dual_component(self, i, y):
        fc = self.f.conjugate_components()[i]
        return Sum([fc, Precompose(self._sup, -np.eye(self.dx), np.ravel(y))])

    def conj_value(self, i, y, v):
        fc = self.f.conjugate_components()[i]
        y, v = np.ravel(y).astype(float), np.ravel(v).astype(float)
        return ext_add(fc.value(v), self._sup.value(y - v))

    def conjugate_component(self, i):
        fc = self.f.conjugate_components()[i]
        n = self.dx
        return Sum([Precompose(fc, np.hstack([np.zeros((n, n)), np.eye(n)])),
                    Precompose(self._sup, np.hstack([np.eye(n), -np.eye(n)]))])


# -- operations ----------------------------------------------------------------

@dataclass
class DualResult:
    value: L0Ext
    z_bar: Optional[L0Point]
    attained: list
    per_atom: list = field(default_factory=list)


def _dual_min(phi: Perturbation, i: int, y) -> MinResult:
    try:
        return minimize(phi.dual_component(i, y))
    except ImproperFunctionError:
        return MinResult(INF, None, False, note="Phi*(y, .) is +inf everywhere")


def dual_value(phi: Perturbation, tol: float = 1e-9) -> DualResult:
    """``sup_z -Phi_i*(0, z)`` per atom with the maximizers when every atom attains."""
    zero = np.zeros(phi.dx)
    res = pmap(lambda i: _dual_min(phi, i, zero), range(phi.atom_count))
    value = L0Ext([-r.value + 0.0 for r in res])
    attained = [bool(r.attained and np.isfinite(r.value)) for r in res]
    z_bar = None
    if all(attained):
        z_bar = L0Point(phi.space, np.array([np.ravel(r.witness) for r in res]))
    return DualResult(value, z_bar, attained, res)


def gap_vector(primal: L0Ext, dual: L0Ext) -> L0Ext:
    """``primal - dual`` with equal values (also equal infinities) giving ``0``."""
    return L0Ext([0.0 if p == d else ext_sub(p, d) for p, d in zip(primal, dual)])


@dataclass
class DualityReport:
    primal_value: L0Ext
    dual_value: L0Ext
    gap: L0Ext
    primal_minimizer: Optional[np.ndarray]
    dual_solution: Optional[L0Point]
    dual_attained: list
    regularity_flag: str
    tol: float = 1e-9
    exact: bool = True
    notes: list = field(default_factory=list)
    surface: Optional[dict] = None
    primal: Optional[PrimalResult] = None
    dual: Optional[DualResult] = None

    @property
    def weak_duality_holds(self) -> bool:
        return all(g >= -self._tol() for g in self.gap)

    def _tol(self):
        return self.tol if self.exact else max(self.tol, 1e-6)


def duality_report(phi: Perturbation, tol: float = 1e-9) -> DualityReport:
    primal = solve_primal(phi.primal_slice(), tol)
    dual = dual_value(phi, tol)
    gap = gap_vector(primal.value, dual.value)
    exact = primal.exact and all(r.exact for r in dual.per_atom)
    eff = tol if exact else max(tol, 1e-6)
    notes = []
    if any(g < -eff for g in gap):
        notes.append("weak duality violated beyond tolerance: numeric inaccuracy")
    positive_gap = any(g > eff for g in gap)
    certified_gap = [i for i, r in enumerate(dual.per_atom) if not r.attained and np.isfinite(r.value)]
    if positive_gap:
        flag = FAILED
        notes.append("positive duality gap")
    elif certified_gap:
        flag = FAILED
        for i in certified_gap:
            notes.append(f"atom {i}: dual supremum not attained ({dual.per_atom[i].note or 'structural'})")
    elif all(dual.attained) and all(abs(g) <= eff for g in gap):
        flag = VERIFIED
    else:
        flag = UNDETERMINED
        notes.append("infinite values: attainment is not meaningful")
    return DualityReport(primal.value, dual.value, gap, primal.minimizer, dual.z_bar, dual.attained, flag,
                         tol=tol, exact=exact, notes=notes, primal=primal, dual=dual)


def _as_grid(phi: Perturbation, y_grid) -> list[L0Point]:
    out = []
    for y in y_grid:
        if isinstance(y, L0Point):
            out.append(y)
        else:
            out.append(L0Point.constant(phi.space, y))
    return out


def primal_conjugate(phi: Perturbation, i: int, y) -> MinResult:
    """``(Phi_i(., 0))*(y)`` as ``-min_x {Phi_i(x, 0) - <x, y>}``; returns the inner result."""
    return minimize(phi.primal_component(i).tilt(y))


def _value_fn(phi: Perturbation, i: int, y) -> float:
    return _dual_min(phi, i, y).value


def _closure_at(fn, y: np.ndarray) -> float:
    """Lower semicontinuous hull of a convex function at ``y`` from secants along coordinate rays."""
    v = fn(y)
    best = v
    delta = 1e-9 * (1.0 + float(np.abs(y).max(initial=0.0)))
    for k in range(y.size):
        for sgn in (1.0, -1.0):
            e = np.zeros(y.size)
            e[k] = sgn * delta
            v1, v2 = fn(y + e), fn(y + 2 * e)
            if np.isfinite(v1) and np.isfinite(v2):
                best = min(best, 2 * v1 - v2)
    # secants undercut a finite value by round-off only; a real jump is larger
    if np.isfinite(v) and v - best <= 1e-9 * (1.0 + abs(v)):
        return v
    return best


@dataclass
class MRResidual:
    y: list
    lhs: list
    rhs: list
    residual: list


def moreau_rockafellar_check(phi: Perturbation, y_grid, tol: float = 1e-7) -> list[MRResidual]:
    """Residuals ``|(Phi(., 0))*(y) - cl(inf_z Phi*(., z))(y)|`` per grid point and atom."""
    out = []
    for y in _as_grid(phi, y_grid):
        def one(i):
            lhs = -primal_conjugate(phi, i, y[i]).value
            rhs = _closure_at(lambda t: _value_fn(phi, i, t), np.asarray(y[i], dtype=float))
            if lhs == rhs:
                r = 0.0
            elif np.isfinite(lhs) and np.isfinite(rhs):
                r = abs(lhs - rhs)
            else:
                r = INF
            return lhs, rhs, r

        rows = pmap(one, range(phi.atom_count))
        out.append(MRResidual(y.tolist(), [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]))
    return out


@dataclass
class OptimalityResult:
    ok: bool
    residuals: list
    subgradient_ok: list
    primal_values: list
    dual_values: list
    diagnostics: list = field(default_factory=list)


def check_optimality(phi: Perturbation, x_bar, z_bar: L0Point, tol: float = 1e-9) -> OptimalityResult:
    """``Phi_i(x, 0) + Phi_i*(0, z_i)`` per atom; zero everywhere certifies both problems and the gap."""
    x = np.atleast_1d(np.asarray(x_bar, dtype=float)).ravel()
    if not isinstance(z_bar, L0Point):
        z_bar = L0Point(phi.space, z_bar)
    zero_w = np.zeros(phi.dw)
    pv = [phi.value(i, x, zero_w) for i in range(phi.atom_count)]
    dv = [phi.conj_value(i, np.zeros(phi.dx), z_bar[i]) for i in range(phi.atom_count)]
    res = [ext_add(p, d) for p, d in zip(pv, dv)]
    ok_atoms = [bool(np.isfinite(r) and abs(r) <= tol) for r in res]
    # subdifferential form: (0, z_i) in the subdifferential of Phi_i at (x, 0)
    joint = phi.joint()
    point = np.concatenate([x, zero_w])
    y = L0Point(phi.space, np.hstack([np.zeros((phi.atom_count, phi.dx)), z_bar.coords]))
    sub = is_subgradient(joint, point, y, tol)
    diags = []
    if sub != ok_atoms:
        diags.append("residual form and subdifferential form disagree")
    for i, good in enumerate(ok_atoms):
        if not good:
            diags.append(f"atom {i}: residual {res[i]!r}")
    return OptimalityResult(all(ok_atoms) and all(sub), res, sub, pv, [-d for d in dv], diags)


@dataclass
class ProbePoint:
    y: list
    attained: list
    inf_value: list
    lhs: list
    witness: list
    ok: list
    notes: list


@dataclass
class ProbeReport:
    points: list
    flag: str
    notes: list = field(default_factory=list)

    def failing(self):
        return [p for p in self.points if not all(p.ok)]


def default_y_grid(phi: Perturbation, count: int = 33) -> list:
    """Dual breakpoints of the PWL pieces, their midpoints and a uniform grid over the dual range."""
    if phi.dx != 1:
        pts = [np.zeros(phi.dx)]
        for k in range(phi.dx):
            for s in (1.0, -1.0):
                e = np.zeros(phi.dx)
                e[k] = s
                pts.append(e)
        return pts
    bps: set[float] = set()
    for i in range(phi.atom_count):
        comp = phi.primal_component(i)
        p = as_pwl(comp)
        if p is not None:
            bps.update(s for s in p.slopes if np.isfinite(s))
    bps.add(0.0)
    srt = sorted(bps)
    mids = [0.5 * (a + b) for a, b in zip(srt[:-1], srt[1:])]
    lo, hi = srt[0] - 1.0, srt[-1] + 1.0
    uni = np.linspace(lo, hi, count)
    return [np.array([t]) for t in sorted(set(srt) | set(mids) | set(float(u) for u in uni))]


def regularity_probe(phi: Perturbation, y_grid=None, tol: float = 1e-7) -> ProbeReport:
    """Attainment of ``min_z Phi*(y, z)`` on a grid of ``y`` and its agreement with ``(Phi(., 0))*(y)``."""
    grid = _as_grid(phi, default_y_grid(phi) if y_grid is None else y_grid)
    points, undetermined = [], False
    for y in grid:
        def one(i):
            try:
                inner = _dual_min(phi, i, y[i])
                lhs = -primal_conjugate(phi, i, y[i]).value
            except (NotExactError, RuntimeError) as err:
                return None, None, None, False, f"could not decide: {err}"
            eff = tol if inner.exact else max(tol, 1e-6)
            if inner.value == INF and lhs == INF:
                return True, INF, lhs, True, "y outside the domain"
            if not inner.attained:
                return False, inner.value, lhs, False, inner.note or "infimum not attained"
            agree = (lhs == inner.value) or (np.isfinite(lhs) and abs(lhs - inner.value) <= eff * (1 + abs(lhs)))
            return True, inner.value, lhs, bool(agree), ("" if agree else "minimum differs from the conjugate of Phi(., 0)")

        rows = pmap(lambda i: (one(i), i), range(phi.atom_count))
        att, val, lhs, ok, notes, wit = [], [], [], [], [], []
        for (a, v, l, good, note), i in rows:
            if a is None:
                undetermined = True
            att.append(a)
            val.append(v)
            lhs.append(l)
            ok.append(good)
            notes.append(note)
        points.append(ProbePoint(y.tolist(), att, val, lhs, wit, ok, notes))
    if any(not all(p.ok) for p in points if None not in p.attained):
        flag = FAILED
    elif undetermined or not points:
        flag = UNDETERMINED
    else:
        flag = VERIFIED
    return ProbeReport(points, flag)


@dataclass
class FarkasVerdict:
    kind: str  # "primal-nonnegative" or "negative-primal"
    z: Optional[L0Point] = None
    conj_values: Optional[list] = None
    x_evidence: Optional[np.ndarray] = None
    atom: Optional[int] = None
    evidence_value: Optional[float] = None
    probe: Optional[ProbeReport] = None


def _negative_point(phi: Perturbation, i: int) -> Optional[np.ndarray]:
    comp = phi.primal_component(i)
    r = minimize(comp)
    if r.witness is not None and comp.value(np.ravel(r.witness)) < 0:
        return np.ravel(r.witness)
    for eps in (1.0, 1e-2, 1e-4, 1e-6):
        r = minimize(Sum([comp, Quadratic(eps * np.eye(phi.dx))]))
        if r.witness is not None and comp.value(np.ravel(r.witness)) < 0:
            return np.ravel(r.witness)
    return None


def farkas_decide(phi: Perturbation, tol: float = 1e-9, y_grid=None) -> FarkasVerdict:
    """Either ``Phi(., 0) >= 0`` with ``z`` such that ``Phi*(0, z) <= 0``, or a point where ``Phi(x, 0) < 0``."""
    probe = regularity_probe(phi, y_grid if y_grid is not None else [np.zeros(phi.dx)], tol=max(tol, 1e-7))
    if probe.flag != VERIFIED:
        raise RegularityRequired(f"regularity is {probe.flag}: the alternative needs attainment of min_z Phi*(y, z)")
    primal = solve_primal(phi.primal_slice(), tol)
    neg = [i for i, v in enumerate(primal.value) if v < -tol]
    if not neg:
        dual = dual_value(phi, tol)
        if dual.z_bar is None:
            raise RegularityRequired("dual not attained although the probe verified regularity")
        cv = [phi.conj_value(i, np.zeros(phi.dx), dual.z_bar[i]) for i in range(phi.atom_count)]
        return FarkasVerdict("primal-nonnegative", z=dual.z_bar, conj_values=cv, probe=probe)
    i = neg[0]
    x = _negative_point(phi, i)
    ev = None if x is None else phi.value(i, x, np.zeros(phi.dw))
    return FarkasVerdict("negative-primal", x_evidence=x, atom=i, evidence_value=ev, probe=probe)
