"""JSON instances and reports.

Numbers are written with 17 significant digits; ``inf``, ``-inf`` and ``nan``
are written as strings.  See ``docs/instance-schema.md`` for the instance
format.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import convex as cx
from .measure import MeasureSpace, Partition, make_space

SCHEMES = ("generic", "fenchel", "fenchel-lagrange", "risk")


class InputError(ValueError):
    """Malformed or inconsistent instance; the message names the offending field."""


# -- numbers --------------------------------------------------------------------

def num(v, where: str) -> float:
    if isinstance(v, bool):
        raise InputError(f"{where}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "-inf", "infinity", "-infinity"):
        return -math.inf if v.strip().startswith("-") else math.inf
    raise InputError(f"{where}: expected a number or 'inf'/'-inf', got {v!r}")


def nums(v, where: str) -> list[float]:
    if not isinstance(v, list):
        raise InputError(f"{where}: expected a list of numbers")
    return [num(t, f"{where}[{k}]") for k, t in enumerate(v)]


def matrix(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise InputError(f"{where}: expected a nonempty list of rows")
    rows = [nums(r, f"{where}[{k}]") for k, r in enumerate(v)]
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{where}: rows differ in length")
    return np.array(rows, dtype=float)


def plain(v: Any) -> Any:
    """Convert numpy values and non-finite floats into JSON-ready values."""
    if isinstance(v, dict):
        return {str(k): plain(t) for k, t in v.items()}
    if isinstance(v, (list, tuple)):
        return [plain(t) for t in v]
    if isinstance(v, np.ndarray):
        return plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f + 0.0
    return v


def _emit(v: Any, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_emit(t, indent, level + 1)}" for k, t in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, list):
        if not v:
            return "[]"
        if all(not isinstance(t, (dict, list)) for t in v):
            return "[" + ", ".join(_emit(t, indent, level + 1) for t in v) + "]"
        return "[\n" + ",\n".join(inner + _emit(t, indent, level + 1) for t in v) + "\n" + pad + "]"
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        s = format(v, ".17g")
        return s if any(c in s for c in ".en") else s + ".0"
    return json.dumps(v)


def dumps(obj: Any) -> str:
    return _emit(plain(obj), 2, 0) + "\n"


def canonical(obj: Any) -> str:
    return json.dumps(plain(obj), sort_keys=True, separators=(",", ":"))


def digest(raw: dict) -> str:
    return hashlib.sha256(canonical(raw).encode()).hexdigest()


# -- function catalog ------------------------------------------------------------

def _need(d: dict, key: str, where: str):
    if key not in d:
        raise InputError(f"{where}: missing field '{key}'")
    return d[key]


def _build(name: str, catalog: dict, built: dict, stack: tuple) -> cx.ConvexFn:
    if name in built:
        return built[name]
    if name in stack:
        raise InputError(f"functions.{name}: circular reference")
    if name not in catalog:
        raise InputError(f"function '{name}' is referenced but not defined in 'functions'")
    spec = catalog[name]
    where = f"functions.{name}"
    if not isinstance(spec, dict):
        raise InputError(f"{where}: expected an object")
    kind = _need(spec, "type", where)
    ref = lambda n: _build(n, catalog, built, stack + (name,))  # noqa: E731
    try:
        fn = _make(kind, spec, where, ref)
    except InputError:
        raise
    except (ValueError, TypeError) as err:
        raise InputError(f"{where}: {err}") from err
    built[name] = fn
    return fn


def _make(kind: str, s: dict, where: str, ref) -> cx.ConvexFn:
    g = lambda k: _need(s, k, where)  # noqa: E731
    if kind == "pwl":
        a = nums(g("anchor"), f"{where}.anchor")
        if len(a) != 2:
            raise InputError(f"{where}.anchor: expected [x0, f(x0)]")
        return cx.PWL1D(nums(g("breakpoints"), f"{where}.breakpoints"), nums(g("slopes"), f"{where}.slopes"), (a[0], a[1]))
    if kind == "quadratic":
        Q = matrix(g("Q"), f"{where}.Q")
        b = nums(s.get("b", [0.0] * Q.shape[0]), f"{where}.b")
        E = matrix(s["E"], f"{where}.E") if "E" in s else None
        e = nums(s["e"], f"{where}.e") if "e" in s else None
        return cx.Quadratic(Q, b, num(s.get("c", 0.0), f"{where}.c"), E, e)
    if kind == "affine":
        return cx.Affine(nums(g("a"), f"{where}.a"), num(s.get("beta", 0.0), f"{where}.beta"))
    if kind == "indicator-box":
        return cx.IndicatorBox(nums(g("lower"), f"{where}.lower"), nums(g("upper"), f"{where}.upper"))
    if kind == "support-box":
        return cx.SupportBox(nums(g("lower"), f"{where}.lower"), nums(g("upper"), f"{where}.upper"))
    if kind == "sampled":
        lim = nums(s["limits"], f"{where}.limits") if "limits" in s else None
        return cx.Sampled1D(nums(g("grid"), f"{where}.grid"), nums(g("values"), f"{where}.values"), lim)
    if kind == "entropic":
        return cx.EntropicRisk(nums(g("probs"), f"{where}.probs"), num(g("gamma"), f"{where}.gamma"))
    if kind == "relative-entropy":
        return cx.RelativeEntropy(nums(g("probs"), f"{where}.probs"), num(g("gamma"), f"{where}.gamma"))
    if kind == "cvar":
        return cx.CVaRRisk(nums(g("probs"), f"{where}.probs"), num(g("alpha"), f"{where}.alpha"))
    if kind == "hyperbola-indicator":
        return cx.HyperbolaIndicator()
    if kind == "hyperbola-support":
        return cx.HyperbolaSupport()
    if kind in ("polyhedron-indicator", "polyhedron-support"):
        A = matrix(s["A"], f"{where}.A") if "A" in s else None
        b = nums(s["b"], f"{where}.b") if "b" in s else None
        Aeq = matrix(s["Aeq"], f"{where}.Aeq") if "Aeq" in s else None
        beq = nums(s["beq"], f"{where}.beq") if "beq" in s else None
        cls = cx.PolyhedronIndicator if kind == "polyhedron-indicator" else cx.PolyhedronSupport
        return cls(A, b, Aeq, beq)
    if kind == "sum":
        terms = g("terms")
        if not isinstance(terms, list) or not terms:
            raise InputError(f"{where}.terms: expected a nonempty list of function names")
        return cx.Sum([ref(t) for t in terms])
    if kind == "precompose":
        inner = ref(g("of"))
        M = matrix(g("matrix"), f"{where}.matrix")
        shift = nums(s["shift"], f"{where}.shift") if "shift" in s else None
        if M.shape[0] != inner.dim:
            raise InputError(f"{where}.matrix: {M.shape[0]} rows but '{s['of']}' has dimension {inner.dim}")
        return cx.Precompose(inner, M, shift)
    if kind == "scaled":
        return cx.Scaled(ref(g("of")), num(g("c"), f"{where}.c"))
    raise InputError(f"{where}.type: unknown variant {kind!r}")


# -- instances -----------------------------------------------------------------------

@dataclass
class Instance:
    raw: dict
    space: MeasureSpace
    scheme: str
    functions: dict = field(default_factory=dict)
    f: Optional[list] = None
    g: Optional[list] = None
    operator: Optional[np.ndarray] = None
    constraint: Any = None
    perturbation: Optional[dict] = None
    risk: Any = None
    payoff_cap: Optional[float] = None
    grid: Optional[list] = None
    tol: float = 1e-9
    certificate: Optional[dict] = None
    points: Optional[dict] = None

    @property
    def digest(self) -> str:
        return digest(self.raw)

    def __eq__(self, other):
        return isinstance(other, Instance) and canonical(self.raw) == canonical(other.raw)


def _assign(v, n: int, where: str, catalog: dict, built: dict) -> list:
    names = [v] * n if isinstance(v, str) else v
    if not isinstance(names, list) or len(names) != n:
        raise InputError(f"{where}: expected a function name or a list of {n} names (one per atom)")
    return [_build(nm, catalog, built, ()) for nm in names]


def _constraint(c: dict, space: MeasureSpace, dim: int):
    from .duality import FeasibilityError
    from .schemes import Box, ConditionalExpectationCone, Halfspaces

    where = "constraint"
    if not isinstance(c, dict):
        raise InputError(f"{where}: expected an object")
    kind = _need(c, "type", where)
    try:
        if kind == "box":
            S = Box(nums(_need(c, "lower", where), f"{where}.lower"), nums(_need(c, "upper", where), f"{where}.upper"))
        elif kind == "halfspaces":
            S = Halfspaces(matrix(c["A"], f"{where}.A") if "A" in c else None,
                           nums(c["b"], f"{where}.b") if "b" in c else None,
                           matrix(c["Aeq"], f"{where}.Aeq") if "Aeq" in c else None,
                           nums(c["beq"], f"{where}.beq") if "beq" in c else None, dim)
        elif kind == "cond-exp-cone":
            blocks = _need(c, "blocks", where)
            S = ConditionalExpectationCone(space.normalized(), Partition.from_blocks(blocks), num(c.get("threshold", 0.0), f"{where}.threshold"))
        else:
            raise InputError(f"{where}.type: unknown constraint set {kind!r}")
    except FeasibilityError as err:
        raise InputError(f"{where}: infeasible constraint set ({err})") from err
    except cx.ImproperFunctionError as err:
        raise InputError(f"{where}: infeasible constraint set ({err})") from err
    except InputError:
        raise
    except (ValueError, TypeError) as err:
        raise InputError(f"{where}: {err}") from err
    if S.dim != dim:
        raise InputError(f"{where}: dimension {S.dim} differs from the function dimension {dim}")
    return S


def parse_grid(spec: str) -> list:
    """``"a:b:n"`` for ``n`` uniform points or a comma list ``"0,1,2"``; ``;`` separates vectors."""
    try:
        if ";" in spec:
            return [[float(t) for t in v.split(",")] for v in spec.split(";")]
        if ":" in spec:
            a, b, n = spec.split(":")
            return [[float(t)] for t in np.linspace(float(a), float(b), int(n))]
        return [[float(t)] for t in spec.split(",")]
    except ValueError as err:
        raise InputError(f"--grid: cannot parse {spec!r} ({err})") from err


def instance_from_dict(raw: dict) -> Instance:
    if not isinstance(raw, dict):
        raise InputError("instance: expected a JSON object at the top level")
    raw = copy.deepcopy(raw)
    sp = _need(raw, "space", "instance")
    try:
        space = make_space(nums(_need(sp, "weights", "space"), "space.weights"))
    except InputError:
        raise
    except ValueError as err:
        raise InputError(f"space.weights: {err}") from err
    scheme = raw.get("scheme", "generic")
    if scheme not in SCHEMES:
        raise InputError(f"scheme: expected one of {', '.join(SCHEMES)}, got {scheme!r}")
    catalog = raw.get("functions", {})
    if not isinstance(catalog, dict):
        raise InputError("functions: expected an object mapping names to function specs")
    built: dict = {}
    for name in catalog:
        _build(name, catalog, built, ())
    tol = num(raw.get("tolerances", {}).get("tol", 1e-9), "tolerances.tol")
    grid = raw.get("grids", {}).get("y")
    if grid is not None:
        if not isinstance(grid, list):
            raise InputError("grids.y: expected a list of points")
        grid = [[num(t, f"grids.y[{k}]")] if not isinstance(t, list) else nums(t, f"grids.y[{k}]") for k, t in enumerate(grid)]
    inst = Instance(raw=raw, space=space, scheme=scheme, functions=built, tol=tol, grid=grid,
                    certificate=raw.get("certificate"), points=raw.get("points"))
    n = space.atom_count
    if "f" in raw:
        inst.f = _assign(raw["f"], n, "f", catalog, built)
        if len({fn.dim for fn in inst.f}) != 1:
            raise InputError("f: components have different dimensions")
    if "g" in raw:
        inst.g = _assign(raw["g"], n, "g", catalog, built)
        if len({fn.dim for fn in inst.g}) != 1:
            raise InputError("g: components have different dimensions")
    if scheme == "fenchel":
        if inst.f is None or inst.g is None:
            raise InputError("fenchel scheme needs 'f' and 'g'")
        dx, dw = inst.f[0].dim, inst.g[0].dim
        if "operator" in raw:
            inst.operator = matrix(raw["operator"], "operator")
        elif dx == dw:
            inst.operator = np.eye(dx)
        else:
            raise InputError("operator: required when dim f differs from dim g")
        if inst.operator.shape != (dw, dx):
            raise InputError(f"operator: shape {list(inst.operator.shape)} does not map R^{dx} to R^{dw}")
    elif scheme == "fenchel-lagrange":
        if inst.f is None or "constraint" not in raw:
            raise InputError("fenchel-lagrange scheme needs 'f' and 'constraint'")
        inst.constraint = _constraint(raw["constraint"], space, inst.f[0].dim)
    elif scheme == "risk":
        from .applications import RiskSpec

        r = _need(raw, "risk", "instance")
        try:
            inst.risk = RiskSpec(_need(r, "kind", "risk"), num(_need(r, "level", "risk"), "risk.level"),
                                 Partition.from_blocks(_need(r, "blocks", "risk")), space,
                                 r.get("p"))
        except InputError:
            raise
        except ValueError as err:
            raise InputError(f"risk: {err}") from err
        cap = r.get("payoff_cap")
        inst.payoff_cap = None if cap is None else num(cap, "risk.payoff_cap")
    else:
        p = raw.get("perturbation")
        if p is not None:
            dx = int(_need(p, "dx", "perturbation"))
            dw = int(_need(p, "dw", "perturbation"))
            comps = _assign(_need(p, "components", "perturbation"), n, "perturbation.components", catalog, built)
            for k, c in enumerate(comps):
                if c.dim != dx + dw:
                    raise InputError(f"perturbation.components[{k}]: dimension {c.dim} differs from dx + dw = {dx + dw}")
            inst.perturbation = {"dx": dx, "dw": dw, "components": comps}
        elif inst.f is None:
            raise InputError("generic scheme needs 'perturbation' or 'f'")
    if scheme != "generic" or inst.perturbation is not None:
        perturbation_of(inst)  # checks feasibility atom by atom
    return inst


def _scenario(inst: Instance, fns):
    from .scenario import ScenarioFn

    return ScenarioFn(inst.space, fns)


def perturbation_of(inst: Instance):
    """The perturbation behind an instance; feasibility failures become input errors."""
    from .duality import CompositePerturbation, FeasibilityError, FLPerturbation, Perturbation

    try:
        if inst.scheme == "fenchel":
            return CompositePerturbation(_scenario(inst, inst.f), _scenario(inst, inst.g), inst.operator)
        if inst.scheme == "fenchel-lagrange":
            return FLPerturbation(_scenario(inst, inst.f), inst.constraint)
        if inst.scheme == "risk":
            from .applications import portfolio_instance

            f, S = portfolio_instance(inst.risk, inst.payoff_cap)
            return FLPerturbation(f, S)
        if inst.perturbation is None:
            raise InputError("this command needs a perturbation (or a fenchel / fenchel-lagrange / risk scheme)")
        p = inst.perturbation
        return Perturbation(inst.space, p["dx"], p["dw"], p["components"])
    except FeasibilityError as err:
        where = "" if err.atom is None else f" (atom {err.atom})"
        raise InputError(f"feasibility violated{where}: {err}") from err


def parse_instance(path) -> Instance:
    """Read and validate an instance file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as err:
        raise InputError(f"{path}: cannot read ({err.strerror})") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from err
    return instance_from_dict(raw)


def emit_instance(inst: Instance) -> bytes:
    return dumps(inst.raw).encode()


# -- reports ----------------------------------------------------------------------

def _unplain(v):
    if isinstance(v, dict):
        return {k: _unplain(t) for k, t in v.items()}
    if isinstance(v, list):
        return [_unplain(t) for t in v]
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    if v == "nan":
        return math.nan
    return v


def emit_report(report: dict, fmt: str = "json") -> bytes:
    if fmt == "json":
        return dumps(report).encode()
    if fmt == "text":
        return render_text(report).encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes) -> dict:
    return _unplain(json.loads(data))


def _cell(v) -> str:
    if isinstance(v, float):
        return format(v + 0.0, ".10g")
    if isinstance(v, list):
        return "(" + ", ".join(_cell(t) for t in v) + ")"
    return str(v)


def render_text(report: dict) -> str:
    lines = [f"command: {report.get('command')}", f"scheme: {report.get('scheme')}",
             f"digest: {report.get('digest')}", f"tol: {_cell(report.get('tol'))}",
             f"status: {report.get('status')}"]
    res = report.get("results") or {}
    atom_rows = [(k, v) for k, v in res.items() if isinstance(v, list) and len(v) == report.get("atoms") and k != "surface"]
    if atom_rows:
        lines.append("")
        lines.append("per-atom table")
        header = "  " + "row".ljust(22) + "".join(f"atom {i}".ljust(24) for i in range(report.get("atoms", 0))).rstrip()
        lines.append(header)
        for k, v in atom_rows:
            lines.append(("  " + k.ljust(22) + "".join(_cell(t).ljust(23) + " " for t in v)).rstrip())
    other = [(k, v) for k, v in res.items() if (k, v) not in atom_rows]
    for k, v in other:
        if isinstance(v, (dict, list)):
            lines.append(f"{k}: {json.dumps(plain(v))}")
        else:
            lines.append(f"{k}: {_cell(v)}")
    for c in report.get("checks", []):
        lines.append(f"check {c['name']}: {'PASS' if c['passed'] else 'FAIL'} (tol {_cell(c['tol'])})")
    return "\n".join(lines) + "\n"
