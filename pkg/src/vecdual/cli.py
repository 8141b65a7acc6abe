"""Command-line front end: ``vecdual --instance FILE --command NAME``."""
from __future__ import annotations

import argparse
import sys
import warnings
from typing import Optional

import numpy as np

from ._parallel import workers
from .convex import ImproperFunctionError, NotExactError, conjugate
from .duality import (Perturbation, RegularityRequired,
                      check_optimality, default_y_grid, duality_report, farkas_decide, moreau_rockafellar_check,
                      regularity_probe)
from .io import InputError, Instance, emit_report, parse_grid, parse_instance, perturbation_of
from .scenario import L0Point, ScenarioFn, is_subgradient, young_fenchel_gap

COMMANDS = ("conjugate", "solve", "check-young-fenchel", "check-moreau-rockafellar", "check-optimality",
            "farkas", "probe-regularity")

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _grid(inst: Instance, phi: Optional[Perturbation], grid_override):
    if grid_override is not None:
        return [np.array(g, dtype=float) for g in grid_override]
    if inst.grid is not None:
        return [np.array(g, dtype=float) for g in inst.grid]
    return default_y_grid(phi) if phi is not None else [np.array([0.0])]


def _cmd_conjugate(inst, tol, grid):
    fns = inst.f if inst.f is not None else (inst.perturbation or {}).get("components")
    if fns is None:
        raise InputError("conjugate: needs 'f' or a perturbation")
    ys = _grid(inst, None, grid)
    conj = [conjugate(fn) for fn in fns]
    rows = []
    for y in ys:
        rows.append({"y": y.tolist(), "values": [c.value(np.resize(y, c.dim)) for c in conj]})
    results = {"representation": [repr(c) for c in conj], "exact": [bool(getattr(c, "exact", False)) for c in conj],
               "grid": rows}
    return results, [{"name": "conjugate-computed", "passed": True, "tol": tol}]


def _cmd_solve(inst, tol, grid):
    phi = perturbation_of(inst)
    if inst.scheme == "fenchel":
        from .schemes import fenchel_dual_solve

        rep = fenchel_dual_solve(phi.f, phi.g, phi.A, tol, x_grid=None if grid is None and inst.grid is None else _grid(inst, phi, grid))
    elif inst.scheme in ("fenchel-lagrange", "risk"):
        from .schemes import fenchel_lagrange_solve

        rep = fenchel_lagrange_solve(phi.f, phi.S, tol, y_grid=None if grid is None and inst.grid is None else _grid(inst, phi, grid))
    else:
        rep = duality_report(phi, tol)
    eff = tol if rep.exact else max(tol, 1e-6)
    results = {
        "primal_value": rep.primal_value.tolist(),
        "dual_value": rep.dual_value.tolist(),
        "gap": rep.gap.tolist(),
        "dual_attained": list(rep.dual_attained),
        "primal_minimizer": None if rep.primal_minimizer is None else np.asarray(rep.primal_minimizer).tolist(),
        "dual_solution": None if rep.dual_solution is None else rep.dual_solution.tolist(),
        "regularity_flag": rep.regularity_flag,
        "exact": rep.exact,
        "effective_tol": eff,
        "notes": rep.notes,
    }
    if rep.surface is not None:
        results["surface"] = rep.surface
    checks = [{"name": "weak-duality", "passed": all(g >= -eff for g in rep.gap), "tol": eff}]
    return results, checks


def _cmd_yf(inst, tol, grid):
    if inst.f is None or inst.points is None:
        raise InputError("check-young-fenchel: needs 'f' and 'points' with 'x' and 'y'")
    F = ScenarioFn(inst.space, inst.f)
    x = np.atleast_1d(np.asarray(inst.points.get("x", [0.0]), dtype=float))
    ys = inst.points.get("y")
    if ys is None:
        raise InputError("points.y: missing")
    Y = np.asarray(ys, dtype=float).reshape(inst.space.atom_count, -1)
    y = L0Point(inst.space, Y)
    gap = young_fenchel_gap(F, x, y)
    sub = is_subgradient(F, x, y, tol)
    results = {"x": x.tolist(), "y": Y.tolist(), "gap": gap.tolist(), "is_subgradient": sub}
    checks = [{"name": "young-fenchel-nonnegative", "passed": all(g >= -tol for g in gap), "tol": tol},
              {"name": "equality-iff-subgradient",
               "passed": all((g <= tol) == s for g, s in zip(gap, sub) if np.isfinite(F[0].value(x))), "tol": tol}]
    return results, checks


def _cmd_mr(inst, tol, grid):
    phi = perturbation_of(inst)
    ys = _grid(inst, phi, grid)
    rows = moreau_rockafellar_check(phi, ys, tol)
    worst = max((r for row in rows for r in row.residual), default=0.0)
    results = {"grid": [{"y": r.y, "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual} for r in rows],
               "max_residual": worst}
    return results, [{"name": "moreau-rockafellar", "passed": bool(worst <= tol), "tol": tol}]


def _cmd_opt(inst, tol, grid):
    phi = perturbation_of(inst)
    cert = inst.certificate
    if not cert or "x" not in cert or "z" not in cert:
        raise InputError("certificate: needs 'x' and 'z'")
    x = np.atleast_1d(np.asarray(cert["x"], dtype=float))
    Z = np.asarray(cert["z"], dtype=float).reshape(inst.space.atom_count, -1)
    res = check_optimality(phi, x, L0Point(inst.space, Z), tol)
    results = {"x": x.tolist(), "z": Z.tolist(), "residual": res.residuals, "subgradient_form": res.subgradient_ok,
               "primal_at_x": res.primal_values, "dual_at_z": res.dual_values, "diagnostics": res.diagnostics}
    checks = [{"name": "optimality", "passed": res.ok, "tol": tol}]
    if inst.scheme == "fenchel":
        from .schemes import fenchel_optimality_check

        c = fenchel_optimality_check(phi.f, phi.g, phi.A, x, Z, tol)
        results["scheme_residuals"] = [list(r) for r in c.residuals]
        checks.append({"name": "fenchel-conditions", "passed": c.ok, "tol": tol})
    elif inst.scheme in ("fenchel-lagrange", "risk"):
        from .schemes import fl_optimality_check

        c = fl_optimality_check(phi.f, phi.S, x, Z, tol)
        results["scheme_residuals"] = [list(r) for r in c.residuals]
        results["scheme_diagnostics"] = c.diagnostics
        checks.append({"name": "fenchel-lagrange-conditions", "passed": c.ok, "tol": tol})
    return results, checks


def _cmd_farkas(inst, tol, grid):
    phi = perturbation_of(inst)
    try:
        v = farkas_decide(phi, tol, y_grid=None if grid is None and inst.grid is None else _grid(inst, phi, grid))
    except RegularityRequired as err:
        return {"verdict": "refused", "diagnostic": str(err)}, [{"name": "regularity-precondition", "passed": False, "tol": tol}]
    results = {"verdict": v.kind}
    if v.kind == "primal-nonnegative":
        results["z"] = v.z.tolist()
        results["conj_at_z"] = v.conj_values
        ok = all(c <= tol for c in v.conj_values)
    else:
        results["atom"] = v.atom
        results["x_evidence"] = None if v.x_evidence is None else v.x_evidence.tolist()
        results["value_at_x"] = v.evidence_value
        ok = v.evidence_value is not None and v.evidence_value < 0
    return results, [{"name": "farkas-evidence", "passed": bool(ok), "tol": tol}]


def _cmd_probe(inst, tol, grid):
    phi = perturbation_of(inst)
    ys = _grid(inst, phi, grid)
    rep = regularity_probe(phi, ys, max(tol, 1e-7))
    results = {"verdict": rep.flag,
               "points": [{"y": p.y, "attained": p.attained, "inf_value": p.inf_value, "conjugate_value": p.lhs,
                           "ok": p.ok, "notes": p.notes} for p in rep.points]}
    return results, [{"name": "regularity", "passed": rep.flag == "verified", "tol": max(tol, 1e-7)}]


_DISPATCH = {
    "conjugate": _cmd_conjugate,
    "solve": _cmd_solve,
    "check-young-fenchel": _cmd_yf,
    "check-moreau-rockafellar": _cmd_mr,
    "check-optimality": _cmd_opt,
    "farkas": _cmd_farkas,
    "probe-regularity": _cmd_probe,
}


def run(inst: Instance, command: str, tol: Optional[float] = None, grid=None) -> tuple[dict, int]:
    """Execute a command; returns the report and the exit status."""
    if command not in _DISPATCH:
        raise InputError(f"--command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    tol = inst.tol if tol is None else float(tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            results, checks = _DISPATCH[command](inst, tol, grid)
        except (ImproperFunctionError, NotExactError) as err:
            raise InputError(f"{command}: {err}") from err
    passed = all(c["passed"] for c in checks)
    report = {
        "digest": inst.digest,
        "command": command,
        "scheme": inst.scheme,
        "atoms": inst.space.atom_count,
        "tol": tol,
        "status": "pass" if passed else "fail",
        "results": results,
        "checks": checks,
    }
    return report, EXIT_PASS if passed else EXIT_FAIL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="vecdual", description="Scenario-based convex duality toolkit.")
    ap.add_argument("--instance", required=True, help="path to a JSON instance")
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--tol", type=float, default=None, help="tolerance (overrides the instance)")
    ap.add_argument("--grid", default=None, help="y-grid: 'a:b:n', '0,1,2' or '1,0;0,1' for vectors")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        if args.threads < 1:
            raise InputError("--threads: must be positive")
        inst = parse_instance(args.instance)
        grid = None if args.grid is None else parse_grid(args.grid)
        with workers(args.threads):
            report, code = run(inst, args.command, args.tol, grid)
    except InputError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.buffer.write(emit_report(report, args.format))
    sys.stdout.flush()
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
