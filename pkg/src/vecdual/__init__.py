"""Scenario-based vector convex duality on finitely many atoms."""
from . import convex
from .applications import (KernelTable, RiskSpec, conditional_risk, integral_operator, portfolio_instance)
from .duality import (CompositePerturbation, DualityReport, FeasibilityError, FLPerturbation, Perturbation,
                      RegularityRequired, check_optimality, default_y_grid, dual_value, duality_report,
                      farkas_decide, moreau_rockafellar_check, regularity_probe)
from .measure import (L0Ext, MeasureSpace, Partition, cond_expectation, ess_extrema, make_space, paste)
from .scenario import (L0Point, ScenarioFn, extend_eval, is_subgradient, solve_primal, vec_conjugate,
                       young_fenchel_gap)
from .schemes import (Box, ConditionalExpectationCone, ConstraintSet, Halfspaces, LinearOp, fenchel_dual_solve,
                      fenchel_lagrange_solve, fenchel_optimality_check, fl_optimality_check, support_function)

__all__ = [
    "convex", "KernelTable", "RiskSpec", "conditional_risk", "integral_operator", "portfolio_instance",
    "CompositePerturbation", "DualityReport", "FeasibilityError", "FLPerturbation", "Perturbation",
    "RegularityRequired", "check_optimality", "default_y_grid", "dual_value", "duality_report", "farkas_decide",
    "moreau_rockafellar_check", "regularity_probe", "L0Ext", "MeasureSpace", "Partition", "cond_expectation",
    "ess_extrema", "make_space", "paste", "L0Point", "ScenarioFn", "extend_eval", "is_subgradient",
    "solve_primal", "vec_conjugate", "young_fenchel_gap", "Box", "ConditionalExpectationCone", "ConstraintSet",
    "Halfspaces", "LinearOp", "fenchel_dual_solve", "fenchel_lagrange_solve", "fenchel_optimality_check",
    "fl_optimality_check", "support_function",
]

__version__ = "0.1.0"
