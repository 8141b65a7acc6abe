"""Scalar convex functions on R^d with exact and numeric calculus."""
from .base import (INF, ConjugateOf, ConvexFn, ImproperFunctionError, Interval, MinResult, NotExactError,
                   Precompose, Scaled, Sum)
from .boxes import IndicatorBox, SupportBox
from .calculus import closure, conjugate, conjugate_exact, inf_convolution, subdifferential_at
from .minimize import as_pwl, as_quadratic, minimize
from .pwl import Epigraph1D, PWL1D, from_epigraph, interval_indicator, max_affine
from .quadratic import Affine, DegenerateQuadraticError, Quadratic, point_indicator
from .sampled import Sampled1D, conjugate_sampled_brute, conjugate_sampled_llt, sample
from .special import (ComposedConjugate, CVaRRisk, EntropicRisk, HyperbolaIndicator, HyperbolaSupport,
                      PolyhedronIndicator, PolyhedronSupport, RelativeEntropy)

__all__ = [
    "INF", "ConjugateOf", "ConvexFn", "ImproperFunctionError", "Interval", "MinResult", "NotExactError",
    "Precompose", "Scaled", "Sum", "IndicatorBox", "SupportBox", "closure", "conjugate", "conjugate_exact",
    "inf_convolution", "subdifferential_at", "as_pwl", "as_quadratic", "minimize", "Epigraph1D", "PWL1D",
    "from_epigraph", "interval_indicator", "max_affine", "Affine", "DegenerateQuadraticError", "Quadratic",
    "point_indicator", "Sampled1D", "conjugate_sampled_brute", "conjugate_sampled_llt", "sample",
    "ComposedConjugate", "CVaRRisk", "EntropicRisk", "HyperbolaIndicator", "HyperbolaSupport",
    "PolyhedronIndicator", "PolyhedronSupport", "RelativeEntropy",
]
