"""Conjugation, infimal convolution, closure and subdifferentials on the function catalog."""
from __future__ import annotations

from .base import INF, ConjugateOf, ConvexFn, ImproperFunctionError, Interval, NotExactError, Precompose, Scaled, Sum, as_vec
from .minimize import as_pwl, as_quadratic, minimize
from .quadratic import Affine, DegenerateQuadraticError, Quadratic, sum_quadratics
from .sampled import Sampled1D

_COMPOSITE = (Sum, Precompose, Scaled)


def conjugate_exact(f: ConvexFn, strict: bool = True) -> ConvexFn:
    """Closed-form conjugate.

    With ``strict`` an unconstrained singular quadratic whose linear term leaves
    ``range(Q)`` is rejected.  Raises :class:`NotExactError` when no closed form
    is available.
    """
    if strict and isinstance(f, Quadratic) and not isinstance(f, Affine) and f.is_degenerate():
        raise DegenerateQuadraticError(
            "singular Q with b outside range(Q): the function decreases linearly along null(Q); "
            "its conjugate lives on b + range(Q), which misses the origin")
    if isinstance(f, ConjugateOf):
        return f.h
    if isinstance(f, Sampled1D):
        return f.conjugate()
    if not isinstance(f, _COMPOSITE):
        return f.conjugate()
    p = as_pwl(f)
    if p is not None:
        return p.conjugate()
    q = as_quadratic(f)
    if q is not None:
        return q.conjugate()
    return f.conjugate()


def conjugate(f: ConvexFn) -> ConvexFn:
    """Closed-form conjugate when available, else a pointwise numeric one."""
    try:
        return conjugate_exact(f, strict=False)
    except NotExactError:
        return ConjugateOf(f)


def _same_dim(f: ConvexFn, g: ConvexFn):
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


def inf_convolution(f: ConvexFn, g: ConvexFn) -> ConvexFn:
    """Closed infimal convolution ``(f* + g*)*``.

    Exact PWL1D for one-dimensional PWL data and an exact quadratic for
    quadratic data; otherwise a lazily evaluated conjugate of the sum.
    """
    _same_dim(f, g)
    fc, gc = conjugate(f), conjugate(g)
    pf, pg = as_pwl(fc), as_pwl(gc)
    if pf is not None and pg is not None:
        try:
            return pf.add(pg).conjugate()
        except ImproperFunctionError as err:
            raise ImproperFunctionError("conjugate domains do not meet: the infimal convolution is -inf") from err
    qf, qg = as_quadratic(fc), as_quadratic(gc)
    if qf is not None and qg is not None:
        try:
            return sum_quadratics([qf, qg]).conjugate()
        except ImproperFunctionError as err:
            raise ImproperFunctionError("conjugate domains do not meet: the infimal convolution is -inf") from err
    h = Sum([fc, gc])
    try:
        minimize(h)
    except ImproperFunctionError as err:
        raise ImproperFunctionError("conjugate domains do not meet: the infimal convolution is -inf") from err
    return ConjugateOf(h)


def closure(f: ConvexFn) -> ConvexFn:
    """Largest closed convex minorant; closed variants come back unchanged."""
    if isinstance(f, Sampled1D):
        return f.closure()
    return f


def subdifferential_at(f: ConvexFn, x):
    """Subdifferential at ``x``.

    One-dimensional functions give an :class:`Interval` (empty when ``f(x)`` is
    ``+inf``).  A multi-dimensional quadratic gives its gradient, or None off
    the domain.
    """
    if f.dim == 1:
        xv = as_vec(x, 1)
        if hasattr(f, "subdifferential_at") and not isinstance(f, _COMPOSITE):
            return f.subdifferential_at(float(xv[0]))
        p = as_pwl(f)
        if p is not None:
            return p.subdifferential_at(float(xv[0]))
        if f.value(xv) == INF:
            return Interval.empty_set()
        return Interval(*f.one_sided(float(xv[0])))
    q = as_quadratic(f)
    if q is None:
        raise NotExactError(f"no subdifferential formula for {f!r}")
    xv = as_vec(x, f.dim)
    if q.value(xv) == INF:
        return None
    if q.constrained:
        raise NotExactError("the subdifferential of a restricted quadratic is an affine set")
    return q.gradient(xv)
