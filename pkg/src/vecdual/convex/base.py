"""Common interface for proper convex functions and their lazy combinations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

INF = float("inf")


class ImproperFunctionError(ValueError):
    """Raised when an operation would produce a function that is not proper."""


class NotExactError(NotImplementedError):
    """No closed-form representation is available for the requested operation."""


@dataclass(frozen=True)
class Interval:
    """Closed interval of reals; ``lo > hi`` encodes the empty set."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def __contains__(self, s: float) -> bool:
        return self.lo <= s <= self.hi

    def contains(self, s: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= s <= self.hi + tol

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    @classmethod
    def empty_set(cls) -> "Interval":
        return cls(INF, -INF)


@dataclass
class MinResult:
    """Outcome of minimizing a convex function.

    ``attained`` is exact for closed-form variants; when ``exact`` is False the
    flag comes from a heuristic and ``note`` says which one.
    """

    value: float
    witness: Optional[np.ndarray]
    attained: bool
    exact: bool = True
    argmin: Optional[Interval] = None
    note: str = ""
    trace: list = field(default_factory=list)

    @property
    def witness_scalar(self) -> Optional[float]:
        if self.witness is None:
            return None
        return float(np.ravel(self.witness)[0])


def as_vec(x, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if v.size != dim:
        raise ValueError(f"expected a point of dimension {dim}, got {v.size}")
    return v


class ConvexFn:
    """A proper convex lower semicontinuous function on R^dim.

    Subclasses implement ``value``.  Optional capabilities:

    * ``conjugate()`` -- closed-form conjugate (raises :class:`NotExactError`),
    * ``one_sided(x)`` / ``domain1d()`` -- one-sided derivatives for ``dim == 1``,
    * ``cvx(var)`` -- a cvxpy epigraph model ``(expr, constraints)``.
    """

    dim: int = 1
    exact: bool = False

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return self.value(as_vec(x, self.dim))

    def conjugate(self) -> "ConvexFn":
        raise NotExactError(f"{type(self).__name__} has no closed-form conjugate")

    def one_sided(self, x: float) -> tuple[float, float]:
        raise NotImplementedError(f"{type(self).__name__} does not expose one-sided slopes")

    def domain1d(self) -> tuple[float, float]:
        raise NotImplementedError(f"{type(self).__name__} does not expose its domain")

    def cvx(self, var):
        raise NotImplementedError(f"{type(self).__name__} has no cvxpy model")

    def leaves(self):
        yield self

    # combinators
    def __add__(self, other: "ConvexFn") -> "ConvexFn":
        return Sum([self, other])

    def precompose(self, matrix, shift=None) -> "ConvexFn":
        return Precompose(self, matrix, shift)

    def tilt(self, y) -> "ConvexFn":
        """``x -> f(x) - <x, y>``."""
        from .quadratic import Affine

        return Sum([self, Affine(-as_vec(y, self.dim), 0.0)])


class Sum(ConvexFn):
    def __init__(self, parts: Sequence[ConvexFn]):
        flat: list[ConvexFn] = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, Sum) else [p])
        if not flat:
            raise ValueError("empty sum")
        dims = {p.dim for p in flat}
        if len(dims) != 1:
            raise ValueError(f"summands have different dimensions: {sorted(dims)}")
        self.parts = flat
        self.dim = flat[0].dim

    def value(self, x):
        total = 0.0
        for p in self.parts:
            v = p.value(x)
            if v == INF:
                return INF
            total += v
        return total

    def one_sided(self, x):
        lo = hi = 0.0
        for p in self.parts:
            a, b = p.one_sided(x)
            lo = -INF if (lo == -INF or a == -INF) else lo + a
            hi = INF if (hi == INF or b == INF) else hi + b
        return lo, hi

    def domain1d(self):
        lo, hi = -INF, INF
        for p in self.parts:
            a, b = p.domain1d()
            lo, hi = max(lo, a), min(hi, b)
        return lo, hi

    def cvx(self, var):
        exprs, cons = [], []
        for p in self.parts:
            e, c = p.cvx(var)
            exprs.append(e)
            cons.extend(c)
        return sum(exprs[1:], exprs[0]), cons

    def leaves(self):
        for p in self.parts:
            yield from p.leaves()

    def __repr__(self):
        return " + ".join(repr(p) for p in self.parts)


class Precompose(ConvexFn):
    """``x -> f(M x + shift)`` for a linear map ``M`` from R^dim to R^(f.dim)."""

    def __init__(self, f: ConvexFn, matrix, shift=None):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != f.dim:
            raise ValueError(f"operator has {m.shape[0]} rows but the function has dimension {f.dim}")
        self.f = f
        self.matrix = m
        self.shift = np.zeros(f.dim) if shift is None else as_vec(shift, f.dim)
        self.dim = m.shape[1]

    def _map(self, x):
        return self.matrix @ x + self.shift

    def value(self, x):
        return self.f.value(self._map(x))

    def one_sided(self, x):
        if self.dim != 1 or self.f.dim != 1:
            raise NotImplementedError("slopes need a scalar map")
        a = float(self.matrix[0, 0])
        u = a * float(np.ravel(x)[0]) + float(self.shift[0])
        lo, hi = self.f.one_sided(u)
        if a > 0:
            return a * lo, a * hi
        if a < 0:
            return a * hi, a * lo
        return (0.0, 0.0) if self.f.value(np.array([u])) < INF else (-INF, INF)

    def domain1d(self):
        if self.dim != 1 or self.f.dim != 1:
            raise NotImplementedError("domain needs a scalar map")
        a, c = float(self.matrix[0, 0]), float(self.shift[0])
        lo, hi = self.f.domain1d()
        if a == 0:
            return (-INF, INF) if lo <= c <= hi else (INF, -INF)
        ends = sorted(((lo - c) / a, (hi - c) / a))
        return ends[0], ends[1]

    def cvx(self, var):
        return self.f.cvx(self.matrix @ var + self.shift)

    def conjugate(self):
        if np.linalg.matrix_rank(self.matrix) < self.matrix.shape[0]:
            raise NotExactError("conjugate of a composition needs an operator with full row rank")
        from .special import ComposedConjugate

        return ComposedConjugate(self.f.conjugate(), self.matrix, self.shift, original=self)

    def leaves(self):
        yield from self.f.leaves()

    def __repr__(self):
        return f"Precompose({self.f!r}, {self.matrix.tolist()}, {self.shift.tolist()})"


class Scaled(ConvexFn):
    """``x -> c * f(x)`` for ``c > 0``."""

    def __init__(self, f: ConvexFn, c: float):
        if not c > 0:
            raise ValueError("scale must be positive")
        self.f, self.c, self.dim = f, float(c), f.dim

    def value(self, x):
        v = self.f.value(x)
        return v if v == INF else self.c * v

    def one_sided(self, x):
        lo, hi = self.f.one_sided(x)
        return self.c * lo, self.c * hi

    def domain1d(self):
        return self.f.domain1d()

    def cvx(self, var):
        e, cons = self.f.cvx(var)
        return self.c * e, cons

    def conjugate(self):
        # (c f)^*(y) = c f^*(y / c)
        return Scaled(Precompose(self.f.conjugate(), np.eye(self.dim) / self.c), self.c)

    def leaves(self):
        yield from self.f.leaves()


class ConjugateOf(ConvexFn):
    """Conjugate of ``h`` evaluated pointwise by minimizing ``h - <., y>``."""

    def __init__(self, h: ConvexFn, tol: float = 1e-10):
        self.h, self.dim, self.tol = h, h.dim, tol

    def _solve(self, y) -> MinResult:
        from .minimize import minimize

        return minimize(self.h.tilt(y), tol=self.tol)

    def value(self, y):
        r = self._solve(y)
        return -r.value

    def one_sided(self, y):
        if self.dim != 1:
            raise NotImplementedError
        r = self._solve(y)
        if r.argmin is None:
            raise NotImplementedError("argmin interval unavailable for this inner problem")
        if r.argmin.empty:
            return -INF, INF
        return r.argmin.lo, r.argmin.hi

    def domain1d(self):
        lo, hi = self.h.domain1d()
        if np.isfinite(lo) and np.isfinite(hi):
            return -INF, INF
        raise NotImplementedError("domain of a numeric conjugate over an unbounded domain")

    def conjugate(self):
        return self.h

    def __repr__(self):
        return f"ConjugateOf({self.h!r})"
