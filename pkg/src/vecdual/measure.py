"""Finite weighted atoms standing in for a measure space.

Elements of the extended-real function space are vectors indexed by atoms, and
the almost-everywhere order is the componentwise order.  Arithmetic on
extended reals uses the convex-analysis conventions ``+inf + -inf = +inf``,
``0 * +inf = +inf`` and ``0 * -inf = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INF = float("inf")


def ext_add(a, b):
    """Extended-real addition; ``+inf`` absorbs ``-inf``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a + b
    out = np.where((a == INF) | (b == INF), INF, out)
    return out if out.ndim else float(out)


def ext_sub(a, b):
    return ext_add(a, -np.asarray(b, dtype=float))


def ext_mul(r, a):
    """Extended-real product with ``0 * +inf = +inf`` and ``0 * -inf = 0``."""
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    with np.errstate(invalid="ignore"):
        out = r * a
    out = np.where((r == 0) & (a == INF), INF, out)
    out = np.where((r == 0) & (a == -INF), 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MeasureSpace:
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("a measure space needs at least one atom")
        for i, v in enumerate(w):
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"weight of atom {i} must be positive and finite, got {v}")
        object.__setattr__(self, "weights", w)

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(sum(self.weights))

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)

    def normalized(self) -> "MeasureSpace":
        total = self.total_mass
        return MeasureSpace(tuple(w / total for w in self.weights))

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total_mass - 1.0) <= tol


def make_space(weights: Sequence[float]) -> MeasureSpace:
    return MeasureSpace(tuple(weights))


class L0Ext:
    """Extended-real vector indexed by atoms (an element of the extended L0 space)."""

    __slots__ = ("_v",)

    def __init__(self, values: Iterable[float]):
        v = np.array(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("L0Ext needs at least one atom")
        if np.isnan(v).any():
            raise ValueError("NaN is not an extended real")
        v.setflags(write=False)
        self._v = v

    @property
    def values(self) -> np.ndarray:
        return self._v

    def __len__(self) -> int:
        return self._v.size

    def __getitem__(self, i) -> float:
        return float(self._v[i])

    def __iter__(self):
        return (float(x) for x in self._v)

    def __repr__(self) -> str:
        return f"L0Ext({self.tolist()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, L0Ext):
            return NotImplemented
        return self._v.shape == other._v.shape and bool(np.array_equal(self._v, other._v))

    def __hash__(self):
        return hash(tuple(self._v))

    def tolist(self) -> list[float]:
        return [float(x) for x in self._v]

    def _check(self, other: "L0Ext"):
        if len(other) != len(self):
            raise ValueError(f"atom count mismatch: {len(self)} vs {len(other)}")

    def le(self, other: "L0Ext", tol: float = 0.0) -> bool:
        """The a.e. order: every atom satisfies ``self <= other``."""
        self._check(other)
        return bool(np.all((self._v <= other._v) | (self._v - tol <= other._v)))

    def ge(self, other: "L0Ext", tol: float = 0.0) -> bool:
        return other.le(self, tol)

    def __add__(self, other):
        o = other._v if isinstance(other, L0Ext) else other
        return L0Ext(ext_add(self._v, o))

    __radd__ = __add__

    def __neg__(self):
        return L0Ext(-self._v)

    def __sub__(self, other):
        o = other._v if isinstance(other, L0Ext) else other
        return L0Ext(ext_sub(self._v, o))

    def scale(self, r) -> "L0Ext":
        return L0Ext(ext_mul(r, self._v))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self._v)))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self._v >= 0))

    def is_positive(self) -> bool:
        return bool(np.all(self._v > 0))

    @classmethod
    def constant(cls, value: float, n: int) -> "L0Ext":
        return cls(np.full(n, float(value)))


@dataclass(frozen=True)
class Partition:
    """Measurable partition of the atoms; ``block_of[i]`` is the block of atom ``i``."""

    block_of: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(k) for k in self.block_of)
        if not b:
            raise ValueError("empty partition")
        labels = set(b)
        if labels != set(range(len(labels))):
            raise ValueError("block labels must be 0..k-1 with every block nonempty")
        object.__setattr__(self, "block_of", b)

    @property
    def block_count(self) -> int:
        return max(self.block_of) + 1

    @property
    def atom_count(self) -> int:
        return len(self.block_of)

    def blocks(self) -> list[np.ndarray]:
        arr = np.array(self.block_of)
        return [np.flatnonzero(arr == k) for k in range(self.block_count)]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "Partition":
        n = sum(len(b) for b in blocks)
        block_of = [-1] * n
        for k, blk in enumerate(blocks):
            if not blk:
                raise ValueError(f"block {k} is empty")
            for i in blk:
                if not 0 <= i < n or block_of[i] != -1:
                    raise ValueError(f"atom {i} is out of range or appears in two blocks")
                block_of[i] = k
        return cls(tuple(block_of))

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls((0,) * n)

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        return cls(tuple(range(n)))


def ess_extrema(family: Sequence[L0Ext], mode: str = "inf") -> L0Ext:
    """Essential infimum or supremum of a finite family (componentwise)."""
    if not family:
        raise ValueError("essential extremum of an empty family")
    n = len(family[0])
    for el in family:
        if len(el) != n:
            raise ValueError("family members live on different spaces")
    stack = np.vstack([el.values for el in family])
    if mode == "inf":
        return L0Ext(stack.min(axis=0))
    if mode == "sup":
        return L0Ext(stack.max(axis=0))
    raise ValueError(f"mode must be 'inf' or 'sup', got {mode!r}")


def cond_expectation(x: L0Ext, p: Partition, space: MeasureSpace) -> L0Ext:
    """Conditional expectation of a finite ``x`` given the sigma-algebra generated by ``p``."""
    if not x.is_finite():
        raise ValueError("conditional expectation needs finite values on every atom")
    if p.atom_count != space.atom_count or len(x) != space.atom_count:
        raise ValueError("partition, space and vector disagree on the atom count")
    w = space.as_array()
    out = np.empty(len(x))
    for blk in p.blocks():
        out[blk] = np.dot(w[blk], x.values[blk]) / w[blk].sum()
    return L0Ext(out)


def paste(pieces: Sequence[L0Ext], blocks: Partition) -> L0Ext:
    """Concatenate ``pieces`` along the partition: block ``k`` takes values from ``pieces[k]``."""
    if len(pieces) != blocks.block_count:
        raise ValueError(f"expected {blocks.block_count} pieces, got {len(pieces)}")
    out = np.empty(blocks.atom_count)
    for k, blk in enumerate(blocks.blocks()):
        if len(pieces[k]) != blocks.atom_count:
            raise ValueError("piece length does not match the partition")
        out[blk] = pieces[k].values[blk]
    return L0Ext(out)
