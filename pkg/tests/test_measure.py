import numpy as np
import pytest
from hypothesis import given, strategies as st

from vecdual import L0Ext, Partition, cond_expectation, ess_extrema, make_space, paste
from vecdual.measure import INF, ext_add, ext_mul, ext_sub


def test_make_space_single_atom():
    s = make_space([1.0])
    assert s.atom_count == 1 and s.is_probability()


def test_make_space_uniform():
    s = make_space([0.25] * 4)
    assert s.atom_count == 4 and s.is_probability()
    assert np.allclose(s.as_array(), 0.25)


@pytest.mark.parametrize("w", [[1, -1], [0.5, 0.0], [], [float("inf")]])
def test_make_space_rejects(w):
    with pytest.raises(ValueError):
        make_space(w)


def test_extended_arithmetic_conventions():
    assert ext_add(INF, -INF) == INF
    assert ext_sub(INF, INF) == INF
    assert ext_mul(0.0, INF) == INF
    assert ext_mul(0.0, -INF) == 0.0
    assert ext_add(1.0, 2.0) == 3.0


def test_ess_extrema_examples():
    assert ess_extrema([L0Ext([1, 2]), L0Ext([2, 1])], "inf") == L0Ext([1, 1])
    assert ess_extrema([L0Ext([INF, 0])], "sup") == L0Ext([INF, 0])
    fam = [L0Ext([0, 3]), L0Ext([1, 1]), L0Ext([2, 2])]
    assert ess_extrema(fam, "sup") == L0Ext([2, 3])


def test_ess_extrema_rejects_empty():
    with pytest.raises(ValueError):
        ess_extrema([], "inf")


def test_cond_expectation_examples():
    s = make_space([1, 1])
    assert cond_expectation(L0Ext([1, 3]), Partition.trivial(2), s) == L0Ext([2, 2])
    assert cond_expectation(L0Ext([1, 3]), Partition.discrete(2), s) == L0Ext([1, 3])
    s3 = make_space([1, 1, 2])
    assert cond_expectation(L0Ext([0, 4, 8]), Partition.trivial(3), s3) == L0Ext([5, 5, 5])


def test_cond_expectation_rejects_infinite():
    with pytest.raises(ValueError):
        cond_expectation(L0Ext([1, INF]), Partition.trivial(2), make_space([1, 1]))


def test_paste_examples():
    two = Partition.from_blocks([[0], [1]])
    assert paste([L0Ext([1, 1]), L0Ext([2, 2])], two) == L0Ext([1, 2])
    assert paste([L0Ext([4, 5])], Partition.trivial(2)) == L0Ext([4, 5])
    p = Partition.from_blocks([[0], [1, 2]])
    assert paste([L0Ext([5, 9, 9]), L0Ext([9, 7, 7])], p) == L0Ext([5, 7, 7])


def test_partition_rejects_overlap_and_gaps():
    with pytest.raises(ValueError):
        Partition.from_blocks([[0, 1], [1]])
    with pytest.raises(ValueError):
        Partition.from_blocks([[0], [2]])


vals = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=6)


@given(vals, st.integers(0, 2 ** 16))
def test_tower_property_and_mass_preservation(xs, seed):
    rng = np.random.default_rng(seed)
    n = len(xs)
    w = rng.uniform(0.1, 2.0, n)
    s = make_space(w)
    labels = rng.integers(0, 3, n)
    blocks = [list(np.flatnonzero(labels == k)) for k in range(3) if np.any(labels == k)]
    p = Partition.from_blocks(blocks)
    x = L0Ext(xs)
    e = cond_expectation(x, p, s)
    # mass is preserved on each block and the projection is idempotent
    for b in p.blocks():
        assert np.isclose(np.dot(w[b], e.values[b]), np.dot(w[b], np.asarray(xs)[b]), rtol=1e-9, atol=1e-6)
    assert np.allclose(cond_expectation(e, p, s).values, e.values, rtol=1e-12, atol=1e-9)
    # coarsening to the trivial partition gives the global mean
    tower = cond_expectation(e, Partition.trivial(n), s)
    assert np.allclose(tower.values, cond_expectation(x, Partition.trivial(n), s).values, rtol=1e-9, atol=1e-6)


@given(st.lists(vals, min_size=1, max_size=4))
def test_ess_extrema_bounds_every_member(fam):
    n = min(len(v) for v in fam)
    family = [L0Ext(v[:n]) for v in fam]
    lo, hi = ess_extrema(family, "inf"), ess_extrema(family, "sup")
    for f in family:
        assert lo.le(f) and f.le(hi)
