import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vecdual.convex import (INF, Affine, DegenerateQuadraticError, Epigraph1D, ImproperFunctionError, IndicatorBox,
                            PWL1D, Quadratic, Sampled1D, SupportBox, closure, conjugate_exact,
                            conjugate_sampled_brute, conjugate_sampled_llt, from_epigraph, inf_convolution,
                            interval_indicator, max_affine, minimize, sample, subdifferential_at)

import gen

ABS = PWL1D([0], [-1, 1], (0, 0))


def brute_conjugate(f, y, grid):
    vals = np.array([f(x) for x in grid])
    return float(np.max(y * grid - vals))


# --- representation -------------------------------------------------------------

def test_pwl_rejects_decreasing_slopes():
    with pytest.raises(ValueError, match="convexity violated at breakpoint 1"):
        PWL1D([0, 1], [-1, 2, 1], (0, 0))


def test_pwl_rejects_wrong_slope_count():
    with pytest.raises(ValueError, match="slopes"):
        PWL1D([0, 1], [0, 1], (0, 0))


def test_pwl_drops_redundant_breakpoints():
    f = PWL1D([0, 1], [1, 1, 2], (0, 0))
    assert f.breakpoints == (1.0,) and f.slopes == (1.0, 2.0)


def test_quadratic_rejects_indefinite():
    with pytest.raises(ValueError):
        Quadratic([[1, 0], [0, -1]])


def test_degenerate_quadratic_conjugate_rejected():
    q = Quadratic([[1.0, 0.0], [0.0, 0.0]], [0.0, 1.0])  # b leaves the range of Q
    with pytest.raises(DegenerateQuadraticError, match="range"):
        conjugate_exact(q)
    # a purely affine function is not degenerate: its conjugate is a point indicator
    assert conjugate_exact(Affine([1.0]))([1.0]) == 0.0


# --- exact conjugates ----------------------------------------------------------

def test_half_square_is_self_dual():
    q = Quadratic([[1.0]])
    assert conjugate_exact(q).same_function(q)


def test_interval_indicator_conjugate_is_abs():
    g = conjugate_exact(interval_indicator(-1, 1))
    for y in (-3.0, -0.5, 0.0, 2.0):
        assert g(y) == abs(y)


def test_abs_conjugate_matches_brute_force():
    fc = conjugate_exact(ABS)
    grid = np.linspace(-50, 50, 20001)
    for y in np.linspace(-1, 1, 9):
        assert fc(y) == 0.0
        assert brute_conjugate(ABS, y, grid) == pytest.approx(0.0, abs=1e-12)
    for y in (-1.5, 1.01, 3.0):
        assert fc(y) == INF
        assert brute_conjugate(ABS, y, grid) > 0.4


def test_box_conjugates():
    box = IndicatorBox([-1, 0], [1, 2])
    s = conjugate_exact(box)
    assert isinstance(s, SupportBox)
    assert s([1.0, -1.0]) == 1.0 and s([-2.0, 3.0]) == 8.0
    assert conjugate_exact(s).same_function(box)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_pwl_conjugate_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    f = gen.random_pwl(rng, walls=False)
    fc = conjugate_exact(f)
    lo, hi = min(f.slopes), max(f.slopes)
    grid = np.linspace(-60, 60, 4801)
    for y in np.linspace(lo, hi, 7):
        assert fc(y) == pytest.approx(brute_conjugate(f, y, grid), abs=1e-9)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=60, deadline=None)
def test_biconjugation_is_exact(seed):
    rng = np.random.default_rng(seed)
    f = gen.random_pwl(rng)
    assert f.conjugate().conjugate().fields() == f.normalized().fields()
    q = gen.random_quadratic(rng)
    assert q.conjugate().conjugate().same_function(q, rtol=1e-9)
    b = gen.random_box(rng)
    assert conjugate_exact(conjugate_exact(b)).same_function(b)


# --- sampled conjugates ------------------------------------------------------------

def test_llt_examples():
    f = Sampled1D([-1, 0, 1], [0.5, 0.0, 0.5])
    assert list(conjugate_sampled_llt(f, [-1, 0, 1]).values) == [0.5, 0.0, 0.5]
    z = Sampled1D([0], [0.0])
    assert list(conjugate_sampled_llt(z, [-2, 0, 3]).values) == [0.0, 0.0, 0.0]
    a = Sampled1D([-1, 0, 1], [1.0, 0.0, 1.0])
    assert list(conjugate_sampled_llt(a, [-2, 0, 2]).values) == [1.0, 0.0, 1.0]


def test_llt_rejects_unsorted_dual_grid():
    with pytest.raises(ValueError):
        conjugate_sampled_llt(Sampled1D([0, 1], [0, 1]), [1, 0])


@given(st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_llt_equals_double_loop(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 80)), int(rng.integers(1, 80))
    x = np.sort(rng.choice(np.arange(-400, 400) / 8.0, size=n, replace=False))
    v = rng.uniform(0, 3) * x ** 2 + rng.uniform(-1, 1) * x + np.abs(x - rng.uniform(-20, 20))
    s = np.sort(rng.choice(np.arange(-800, 800) / 16.0, size=m, replace=False))
    f = Sampled1D(x, v)
    assert np.array_equal(conjugate_sampled_llt(f, s).values, conjugate_sampled_brute(f, s))


# --- infimal convolution -------------------------------------------------------------

def test_point_indicator_is_identity_for_inf_convolution():
    zero_ind = interval_indicator(0, 0)
    g = PWL1D([-1, 2], [-2, 0.5, 3], (2, 1))
    assert inf_convolution(zero_ind, g).same_function(g)


def test_huber_matches_inner_minimization():
    h = inf_convolution(ABS, Quadratic([[1.0]]))
    p = np.linspace(-8, 8, 160001)
    for x in np.linspace(-3, 3, 25):
        brute = float(np.min(np.abs(p) + 0.5 * (x - p) ** 2))
        expect = 0.5 * x * x if abs(x) <= 1 else abs(x) - 0.5
        assert h(x) == pytest.approx(expect, abs=1e-12)
        assert h(x) == pytest.approx(brute, abs=1e-6)


def test_interval_indicators_convolve_to_sum_interval():
    h = inf_convolution(interval_indicator(0, 1), interval_indicator(2, 3))
    assert h.normalized().fields() == interval_indicator(2, 4).normalized().fields()


def test_inf_convolution_unbounded_below_is_improper():
    with pytest.raises(ImproperFunctionError):
        inf_convolution(Affine([1.0]), Affine([2.0]))


@given(st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_inf_convolution_conjugate_identity(seed):
    rng = np.random.default_rng(seed)
    f, g = gen.random_pwl(rng), gen.random_pwl(rng)
    try:
        h = inf_convolution(f, g)
    except ImproperFunctionError:
        return
    lhs = conjugate_exact(h)
    rhs = f.conjugate().add(g.conjugate())
    assert lhs.normalized().fields() == rhs.normalized().fields()


# --- closure -------------------------------------------------------------------------

def test_closure_of_closed_pwl_is_identity():
    assert closure(ABS).fields() == ABS.fields()


def test_closure_restores_chord():
    f = Sampled1D([0, 1, 2], [0.0, 5.0, 2.0])
    assert closure(f)(1.0) == 1.0


def test_closure_fills_open_gap():
    # max(x, 0) sampled with its value at 0 removed: only the limit is known there
    grid = [-2, -1, 0, 1, 2]
    vals = [0.0, 0.0, 10.0, 1.0, 2.0]
    f = Sampled1D(grid, vals, limits=[INF, INF, 0.0, INF, INF])
    c = closure(f)
    for x in np.linspace(-2, 2, 17):
        assert c(x) == pytest.approx(max(x, 0.0), abs=1e-12)


# --- minimization ----------------------------------------------------------------------

def test_minimize_parabola():
    r = minimize(Quadratic([[2.0]], [-2.0], 1.0))
    assert r.value == pytest.approx(0.0, abs=1e-12) and r.witness_scalar == pytest.approx(1.0)


def test_minimize_sampled_exponential_flags_boundary():
    grid = np.linspace(-10, 1, 221)
    r = minimize(sample(np.exp, grid))
    assert not r.attained and not r.exact
    assert "not attained within grid, decreasing toward" in r.note
    assert r.value == pytest.approx(0.0, abs=1e-4)
    # refinement oracle: the infimum keeps decreasing as the grid extends left
    extended = minimize(sample(np.exp, np.linspace(-20, 1, 421)))
    assert extended.value < r.value


def test_minimize_abs_plus_interval():
    r = minimize(ABS.add(interval_indicator(2, 3)))
    assert r.value == 2.0 and r.witness_scalar == 2.0 and r.attained and r.exact
    grid = np.linspace(2, 3, 1001)
    assert r.value == float(np.min(np.abs(grid)))


def test_minimize_unbounded_affine():
    r = minimize(Affine([1.0]))
    assert r.value == -INF and not r.attained


# --- subdifferential ---------------------------------------------------------------------

def test_subdifferential_examples():
    i = subdifferential_at(ABS, 0.0)
    assert (i.lo, i.hi) == (-1.0, 1.0)
    g = subdifferential_at(Quadratic([[1.0]]), 3.0)
    assert (g.lo, g.hi) == (3.0, 3.0)
    n = subdifferential_at(interval_indicator(0, 1), 1.0)
    assert (n.lo, n.hi) == (0.0, INF)
    # definition check: s is a subgradient iff f(p) >= f(1) + s (p - 1) on sampled p
    ps = np.linspace(0, 1, 101)
    for s in (0.0, 2.0, 100.0):
        assert np.all(s * (ps - 1) <= 0)
    assert np.any(-0.5 * (ps - 1) > 0)


def test_subdifferential_outside_domain_is_empty():
    assert subdifferential_at(interval_indicator(0, 1), 2.0).empty


# --- epigraphs ----------------------------------------------------------------------------

def test_from_epigraph_roundtrip():
    assert from_epigraph(Epigraph1D(ABS)).fields() == ABS.fields()


def test_from_epigraph_halfplanes():
    const = from_epigraph(Epigraph1D.from_halfplanes([(0, -1, -2)]))  # t >= 2
    assert const(-7.0) == 2.0 and const(11.0) == 2.0
    h = from_epigraph(Epigraph1D.from_halfplanes([(1, -1, 0), (-1, 0, 0)]))  # t >= x, x >= 0
    for x in np.linspace(-2, 3, 21):
        assert h(x) == (x if x >= 0 else INF)


def test_from_epigraph_rejects_downward_region():
    with pytest.raises(ValueError, match="upward"):
        Epigraph1D.from_halfplanes([(0, 1, 1)])


def test_max_affine_matches_pointwise_max():
    lines = [(-1.0, 0.0), (0.5, -1.0), (2.0, -4.0)]
    f = max_affine(lines)
    for x in np.linspace(-5, 5, 41):
        assert f(x) == pytest.approx(max(s * x + c for s, c in lines), abs=1e-12)
