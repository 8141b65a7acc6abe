import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vecdual import (KernelTable, Partition, RiskSpec, conditional_risk, fenchel_lagrange_solve, integral_operator,
                     make_space, paste, portfolio_instance)
from vecdual.applications import cvar_envelope_indicator
from vecdual.convex import INF, Affine, ConjugateOf, CVaRRisk, EntropicRisk, PWL1D, Quadratic, Sampled1D
from vecdual.measure import L0Ext

ABS = PWL1D([0], [-1, 1], (0, 0))


def cvar_by_sorting(probs, alpha, loss):
    """Average of the worst alpha-mass of the loss."""
    order = np.argsort(-np.asarray(loss, dtype=float))
    left, total = alpha, 0.0
    for j in order:
        take = min(probs[j], left)
        total += take * loss[j]
        left -= take
        if left <= 0:
            break
    return total / alpha


# --- kernel integral operators -------------------------------------------------------

def test_linear_kernels_sum_linearly():
    outer = make_space([1, 1])
    c = [[1.0, 2.0], [-1.0, 3.0]]
    nu = [0.5, 2.0]
    F = integral_operator(KernelTable(outer, nu, [[Affine([cij]) for cij in row] for row in c]))
    for i in range(2):
        slope = sum(n * cij for n, cij in zip(nu, c[i]))
        for x in (-2.0, 0.0, 1.5):
            assert F[i]([x]) == pytest.approx(slope * x, abs=1e-12)


def test_identical_quadratic_kernels():
    half = Quadratic([[1.0]])
    F = integral_operator(KernelTable(make_space([1.0]), [0.5, 0.5], [[half, half]]))
    assert F[0].same_function(half)


def test_abs_kernels_give_pwl_sum():
    k2 = PWL1D([1], [-1, 1], (1, 0))
    F = integral_operator(KernelTable(make_space([1.0]), [1, 1], [[ABS, k2]]))
    for x in np.linspace(-3, 4, 29):
        assert F[0](x) == abs(x) + abs(x - 1)
    assert F[0].minimize().value == 1.0 and (F[0].minimize().argmin.lo, F[0].minimize().argmin.hi) == (0.0, 1.0)


def test_mixed_kernels_warn_and_note():
    samp = Sampled1D([-1, 0, 1], [1.0, 0.0, 1.0])
    with pytest.warns(UserWarning, match="mixed kernel"):
        F = integral_operator(KernelTable(make_space([1.0]), [1, 1], [[ABS, samp]]))
    assert F.notes and F[0]([0.5]) == pytest.approx(1.0)


# --- conditional risk -------------------------------------------------------------------

def test_entropic_constant_payoff():
    s = make_space([0.25] * 4)
    spec = RiskSpec("entropic", 2.5, Partition.from_blocks([[0, 1], [2, 3]]), s)
    F = conditional_risk(spec)
    assert F([3.0] * 4).tolist() == pytest.approx([-3.0, -3.0], abs=1e-12)


def test_cvar_examples():
    s = make_space([0.25] * 4)
    one = conditional_risk(RiskSpec("cvar", 0.5, Partition.trivial(4), s))
    assert one([0, 0, -1, -1]).tolist() == pytest.approx([1.0])
    two = conditional_risk(RiskSpec("cvar", 0.5, Partition.from_blocks([[0, 1], [2, 3]]), s))
    expect = cvar_by_sorting([0.5, 0.5], 0.5, [0, 1])
    assert two([0, -1, 0, -1]).tolist() == pytest.approx([expect, expect])


def test_risk_locality_under_paste():
    s = make_space([0.2, 0.3, 0.1, 0.4])
    p = Partition.from_blocks([[0, 1], [2, 3]])
    F = conditional_risk(RiskSpec("cvar", 0.3, p, s))
    a, b = np.array([1.0, -2.0, 0.5, 3.0]), np.array([-1.0, 4.0, 2.0, -0.5])
    glued = paste([L0Ext(a), L0Ext(b)], p).values
    va, vb, vg = F(a), F(b), F(glued)
    assert vg.tolist() == [va[0], vb[1]]


@given(st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_risk_monotone_and_convex(seed):
    rng = np.random.default_rng(seed)
    s = make_space(rng.dirichlet(np.ones(4)))
    p = Partition.from_blocks([[0, 2], [1, 3]])
    for spec in (RiskSpec("cvar", 0.4, p, s), RiskSpec("entropic", 1.5, p, s)):
        F = conditional_risk(spec)
        x = rng.normal(size=4)
        y = x + np.abs(rng.normal(size=4))
        assert F(x).ge(F(y), tol=1e-12)
        z = rng.normal(size=4)
        mid = F(0.5 * (x + z)).values
        assert np.all(mid <= 0.5 * (F(x).values + F(z).values) + 1e-12)


def test_continuity_from_above():
    s = make_space([0.5, 0.5])
    F = conditional_risk(RiskSpec("entropic", 1.0, Partition.trivial(2), s))
    x = np.array([0.3, -1.2])
    seq = [F(x + 2.0 ** -k).values[0] for k in range(30)]
    assert all(a <= b for a, b in zip(seq[:-1], seq[1:]))
    assert seq[-1] == pytest.approx(F(x).values[0], abs=1e-8)


def test_cvar_envelope_matches_brute_force_over_densities():
    """The sorting formula equals the maximum of E_q[loss] over sampled densities q <= p / alpha."""
    probs, alpha = np.array([0.2, 0.5, 0.3]), 0.4
    step = 0.01
    qs = []
    for a, b in itertools.product(np.arange(0, 1 + step / 2, step), repeat=2):
        q = np.array([a, b, 1 - a - b])
        if q[2] >= -1e-12 and np.all(q <= probs / alpha + 1e-12):
            qs.append(q)
    qs = np.array(qs)
    rng = np.random.default_rng(7)
    for _ in range(20):
        loss = rng.normal(size=3)
        assert float(np.max(qs @ loss)) == pytest.approx(cvar_by_sorting(probs, alpha, loss), abs=0.05)
        assert CVaRRisk(probs, alpha)(-loss) == pytest.approx(cvar_by_sorting(probs, alpha, loss), abs=1e-12)


def test_cvar_numeric_conjugate_is_envelope_indicator():
    probs, alpha = np.array([0.5, 0.5]), 0.5
    f = CVaRRisk(probs, alpha)
    num = ConjugateOf(f)
    for y in ([-0.5, -0.5], [-1.0, 0.0], [-0.25, -0.75], [0.5, -1.5], [-0.4, -0.4], [1.0, 1.0]):
        ind = cvar_envelope_indicator(probs, alpha, y)
        v = num(y)
        if ind == 0.0:
            assert v == pytest.approx(0.0, abs=1e-5)
        else:
            assert v > 1e3 or v == INF


# --- portfolio -----------------------------------------------------------------------------

def test_portfolio_zero_payoff_bound():
    s = make_space([0.5, 0.5])
    f, S = portfolio_instance(RiskSpec("entropic", 1.0, Partition.trivial(2), s), payoff_cap=1.0)
    assert S.contains([0.0, 0.0])
    r = fenchel_lagrange_solve(f, S, tol=1e-6)
    assert r.primal_value[0] <= f([0.0, 0.0])[0] + 1e-9


def test_portfolio_capped_entropic_zero_gap():
    s = make_space([0.5, 0.5])
    f, S = portfolio_instance(RiskSpec("entropic", 1.0, Partition.trivial(2), s), payoff_cap=1.0)
    r = fenchel_lagrange_solve(f, S, tol=1e-6)
    assert abs(r.gap[0]) <= 1e-6
    # grid and symmetry oracle: log(mean(exp(-x))) over E[x] >= 0 and x <= 1 is minimized at x = (1, 1)
    g = np.linspace(-1, 1, 401)
    X1, X2 = np.meshgrid(g, g)
    vals = np.where(X1 + X2 >= 0, np.log(0.5 * (np.exp(-X1) + np.exp(-X2))), np.inf)
    assert r.primal_value[0] == pytest.approx(float(vals.min()), abs=1e-6)


def test_portfolio_uncapped_is_unbounded():
    # constant payoffs c >= 0 are feasible and have risk -c, so the infimum is -inf
    s = make_space([0.5, 0.5])
    f, S = portfolio_instance(RiskSpec("entropic", 1.0, Partition.trivial(2), s))
    r = fenchel_lagrange_solve(f, S, tol=1e-6)
    assert r.primal_value.tolist() == [-INF] and r.gap.tolist() == [0.0]
    assert r.regularity_flag == "undetermined"


def test_portfolio_single_atom_cvar():
    s = make_space([1.0])
    spec = RiskSpec("cvar", 0.5, Partition.trivial(1), s)
    f, S = portfolio_instance(spec)
    assert f([2.0]).tolist() == [-2.0]  # the risk of -x on one atom is -x
    assert fenchel_lagrange_solve(f, S).primal_value.tolist() == [-INF]
    f, S = portfolio_instance(spec, payoff_cap=1.0)
    r = fenchel_lagrange_solve(f, S, tol=1e-6)
    assert r.primal_value[0] == pytest.approx(-1.0, abs=1e-6) and abs(r.gap[0]) <= 1e-6


@pytest.mark.parametrize("n", [1, 2, 3])
def test_risk_biconjugate_recovers_value(n):
    rng = np.random.default_rng(n)
    probs = rng.dirichlet(np.ones(n))
    for rho in (EntropicRisk(probs, 1.3), CVaRRisk(probs, 0.4)):
        back = ConjugateOf(rho.conjugate())
        for _ in range(3):
            x = rng.normal(size=n)
            assert back(x) == pytest.approx(rho(x), abs=1e-6)
