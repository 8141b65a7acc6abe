import numpy as np
import pytest
from hypothesis import given, strategies as st

from vecdual import (Box, ConditionalExpectationCone, Halfspaces, L0Point, LinearOp, Partition, ScenarioFn,
                     fenchel_dual_solve, fenchel_lagrange_solve, fenchel_optimality_check, fl_optimality_check,
                     make_space, support_function)
from vecdual.convex import INF, Affine, PWL1D, Quadratic, interval_indicator
from vecdual.duality import VERIFIED

S1 = make_space([1.0])
S2 = make_space([0.5, 0.5])
ABS = PWL1D([0], [-1, 1], (0, 0))
ABS_SHIFT = PWL1D([1], [-1, 1], (1, 0))
HALF_SQ = Quadratic([[1.0]])


def const(fn, space=S2):
    return ScenarioFn(space, [fn] * space.atom_count)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_adjoint_is_transpose(x, w):
    A = LinearOp([[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]])
    assert np.dot(A(x), w) == pytest.approx(np.dot(x, A.apply_adjoint(w)), rel=1e-12, abs=1e-9)
    assert np.array_equal(A.adjoint().matrix, A.matrix.T)


def test_support_function_examples():
    s = support_function(Box([-1], [1]))
    for y in (-2.0, 0.0, 3.5):
        assert s([y]) == abs(y)
    s = support_function(Box([0], [1]))
    for y in (-2.0, 0.0, 3.5):
        assert s([y]) == max(0.0, y)
    line = support_function(Halfspaces(Aeq=[[1.0, 1.0]], beq=[0.0]))
    assert line([2.0, 2.0]) == pytest.approx(0.0, abs=1e-9)
    assert line([-3.0, -3.0]) == pytest.approx(0.0, abs=1e-9)
    assert line([1.0, -1.0]) == INF and line([1.0, 0.0]) == INF


def test_cond_exp_cone_support_and_membership():
    s = make_space([0.25] * 4)
    C = ConditionalExpectationCone(s, Partition.from_blocks([[0, 1], [2, 3]]))
    assert C.contains([1, -1, 0, 0]) and not C.contains([1, -2, 0, 0])
    sup = C.support()
    assert sup([-1, -1, 0, 0]) == 0.0  # a nonpositive multiple of the block density
    assert sup([1, -1, 0, 0]) == INF


def test_fenchel_worked_example():
    f, g = const(ABS), const(ABS_SHIFT)
    r = fenchel_dual_solve(f, g, LinearOp([[1.0]]))
    assert r.primal_value.tolist() == [1.0, 1.0] and r.dual_value.tolist() == [1.0, 1.0]
    assert r.gap.tolist() == [0.0, 0.0] and r.regularity_flag == VERIFIED
    assert r.dual_solution.coords.ravel().tolist() == [-1.0, -1.0]
    # hand oracle: f* is the indicator of [-1, 1], g*(w) = w on [-1, 1]
    w = np.linspace(-1, 1, 2001)
    assert float(np.max(-w)) == 1.0


def test_fenchel_origin_example():
    r = fenchel_dual_solve(const(HALF_SQ), const(HALF_SQ), [[1.0]])
    assert r.primal_value.tolist() == pytest.approx([0, 0], abs=1e-12)
    assert r.dual_value.tolist() == pytest.approx([0, 0], abs=1e-12)
    assert np.allclose(r.dual_solution.coords, 0.0)


def test_fenchel_point_indicator_gives_g_at_zero():
    g = PWL1D([-1, 2], [-2, 0.5, 3], (2, 1))
    r = fenchel_dual_solve(const(interval_indicator(0, 0), S1), const(g, S1), [[1.0]])
    assert r.primal_value.tolist() == [g(0.0)] and r.dual_value.tolist() == [g(0.0)]


def test_fenchel_certificates():
    f, g = const(ABS), const(ABS_SHIFT)
    good = fenchel_optimality_check(f, g, [[1.0]], [0.0], L0Point(S2, [[-1.0], [-1.0]]), tol=1e-12)
    assert good.ok and all(abs(a) <= 1e-12 and abs(b) <= 1e-12 for a, b in good.residuals)
    bad = fenchel_optimality_check(f, g, [[1.0]], [0.0], L0Point(S2, [[0.0], [0.0]]))
    assert not bad.ok and bad.residuals[0] == (0.0, 1.0)
    origin = fenchel_optimality_check(const(HALF_SQ), const(HALF_SQ), [[1.0]], [0.0], L0Point(S2, [[0.0], [0.0]]))
    assert origin.ok


def test_fl_worked_example():
    r = fenchel_lagrange_solve(const(Affine([1.0]), S1), Box([0], [1]))
    assert r.primal_value.tolist() == [0.0] and r.dual_value.tolist() == [0.0]
    assert r.dual_solution.coords.ravel().tolist() == [1.0]
    assert r.primal_minimizer[0] == 0.0


def test_fl_unconstrained():
    r = fenchel_lagrange_solve(const(HALF_SQ, S1), Box([-INF], [INF]))
    assert r.primal_value.tolist() == pytest.approx([0.0], abs=1e-12)
    assert r.dual_value.tolist() == pytest.approx([0.0], abs=1e-12)
    assert r.dual_solution.coords.ravel()[0] == pytest.approx(0.0, abs=1e-12)


def test_fl_breakpoint_example():
    f = PWL1D([2], [-1, 1], (2, 0))
    r = fenchel_lagrange_solve(const(f, S1), Box([0], [1]))
    assert r.primal_value.tolist() == [1.0] and r.dual_value.tolist() == [1.0]
    assert r.primal_minimizer[0] == 1.0


def test_fl_certificates():
    f, S = const(Affine([1.0]), S1), Box([0], [1])
    assert fl_optimality_check(f, S, [0.0], L0Point(S1, [[1.0]])).ok
    bad = fl_optimality_check(f, S, [1.0], L0Point(S1, [[1.0]]))
    assert not bad.ok and bad.residuals[0][1] == 1.0
    ind = const(interval_indicator(0, 1), S1)
    assert fl_optimality_check(ind, S, [0.5], L0Point(S1, [[0.0]])).ok


def test_fl_certificate_outside_set():
    out = fl_optimality_check(const(Affine([1.0]), S1), Box([0], [1]), [2.0], L0Point(S1, [[1.0]]))
    assert not out.ok and "not in S" in out.diagnostics[0]
