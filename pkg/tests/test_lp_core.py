"""LP core: standard form, vertices, optimal faces, centers, dual prices."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    CENTER_THREE_TYPE,
    CENTER_TWO_TYPE,
    OPT_THREE_TYPE,
    OPT_TWO_TYPE,
    random_packed_lp,
    two_type_lp_with_budget,
)
from fairalloc import lp
from fairalloc.errors import IterationLimitError


def central_path_limit(packed: lp.PackedLP, taus=(1.0, 0.1, 1e-2, 1e-3, 1e-4,
                                                  1e-5, 1e-6, 1e-7, 1e-8)):
    """Independent oracle: follow max obj.y + tau * log-barrier as tau -> 0.

    Pure-numpy damped Newton over the full feasible box; the limit of the
    path is the barrier center of the optimal face. Used to pin the frozen
    expected values, not in any production code path.
    """
    cons, b, obj, ub = (packed.resource_matrix, packed.rhs, packed.objective,
                        packed.upper_bounds)
    y = np.full(packed.n, 0.01)
    y = np.minimum(y, ub * 0.5)
    for tau in taus:
        for _ in range(400):
            s = b - cons @ y
            grad = obj + tau * (-cons.T @ (1.0 / s) + 1.0 / y - 1.0 / (ub - y))
            hess = tau * (cons.T @ np.diag(1.0 / s**2) @ cons
                          + np.diag(1.0 / y**2) + np.diag(1.0 / (ub - y) ** 2))
            step = np.linalg.solve(hess, grad)
            alpha = 1.0
            for _ in range(70):
                cand = y + alpha * step
                if (cand > 1e-14).all() and (cand < ub - 1e-14).all() \
                        and ((b - cons @ cand) > 1e-14).all():
                    break
                alpha *= 0.5
            y = y + alpha * step
            if np.linalg.norm(alpha * step) < 1e-14:
                break
    return y


# ---------------------------------------------------------------------------
# standard form
# ---------------------------------------------------------------------------


def test_standard_form_tiny_blocks():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[0.5]], rhs=[1.0])
    std = lp.to_standard_form(packed)
    assert np.array_equal(std.matrix, [[0.5, 1.0, 0.0], [1.0, 0.0, 1.0]])
    assert np.array_equal(std.rhs, [1.0, 1.0])
    assert np.array_equal(std.cost, [1.0, 0.0, 0.0])


def test_standard_form_block_shape(lp_three_type):
    std = lp.to_standard_form(lp_three_type)
    assert std.matrix.shape == (5, 8)
    assert np.array_equal(std.matrix[2:, :3], np.eye(3))
    assert np.array_equal(std.matrix[:2, 3:5], np.eye(2))
    assert np.array_equal(std.matrix[2:, 5:], np.eye(3))
    assert np.array_equal(std.rhs, [0.2, 0.2, 1, 1, 1])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_standard_form_round_trip(seed):
    rng = np.random.default_rng(seed)
    packed = random_packed_lp(rng)
    y = rng.uniform(0, 1, packed.n)
    # shrink until resource-feasible, keeping the point in the box
    slack = packed.rhs - packed.resource_matrix @ y
    if slack.min() < 0:
        scale = min(
            packed.rhs[i] / (packed.resource_matrix[i] @ y)
            for i in range(packed.m) if packed.resource_matrix[i] @ y > 0
        )
        y = y * min(1.0, 0.99 * scale)
    std = lp.to_standard_form(packed)
    xbar = np.concatenate([y, packed.rhs - packed.resource_matrix @ y,
                           packed.upper_bounds - y])
    assert np.allclose(std.matrix @ xbar, std.rhs, atol=1e-12)
    assert xbar.min() >= -1e-12


# ---------------------------------------------------------------------------
# vertices and optimal values
# ---------------------------------------------------------------------------


def test_vertex_three_type_corner(lp_three_type):
    sol = lp.solve_vertex(lp_three_type)
    corners = [np.array([2 / 3, 2 / 3, 0.0]), np.array([0.0, 0.0, 0.5])]
    assert any(np.allclose(sol.y, c, atol=1e-9) for c in corners)
    assert sol.objective_value == pytest.approx(OPT_THREE_TYPE, abs=1e-9)
    assert sol.kind == "vertex"
    # the frozen optimum equals the objective evaluated at both corners
    for c in corners:
        assert lp_three_type.objective @ c == pytest.approx(OPT_THREE_TYPE, abs=1e-12)


def test_vertex_box_bound():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[0.5]], rhs=[10.0])
    assert np.allclose(lp.solve_vertex(packed).y, [1.0])


def test_optimal_value_two_type_dual_certificate(lp_two_type):
    # prices (3, 0) certify the optimum: value matches the primal exactly
    assert lp.dual_objective_value(lp_two_type, [3.0, 0.0]) == pytest.approx(3.0)
    assert lp.optimal_value(lp_two_type) == pytest.approx(OPT_TWO_TYPE, abs=1e-9)


def test_optimal_value_zero_objective():
    packed = lp.PackedLP(objective=[0.0, 0.0], resource_matrix=[[1.0, 1.0]],
                         rhs=[1.0])
    assert lp.optimal_value(packed) == 0.0


# ---------------------------------------------------------------------------
# implicit equalities
# ---------------------------------------------------------------------------


def test_implicit_equalities_two_type(lp_two_type):
    found = lp.detect_implicit_equalities(lp_two_type, OPT_TWO_TYPE)
    assert found.tight_rows == (0,)
    assert found.fixed_at_zero == ()
    assert found.fixed_at_one == ()


def test_implicit_equalities_unique_optimum():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[1.0]], rhs=[0.5])
    found = lp.detect_implicit_equalities(packed, 0.5)
    assert found.tight_rows == (0,)
    # zero-dimensional face: the center is the unique point
    assert np.allclose(lp.analytic_center(packed).y, [0.5])


def test_implicit_equalities_three_type(lp_three_type):
    found = lp.detect_implicit_equalities(lp_three_type, OPT_THREE_TYPE)
    assert found.tight_rows == (0, 1)


def test_implicit_equalities_rejects_wrong_optimum(lp_three_type):
    with pytest.raises(ValueError):
        lp.detect_implicit_equalities(lp_three_type, 0.7)


# ---------------------------------------------------------------------------
# analytic center
# ---------------------------------------------------------------------------


def test_center_three_type_matches_path_limit(lp_three_type):
    center = lp.analytic_center(lp_three_type)
    assert np.allclose(center.y, central_path_limit(lp_three_type), atol=2e-6)
    assert np.allclose(center.y, CENTER_THREE_TYPE, atol=1e-7)
    assert center.objective_value == pytest.approx(OPT_THREE_TYPE, abs=1e-9)
    assert center.kind == "analytic_center"


def test_center_two_type_matches_path_limit(lp_two_type):
    center = lp.analytic_center(lp_two_type)
    assert np.allclose(center.y, central_path_limit(lp_two_type), atol=2e-6)
    assert np.allclose(center.y, CENTER_TWO_TYPE, atol=1e-7)
    # first coordinate agrees with the published rounding of the fair split
    assert center.y[0] == pytest.approx(0.826, abs=5e-3)


def test_center_symmetric_segment():
    packed = lp.PackedLP(objective=[1.0, 1.0], resource_matrix=[[1.0, 1.0]],
                         rhs=[1.0])
    assert np.allclose(lp.analytic_center(packed).y, [0.5, 0.5], atol=1e-9)


def test_center_decoupled_zero_column_sits_at_midpoint():
    # a type with zero probability weight keeps its column; the barrier
    # places it at the midpoint of its free interval
    packed = lp.PackedLP(objective=[0.5, 0.0], resource_matrix=[[0.5, 0.0]],
                         rhs=[10.0])
    center = lp.analytic_center(packed)
    assert center.y[1] == pytest.approx(0.5, abs=1e-9)
    assert center.y[0] == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# interior dual
# ---------------------------------------------------------------------------


def test_interior_dual_two_type(lp_two_type):
    point = lp.interior_dual(lp_two_type)
    assert np.allclose(point.lam, [3.0, 0.0], atol=1e-8)
    assert np.allclose(point.reduced_values, [0.0, 0.0], atol=1e-9)
    assert lp.dual_objective_value(lp_two_type, point.lam) == pytest.approx(
        OPT_TWO_TYPE, abs=1e-8
    )


def test_interior_dual_slack_resource():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[0.5]], rhs=[10.0])
    point = lp.interior_dual(packed)
    assert np.allclose(point.lam, [0.0], atol=1e-10)
    assert point.reduced_values[0] == pytest.approx(1.0)


def test_interior_dual_requires_positive_rhs():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[1.0]], rhs=[0.0])
    with pytest.raises(ValueError):
        lp.interior_dual(packed)


# ---------------------------------------------------------------------------
# binding sets
# ---------------------------------------------------------------------------


def test_binding_sets_at_centers(lp_two_type, lp_three_type):
    c2 = lp.analytic_center(lp_two_type)
    assert lp.binding_set(lp_two_type, c2).binding == (0,)
    c3 = lp.analytic_center(lp_three_type)
    bs = lp.binding_set(lp_three_type, c3)
    assert bs.binding == (0, 1)
    assert bs.nonbinding == ()


def test_binding_set_zero_solution(lp_two_type):
    sol = lp.LPSolution(y=np.zeros(2), objective_value=0.0,
                        resource_slack=lp_two_type.rhs.copy(), kind="vertex")
    bs = lp.binding_set(lp_two_type, sol)
    assert bs.binding == ()
    assert bs.nonbinding == (0, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_binding_set_threshold_contract(seed):
    rng = np.random.default_rng(seed)
    packed = random_packed_lp(rng)
    slack = rng.uniform(-1e-9, 0.5, packed.m)
    sol = lp.LPSolution(y=np.zeros(packed.n), objective_value=0.0,
                        resource_slack=slack, kind="vertex")
    tol = 1e-7
    bs = lp.binding_set(packed, sol, tol=tol)
    for i in range(packed.m):
        assert (i in bs.binding) == (slack[i] <= tol)


# ---------------------------------------------------------------------------
# module invariants
# ---------------------------------------------------------------------------


def test_feasibility_and_agreement_on_random_lps():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        packed = random_packed_lp(rng, style=0)
        vertex = lp.solve_vertex(packed)
        center = lp.analytic_center(packed)
        for sol in (vertex, center):
            assert sol.y.min() >= -1e-9
            assert (sol.y - packed.upper_bounds).max() <= 1e-9
            assert (packed.resource_matrix @ sol.y - packed.rhs).max() <= 1e-9
        assert abs(center.objective_value - vertex.objective_value) <= 1e-7


def test_binding_set_stability_at_presets():
    # perturbing binding entries by +-0.01 and inflating nonbinding entries
    # leaves the binding set unchanged
    from fairalloc import market

    rng = np.random.default_rng(77)
    for name in ("D34", "E51", "E52", "E53"):
        base = market.build_dlp(market.preset(name))
        ref = lp.binding_set(base, lp.analytic_center(base)).binding
        for trial in range(8):
            delta = np.zeros(base.m)
            for i in range(base.m):
                if i in ref:
                    delta[i] = rng.choice([-0.01, 0.01])
                else:
                    delta[i] = rng.uniform(0.0, 10.0)
            perturbed = lp.PackedLP(base.objective, base.resource_matrix,
                                    base.rhs + delta)
            got = lp.binding_set(perturbed, lp.analytic_center(perturbed)).binding
            assert got == ref, f"{name}: binding set moved under {delta}"


def test_bit_identical_determinism():
    rng = np.random.default_rng(5150)
    for _ in range(25):
        packed = random_packed_lp(rng)
        a = lp.analytic_center(packed)
        b = lp.analytic_center(packed)
        assert np.array_equal(a.y, b.y)
        assert a.objective_value == b.objective_value
        va = lp.solve_vertex(packed)
        vb = lp.solve_vertex(packed)
        assert np.array_equal(va.y, vb.y)
        da = lp.interior_dual(packed)
        db = lp.interior_dual(packed)
        assert np.array_equal(da.lam, db.lam)


def test_iteration_limit_error():
    tols = lp.Tolerances(simplex_max_iter=1)
    packed = two_type_lp_with_budget(2.0)
    with pytest.raises(IterationLimitError):
        lp.solve_vertex(packed, tols)


def test_figure_monotonicity_of_second_type_share():
    # enlarging the slack resource strictly raises the second type's share
    # while the optimum stays fixed
    lo = two_type_lp_with_budget(2.0)
    hi = two_type_lp_with_budget(2.5)
    c_lo = lp.analytic_center(lo)
    c_hi = lp.analytic_center(hi)
    assert c_hi.y[1] > c_lo.y[1]
    assert abs(lp.optimal_value(lo) - lp.optimal_value(hi)) <= 1e-8
