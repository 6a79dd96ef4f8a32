"""Brute-force enumeration oracles and their agreement with the LP core."""

import numpy as np
import pytest

from conftest import random_packed_lp
from fairalloc import lp, market, oracles
from fairalloc.errors import NonInteriorPointError, TooLargeError


def test_primal_vertices_three_type(lp_three_type):
    found = oracles.enumerate_primal_optimal_vertices(lp_three_type)
    assert found.face_objective == pytest.approx(0.4, abs=1e-9)
    want = [np.array([2 / 3, 2 / 3, 0.0]), np.array([0.0, 0.0, 0.5])]
    for target in want:
        assert any(np.allclose(v, target, atol=1e-8) for v in found.vertices)


def test_primal_vertices_unique_optimum():
    packed = lp.PackedLP(objective=[1.0], resource_matrix=[[1.0]], rhs=[0.5])
    found = oracles.enumerate_primal_optimal_vertices(packed)
    assert found.vertices.shape == (1, 1)
    assert found.vertices[0, 0] == pytest.approx(0.5)


def test_primal_vertices_segment_endpoints():
    packed = lp.PackedLP(objective=[1.0, 1.0], resource_matrix=[[1.0, 1.0]],
                         rhs=[1.0])
    found = oracles.enumerate_primal_optimal_vertices(packed)
    got = {tuple(np.round(v, 8)) for v in found.vertices}
    assert (1.0, 0.0) in got and (0.0, 1.0) in got


def test_dual_vertices_two_type(lp_two_type):
    found = oracles.enumerate_dual_optimal_vertices(lp_two_type)
    assert found.dual_optimum == pytest.approx(3.0, abs=1e-9)
    assert any(np.allclose(lam, [3.0, 0.0], atol=1e-8) for lam in found.duals)


def test_dual_vertices_slack_resources():
    packed = lp.PackedLP(objective=[0.4, 0.2], resource_matrix=[[0.1, 0.1]],
                         rhs=[50.0])
    found = oracles.enumerate_dual_optimal_vertices(packed)
    assert any(np.allclose(lam, [0.0], atol=1e-10) for lam in found.duals)


def test_dual_vertices_all_positive_when_undersupplied():
    dlp = market.build_dlp(market.preset("E53"))
    found = oracles.enumerate_dual_optimal_vertices(dlp)
    assert len(found.duals) >= 1
    assert (found.duals > 1e-7).all()


def test_nondegeneracy_on_worked_instances(lp_two_type):
    ok, witness = oracles.check_dual_nondegeneracy(lp_two_type)
    assert ok and witness is None
    dlp53 = market.build_dlp(market.preset("E53"))
    assert oracles.check_dual_nondegeneracy(dlp53)[0]


def test_nondegeneracy_all_presets():
    for name in market.PRESET_NAMES:
        dlp = market.build_dlp(market.preset(name))
        ok, _ = oracles.check_dual_nondegeneracy(dlp)
        assert ok, name


def test_duplicated_binding_row_breaks_nondegeneracy():
    # duplicating a binding row lets optimal prices concentrate on either
    # copy, so some optimal dual vertex zeroes a binding coordinate
    base = market.build_dlp(market.preset("D34"))
    dup = lp.PackedLP(
        objective=base.objective,
        resource_matrix=np.vstack([base.resource_matrix,
                                   base.resource_matrix[0]]),
        rhs=np.append(base.rhs, base.rhs[0]),
    )
    ok, witness = oracles.check_dual_nondegeneracy(dup)
    assert not ok
    lam, row = witness
    assert lam[row] <= 1e-7


def test_barrier_value_symmetric_segment():
    packed = lp.PackedLP(objective=[1.0, 1.0], resource_matrix=[[1.0, 1.0]],
                         rhs=[1.0])
    implicit = lp.detect_implicit_equalities(packed, 1.0)
    value = oracles.barrier_value(packed, np.array([0.5, 0.5]), implicit)
    assert value == pytest.approx(4 * np.log(0.5))


def test_barrier_value_boundary_raises(lp_three_type):
    implicit = lp.detect_implicit_equalities(lp_three_type, 0.4)
    with pytest.raises(NonInteriorPointError):
        oracles.barrier_value(lp_three_type, np.array([2 / 3, 2 / 3, 0.0]),
                              implicit)


def test_barrier_center_beats_vertex_mixtures(lp_three_type):
    implicit = lp.detect_implicit_equalities(lp_three_type, 0.4)
    center = lp.analytic_center(lp_three_type)
    best = oracles.barrier_value(lp_three_type, center.y, implicit)
    verts = oracles.enumerate_primal_optimal_vertices(lp_three_type).vertices
    rng = np.random.default_rng(10)
    centroid = verts.mean(axis=0)
    for _ in range(100):
        w = rng.dirichlet(np.ones(len(verts)))
        cand = 0.99 * (w @ verts) + 0.01 * centroid
        assert best >= oracles.barrier_value(lp_three_type, cand, implicit) - 1e-8


def test_center_in_hull_and_dual_in_hull():
    rng = np.random.default_rng(2024)
    for _ in range(15):
        packed = random_packed_lp(rng)
        verts = oracles.enumerate_primal_optimal_vertices(packed).vertices
        center = lp.analytic_center(packed)
        assert oracles.convex_hull_residual(verts, center.y) <= 1e-6
        duals = oracles.enumerate_dual_optimal_vertices(packed).duals
        point = lp.interior_dual(packed)
        assert oracles.convex_hull_residual(duals, point.lam) <= 1e-6


def test_size_caps():
    big = lp.PackedLP(objective=np.ones(9), resource_matrix=np.ones((2, 9)),
                      rhs=[1.0, 1.0])
    with pytest.raises(TooLargeError):
        oracles.enumerate_primal_optimal_vertices(big)
    wide = lp.PackedLP(objective=np.ones(3), resource_matrix=np.ones((5, 3)),
                       rhs=np.ones(5))
    with pytest.raises(TooLargeError):
        oracles.enumerate_dual_optimal_vertices(wide)
