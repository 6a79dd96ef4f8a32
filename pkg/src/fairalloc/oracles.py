"""Independent brute-force verifiers for the LP core.

Everything here re-derives quantities by exhaustive enumeration rather than
by reusing the solver's own machinery, so tests can cross-check the two
routes. Sizes are capped: enumeration is meant for desk-scale instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NonInteriorPointError, TooLargeError
from .lp import (
    ImplicitEqualities,
    PackedLP,
    analytic_center,
    binding_set,
    dual_objective_value,
    to_standard_form,
)

__all__ = [
    "VertexSet",
    "DualVertexSet",
    "enumerate_primal_optimal_vertices",
    "enumerate_dual_optimal_vertices",
    "check_dual_nondegeneracy",
    "barrier_value",
    "convex_hull_residual",
]

MAX_TYPES = 8
MAX_RESOURCES = 4


@dataclass(frozen=True, eq=False)
class VertexSet:
    vertices: np.ndarray       # (k, n) optimal vertices in decision space
    face_objective: float


@dataclass(frozen=True, eq=False)
class DualVertexSet:
    duals: np.ndarray          # (k, m) optimal basic price vectors
    dual_optimum: float


def _check_size(lp: PackedLP):
    if lp.n > MAX_TYPES or lp.m > MAX_RESOURCES:
        raise TooLargeError(
            f"enumeration capped at {MAX_TYPES} types / {MAX_RESOURCES} resources"
        )


def enumerate_primal_optimal_vertices(lp: PackedLP, tol: float = 1e-8) -> VertexSet:
    """All optimal vertices, by brute-force basis enumeration.

    Enumerates every basis of the slack (standard) form, keeps the feasible
    ones, and filters to those attaining the best objective within tol.
    """
    _check_size(lp)
    std = to_standard_form(lp)
    matrix, cost, rhs = std.matrix, std.cost, std.rhs
    mrows, nvars = matrix.shape
    combos = np.array(list(itertools.combinations(range(nvars), mrows)))

    best = -np.inf
    points = []
    values = []
    chunk = 20000
    for lo in range(0, combos.shape[0], chunk):
        idx = combos[lo:lo + chunk]
        bases = matrix.T[idx].transpose(0, 2, 1)  # (k, mrows, mrows)
        dets = np.linalg.det(bases)
        ok = np.abs(dets) > 1e-10
        if not ok.any():
            continue
        idx = idx[ok]
        rhs_k = np.broadcast_to(rhs[:, None], (int(ok.sum()), mrows, 1))
        sol = np.linalg.solve(bases[ok], rhs_k)[..., 0]
        residual = np.abs(np.einsum("kij,kj->ki", bases[ok], sol) - rhs).max(axis=1)
        feas = (sol.min(axis=1) >= -1e-9) & (residual <= 1e-8)
        if not feas.any():
            continue
        idx = idx[feas]
        sol = sol[feas]
        vals = np.einsum("ki,ki->k", cost[idx], sol)
        best = max(best, float(vals.max()))
        points.append((idx, sol))
        values.append(vals)
    if not points:
        raise ArithmeticError("no feasible basis found (inconsistent input)")

    ys = []
    for (idx, sol), vals in zip(points, values):
        keep = vals >= best - tol * (1.0 + abs(best))
        for basis, x_b in zip(idx[keep], sol[keep]):
            full = np.zeros(nvars)
            full[basis] = x_b
            ys.append(full[:lp.n])
    uniq = np.unique(np.round(np.array(ys), 9), axis=0)
    return VertexSet(vertices=uniq, face_objective=best)


def enumerate_dual_optimal_vertices(lp: PackedLP, tol: float = 1e-8) -> DualVertexSet:
    """All optimal basic price vectors of the reduced dual program.

    The reduced dual minimizes rhs . lam + sum_j ub_j (obj_j - col_j . lam)_+
    over lam >= 0; its basic points lie on intersections of m hyperplanes
    drawn from the n kink planes col_j . lam = obj_j and the m axes lam_i = 0.
    """
    _check_size(lp)
    m, n = lp.m, lp.n
    planes = np.vstack([lp.resource_matrix.T, np.eye(m)])
    offsets = np.concatenate([lp.objective, np.zeros(m)])
    candidates = []
    for rows in itertools.combinations(range(n + m), m):
        a = planes[list(rows)]
        if abs(np.linalg.det(a)) <= 1e-12:
            continue
        lam = np.linalg.solve(a, offsets[list(rows)])
        if lam.min() < -1e-9:
            continue
        candidates.append(np.maximum(lam, 0.0))
    if not candidates:
        raise ArithmeticError("dual enumeration found no feasible basic point")
    cand = np.unique(np.round(np.array(candidates), 10), axis=0)
    values = np.array([dual_objective_value(lp, lam) for lam in cand])
    best = float(values.min())
    keep = values <= best + tol * (1.0 + abs(best))
    return DualVertexSet(duals=cand[keep], dual_optimum=best)


def check_dual_nondegeneracy(lp: PackedLP, tol: float = 1e-7):
    """True iff every optimal dual vertex prices every binding resource.

    Binding resources are read off the analytic center; the dual side comes
    from brute-force enumeration. Returns (ok, witness) where witness is a
    (lam, row) pair exhibiting a zero price on a binding row, or None.
    """
    center = analytic_center(lp)
    binding = binding_set(lp, center).binding
    duals = enumerate_dual_optimal_vertices(lp)
    for lam in duals.duals:
        for i in binding:
            if lam[i] <= tol:
                return False, (lam, i)
    return True, None


def barrier_value(lp: PackedLP, y: np.ndarray, implicit: ImplicitEqualities) -> float:
    """Sum of log slacks over the non-implicit constraints at y."""
    y = np.asarray(y, dtype=np.float64)
    slack = lp.rhs - lp.resource_matrix @ y
    total = 0.0
    tight = set(implicit.tight_rows)
    at_zero = set(implicit.fixed_at_zero)
    at_one = set(implicit.fixed_at_one)
    for i in range(lp.m):
        if i in tight:
            continue
        if slack[i] <= 0.0:
            raise NonInteriorPointError(f"resource slack {i} not positive")
        total += np.log(slack[i])
    for j in range(lp.n):
        if j not in at_zero:
            if y[j] <= 0.0:
                raise NonInteriorPointError(f"variable {j} not above zero")
            total += np.log(y[j])
        if j not in at_one:
            gap = lp.upper_bounds[j] - y[j]
            if gap <= 0.0:
                raise NonInteriorPointError(f"variable {j} not below its bound")
            total += np.log(gap)
    return float(total)


def convex_hull_residual(points: np.ndarray, x: np.ndarray) -> float:
    """Smallest infinity-norm error of expressing x as a convex combination.

    Solved as a small LP with an independent solver (HiGHS), so hull
    membership checks do not reuse the package's own simplex.
    """
    points = np.asarray(points, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    k, n = points.shape
    # variables: k weights plus the residual bound t
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    a_ub = np.block([
        [points.T, -np.ones((n, 1))],
        [-points.T, -np.ones((n, 1))],
    ])
    b_ub = np.concatenate([x, -x])
    a_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(0, None)], method="highs")
    if not res.success:
        raise ArithmeticError(f"hull LP failed: {res.message}")
    return float(res.fun)
