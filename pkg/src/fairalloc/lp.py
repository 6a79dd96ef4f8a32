"""Dense small-scale LP core.

Solves the packed allocation LP

    max  objective . y
    s.t. resource_matrix @ y <= rhs,   0 <= y <= upper_bounds,

and exposes the structure of its optimal face: deterministic vertex
solutions, implicit-equality detection, the log-barrier center of the
face, strictly complementary dual prices, and binding-set classification.

All routines are pure functions; identical inputs (and tolerances)
produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import (
    InfeasibleError,
    IterationLimitError,
    NewtonDivergenceError,
    UnboundedError,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOLS",
    "PackedLP",
    "StandardFormLP",
    "LPSolution",
    "DualPoint",
    "BindingSet",
    "ImplicitEqualities",
    "to_standard_form",
    "solve_vertex",
    "optimal_value",
    "detect_implicit_equalities",
    "analytic_center",
    "interior_dual",
    "binding_set",
    "dual_objective_value",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used across the LP core.

    The defaults separate model-scale slacks (>= 0.01 in the bundled
    instances) from accumulated round-off by several orders of magnitude.
    """

    feasibility: float = 1e-9
    implicit_equality: float = 1e-7
    newton_gradient: float = 1e-10
    newton_max_iter: int = 100
    binding: float = 1e-7
    pivot: float = 1e-9
    simplex_max_iter: int = 20000


DEFAULT_TOLS = Tolerances()


def _as_vector(x, name):
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


@dataclass(frozen=True, eq=False)
class PackedLP:
    """The allocation LP in packed form.

    objective[j] and resource_matrix[:, j] already carry the probability
    weight of order type j; rhs is the per-period budget vector. All
    entries are nonnegative, so y = 0 is always feasible.
    """

    objective: np.ndarray
    resource_matrix: np.ndarray
    rhs: np.ndarray
    upper_bounds: np.ndarray | None = None

    def __post_init__(self):
        obj = _as_vector(self.objective, "objective")
        mat = np.ascontiguousarray(np.asarray(self.resource_matrix, dtype=np.float64))
        rhs = _as_vector(self.rhs, "rhs")
        if mat.ndim != 2:
            raise ValueError("resource_matrix must be two-dimensional")
        m, n = mat.shape
        if n != obj.size or m != rhs.size:
            raise ValueError("objective/resource_matrix/rhs shapes disagree")
        if n < 1 or m < 1:
            raise ValueError("need at least one variable and one resource row")
        ub = self.upper_bounds
        ub = np.ones(n) if ub is None else _as_vector(ub, "upper_bounds")
        if ub.size != n:
            raise ValueError("upper_bounds length must match objective")
        if obj.min(initial=0.0) < 0 or mat.min(initial=0.0) < 0 or rhs.min(initial=0.0) < 0:
            raise ValueError("objective, resource_matrix and rhs must be nonnegative")
        if ub.min(initial=1.0) <= 0:
            raise ValueError("upper_bounds must be strictly positive")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "resource_matrix", mat)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "upper_bounds", ub)

    @property
    def n(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class StandardFormLP:
    """Equality form `matrix @ x = rhs, x >= 0` maximizing `cost . x`.

    Variables are stacked as (y, resource slack, upper-bound slack) and the
    matrix has the block layout [[C, I_m, 0], [I_n, 0, I_n]].
    """

    matrix: np.ndarray
    cost: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True, eq=False)
class LPSolution:
    y: np.ndarray
    objective_value: float
    resource_slack: np.ndarray
    kind: str  # "vertex" or "analytic_center"


@dataclass(frozen=True, eq=False)
class DualPoint:
    """Resource prices plus per-type reduced values objective_j - col_j . lam."""

    lam: np.ndarray
    reduced_values: np.ndarray


@dataclass(frozen=True)
class BindingSet:
    binding: tuple[int, ...]
    nonbinding: tuple[int, ...]


class ImplicitEqualities(NamedTuple):
    """Constraints that hold with equality everywhere on the optimal face."""

    tight_rows: tuple[int, ...]
    fixed_at_zero: tuple[int, ...]
    fixed_at_one: tuple[int, ...]


# ---------------------------------------------------------------------------
# standard form and simplex plumbing
# ---------------------------------------------------------------------------


def to_standard_form(lp: PackedLP) -> StandardFormLP:
    """Rewrite the packed LP with explicit slack variables."""
    matrix, rhs = _standard_arrays(lp)
    cost = np.concatenate([lp.objective, np.zeros(lp.m + lp.n)])
    return StandardFormLP(matrix=matrix, cost=cost, rhs=rhs)


def _standard_arrays(lp: PackedLP):
    m, n = lp.m, lp.n
    tab0 = _packed_tableau(lp)
    return np.ascontiguousarray(tab0[:, :-1]), tab0[:, -1].copy()


def _packed_tableau(lp: PackedLP):
    """All-slack starting tableau [C I 0 | rhs; I 0 I | ub] in one block."""
    m, n = lp.m, lp.n
    tab = np.zeros((m + n, m + 2 * n + 1))
    tab[:m, :n] = lp.resource_matrix
    rows = np.arange(m)
    tab[rows, n + rows] = 1.0
    cols = np.arange(n)
    tab[m + cols, cols] = 1.0
    tab[m + cols, n + m + cols] = 1.0
    tab[:m, -1] = lp.rhs
    tab[m:, -1] = lp.upper_bounds
    return tab


def _basic_point(tab, basis, nvars):
    x = np.zeros(nvars)
    x[basis] = tab[:, -1]
    return x


def _run_phase(tab, basis, cost_min, forward, tols):
    status = _kernels.simplex_phase(
        tab, basis, cost_min, forward, tols.pivot, tols.simplex_max_iter
    )
    if status == _kernels.ITERATION_LIMIT:
        raise IterationLimitError(
            f"simplex exceeded {tols.simplex_max_iter} pivots"
        )
    return status


def _packed_vertex_tableau(lp: PackedLP, tab0, cost_min, forward, tols):
    """Optimal tableau/basis for a packed LP from the all-slack basis."""
    m, n = lp.m, lp.n
    tab = tab0.copy()
    basis = np.arange(n, n + m + n, dtype=np.int64)
    status = _run_phase(tab, basis, cost_min, forward, tols)
    if status == _kernels.UNBOUNDED:  # impossible: box-bounded feasible set
        raise UnboundedError("packed LP reported unbounded")
    return tab, basis


def _cold_vertex_tableau(matrix, rhs, cost_min, forward, tols):
    """Two-phase simplex for a general equality system, x >= 0."""
    mrows, nvars = matrix.shape
    mat = matrix.copy()
    b = rhs.copy()
    flip = b < 0
    if flip.any():
        mat[flip] *= -1.0
        b[flip] *= -1.0
    tab = np.hstack([mat, np.eye(mrows), b[:, None]])
    basis = np.arange(nvars, nvars + mrows, dtype=np.int64)
    cost1 = np.concatenate([np.zeros(nvars), np.ones(mrows)])
    _run_phase(tab, basis, cost1, forward, tols)
    art_sum = float(tab[basis >= nvars, -1].sum())
    if art_sum > 1e-7:
        raise InfeasibleError("phase-1 artificial residual is nonzero")
    keep = np.ones(mrows, dtype=bool)
    for i in range(mrows):
        if basis[i] >= nvars:
            row = tab[i, :nvars]
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size:
                _kernels.pivot_inplace(tab, basis, i, int(cand[0]))
            else:
                keep[i] = False  # redundant original row
    tab = tab[keep]
    basis = basis[keep]
    tab2 = np.ascontiguousarray(np.hstack([tab[:, :nvars], tab[:, -1:]]))
    status = _run_phase(tab2, basis, cost_min, forward, tols)
    if status == _kernels.UNBOUNDED:
        raise UnboundedError("LP objective unbounded")
    return tab2, basis


# ---------------------------------------------------------------------------
# optimal-face structure
# ---------------------------------------------------------------------------


class _Face(NamedTuple):
    opt_max: float          # optimal value of the maximization
    fixed: np.ndarray       # bool mask over standard-form variables
    x0: np.ndarray          # face point interior to every free coordinate
    n_witnesses: int


def _unique_vertex_face(tab, basis, cost_min, nvars, tol_fix):
    """Singleton face shortcut: certify the forward vertex as unique.

    Sufficient certificate: every nonbasic reduced cost strictly positive
    and every basic value strictly positive (nondegenerate optimal basis).
    Returns None when the certificate does not hold.
    """
    if tab[:, -1].min() <= 1e-9:
        return None
    reduced = cost_min - cost_min[basis] @ tab[:, :-1]
    reduced[basis] = np.inf
    if reduced.min() <= 1e-9:
        return None
    x = _basic_point(tab, basis, nvars)
    opt_min = float(cost_min @ x)
    return _Face(-opt_min, x <= tol_fix, x, 1)


def _face_structure(matrix, rhs, cost_min, solved_a, solved_b, tol_fix, tols):
    """Classify standard-form variables as fixed-at-zero on the optimal face.

    A variable is free as soon as some known face point gives it a value
    above tol_fix; otherwise one warm-started LP maximizes it over the face
    (the criterion is max value <= tol_fix). Every face point encountered is
    accumulated, so the returned x0 (their average) is strictly positive in
    each free coordinate.
    """
    tab_a, basis_a = solved_a
    tab_b, basis_b = solved_b
    nvars = matrix.shape[1]
    x_a = _basic_point(tab_a, basis_a, nvars)
    x_b = _basic_point(tab_b, basis_b, nvars)
    opt_min = float(cost_min @ x_a)
    if abs(float(cost_min @ x_b) - opt_min) > 1e-6 * (1.0 + abs(opt_min)):
        raise ArithmeticError("tie-break runs disagree on the optimal value")

    witmax = np.maximum(x_a, x_b)
    acc = x_a + x_b
    count = 2

    # Warm tableau for face-restricted solves: append the objective-level
    # row when it is not already implied by the current basis.
    reduced = cost_min - cost_min[basis_a] @ tab_a[:, :-1]
    reduced[basis_a] = 0.0
    e = int(np.argmax(np.abs(reduced)))
    if abs(reduced[e]) > 1e-9:
        ext_rows = np.vstack([matrix, cost_min])
        ext_rhs = np.append(rhs, opt_min)
        ext_basis = np.append(basis_a, np.int64(e))
        bmat = ext_rows[:, ext_basis]
        ext_tab = np.linalg.solve(bmat, np.hstack([ext_rows, ext_rhs[:, None]]))
        ext_tab = np.ascontiguousarray(ext_tab)
    else:
        ext_rows = matrix
        ext_rhs = rhs
        ext_basis = basis_a
        ext_tab = tab_a

    fixed, added, status = _kernels.face_scan(
        ext_tab, ext_basis, witmax, acc, tol_fix, tols.pivot, tols.simplex_max_iter
    )
    if status == _kernels.ITERATION_LIMIT:
        raise IterationLimitError(
            f"simplex exceeded {tols.simplex_max_iter} pivots"
        )
    if status == _kernels.UNBOUNDED:
        raise UnboundedError("optimal face is unbounded")
    count += added
    return _Face(-opt_min, fixed, acc / count, count), ext_rows, ext_rhs


def _center_from_face(face: _Face, ext_rows, ext_rhs, tols):
    if ext_rows is None:  # singleton face: the point is its own center
        return np.where(face.fixed, 0.0, face.x0)
    return _face_center(ext_rows, ext_rhs, face.fixed, face.x0, tols)


def _face_center(ext_rows, ext_rhs, fixed, x0, tols):
    """Log-barrier center of the optimal face; x0 must lie on the face."""
    free = ~fixed
    nfree = int(free.sum())
    if nfree == 0:
        return np.zeros(fixed.size)
    a_free = np.ascontiguousarray(ext_rows[:, free])
    rows = _kernels.independent_rows_mask(a_free, 1e-11)
    if int(rows.sum()) >= nfree:
        # zero-dimensional face: the single point is its own center
        return np.where(fixed, 0.0, x0)
    a_ind = np.ascontiguousarray(a_free[rows])
    x = np.ascontiguousarray(x0[free].copy())
    status, _ = _kernels.face_newton(
        a_ind, x, tols.newton_gradient, tols.newton_max_iter
    )
    if status == _kernels.NEWTON_DIVERGED:
        raise NewtonDivergenceError("barrier Newton failed to make progress")
    if status == _kernels.NEWTON_ITERATION_LIMIT:
        raise IterationLimitError(
            f"barrier Newton exceeded {tols.newton_max_iter} iterations"
        )
    out = np.zeros(fixed.size)
    out[free] = x
    return out


def _packed_face_pipeline(lp: PackedLP, tol_fix, tols, want_center):
    """Jitted optimal-face pipeline; returns (opt_max, fixed_mask, x)."""
    tab0 = _packed_tableau(lp)
    nvars = tab0.shape[1] - 1
    cost_min = np.zeros(nvars)
    cost_min[:lp.n] = -lp.objective
    slack_basis = np.arange(lp.n, nvars, dtype=np.int64)
    status, opt_min, fixed, x = _kernels.packed_face_center(
        tab0, cost_min, slack_basis, tol_fix, tols.pivot,
        tols.simplex_max_iter, tols.newton_gradient, tols.newton_max_iter,
        want_center,
    )
    if status == _kernels.ITERATION_LIMIT:
        raise IterationLimitError(
            f"simplex exceeded {tols.simplex_max_iter} pivots"
        )
    if status == _kernels.UNBOUNDED:
        raise UnboundedError("packed LP reported unbounded")
    if status == _kernels.TIE_BREAK_MISMATCH:
        raise ArithmeticError("tie-break runs disagree on the optimal value")
    if status == _kernels.NEWTON_DIVERGED_STATUS:
        raise NewtonDivergenceError("barrier Newton failed to make progress")
    if status == _kernels.NEWTON_LIMIT_STATUS:
        raise IterationLimitError(
            f"barrier Newton exceeded {tols.newton_max_iter} iterations"
        )
    return -opt_min, fixed, x


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def solve_vertex(lp: PackedLP, tols: Tolerances = DEFAULT_TOLS) -> LPSolution:
    """Optimal basic feasible solution under ascending Bland order."""
    matrix, rhs = _standard_arrays(lp)
    cost_min = np.concatenate([-lp.objective, np.zeros(lp.m + lp.n)])
    tab0 = np.hstack([matrix, rhs[:, None]])
    tab, basis = _packed_vertex_tableau(lp, tab0, cost_min, True, tols)
    x = _basic_point(tab, basis, matrix.shape[1])
    y = x[:lp.n]
    return LPSolution(
        y=y,
        objective_value=float(lp.objective @ y),
        resource_slack=lp.rhs - lp.resource_matrix @ y,
        kind="vertex",
    )


def optimal_value(lp: PackedLP, tols: Tolerances = DEFAULT_TOLS) -> float:
    return solve_vertex(lp, tols).objective_value


def detect_implicit_equalities(
    lp: PackedLP,
    opt_value: float,
    tol: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> ImplicitEqualities:
    """Constraints whose maximum slack over the optimal face is <= tol.

    opt_value must equal optimal_value(lp); it pins the face being probed.
    """
    tol_fix = tols.implicit_equality if tol is None else tol
    opt_max, fixed, _ = _packed_face_pipeline(lp, tol_fix, tols, False)
    if abs(opt_max - opt_value) > 1e-6 * (1.0 + abs(opt_value)):
        raise ValueError("opt_value does not match the LP optimum")
    m, n = lp.m, lp.n
    tight = tuple(int(i) for i in range(m) if fixed[n + i])
    at_zero = tuple(int(j) for j in range(n) if fixed[j])
    at_one = tuple(int(j) for j in range(n) if fixed[n + m + j])
    return ImplicitEqualities(tight, at_zero, at_one)


def analytic_center(
    lp: PackedLP,
    tol: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> LPSolution:
    """Log-barrier center of the optimal face.

    Maximizes the sum of logarithms of every slack that is not an implicit
    equality (resource slacks, y_j, and upper-bound gaps), restricted to
    the optimal face. A zero-dimensional face is returned as-is.
    """
    tol_fix = tols.implicit_equality if tol is None else tol
    _, _, x = _packed_face_pipeline(lp, tol_fix, tols, True)
    y = x[:lp.n]
    return LPSolution(
        y=y,
        objective_value=float(lp.objective @ y),
        resource_slack=lp.rhs - lp.resource_matrix @ y,
        kind="analytic_center",
    )


def interior_dual(
    lp: PackedLP,
    tol: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> DualPoint:
    """Strictly complementary dual prices.

    Returns the log-barrier center of the dual optimal face, i.e. the limit
    of the barrier multipliers along the central path: lam_i > 0 exactly for
    the resource rows that are implicit equalities of the primal face.
    Requires rhs > 0 so that the dual face is bounded.
    """
    if lp.rhs.min() <= 0:
        raise ValueError("interior_dual requires strictly positive rhs")
    tol_fix = tols.implicit_equality if tol is None else tol
    m, n = lp.m, lp.n
    # dual variables (lam, gamma, d) >= 0 with C^T lam + gamma - d = objective,
    # minimizing rhs . lam + upper_bounds . gamma
    matrix = np.hstack([lp.resource_matrix.T, np.eye(n), -np.eye(n)])
    rhs = lp.objective.copy()
    cost_min = np.concatenate([lp.rhs, lp.upper_bounds, np.zeros(n)])
    solved_a = _cold_vertex_tableau(matrix, rhs, cost_min, True, tols)
    face = _unique_vertex_face(*solved_a, cost_min, matrix.shape[1], tol_fix)
    ext_rows = ext_rhs = None
    if face is None:
        solved_b = _cold_vertex_tableau(matrix, rhs, cost_min, False, tols)
        face, ext_rows, ext_rhs = _face_structure(
            matrix, rhs, cost_min, solved_a, solved_b, tol_fix, tols
        )
    x = _center_from_face(face, ext_rows, ext_rhs, tols)
    lam = x[:m]
    return DualPoint(
        lam=lam,
        reduced_values=lp.objective - lp.resource_matrix.T @ lam,
    )


def binding_set(
    lp: PackedLP,
    sol: LPSolution,
    tol: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> BindingSet:
    """Resource rows with slack <= tol at the given solution (0-based)."""
    thr = tols.binding if tol is None else tol
    mask = sol.resource_slack <= thr
    binding = tuple(int(i) for i in np.flatnonzero(mask))
    nonbinding = tuple(int(i) for i in np.flatnonzero(~mask))
    return BindingSet(binding=binding, nonbinding=nonbinding)


def dual_objective_value(lp: PackedLP, lam: np.ndarray) -> float:
    """Value of the reduced dual program at prices lam."""
    lam = np.asarray(lam, dtype=np.float64)
    gaps = lp.objective - lp.resource_matrix.T @ lam
    return float(lp.rhs @ lam + lp.upper_bounds @ np.maximum(gaps, 0.0))
