"""Numba kernels for the dense LP machinery.

Everything here operates on plain float64 arrays and is deterministic:
identical inputs produce bit-identical outputs. The simplex kernel uses
Bland's rule over a fixed index order (ascending or descending), which
both prevents cycling and pins the returned vertex.
"""

import numpy as np
from numba import njit

# simplex_phase status codes
OPTIMAL = 0
ITERATION_LIMIT = 1
UNBOUNDED = 2

# face_newton status codes
NEWTON_CONVERGED = 0
NEWTON_ITERATION_LIMIT = 1
NEWTON_DIVERGED = 2

# additional packed_face_center status codes
TIE_BREAK_MISMATCH = 3
NEWTON_DIVERGED_STATUS = 4
NEWTON_LIMIT_STATUS = 5


@njit(cache=True)
def simplex_phase(tab, basis, cost, forward, tol, max_iter):
    """Run Bland-rule simplex pivots in place until optimality.

    tab   : (M, N+1) tableau [B^-1 A | B^-1 b] for min cost.x, A x = b, x >= 0,
            started from a feasible basis.
    basis : (M,) basic variable index per row, updated in place.
    cost  : (N,) objective to minimize.
    forward : scan entering candidates (and break leaving ties) by smallest
              index when True, largest when False.

    Returns a status code; the tableau/basis hold the final vertex.
    """
    m = tab.shape[0]
    n = tab.shape[1] - 1
    for _ in range(max_iter):
        enter = -1
        if forward:
            for j in range(n):
                rj = cost[j]
                for i in range(m):
                    cb = cost[basis[i]]
                    if cb != 0.0:
                        rj -= cb * tab[i, j]
                if rj < -tol:
                    enter = j
                    break
        else:
            for j in range(n - 1, -1, -1):
                rj = cost[j]
                for i in range(m):
                    cb = cost[basis[i]]
                    if cb != 0.0:
                        rj -= cb * tab[i, j]
                if rj < -tol:
                    enter = j
                    break
        if enter < 0:
            return OPTIMAL

        leave = -1
        best = np.inf
        for i in range(m):
            a = tab[i, enter]
            if a > tol:
                ratio = tab[i, n] / a
                if ratio < best - 1e-10:
                    best = ratio
                    leave = i
                elif ratio <= best + 1e-10:
                    if leave < 0:
                        best = ratio
                        leave = i
                    elif forward:
                        if basis[i] < basis[leave]:
                            leave = i
                    else:
                        if basis[i] > basis[leave]:
                            leave = i
        if leave < 0:
            return UNBOUNDED

        piv = tab[leave, enter]
        for j in range(n + 1):
            tab[leave, j] /= piv
        for i in range(m):
            if i != leave:
                f = tab[i, enter]
                if f != 0.0:
                    for j in range(n + 1):
                        tab[i, j] -= f * tab[leave, j]
                    tab[i, enter] = 0.0
        basis[leave] = enter
    return ITERATION_LIMIT


@njit(cache=True)
def pivot_inplace(tab, basis, row, col):
    """Single tableau pivot on (row, col)."""
    m = tab.shape[0]
    n = tab.shape[1]
    piv = tab[row, col]
    for j in range(n):
        tab[row, j] /= piv
    for i in range(m):
        if i != row:
            f = tab[i, col]
            if f != 0.0:
                for j in range(n):
                    tab[i, j] -= f * tab[row, j]
                tab[i, col] = 0.0
    basis[row] = col


@njit(cache=True)
def face_scan(ext_tab, ext_basis, witmax, acc, tol_fix, pivot_tol, max_iter):
    """Classify standard-form variables as fixed-at-zero on the face.

    ext_tab/ext_basis describe a feasible tableau whose rows pin the face.
    Variables already certified positive by a known face point (witmax) are
    skipped; each remaining one is maximized over the face. Every optimal
    point found is accumulated into acc/witmax so the caller can average a
    strictly interior starting point.

    Returns (fixed_mask, points_added, status).
    """
    m1 = ext_tab.shape[0]
    n = ext_tab.shape[1] - 1
    fixed = np.zeros(n, np.bool_)
    count = 0
    cost = np.zeros(n)
    for k in range(n):
        if witmax[k] > tol_fix:
            continue
        tab = ext_tab.copy()
        basis = ext_basis.copy()
        cost[k] = -1.0
        status = simplex_phase(tab, basis, cost, True, pivot_tol, max_iter)
        cost[k] = 0.0
        if status != OPTIMAL:
            return fixed, count, status
        xk = 0.0
        for i in range(m1):
            if basis[i] == k:
                xk = tab[i, n]
                break
        if xk > tol_fix:
            for i in range(m1):
                bi = basis[i]
                v = tab[i, n]
                acc[bi] += v
                if v > witmax[bi]:
                    witmax[bi] = v
            count += 1
        else:
            fixed[k] = True
    return fixed, count, OPTIMAL


@njit(cache=True)
def independent_rows_mask(a, rtol):
    """Mask of a maximal independent row subset, preferring earlier rows."""
    m, n = a.shape
    work = a.copy()
    sel = np.zeros(m, np.bool_)
    for i in range(m):
        scale = 1.0
        big = 0.0
        piv = -1
        for j in range(n):
            v = abs(a[i, j])
            if v > scale:
                scale = v
            w = abs(work[i, j])
            if w > big:
                big = w
                piv = j
        if big <= rtol * scale:
            continue
        sel[i] = True
        for r in range(i + 1, m):
            f = work[r, piv] / work[i, piv]
            if f != 0.0:
                for j in range(n):
                    work[r, j] -= f * work[i, j]
                work[r, piv] = 0.0
    return sel


@njit(cache=True)
def packed_face_center(tab0, cost_min, slack_basis, tol_fix, pivot_tol,
                       simplex_max, grad_tol, newton_max, want_center):
    """Optimal-face pipeline for a packed LP, from its all-slack tableau.

    Runs the two opposite-order vertex solves, classifies fixed variables
    (with a singleton shortcut when the first vertex is certified unique),
    and optionally pushes the witness average to the log-barrier center.

    Returns (status, opt_min, fixed_mask, x). x is the barrier center when
    want_center, otherwise the face point averaged from all witnesses.
    """
    mrows = tab0.shape[0]
    n = tab0.shape[1] - 1
    zero_mask = np.zeros(n, np.bool_)
    zero_x = np.zeros(n)

    tab_a = tab0.copy()
    basis_a = slack_basis.copy()
    status = simplex_phase(tab_a, basis_a, cost_min, True, pivot_tol, simplex_max)
    if status != OPTIMAL:
        return status, 0.0, zero_mask, zero_x
    x_a = np.zeros(n)
    for i in range(mrows):
        x_a[basis_a[i]] = tab_a[i, n]
    opt_min = 0.0
    for j in range(n):
        opt_min += cost_min[j] * x_a[j]

    # uniqueness certificate: nondegenerate basis + strictly positive
    # nonbasic reduced costs means the face is this single vertex
    unique = True
    for i in range(mrows):
        if tab_a[i, n] <= 1e-9:
            unique = False
            break
    if unique:
        in_basis = np.zeros(n, np.bool_)
        for i in range(mrows):
            in_basis[basis_a[i]] = True
        for j in range(n):
            if in_basis[j]:
                continue
            rj = cost_min[j]
            for i in range(mrows):
                cb = cost_min[basis_a[i]]
                if cb != 0.0:
                    rj -= cb * tab_a[i, j]
            if rj <= 1e-9:
                unique = False
                break
    if unique:
        return OPTIMAL, opt_min, x_a <= tol_fix, x_a

    tab_b = tab0.copy()
    basis_b = slack_basis.copy()
    status = simplex_phase(tab_b, basis_b, cost_min, False, pivot_tol, simplex_max)
    if status != OPTIMAL:
        return status, 0.0, zero_mask, zero_x
    x_b = np.zeros(n)
    for i in range(mrows):
        x_b[basis_b[i]] = tab_b[i, n]
    opt_b = 0.0
    for j in range(n):
        opt_b += cost_min[j] * x_b[j]
    if abs(opt_b - opt_min) > 1e-6 * (1.0 + abs(opt_min)):
        return TIE_BREAK_MISMATCH, opt_min, zero_mask, zero_x

    witmax = np.maximum(x_a, x_b)
    acc = x_a + x_b
    count = 2

    # warm face tableau: adjoin the objective-level row unless implied
    red = np.empty(n)
    for j in range(n):
        rj = cost_min[j]
        for i in range(mrows):
            cb = cost_min[basis_a[i]]
            if cb != 0.0:
                rj -= cb * tab_a[i, j]
        red[j] = rj
    for i in range(mrows):
        red[basis_a[i]] = 0.0
    e = 0
    big = 0.0
    for j in range(n):
        v = abs(red[j])
        if v > big:
            big = v
            e = j
    if big > 1e-9:
        mx = mrows + 1
        ext_rows = np.empty((mx, n))
        ext_rows[:mrows] = tab0[:, :n]
        ext_rows[mrows] = cost_min
        ext_basis = np.empty(mx, np.int64)
        ext_basis[:mrows] = basis_a
        ext_basis[mx - 1] = e
        bmat = np.empty((mx, mx))
        for i in range(mx):
            for c in range(mx):
                bmat[i, c] = ext_rows[i, ext_basis[c]]
        aug = np.empty((mx, n + 1))
        aug[:, :n] = ext_rows
        for i in range(mrows):
            aug[i, n] = tab0[i, n]
        aug[mx - 1, n] = opt_min
        ext_tab = np.ascontiguousarray(np.linalg.solve(bmat, aug))
    else:
        mx = mrows
        ext_rows = np.ascontiguousarray(tab0[:, :n])
        ext_basis = basis_a
        ext_tab = tab_a

    fixed, added, status = face_scan(
        ext_tab, ext_basis, witmax, acc, tol_fix, pivot_tol, simplex_max
    )
    if status != OPTIMAL:
        return status, opt_min, zero_mask, zero_x
    count += added
    x0 = acc / count
    for j in range(n):
        if fixed[j]:
            x0[j] = 0.0
    if not want_center:
        return OPTIMAL, opt_min, fixed, x0

    nfree = 0
    for j in range(n):
        if not fixed[j]:
            nfree += 1
    free_idx = np.empty(nfree, np.int64)
    p = 0
    for j in range(n):
        if not fixed[j]:
            free_idx[p] = j
            p += 1
    a_free = np.empty((mx, nfree))
    for i in range(mx):
        for c in range(nfree):
            a_free[i, c] = ext_rows[i, free_idx[c]]
    sel = independent_rows_mask(a_free, 1e-11)
    nsel = 0
    for i in range(mx):
        if sel[i]:
            nsel += 1
    if nsel >= nfree:  # zero-dimensional face
        return OPTIMAL, opt_min, fixed, x0
    a_ind = np.empty((nsel, nfree))
    r = 0
    for i in range(mx):
        if sel[i]:
            for c in range(nfree):
                a_ind[r, c] = a_free[i, c]
            r += 1
    xfree = np.empty(nfree)
    for c in range(nfree):
        xfree[c] = x0[free_idx[c]]
    nstatus, _ = face_newton(a_ind, xfree, grad_tol, newton_max)
    if nstatus == NEWTON_DIVERGED:
        return NEWTON_DIVERGED_STATUS, opt_min, fixed, x0
    if nstatus == NEWTON_ITERATION_LIMIT:
        return NEWTON_LIMIT_STATUS, opt_min, fixed, x0
    x = np.zeros(n)
    for c in range(nfree):
        x[free_idx[c]] = xfree[c]
    return OPTIMAL, opt_min, fixed, x


@njit(cache=True)
def face_newton(a_eq, x, grad_tol, max_iter):
    """Maximize sum(log x) subject to a_eq x = const, in place.

    x must start strictly positive and feasible; steps stay in the null
    space of a_eq, so feasibility is preserved up to round-off. In the
    coordinates w = delta/x the Newton step is the projection of the
    all-ones vector onto null(a_eq @ diag(x)), computed by QR for
    stability on faces with very thin directions. Convergence is declared
    when the Newton decrement ||w|| drops below grad_tol.

    Returns (status, iterations).
    """
    r = a_eq.shape[0]
    f = x.shape[0]
    if r == 0:
        return NEWTON_DIVERGED, 0
    for it in range(max_iter):
        bmat = np.empty((f, r))
        for j in range(f):
            for i in range(r):
                bmat[j, i] = a_eq[i, j] * x[j]
        q, _ = np.linalg.qr(bmat)
        ncols = q.shape[1]
        coef = np.zeros(ncols)
        for i in range(ncols):
            for j in range(f):
                coef[i] += q[j, i]
        w = np.ones(f)
        for j in range(f):
            for i in range(ncols):
                w[j] -= q[j, i] * coef[i]
        lam2 = 0.0
        for j in range(f):
            lam2 += w[j] * w[j]
        lam = np.sqrt(lam2)
        if not np.isfinite(lam):
            return NEWTON_DIVERGED, it
        if lam <= grad_tol:
            return NEWTON_CONVERGED, it
        phi0 = 0.0
        for j in range(f):
            phi0 += np.log(x[j])
        step = 1.0 if lam <= 0.45 else 1.0 / (1.0 + lam)
        # Armijo backtracking; the directional derivative equals lam^2
        accepted = False
        for _ in range(60):
            ok = True
            phi = 0.0
            for j in range(f):
                xn = x[j] * (1.0 + step * w[j])
                if xn <= 0.0 or not np.isfinite(xn):
                    ok = False
                    break
                phi += np.log(xn)
            if ok and phi >= phi0 + 0.1 * step * lam2 - 1e-12:
                accepted = True
                break
            step *= 0.5
            if step < 1e-14:
                break
        if not accepted:
            return NEWTON_DIVERGED, it
        for j in range(f):
            x[j] = x[j] * (1.0 + step * w[j])
    return NEWTON_ITERATION_LIMIT, max_iter
