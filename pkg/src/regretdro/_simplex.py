"""Dense two-phase simplex kernel with Bland's rule.

One shared numerical kernel: the public LP solver wraps it, and the
vertex-polytope membership test and the optimal-transport oracle reuse it
for their small feasibility programs. Dense tableaux and fully
deterministic pivot selection are deliberate: problems are desk-scale and
reproducibility matters more than speed.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalBreakdown

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

REDUCED_COST_TOL = 1e-9
RATIO_TOL = 1e-9
RATIO_TIE_TOL = 1e-12
PIVOT_MIN = 1e-12
PHASE1_FEAS_TOL = 1e-8

_INF = float("inf")


def _apply_pivot(T, basis, prow, pcol):
    piv = T[prow, pcol]
    if abs(piv) < PIVOT_MIN:
        raise NumericalBreakdown(
            f"pivot magnitude {abs(piv):.3e} below {PIVOT_MIN:.0e}"
        )
    T[prow] /= piv
    col = T[:, pcol].copy()
    col[prow] = 0.0
    T -= np.outer(col, T[prow])
    # snap the pivot column to exact unit form to limit drift
    T[:, pcol] = 0.0
    T[prow, pcol] = 1.0
    basis[prow] = pcol


def _pivot_until_optimal(T, basis, n_cols, cap, count):
    """Run Bland pivots until no negative reduced cost remains.

    Returns (status, count). Entering: lowest column index with reduced cost
    below -REDUCED_COST_TOL. Leaving: minimum ratio, ties broken by lowest
    basis variable index (anti-cycling).
    """
    basis_arr = None
    while True:
        reduced = T[-1, :n_cols]
        negative = np.flatnonzero(reduced < -REDUCED_COST_TOL)
        if negative.size == 0:
            return OPTIMAL, count
        enter = int(negative[0])
        col = T[:-1, enter]
        rows = np.flatnonzero(col > RATIO_TOL)
        if rows.size == 0:
            return UNBOUNDED, count
        rhs = np.maximum(T[:-1, -1][rows], 0.0)
        ratios = rhs / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + RATIO_TIE_TOL]
        basis_arr = np.asarray(basis)
        leave = int(tied[np.argmin(basis_arr[tied])])
        _apply_pivot(T, basis, leave, enter)
        count += 1
        if count > cap:
            raise NumericalBreakdown(f"pivot cap {cap} exceeded")


def solve_standard(c, A, b, max_pivots=None):
    """min c@x subject to A x = b, x >= 0.

    Returns (status, x, objective, pivots); x is None unless OPTIMAL.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float, ndmin=2, copy=True)
    b = np.array(b, dtype=float, copy=True).reshape(-1)
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError("inconsistent standard-form dimensions")
    cap = max_pivots if max_pivots is not None else max(2000, 100 * (m + n))

    neg = b < 0
    if np.any(neg):
        A[neg] *= -1.0
        b[neg] *= -1.0

    # Phase 1: artificial basis, minimize total infeasibility.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    status, pivots = _pivot_until_optimal(T, basis, n + m, cap, 0)
    if status is UNBOUNDED:
        raise NumericalBreakdown("phase-1 objective reported unbounded")
    if -T[m, -1] > PHASE1_FEAS_TOL:
        return INFEASIBLE, None, None, pivots

    # Drive leftover artificials out of the basis; drop redundant rows.
    drop = []
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            candidates = np.flatnonzero(np.abs(row) > 1e-9)
            if candidates.size:
                _apply_pivot(T, basis, i, int(candidates[0]))
                pivots += 1
            else:
                drop.append(i)
    if drop:
        T = np.delete(T, drop, axis=0)
        basis = [v for i, v in enumerate(basis) if i not in set(drop)]
        m -= len(drop)

    # Phase 2 on the original columns.
    T2 = np.zeros((m + 1, n + 1))
    T2[:m, :n] = T[:m, :n]
    T2[:m, -1] = T[:m, -1]
    T2[m, :n] = c
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            T2[m] -= cb * T2[i]

    status, pivots = _pivot_until_optimal(T2, basis, n, cap, pivots)
    if status is UNBOUNDED:
        return UNBOUNDED, None, None, pivots

    x = np.zeros(n)
    for i in range(m):
        x[basis[i]] = T2[i, -1]
    np.maximum(x, 0.0, out=x)
    return OPTIMAL, x, float(c @ x), pivots


def solve_bounded(c, A_ub, b_ub, A_eq, b_eq, bounds, max_pivots=None):
    """min c@z subject to A_ub z <= b_ub, A_eq z = b_eq, lo <= z <= hi.

    Bounds may be +-inf. Free variables are split, finite lower bounds are
    shifted to zero, and finite upper bounds become extra rows; the result
    is solved in standard form. Returns (status, z, objective, pivots).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.asarray(A_ub, dtype=float).reshape(-1, n) if np.size(A_ub) else np.zeros((0, n))
    b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n) if np.size(A_eq) else np.zeros((0, n))
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    if len(bounds) != n:
        raise ValueError("bounds length does not match objective length")

    # Per-variable transform: kind, first transformed column, shift datum.
    kinds = []
    n_u = 0
    for lo, hi in bounds:
        if lo > hi:
            raise ValueError("lower bound exceeds upper bound")
        if lo == -_INF and hi == _INF:
            kinds.append(("split", n_u, 0.0))
            n_u += 2
        elif lo > -_INF:
            kinds.append(("shift", n_u, lo))
            n_u += 1
        else:
            kinds.append(("neg", n_u, hi))
            n_u += 1

    def transform(M, rhs):
        out = np.zeros((M.shape[0], n_u))
        r = rhs.astype(float).copy()
        for j, (kind, k, datum) in enumerate(kinds):
            colj = M[:, j]
            if kind == "split":
                out[:, k] = colj
                out[:, k + 1] = -colj
            elif kind == "shift":
                out[:, k] = colj
                if datum != 0.0:
                    r -= colj * datum
            else:
                out[:, k] = -colj
                r -= colj * datum
        return out, r

    Au, bu = transform(A_ub, b_ub)
    Ae, be = transform(A_eq, b_eq)

    # Finite-width intervals need an upper cap row on the shifted variable.
    caps = []
    for j, ((lo, hi), (kind, k, _)) in enumerate(zip(bounds, kinds)):
        if kind == "shift" and hi < _INF:
            caps.append((k, hi - lo))
    if caps:
        cap_rows = np.zeros((len(caps), n_u))
        cap_rhs = np.zeros(len(caps))
        for i, (k, width) in enumerate(caps):
            cap_rows[i, k] = 1.0
            cap_rhs[i] = width
        Au = np.vstack([Au, cap_rows])
        bu = np.concatenate([bu, cap_rhs])

    cu = np.zeros(n_u)
    for j, (kind, k, datum) in enumerate(kinds):
        if kind == "split":
            cu[k] = c[j]
            cu[k + 1] = -c[j]
        elif kind == "shift":
            cu[k] = c[j]
        else:
            cu[k] = -c[j]

    # Slacks turn the inequality block into equalities.
    n_slack = Au.shape[0]
    top = np.hstack([Au, np.eye(n_slack)])
    bot = np.hstack([Ae, np.zeros((Ae.shape[0], n_slack))])
    A_std = np.vstack([top, bot])
    b_std = np.concatenate([bu, be])
    c_std = np.concatenate([cu, np.zeros(n_slack)])

    status, u, _, pivots = solve_standard(c_std, A_std, b_std, max_pivots)
    if status is not OPTIMAL:
        return status, None, None, pivots

    z = np.zeros(n)
    for j, (kind, k, datum) in enumerate(kinds):
        if kind == "split":
            z[j] = u[k] - u[k + 1]
        elif kind == "shift":
            z[j] = datum + u[k]
        else:
            z[j] = datum - u[k]
    return OPTIMAL, z, float(c @ z), pivots
