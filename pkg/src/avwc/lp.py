"""Small dense linear programs solved by a two-phase revised simplex method.

The symmetrizability programs are highly degenerate (most right-hand sides are
zero), so the right-hand side is perturbed by tiny deterministic amounts while
pivoting and the final basis is re-solved against the exact data. Entering
variables follow Bland's rule. Every iteration re-solves with the current basis matrix taken
from the original data, which keeps round-off from accumulating; the problems
here have at most a few hundred rows, so this costs little.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure

COST_TOL = 1e-9
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
PERTURB = 1e-9


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    pivots: int


def _simplex(A, b, c, basis, max_pivots):
    """Minimise ``c @ x`` over ``A x = b, x >= 0`` from a feasible ``basis``."""
    pivots = 0
    n = A.shape[1]
    while True:
        B = A[:, basis]
        try:
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            raise SolverFailure("singular basis", iterate=basis.copy()) from None
        reduced = c - A.T @ y
        reduced[basis] = 0.0
        scale = max(1.0, float(np.abs(c).max()))
        entering = np.flatnonzero(reduced < -COST_TOL * scale)
        col = row = None
        for j in entering:
            d = np.linalg.solve(B, A[:, j])
            pos = d > PIVOT_TOL * max(1.0, float(np.abs(d).max()))
            if not np.any(pos):
                raise SolverFailure("linear program is unbounded", iterate=basis.copy())
            ratios = np.full(d.shape, np.inf)
            ratios[pos] = np.maximum(xb[pos], 0.0) / d[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-14 * max(1.0, best))
            col, row = int(j), int(ties[np.argmax(d[ties])])
            break
        if col is None:
            x = np.zeros(n)
            x[basis] = np.maximum(xb, 0.0)
            return x, basis, pivots
        basis[row] = col
        pivots += 1
        if pivots > max_pivots:
            raise SolverFailure("pivot limit exceeded", iterate=basis.copy())


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_pivots=50_000) -> LPResult:
    """Minimise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # standard form [A_ub I; A_eq 0] [x; slack] = b with b >= 0
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    n_std = n + m_ub
    b_exact = b.copy()
    b = b + PERTURB * np.random.default_rng(0).uniform(0.5, 1.0, size=m)

    need_art = [i for i in range(m) if i >= m_ub or neg[i]]
    basis = np.array([n + i if i < m_ub and not neg[i] else -1 for i in range(m)])
    pivots = 0
    if need_art:
        art = np.zeros((m, len(need_art)))
        for j, i in enumerate(need_art):
            art[i, j] = 1.0
            basis[i] = n_std + j
        A1 = np.hstack([A, art])
        c1 = np.zeros(A1.shape[1])
        c1[n_std:] = 1.0
        x1, basis, pivots = _simplex(A1, b, c1, basis, max_pivots)
        if c1 @ x1 > FEAS_TOL * max(1.0, float(np.abs(b).max())):
            raise SolverFailure(f"infeasible (phase-one residual {c1 @ x1:.3g})")
        # swap zero-level artificials out; drop rows that turn out redundant
        keep = np.ones(m, bool)
        for r in range(m):
            if basis[r] < n_std:
                continue
            B = A1[:, basis]
            e = np.zeros(m)
            e[r] = 1.0
            row = np.linalg.solve(B.T, e) @ A
            cand = [j for j in np.flatnonzero(np.abs(row) > PIVOT_TOL) if j not in basis]
            if cand:
                basis[r] = int(cand[0])
            else:
                keep[r] = False
        A, b, b_exact, basis = A[keep], b[keep], b_exact[keep], basis[keep]

    cost = np.zeros(n_std)
    cost[:n] = c
    x_std, basis, p2 = _simplex(A, b, cost, basis, max_pivots)
    # polish: the optimal basis is usually still feasible for the exact data
    xb = np.linalg.solve(A[:, basis], b_exact)
    if xb.min() >= -FEAS_TOL:
        x_std = np.zeros(n_std)
        x_std[basis] = np.maximum(xb, 0.0)
    x = x_std[:n]
    return LPResult(x=x, fun=float(c @ x), pivots=pivots + p2)
