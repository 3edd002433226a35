"""Symmetrizability: certificates, the exact LP decision, the distance-type
function F, the two-input convex-hull criterion, and pre-coding checks.

A symmetrizing map ``u(s|x)`` must satisfy, for every input pair and output,

    sum_s u(s|x) w(y|x', s) == sum_s u(s|x') w(y|x, s).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.optimize import linprog as scipy_linprog

from . import lp
from .channels import AVC, Alphabet, Channel, compose_avc
from .errors import (AlphabetMismatch, PreconditionNotSymmetrizable,
                     SolverFailure, ValidationError)
from .info import project_simplex

DEFAULT_TOL = 1e-9
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class SymmetrizabilityCertificate:
    u: Channel
    residual: float


@dataclass(frozen=True, eq=False)
class SymVerdict:
    symmetrizable: bool
    certificate: Optional[SymmetrizabilityCertificate] = None
    infeasibility_margin: Optional[float] = None


@dataclass(frozen=True, eq=False)
class FResult:
    value: float
    u: Channel
    certified_exact: bool

    def __iter__(self):
        return iter((self.value, self.u))


def _cross(u: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """``A[x, x', y] = sum_s u[x, s] w(y|x', s)``."""
    return np.einsum("as,sby->aby", u, kernels)


def _asym(u, kernels):
    a = _cross(u, kernels)
    return a - a.transpose(1, 0, 2)


def residual_arr(u: np.ndarray, kernels: np.ndarray) -> float:
    return float(np.abs(_asym(u, kernels)).max())


def verify_certificate(avc: AVC, u: Channel) -> float:
    """Largest violation of the symmetry equations under ``u``."""
    if u.input != avc.input or u.output != avc.states:
        raise AlphabetMismatch("certificate must map AVC inputs to AVC states")
    return residual_arr(u.kernel, avc.kernels)


def hull_weights_to_certificate(avc: AVC, weights) -> Channel:
    """Convert hull-intersection weights of a two-input AVC into a symmetrizing map.

    ``weights[x]`` mixes the rows ``w(.|x, s)`` of input ``x`` itself. A common
    point of the two hulls is a solution of the symmetry equation once the two
    weight vectors are swapped between the inputs.
    """
    weights = np.asarray(weights, dtype=float)
    if len(avc.input) != 2:
        raise ValidationError("hull weights describe two-input AVCs only")
    return Channel(avc.input, avc.states, weights[::-1])


def _pair_rows(n_x, n_s, kernels):
    """Linear maps giving the asymmetry vector of each input pair from vec(u)."""
    n_y = kernels.shape[2]
    rows = []
    for x, xp in combinations(range(n_x), 2):
        m = np.zeros((n_y, n_x * n_s))
        m[:, x * n_s:(x + 1) * n_s] = kernels[:, xp, :].T
        m[:, xp * n_s:(xp + 1) * n_s] -= kernels[:, x, :].T
        rows.append(m)
    return rows


def _simplex_rows(n_x, n_s, extra):
    a = np.zeros((n_x, n_x * n_s + extra))
    for x in range(n_x):
        a[x, x * n_s:(x + 1) * n_s] = 1.0
    return a


def _clean(u):
    u = np.maximum(u, 0.0)
    return u / u.sum(axis=1, keepdims=True)


def is_symmetrizable(avc: AVC, tol: float = DEFAULT_TOL) -> SymVerdict:
    """Decide symmetrizability by minimising the largest equation violation."""
    if tol <= 0:
        raise ValidationError("tol must be positive")
    n_x, n_s = len(avc.input), len(avc.states)
    nv = n_x * n_s + 1
    pairs = _pair_rows(n_x, n_s, avc.kernels)
    if pairs:
        d = np.vstack(pairs)
        t_col = -np.ones((d.shape[0], 1))
        a_ub = np.vstack([np.hstack([d, t_col]), np.hstack([-d, t_col])])
        b_ub = np.zeros(a_ub.shape[0])
    else:
        a_ub, b_ub = None, None
    c = np.zeros(nv)
    c[-1] = 1.0
    res = lp.linprog(c, a_ub, b_ub, _simplex_rows(n_x, n_s, 1), np.ones(n_x))
    u = _clean(res.x[:-1].reshape(n_x, n_s))
    residual = residual_arr(u, avc.kernels)
    cert = SymmetrizabilityCertificate(Channel(avc.input, avc.states, u), residual)
    if residual <= tol:
        return SymVerdict(True, cert, None)
    margin = res.fun if res.fun > tol else residual
    return SymVerdict(False, None, float(margin))


def _f_objective(u, kernels):
    asym = _asym(u, kernels)
    n_x = u.shape[0]
    if n_x < 2:
        return 0.0
    norms = np.abs(asym).sum(axis=2)
    iu = np.triu_indices(n_x, 1)
    return float(norms[iu].max())


def f_value_at(avc: AVC, u: Channel) -> float:
    """Largest pairwise L1 asymmetry under the map ``u``."""
    return _f_objective(u.kernel, avc.kernels)


def _f_exact(avc: AVC):
    n_x, n_s = len(avc.input), len(avc.states)
    n_y = len(avc.output)
    pairs = _pair_rows(n_x, n_s, avc.kernels)
    n_pairs = len(pairs)
    n_u = n_x * n_s
    n_e = n_pairs * n_y
    nv = n_u + n_e + 1
    rows = []
    for k, d in enumerate(pairs):
        e_block = np.zeros((n_y, n_e))
        e_block[:, k * n_y:(k + 1) * n_y] = -np.eye(n_y)
        rows.append(np.hstack([d, e_block, np.zeros((n_y, 1))]))
        rows.append(np.hstack([-d, e_block, np.zeros((n_y, 1))]))
        s = np.zeros((1, nv))
        s[0, n_u + k * n_y:n_u + (k + 1) * n_y] = 1.0
        s[0, -1] = -1.0
        rows.append(s)
    a_ub = np.vstack(rows)
    c = np.zeros(nv)
    c[-1] = 1.0
    a_eq = _simplex_rows(n_x, n_s, n_e + 1)
    res = scipy_linprog(c, A_ub=a_ub, b_ub=np.zeros(a_ub.shape[0]), A_eq=a_eq,
                        b_eq=np.ones(n_x), bounds=(0, None), method="highs",
                        options=_HIGHS)
    if res.status != 0:
        raise SolverFailure(f"F program failed: {res.message}", iterate=res.x)
    return _clean(res.x[:n_u].reshape(n_x, n_s))


def _subgradient(u, kernels):
    """One subgradient of the pairwise-max L1 asymmetry at ``u``."""
    asym = _asym(u, kernels)
    norms = np.abs(asym).sum(axis=2)
    n_x = u.shape[0]
    iu = np.triu_indices(n_x, 1)
    k = int(np.argmax(norms[iu]))
    x, xp = iu[0][k], iu[1][k]
    sign = np.sign(asym[x, xp])
    g = np.zeros_like(u)
    g[x] = kernels[:, xp, :] @ sign
    g[xp] = -(kernels[:, x, :] @ sign)
    return g


def _f_multistart(avc: AVC, starts: int, seed: int, iters: int = 2000):
    n_x, n_s = len(avc.input), len(avc.states)
    rng = np.random.default_rng(seed)
    inits = [np.full((n_x, n_s), 1.0 / n_s)]
    for j in range(min(n_s ** n_x, max(starts - 1, 0) // 2 + 1)):
        det = np.zeros((n_x, n_s))
        idx = np.unravel_index(j, (n_s,) * n_x)
        det[np.arange(n_x), idx] = 1.0
        inits.append(det)
    while len(inits) < starts:
        inits.append(rng.dirichlet(np.ones(n_s), size=n_x))
    best_u, best = None, np.inf
    for u0 in inits[:max(starts, 1)]:
        u = u0.copy()
        for it in range(iters):
            val = _f_objective(u, avc.kernels)
            if val < best - 1e-15:
                best, best_u = val, u.copy()
            if val == 0.0:
                break
            g = _subgradient(u, avc.kernels)
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            step = 0.5 / np.sqrt(it + 1) / gn
            u = np.vstack([project_simplex(row) for row in u - step * g])
    return best_u


def f_value(avc: AVC, mode: str = "exact", starts: int = 8, seed: int = 0) -> FResult:
    """Distance-type quantity that vanishes exactly on symmetrizable AVCs.

    ``F = min_U max_{x != x'} || sum_s u(s|x) w(.|x',s) - sum_s u(s|x') w(.|x,s) ||_1``.
    ``exact`` solves it as a linear program; ``multistart`` runs projected
    subgradient descent from several starts and gives an upper bound.
    """
    if len(avc.input) < 2:
        raise ValidationError("F needs at least two inputs")
    if mode == "exact":
        u = _f_exact(avc)
        exact = True
    elif mode == "multistart":
        u = _f_multistart(avc, starts, seed)
        exact = False
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return FResult(_f_objective(u, avc.kernels), Channel(avc.input, avc.states, u), exact)


def hulls_intersect(avc: AVC, x: int, xp: int, tol: float = DEFAULT_TOL) -> bool:
    """Whether the convex hulls of ``{w(.|x,s)}_s`` and ``{w(.|x',s)}_s`` meet."""
    if x == xp:
        raise ValidationError("inputs must differ")
    n_s, n_y = len(avc.states), len(avc.output)
    rx, rxp = avc.kernels[:, x, :].T, avc.kernels[:, xp, :].T  # (Y, S)
    nv = 2 * n_s + 1
    d = np.hstack([rx, -rxp])
    t_col = -np.ones((n_y, 1))
    a_ub = np.vstack([np.hstack([d, t_col]), np.hstack([-d, t_col])])
    a_eq = np.zeros((2, nv))
    a_eq[0, :n_s] = 1.0
    a_eq[1, n_s:2 * n_s] = 1.0
    c = np.zeros(nv)
    c[-1] = 1.0
    res = scipy_linprog(c, A_ub=a_ub, b_ub=np.zeros(2 * n_y), A_eq=a_eq, b_eq=np.ones(2),
                        bounds=(0, None), method="highs", options=_HIGHS)
    if res.status != 0:
        raise SolverFailure(f"hull program failed: {res.message}", iterate=res.x)
    lam = project_simplex(res.x[:n_s])
    mu = project_simplex(res.x[n_s:2 * n_s])
    gap = float(np.abs(rx @ lam - rxp @ mu).max())
    return gap <= tol


@dataclass(frozen=True, eq=False)
class PrecodingReport:
    original: SymmetrizabilityCertificate
    constructed: SymmetrizabilityCertificate
    composed_verdict: SymVerdict


def precoding_preserves_symmetrizability_check(avc: AVC, t: Channel,
                                               tol: float = DEFAULT_TOL) -> PrecodingReport:
    """Compose a symmetrizable AVC with pre-coder ``t`` and rebuild its certificate.

    If ``u`` symmetrizes ``W``, then ``u'(s|a') = sum_a u(s|a) t(a|a')``
    symmetrizes ``W o T``.
    """
    composed = compose_avc(avc, t)
    verdict = is_symmetrizable(avc, tol)
    composed_verdict = is_symmetrizable(composed, tol)
    if not verdict.symmetrizable:
        err = PreconditionNotSymmetrizable(
            f"AVC is not symmetrizable (margin {verdict.infeasibility_margin:.3g}); "
            f"composed AVC symmetrizable: {composed_verdict.symmetrizable}")
        err.composed_verdict = composed_verdict
        raise err
    u_new = t.kernel @ verdict.certificate.u.kernel
    u_ch = Channel(t.input, avc.states, u_new, tol=2e-9)
    constructed = SymmetrizabilityCertificate(u_ch, verify_certificate(composed, u_ch))
    return PrecodingReport(verdict.certificate, constructed, composed_verdict)


def relabel(avc: AVC, state_perm=None, output_perm=None) -> AVC:
    """Permute state and/or output labels (used for invariance checks)."""
    k = avc.kernels
    states, outputs = avc.states, avc.output
    if state_perm is not None:
        k = k[list(state_perm)]
        states = Alphabet(tuple(avc.states.symbols[i] for i in state_perm))
    if output_perm is not None:
        k = k[:, :, list(output_perm)]
        outputs = Alphabet(tuple(avc.output.symbols[i] for i in output_perm))
    return AVC(avc.input, outputs, states, k)
