"""Entropy, divergence and mutual information in bits, plus the two inner
optimisations over state mixtures used by every rate expression.

The functions taking :class:`Distribution` / :class:`Channel` objects are the
public surface; the ``*_arr`` variants work on raw arrays and are what the
capacity search calls in its inner loops.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import AVC, Alphabet, Channel, Distribution
from .errors import (AlphabetMismatch, LengthMismatch, NTooSmall,
                     OptimizerDidNotConverge, OutOfRange, ValidationError)

MI_SLACK = 1e-12


GAP_TOL = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    grid: int = 101
    starts: int = 8
    tol: float = 1e-8
    max_iter: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.grid < 2:
            raise ValidationError("grid must be >= 2")
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")
        if self.starts < 1 or self.max_iter < 1:
            raise ValidationError("starts and max_iter must be positive")


@dataclass(frozen=True)
class EmpiricalType:
    alphabet: Alphabet
    counts: tuple = field()

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != len(self.alphabet):
            raise ValidationError("type has wrong number of counts")
        if any(c < 0 for c in counts) or sum(counts) == 0:
            raise ValidationError(f"invalid counts {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def mass(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n

    def distribution(self) -> Distribution:
        return Distribution(self.alphabet, self.mass)

    @classmethod
    def of_sequence(cls, seq: Sequence[int], alphabet: Alphabet) -> "EmpiricalType":
        return cls(alphabet, tuple(np.bincount(np.asarray(seq, dtype=int),
                                               minlength=len(alphabet))))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entropy_arr(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(p: Distribution) -> float:
    return entropy_arr(p.mass)


def relative_entropy_arr(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float(max((p[mask] * np.log2(p[mask] / q[mask])).sum(), 0.0))


def relative_entropy(p: Distribution, q: Distribution) -> float:
    if p.alphabet != q.alphabet:
        raise AlphabetMismatch("distributions live on different alphabets")
    return relative_entropy_arr(p.mass, q.mass)


def mi_arr(p: np.ndarray, kernel: np.ndarray) -> float:
    """I(p; W) for a row-stochastic ``kernel[x, y]``."""
    out = p @ kernel
    joint = p[:, None] * kernel
    mask = joint > 0
    ratio = kernel[mask] / np.broadcast_to(out, kernel.shape)[mask]
    val = float((joint[mask] * np.log2(ratio)).sum())
    if val < -MI_SLACK:
        raise ArithmeticError(f"negative mutual information {val}")
    return max(val, 0.0)


def mutual_information(p: Distribution, w: Channel) -> float:
    if p.alphabet != w.input:
        raise AlphabetMismatch("input distribution is not over the channel input")
    return mi_arr(p.mass, w.kernel)


def mi_from_joint(joint: np.ndarray) -> float:
    joint = np.asarray(joint, dtype=float)
    joint = joint / joint.sum()
    pa, pb = joint.sum(axis=1), joint.sum(axis=0)
    mask = joint > 0
    val = float((joint[mask] * np.log2(joint[mask] / np.outer(pa, pb)[mask])).sum())
    return max(val, 0.0)


def empirical_mutual_information(a_seq: Sequence, b_seq: Sequence) -> float:
    """Mutual information of the joint empirical type of two sequences."""
    if len(a_seq) != len(b_seq):
        raise LengthMismatch(f"sequence lengths {len(a_seq)} != {len(b_seq)}")
    if len(a_seq) == 0:
        raise LengthMismatch("sequences must be non-empty")
    a_lab = {a: i for i, a in enumerate(dict.fromkeys(a_seq))}
    b_lab = {b: i for i, b in enumerate(dict.fromkeys(b_seq))}
    joint = np.zeros((len(a_lab), len(b_lab)))
    for (a, b), c in Counter(zip(a_seq, b_seq)).items():
        joint[a_lab[a], b_lab[b]] = c
    return mi_from_joint(joint)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _mixture_grad(p, kernels, q):
    mixed = np.tensordot(q, kernels, axes=1)
    out = p @ mixed
    logr = np.log2(np.maximum(mixed, 1e-300)) - np.log2(np.maximum(out, 1e-300))[None, :]
    return np.einsum("x,sxy,xy->s", p, kernels, logr)


def _stall_status(p, kernels, q, tol):
    # a stalled iterate still counts as optimal when its duality gap is small
    g = _mixture_grad(p, kernels, q)
    return "certified" if float(g @ q - g.min()) <= max(tol, GAP_TOL) else "stalled"


def _descend(p, kernels, q0, tol, max_iter):
    """Projected gradient descent with backtracking on q -> I(p; W_q).

    Returns ``(q, value, status)`` with status ``certified`` (duality gap below
    ``tol``), ``stalled`` (no further progress) or ``max_iter``.
    """
    q = q0.copy()
    f = mi_arr(p, np.tensordot(q, kernels, axes=1))
    step = 1.0
    for it in range(max_iter):
        g = _mixture_grad(p, kernels, q)
        # convexity: f(q) - min f <= g.q - min(g), a certificate of optimality
        if float(g @ q - g.min()) <= tol:
            return q, f, "certified"
        while True:
            q_new = project_simplex(q - step * g)
            f_new = mi_arr(p, np.tensordot(q_new, kernels, axes=1))
            moved = q_new - q
            if f_new <= f + 1e-4 * float(g @ moved) + 1e-15 or step < 1e-14:
                break
            step *= 0.5
        if f_new > f:
            return q, f, _stall_status(p, kernels, q, tol)
        delta = float(np.abs(moved).max())
        q, f_old, f = q_new, f, f_new
        step = min(step * 2.0, 1e6)
        if delta < tol and f_old - f < tol * 1e-2:
            return q, f, _stall_status(p, kernels, q, tol)
    return q, f, "max_iter"


def _min_two_states(p, kernels, best_val, best_q, tol):
    # the state simplex is a segment and the objective is convex on it
    fun = lambda t: mi_arr(p, t * kernels[0] + (1 - t) * kernels[1])
    res = minimize_scalar(fun, bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": min(tol, 1e-9)})
    if res.fun < best_val - 1e-15:
        return float(res.fun), np.array([res.x, 1.0 - res.x])
    return best_val, best_q


def min_mixture_mi_arr(p, kernels, cfg: OptimizerConfig, warm=None):
    """Return ``(min_q I(p; W_q), q*)`` over the full state simplex."""
    p = np.asarray(p, dtype=float)
    kernels = np.asarray(kernels, dtype=float)
    n_states = kernels.shape[0]
    keep = p > 0
    p_red, k_red = p[keep], kernels[:, keep, :]
    pure = np.array([mi_arr(p_red, k) for k in k_red])
    best_s = int(np.argmin(pure))
    best_q = np.zeros(n_states)
    best_q[best_s] = 1.0
    best_val = float(pure[best_s])
    if n_states == 1:
        return best_val, best_q
    if n_states == 2:
        return _min_two_states(p_red, k_red, best_val, best_q, cfg.tol)
    rng = np.random.default_rng(cfg.seed)
    inits = []
    if warm is not None:
        inits.append(np.asarray(warm, dtype=float))
    inits.append(np.full(n_states, 1.0 / n_states))
    for s in np.argsort(pure, kind="stable"):
        if len(inits) >= cfg.starts:
            break
        inits.append(np.eye(n_states)[s])
    while len(inits) < cfg.starts:
        inits.append(rng.dirichlet(np.ones(n_states)))
    any_converged = False
    for q0 in inits[:max(cfg.starts, 1)]:
        q, f, status = _descend(p_red, k_red, q0, cfg.tol, cfg.max_iter)
        any_converged |= status != "max_iter"
        if f < best_val - 1e-15:
            best_val, best_q = f, q
        if status == "certified":
            # one certified start settles a convex problem; the rest only guard stalls
            break
    if not any_converged:
        raise OptimizerDidNotConverge("no start converged within max_iter",
                                      best=(best_val, best_q))
    return best_val, best_q


def min_mixture_mi(p: Distribution, avc: AVC, cfg: OptimizerConfig | None = None):
    if p.alphabet != avc.input:
        raise AlphabetMismatch("input distribution is not over the AVC input")
    val, q = min_mixture_mi_arr(p.mass, avc.kernels, cfg or OptimizerConfig())
    q = np.maximum(q, 0.0)
    return val, Distribution(avc.states, q / q.sum())


def max_mixture_mi_arr(p, kernels):
    p = np.asarray(p, dtype=float)
    vals = [mi_arr(p, k) for k in kernels]
    s = int(np.argmax(vals))
    return float(vals[s]), s


def max_mixture_mi(p: Distribution, avc: AVC):
    """``max_q I(p; V_q)``, attained at a pure state (convexity in q)."""
    if p.alphabet != avc.input:
        raise AlphabetMismatch("input distribution is not over the AVC input")
    return max_mixture_mi_arr(p.mass, avc.kernels)


def compositions(n: int, parts: int):
    """All ways to write ``n`` as an ordered sum of ``parts`` non-negative
    integers, first part descending: (2,0), (1,1), (0,2)."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def entropy_continuity_bound(delta: float, z_size: int) -> float:
    """``|Z| * h(delta / |Z|)``, bounding conditional-entropy differences."""
    if not 0.0 <= delta <= 1.0:
        raise OutOfRange(f"delta={delta} outside [0, 1]")
    if z_size < 1:
        raise OutOfRange("output alphabet size must be positive")
    return z_size * binary_entropy(delta / z_size)


def approximate_by_type(p: Distribution, n: int) -> EmpiricalType:
    """A type with denominator ``n`` within ``2|X|/n`` in L1 of ``p``."""
    size = len(p)
    if n < size * size:
        raise NTooSmall(f"n={n} < |X|^2={size * size}")
    mass = p.mass
    support = np.flatnonzero(mass > 0)
    counts = np.zeros(size, dtype=int)
    last = support[np.argmax(mass[support])]
    for i in support:
        if i != last:
            counts[i] = int(math.floor(mass[i] * n + 0.5))
    counts[last] = n - counts.sum()
    return EmpiricalType(p.alphabet, tuple(counts))
