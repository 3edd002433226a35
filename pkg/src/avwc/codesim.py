"""Desk-scale random coding experiments.

Types and type classes, relative-entropy typicality, random constant-composition
codebooks indexed by ``(k, l, gamma)``, typicality decoding sets, exhaustive
worst-case evaluation over state sequences, the gated likelihood ``Theta`` used
for secrecy, the events E1-E5, the Chernoff tail and the robustification check.

Sequences are integer index arrays; ``Y^n`` and ``S^n`` are enumerated in
lexicographic order (row ``i`` of :func:`all_sequences` is ``i`` written in base
``|A|``).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .channels import AVWC, Alphabet, Distribution
from .errors import (BlocklengthTooLarge, EmptyTypeClass, HypothesisViolated,
                     InconsistentCounts, LengthMismatch, OutOfRange, ValidationError)
from .info import (EmpiricalType, compositions, entropy_arr, entropy_continuity_bound,
                   relative_entropy_arr)

MAX_OUTPUTS = 10 ** 7
MAX_STATES = 10 ** 6
MAX_TYPE_CLASS = 10 ** 5
MC_DRAWS = 10 ** 4
MC_SEED = 20240611


def _guard(default: int) -> int:
    env = os.environ.get("AVWC_MAX_ENUM")
    return int(env) if env else default


def _check_size(count: int, default: int, what: str):
    limit = _guard(default)
    if count > limit:
        raise BlocklengthTooLarge(f"{what}: {count} sequences exceed the limit {limit}")


def all_sequences(size: int, n: int) -> np.ndarray:
    """All of ``A^n`` as an ``(|A|^n, n)`` array in lexicographic order."""
    idx = np.arange(size ** n)
    powers = size ** np.arange(n - 1, -1, -1)
    return (idx[:, None] // powers[None, :]) % size


# -- types -------------------------------------------------------------------

def enumerate_types(n: int, alphabet: Alphabet) -> list:
    if n < 1:
        raise ValidationError("n must be >= 1")
    return [EmpiricalType(alphabet, c) for c in compositions(n, len(alphabet))]


def type_class_size(t: EmpiricalType) -> int:
    out = math.factorial(t.n)
    for c in t.counts:
        out //= math.factorial(c)
    return out


def conditional_type_class_size(joint: np.ndarray, b_seq: Sequence[int]) -> int:
    """Number of ``a^n`` whose joint type with ``b_seq`` has counts ``joint[a, b]``."""
    joint = np.asarray(joint)
    if joint.ndim != 2 or np.any(joint < 0) or np.any(joint != np.round(joint)):
        raise InconsistentCounts("joint counts must be a non-negative integer matrix")
    b_counts = np.bincount(np.asarray(b_seq, dtype=int), minlength=joint.shape[1])
    if b_counts.size != joint.shape[1] or not np.array_equal(joint.sum(axis=0), b_counts):
        raise InconsistentCounts("joint counts do not match the type of b_seq")
    out = 1
    for b in range(joint.shape[1]):
        col = [int(c) for c in joint[:, b]]
        term = math.factorial(sum(col))
        for c in col:
            term //= math.factorial(c)
        out *= term
    return out


def type_class_members(t: EmpiricalType) -> np.ndarray:
    """All sequences of type ``t`` in lexicographic order."""
    size = type_class_size(t)
    _check_size(size, MAX_TYPE_CLASS, "type class")
    k = len(t.counts)
    out = []

    def rec(prefix, left):
        if sum(left) == 0:
            out.append(list(prefix))
            return
        for a in range(k):
            if left[a]:
                left[a] -= 1
                prefix.append(a)
                rec(prefix, left)
                prefix.pop()
                left[a] += 1

    rec([], list(t.counts))
    return np.array(out, dtype=int).reshape(len(out), t.n)


def joint_counts(seqs: Sequence[np.ndarray], sizes: Sequence[int]) -> np.ndarray:
    """Joint type counts of equally long sequences, as an array of shape ``sizes``."""
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise LengthMismatch(f"sequence lengths differ: {sorted(lengths)}")
    flat = np.ravel_multi_index(tuple(np.asarray(s, dtype=int) for s in seqs), tuple(sizes))
    return np.bincount(flat, minlength=int(np.prod(sizes))).reshape(tuple(sizes))


def is_typical(seqs: Sequence, reference, delta: float) -> bool:
    """``D(joint type || reference) <= delta``; zero-probability transitions never pass."""
    ref = reference.mass if isinstance(reference, Distribution) else np.asarray(reference, float)
    if ref.ndim != len(seqs):
        raise ValidationError("reference must have one axis per sequence")
    counts = joint_counts(seqs, ref.shape)
    return relative_entropy_arr(counts / counts.sum(), ref) <= delta


# -- codebooks and decoding sets ---------------------------------------------

@dataclass(frozen=True, eq=False)
class CodeBook:
    n: int
    K: int
    L: int
    Gamma: int
    p: EmpiricalType
    codewords: np.ndarray  # (K, L, Gamma, n)
    seed: int

    def codeword(self, k: int, l: int, g: int) -> np.ndarray:
        return self.codewords[k, l, g]


def build_codebook(n: int, K: int, L: int, Gamma: int, p: EmpiricalType, seed: int = 0) -> CodeBook:
    """Independent uniform draws from the type class of ``p``.

    The draw for ``(k, l, gamma)`` uses its own generator keyed by
    ``(seed, k, l, gamma)``, so it does not depend on any other index.
    """
    if min(K, L, Gamma) < 1:
        raise ValidationError("K, L and Gamma must be positive")
    if p.n != n:
        raise EmptyTypeClass(f"type has denominator {p.n}, blocklength is {n}")
    base = np.repeat(np.arange(len(p.counts)), p.counts)
    words = np.empty((K, L, Gamma, n), dtype=int)
    for k in range(K):
        for l in range(L):
            for g in range(Gamma):
                words[k, l, g] = np.random.default_rng([seed, k, l, g]).permutation(base)
    words.setflags(write=False)
    return CodeBook(n, K, L, Gamma, p, words, seed)


@dataclass(frozen=True, eq=False)
class DecodingSets:
    """Boolean masks over ``Y^n``: ``optimistic[k, l, g]`` and ``sets[k, l, g]``."""

    optimistic: np.ndarray
    sets: np.ndarray
    n_outputs: int

    def disjoint(self) -> bool:
        return bool(np.all(self.sets.sum(axis=(0, 1)) <= 1))


def _divergence_rows(counts: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """``D(counts_i / n || ref_i)`` row-wise, ``inf`` on support violations."""
    n = counts.sum(axis=-1, keepdims=True)
    emp = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(emp > 0, emp * (np.log2(emp) - np.log2(ref)), 0.0)
    d = terms.sum(axis=-1)
    bad = np.any((emp > 0) & (ref <= 0), axis=-1)
    return np.where(bad, np.inf, np.maximum(d, 0.0))


def optimistic_set(x: np.ndarray, kernels: np.ndarray, y_all: np.ndarray, delta: float) -> np.ndarray:
    """Union over state types ``xi`` of the ``W_xi``-typical outputs given ``x``."""
    n_s, n_x, n_y = kernels.shape
    n = len(x)
    px = np.bincount(x, minlength=n_x) / n
    pair = x[None, :] * n_y + y_all
    counts = np.apply_along_axis(np.bincount, 1, pair, minlength=n_x * n_y)
    uniq, inv = np.unique(counts, axis=0, return_inverse=True)
    inv = inv.ravel()
    member = np.zeros(len(uniq), dtype=bool)
    for xi in compositions(n, n_s):
        w = np.tensordot(np.array(xi) / n, kernels, axes=1)
        ref = (px[:, None] * w).ravel()
        member |= _divergence_rows(uniq, ref[None, :]) <= delta
    return member[inv]


def build_decoding_sets(codebook: CodeBook, avwc: AVWC, delta: float) -> DecodingSets:
    """Optimistic sets, then removal of every output claimed by another ``(k', l')``."""
    if delta <= 0:
        raise ValidationError("delta must be positive")
    n_y = len(avwc.legal.output)
    _check_size(n_y ** codebook.n, MAX_OUTPUTS, "output space")
    y_all = all_sequences(n_y, codebook.n)
    K, L, G = codebook.K, codebook.L, codebook.Gamma
    opt = np.zeros((K, L, G, len(y_all)), dtype=bool)
    cache = {}
    for k in range(K):
        for l in range(L):
            for g in range(G):
                x = codebook.codewords[k, l, g]
                key = x.tobytes()
                if key not in cache:
                    cache[key] = optimistic_set(x, avwc.legal.kernels, y_all, delta)
                opt[k, l, g] = cache[key]
    cover = opt.sum(axis=(0, 1))
    sets = opt & (cover[None, None] == 1)
    opt.setflags(write=False)
    sets.setflags(write=False)
    return DecodingSets(opt, sets, len(y_all))


# -- evaluation ---------------------------------------------------------------

def _seq_probs(kernels: np.ndarray, s: np.ndarray, x: np.ndarray, out_all: np.ndarray) -> np.ndarray:
    """``prod_i w(o_i | x_i, s_i)`` for every output sequence ``o``."""
    sel = kernels[s, x]  # (n, |O|)
    return sel[np.arange(len(x))[None, :], out_all].prod(axis=1)


@dataclass(frozen=True, eq=False)
class EventReport:
    flags: dict
    counts: dict
    witnesses: dict


@dataclass(frozen=True, eq=False)
class SimReport:
    worst_error: float
    worst_error_state: tuple
    leakage: float
    leakage_state: tuple
    leakage_message: int
    leakage_exact: bool
    state_errors: np.ndarray
    events: Optional[EventReport] = None

    @property
    def event_flags(self) -> dict:
        return dict(self.events.flags) if self.events else {}


def _type_class_sample(p: EmpiricalType):
    """The full type class, or a pinned-seed sample when it is too large."""
    if type_class_size(p) <= _guard(MAX_TYPE_CLASS):
        return type_class_members(p), True
    rng = np.random.default_rng(MC_SEED)
    base = np.repeat(np.arange(len(p.counts)), p.counts)
    return np.array([rng.permutation(base) for _ in range(MC_DRAWS)]), False


def state_success(codebook: CodeBook, dsets: DecodingSets, avwc: AVWC) -> np.ndarray:
    """Average probability of decoding the right ``k`` for every ``s^n``."""
    n = codebook.n
    n_s, n_y = len(avwc.states), len(avwc.legal.output)
    _check_size(n_s ** n, MAX_STATES, "state space")
    s_all = all_sequences(n_s, n)
    y_all = all_sequences(n_y, n)
    K, L, G = codebook.K, codebook.L, codebook.Gamma
    message_sets = dsets.sets.any(axis=1)  # (K, G, |Y^n|): decode k, any l
    succ = np.zeros(len(s_all))
    for i, s in enumerate(s_all):
        tot = 0.0
        for k in range(K):
            for l in range(L):
                for g in range(G):
                    probs = _seq_probs(avwc.legal.kernels, s, codebook.codewords[k, l, g], y_all)
                    tot += probs[message_sets[k, g]].sum()
        succ[i] = tot / (K * L * G)
    return succ


def evaluate_code(codebook: CodeBook, dsets: DecodingSets, avwc: AVWC) -> SimReport:
    """Worst-case error over all state sequences and worst-case leakage.

    Leakage for ``(s^n, k)`` is the L1 distance between Eve's output law
    averaged over ``(l, gamma)`` and her output law for a uniformly drawn
    member of the type class.
    """
    n = codebook.n
    n_s, n_z = len(avwc.states), len(avwc.eve.output)
    _check_size(n_z ** n, MAX_OUTPUTS, "eavesdropper output space")
    succ = state_success(codebook, dsets, avwc)
    err = np.clip(1.0 - succ, 0.0, 1.0)
    s_all = all_sequences(n_s, n)
    worst = int(np.argmax(err))
    z_all = all_sequences(n_z, n)
    members, exact = _type_class_sample(codebook.p)
    anchor = members[0]
    K, L, G = codebook.K, codebook.L, codebook.Gamma
    leak, leak_s, leak_k = -1.0, 0, 0
    for i, s in enumerate(s_all):
        ref = _seq_probs(avwc.eve.kernels, s, anchor, z_all)
        # differences to a common reference keep identical laws exactly equal
        mean = np.zeros(len(z_all))
        for x in members:
            mean += _seq_probs(avwc.eve.kernels, s, x, z_all) - ref
        mean /= len(members)
        for k in range(K):
            avg = np.zeros(len(z_all))
            for l in range(L):
                for g in range(G):
                    avg += _seq_probs(avwc.eve.kernels, s, codebook.codewords[k, l, g], z_all) - ref
            d = float(np.abs(avg / (L * G) - mean).sum())
            if d > leak:
                leak, leak_s, leak_k = d, i, k
    return SimReport(float(err[worst]), tuple(int(v) for v in s_all[worst]),
                     min(max(leak, 0.0), 2.0), tuple(int(v) for v in s_all[leak_s]),
                     leak_k, exact, err)


# -- Theta and the events ---------------------------------------------------

@dataclass(frozen=True)
class BoundParameters:
    tau: float
    delta: Optional[float] = None
    nu: Optional[float] = None

    def __post_init__(self):
        if not self.tau > 0:
            raise OutOfRange("tau must be positive")
        if self.delta is None:
            object.__setattr__(self, "delta", self.tau)
        if self.nu is None:
            object.__setattr__(self, "nu", self.tau / 5)
        if not 0 < self.delta <= 0.5:
            raise OutOfRange("delta must lie in (0, 1/2] so that sqrt(2 delta) <= 1")

    def f1(self, size: int) -> float:
        return entropy_continuity_bound(math.sqrt(2 * self.delta), size)

    def f2(self, size: int) -> float:
        return 2 * self.f1(size) + self.delta

    def f3(self, size: int) -> float:
        return 4 * (self.delta + self.f1(size))

    def f(self, size: int) -> float:
        return self.f2(size) + self.f3(size)


def _p_sxz(p: np.ndarray, q: np.ndarray, v: np.ndarray) -> np.ndarray:
    # p_SXZ(s, x, z) = q(s) p(x) v(z | x, s); v indexed [s, x, z]
    return q[:, None, None] * p[None, :, None] * v


def theta_bound(p: np.ndarray, q: np.ndarray, v: np.ndarray, n: int, delta: float) -> float:
    """``b = 2^{-n (H(Z|X,S) - f2(delta))}`` with ``f1`` taken over ``S x X x Z``."""
    joint = _p_sxz(p, q, v)
    h_cond = entropy_arr(joint.ravel()) - entropy_arr(joint.sum(axis=2).ravel())
    f2 = 2 * entropy_continuity_bound(math.sqrt(2 * delta), joint.size) + delta
    return 2.0 ** (-n * (h_cond - f2))


def _theta_matrix(s, z_all, xs, v, p, q, delta):
    """``Theta_{s, z}(x)`` for all ``z`` (rows) and candidate ``x`` (columns)."""
    n_s, n_x, n_z = v.shape
    n = len(s)
    ref = _p_sxz(p, q, v).ravel()
    cells = (s[None, None, :] * n_x + xs[None, :, :]) * n_z + z_all[:, None, :]
    size = n_s * n_x * n_z
    c = _row_counts(cells.reshape(-1, n), size)
    gate = (_divergence_rows(c, ref[None, :]) <= delta).reshape(cells.shape[:2])
    probs = v[s[None, None, :], xs[None, :, :], z_all[:, None, :]].prod(axis=2)
    return np.where(gate, probs, 0.0)


def theta_value(s_seq, z_seq, x_seq, avwc: AVWC, p: EmpiricalType, q: EmpiricalType,
                delta: float) -> float:
    """Eve's likelihood ``v^n(z|s, x)`` gated by joint typicality of ``(s, x, z)``."""
    s, z, x = (np.asarray(a, dtype=int) for a in (s_seq, z_seq, x_seq))
    if not len(s) == len(z) == len(x):
        raise LengthMismatch("s, z and x must have equal length")
    if not np.array_equal(np.bincount(s, minlength=len(q.counts)), q.counts):
        raise ValidationError("q must be the type of s_seq")
    if not np.array_equal(np.bincount(x, minlength=len(p.counts)), p.counts):
        return 0.0
    v = avwc.eve.kernels
    val = float(_theta_matrix(s, z[None, :], x[None, :], v, p.mass, q.mass, delta)[0, 0])
    b = theta_bound(p.mass, q.mass, v, len(s), delta)
    if val > b * (1 + 1e-9):
        raise ArithmeticError(f"Theta {val} exceeds its bound {b}")
    return val


def _row_counts(cells: np.ndarray, size: int) -> np.ndarray:
    rows = np.repeat(np.arange(cells.shape[0]), cells.shape[1])
    out = np.zeros((cells.shape[0], size))
    np.add.at(out, (rows, cells.ravel()), 1)
    return out


def _mi_rows(c: np.ndarray) -> np.ndarray:
    """Mutual information of joint count matrices stacked on the leading axes."""
    c = c / c.sum(axis=(-2, -1), keepdims=True)
    outer = c.sum(axis=-1, keepdims=True) * c.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(c > 0, c * np.log2(c / outer), 0.0)
    return np.maximum(t.sum(axis=(-2, -1)), 0.0)


def _emi(a: np.ndarray, b: np.ndarray, na: int, nb: int) -> float:
    c = np.bincount(a * nb + b, minlength=na * nb).reshape(na, nb).astype(float)
    c /= c.sum()
    pa, pb = c.sum(axis=1), c.sum(axis=0)
    mask = c > 0
    return max(float((c[mask] * np.log2(c[mask] / np.outer(pa, pb)[mask])).sum()), 0.0)


def check_events(codebook: CodeBook, avwc: AVWC, params: BoundParameters,
                 dsets: Optional[DecodingSets] = None) -> EventReport:
    """Evaluate E1-E5 literally on one codebook."""
    n, K, L, G = codebook.n, codebook.K, codebook.L, codebook.Gamma
    n_s, n_x, n_z = len(avwc.states), len(avwc.input), len(avwc.eve.output)
    tau, delta = params.tau, params.delta
    rate = math.log2(K * L) / n
    _check_size(n_s ** n, MAX_STATES, "state space")
    _check_size(n_z ** n, MAX_OUTPUTS, "eavesdropper output space")
    s_all = all_sequences(n_s, n)
    z_all = all_sequences(n_z, n)
    words = codebook.codewords
    flags, counts, wit = {}, {}, {}

    # E1: averages of Theta over (l, gamma) concentrate around the mean
    eps1 = 2.0 ** (-n * tau / 4)
    members, exact = _type_class_sample(codebook.p)
    v = avwc.eve.kernels
    bad, worst_dev, witness = 0, 0.0, None
    for s in s_all:
        q = np.bincount(s, minlength=n_s) / n
        mean = _theta_matrix(s, z_all, members, v, codebook.p.mass, q, delta).mean(axis=1)
        for k in range(K):
            cw = words[k].reshape(L * G, n)
            avg = _theta_matrix(s, z_all, cw, v, codebook.p.mass, q, delta).mean(axis=1)
            slack = 1e-12 * np.maximum(mean, 1e-300)
            lo, hi = (1 - eps1) * mean - slack, (1 + eps1) * mean + slack
            viol = (avg < lo) | (avg > hi)
            if np.any(viol):
                bad += int(viol.sum())
                if witness is None:
                    j = int(np.flatnonzero(viol)[0])
                    witness = {"s": s.tolist(), "z": z_all[j].tolist(), "k": k}
            with np.errstate(divide="ignore", invalid="ignore"):
                dev = np.where(mean > 0, np.abs(avg - mean) / mean, np.where(avg > 0, np.inf, 0.0))
            worst_dev = max(worst_dev, float(dev.max()))
    flags["E1"] = bad == 0
    counts["E1"] = {"violations": bad, "epsilon": eps1, "max_relative_deviation": worst_dev,
                    "expectation_exact": exact}
    wit["E1"] = witness

    # E2: worst-case average success of the typicality decoder
    if dsets is None:
        dsets = build_decoding_sets(codebook, avwc, delta)
    succ = state_success(codebook, dsets, avwc)
    thr = 1 - 2 * 2.0 ** (-n * delta / 4)
    i = int(np.argmin(succ))
    flags["E2"] = bool(succ[i] >= thr)
    counts["E2"] = {"min_success": float(succ[i]), "threshold": thr}
    wit["E2"] = {"s": s_all[i].tolist()}

    # E3: codewords sharing a joint type with (x^n, s^n) are not too many
    _check_size(n_x ** n * n_s ** n, MAX_OUTPUTS, "E3 enumeration")
    x_all = all_sequences(n_x, n)
    excess, worst_ratio, witness = 0, 0.0, None
    for g in range(G):
        cw = words[:, :, g].reshape(K * L, n)
        for s in s_all:
            # joint counts over (x, c, s) for every x and codeword: (KL, |X^n|, cells)
            cells = (x_all[None, :, :] * n_x + cw[:, None, :]) * n_s + s[None, None, :]
            jc = _row_counts(cells.reshape(-1, n), n_x * n_x * n_s).reshape(K * L, len(x_all), -1)
            same = np.all(jc[:, None] == jc[None, :], axis=-1)  # (KL, KL, |X^n|)
            group = same.sum(axis=1)
            # I(c; x, s) under the joint type
            info = _mi_rows(jc.reshape(K * L, len(x_all), n_x, n_x, n_s)
                            .transpose(0, 1, 3, 2, 4).reshape(K * L, len(x_all), n_x, -1))
            bound = 2.0 ** (n * (np.maximum(rate - info, 0.0) + tau))
            ratio = group / bound
            worst_ratio = max(worst_ratio, float(ratio.max()))
            viol = group > bound
            if np.any(viol):
                excess += int(viol.sum())
                if witness is None:
                    j, xi = map(int, np.argwhere(viol)[0])
                    witness = {"gamma": g, "x": x_all[xi].tolist(), "s": s.tolist(),
                               "count": int(group[j, xi]), "bound": float(bound[j, xi])}
    flags["E3"] = excess == 0
    counts["E3"] = {"violations": excess, "max_count_over_bound": worst_ratio}
    wit["E3"] = witness

    # E4: few codewords are correlated with any state sequence
    bound4 = K * L * 2.0 ** (-n * tau)
    best4, witness = 0, None
    for g in range(G):
        cw = words[:, :, g].reshape(K * L, n)
        for s in s_all:
            c4 = sum(_emi(c, s, n_x, n_s) > tau for c in cw)
            if c4 > best4:
                best4, witness = c4, {"gamma": g, "s": s.tolist()}
    flags["E4"] = best4 <= bound4
    counts["E4"] = {"max_count": best4, "bound": bound4}
    wit["E4"] = witness

    # E5: few codewords have a competitor that looks jointly like them
    bound5 = K * L * 2.0 ** (-n * tau / 2)
    flat = words.reshape(K * L * G, n)
    best5, witness = 0, None
    for g in range(G):
        for s in s_all:
            c5 = 0
            for k in range(K):
                for l in range(L):
                    me = (k * L + l) * G + g
                    c = flat[me]
                    slack = max(rate - _emi(c, s, n_x, n_s), 0.0)
                    for j, other in enumerate(flat):
                        if j != me and _emi(c, other * n_s + s, n_x, n_x * n_s) - slack > tau:
                            c5 += 1
                            break
            if c5 > best5:
                best5, witness = c5, {"gamma": g, "s": s.tolist()}
    flags["E5"] = best5 <= bound5
    counts["E5"] = {"max_count": best5, "bound": bound5}
    wit["E5"] = witness
    return EventReport(flags, counts, wit)


# -- Chernoff and robustification --------------------------------------------

def chernoff_tail(b: float, nu: float, eps: float, L_count: int) -> float:
    """``2 * 2^(-L eps^2 nu / (3 b))`` bounding a deviation of the empirical mean."""
    if not 0 < eps < 0.5:
        raise OutOfRange("eps must lie in (0, 1/2)")
    if not b > 0 or not 0 <= nu <= b:
        raise OutOfRange("need b > 0 and 0 <= nu <= b")
    if L_count < 1:
        raise OutOfRange("L must be positive")
    return 2.0 * 2.0 ** (-L_count * eps * eps * nu / (3 * b))


@dataclass(frozen=True, eq=False)
class RobustificationReport:
    holds: bool
    bound: float
    min_orbit_average: float
    tightest_state: tuple
    min_hypothesis_value: float


def _as_table(f_table, n_s: int, n: int) -> np.ndarray:
    if isinstance(f_table, Mapping):
        arr = np.full((n_s,) * n, np.nan)
        for key, val in f_table.items():
            arr[tuple(key)] = val
    else:
        arr = np.asarray(f_table, dtype=float)
    if arr.shape != (n_s,) * n or np.any(np.isnan(arr)):
        raise ValidationError("f_table must cover every state sequence")
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError("f_table values must lie in [0, 1]")
    return arr


def robustification_check(f_table, n: int, eps: float, n_states: int = 2) -> RobustificationReport:
    """Check that high average success under every i.i.d. type forces high
    success on average over the permutations of each state sequence."""
    if not 0 <= eps <= 1:
        raise OutOfRange("eps must lie in [0, 1]")
    arr = _as_table(f_table, n_states, n).reshape(-1)
    s_all = all_sequences(n_states, n)
    hyp_min = math.inf
    for c in compositions(n, n_states):
        q = np.array(c) / n
        val = float((arr * q[s_all].prod(axis=1)).sum())
        hyp_min = min(hyp_min, val)
        if val < 1 - eps - 1e-12:
            raise HypothesisViolated(tuple(c), val, eps)
    # the permutation average is the average over the type class
    keys = np.apply_along_axis(np.bincount, 1, s_all, minlength=n_states)
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    orbit = np.bincount(inv, weights=arr) / np.bincount(inv)
    per_seq = orbit[inv]
    i = int(np.argmin(per_seq))
    bound = 1 - 3 * (n + 1) ** n_states * eps
    return RobustificationReport(bool(per_seq[i] >= bound - 1e-12), bound, float(per_seq[i]),
                                 tuple(int(v) for v in s_all[i]), hyp_min)
