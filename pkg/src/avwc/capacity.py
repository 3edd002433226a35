"""Rate bounds for arbitrarily varying wiretap channels.

Everything here reduces to two inner problems on a fixed input law ``p``:

* ``B(p) = min_q I(p; W_q)`` over mixtures of legal states (convex in ``q``),
* ``E(p) = max_s I(p; V_s)`` over eavesdropper states (a vertex maximum).

The outer maximisation over ``p`` uses a simplex lattice followed by projected
(super)gradient refinement from the best lattice points. Multi-letter bounds
search pre-coders from a small family, so they are lower bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import (AVC, AVWC, Alphabet, Channel, Distribution, compose_avc,
                       product_avwc, hausdorff_distance, tensor_power)
from .errors import NonpositiveG, UnsupportedR, ValidationError
from .info import (OptimizerConfig, compositions, max_mixture_mi_arr,
                   min_mixture_mi_arr, project_simplex)
from .symmetrize import SymVerdict, is_symmetrizable

LATTICE_BUDGET = 5000
# inner minimisations over three or more states are iterative, so fewer points
MULTISTATE_BUDGET = 300
POSITIVE = 1e-9


@dataclass(frozen=True, eq=False)
class CapacityReport:
    value_bits: float
    kind: str
    r: int
    p_star: Distribution
    u_star: Optional[Channel] = None
    q_star: Optional[Distribution] = None
    s_star: Optional[str] = None
    certified: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value_bits < 0 or self.r < 1:
            raise ValidationError("capacity report must have value >= 0 and r >= 1")


def _lattice(dim: int, grid: int, budget: int = LATTICE_BUDGET):
    """Simplex lattice points, resolution chosen to respect the budget."""
    if dim == 1:
        return np.ones((1, 1))
    m = grid - 1
    if dim > 2:
        while m > 1 and math.comb(m + dim - 1, dim - 1) > budget:
            m -= 1
    pts = np.array(list(compositions(m, dim)), dtype=float) / m
    return pts


def _mi_grad(p, kernel):
    # d/dp(x) of I(p; W) up to an additive constant: D(W(.|x) || pW)
    out = p @ kernel
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(kernel > 0, np.log2(kernel / np.maximum(out, 1e-300)), 0.0)
    return (kernel * lr).sum(axis=1)


class _Objective:
    """``phi(p) = B(p) - E(p)`` for a fixed pair of (composed) families."""

    def __init__(self, legal: np.ndarray, eve: Optional[np.ndarray], cfg: OptimizerConfig):
        self.legal = legal
        self.eve = eve
        self.cfg = cfg

    def parts(self, p, warm=None):
        b, q = min_mixture_mi_arr(p, self.legal, self.cfg, warm=warm)
        if self.eve is None:
            return b, q, 0.0, None
        e, s = max_mixture_mi_arr(p, self.eve)
        return b, q, e, s

    def value(self, p):
        b, _, e, _ = self.parts(p)
        return b - e

    def grad(self, p, q, s):
        g = _mi_grad(p, np.tensordot(q, self.legal, axes=1))
        if self.eve is not None:
            g = g - _mi_grad(p, self.eve[s])
        return g - g.mean()


def _refine(obj: _Objective, p0, iters: int = 200):
    """Monotone projected ascent; only improving steps are accepted."""
    p = p0.copy()
    b, q, e, s = obj.parts(p)
    f = b - e
    step = 0.1
    for _ in range(iters):
        g = obj.grad(p, q, s)
        if np.abs(g).max() < 1e-12:
            break
        while step > 1e-10:
            cand = project_simplex(p + step * g)
            b2, q2, e2, s2 = obj.parts(cand, warm=q)
            if b2 - e2 > f + 1e-13:
                break
            step *= 0.5
        else:
            break
        moved = np.abs(cand - p).max()
        p, f, q, s = cand, b2 - e2, q2, s2
        step = min(step * 2.0, 1.0)
        if moved < obj.cfg.tol:
            break
    return p, f


def _maximise(obj: _Objective, dim: int, cfg: OptimizerConfig, extra_starts=()):
    """Lattice search plus refinement; ties go to the earliest lattice point."""
    budget = LATTICE_BUDGET if obj.legal.shape[0] <= 2 else MULTISTATE_BUDGET
    pts = _lattice(dim, cfg.grid, budget)
    vals = np.array([obj.value(p) for p in pts])
    order = np.argsort(-vals, kind="stable")
    best_p, best = pts[order[0]].copy(), float(vals[order[0]])
    rng = np.random.default_rng(cfg.seed)
    starts = [pts[i] for i in order[:cfg.starts]] + list(extra_starts)
    if dim > 2:
        starts += list(rng.dirichlet(np.ones(dim), size=cfg.starts))
    for p0 in starts:
        p, f = _refine(obj, np.asarray(p0, dtype=float))
        if f > best + 1e-12:
            best, best_p = f, p
    return best_p, best


def _dist(alphabet, p):
    p = np.maximum(p, 0.0)
    return Distribution(alphabet, p / p.sum())


def avc_capacity(avc: AVC, cfg: OptimizerConfig | None = None) -> CapacityReport:
    """``max_p min_q I(p; W_q)``, the capacity with correlated random codes."""
    cfg = cfg or OptimizerConfig()
    obj = _Objective(avc.kernels, None, cfg)
    p, val = _maximise(obj, len(avc.input), cfg)
    _, q = min_mixture_mi_arr(p, avc.kernels, cfg)
    return CapacityReport(max(val, 0.0), "avc_capacity", 1, _dist(avc.input, p),
                          q_star=_dist(avc.states, q), certified=True)


def lift_precoder(u_r: Channel, base: Alphabet) -> Channel:
    """Extend a pre-coder on ``r`` letters to ``r + 1`` letters.

    The new first letter passes through unchanged and ``u_r`` acts on the
    remaining ``r`` letters, i.e. the kernel is ``Id (x) u_r``.
    """
    size = len(u_r.input)
    r = round(math.log(size, len(base))) if len(base) > 1 else 1
    if u_r.input != base.power(r) or u_r.output != base.power(r):
        raise ValidationError("pre-coder must map X^r to X^r")
    big = base.power(r + 1)
    return Channel(big, big, np.kron(np.eye(len(base)), u_r.kernel), tol=2e-9)


def _secrecy_for(legal: np.ndarray, eve: np.ndarray, u: np.ndarray, cfg, starts=()):
    lk = np.einsum("ab,sbc->sac", u, legal)
    ek = np.einsum("ab,sbc->sac", u, eve)
    obj = _Objective(lk, ek, cfg)
    p, val = _maximise(obj, u.shape[0], cfg, starts)
    return p, val, obj


def _precoder_candidates(n: int, r: int, base_opt, cfg):
    cands = [("identity", np.eye(n))]
    if base_opt is not None:
        cands.append(("lifted", np.kron(np.eye(int(round(n ** (1 / r)))), base_opt)))
        cands.append(("product", np.kron(base_opt, base_opt)))
    rng = np.random.default_rng([cfg.seed, r])
    for j in range(max(cfg.starts // 4, 1)):
        cands.append((f"random{j}", rng.dirichlet(np.ones(n), size=n)))
    return cands


def secrecy_rate_r(avwc: AVWC, r: int = 1, cfg: OptimizerConfig | None = None,
                   _base: Optional[CapacityReport] = None) -> CapacityReport:
    """``C_r / r`` with ``C_r = max_{p,U} [min_q I(p; W_q o U) - max_s I(p; V_s o U)]``.

    Returned as a lower bound on the mean secrecy capacity (clamped at 0).
    """
    cfg = cfg or OptimizerConfig()
    if r not in (1, 2):
        raise UnsupportedR(f"r={r} not supported (use 1 or 2)")
    legal = tensor_power(avwc.legal, r)
    eve = tensor_power(avwc.eve, r)
    base_u = None
    if r == 2:
        base = _base or secrecy_rate_r(avwc, 1, cfg)
        base_u = base.u_star.kernel
    n = len(legal.input)
    best = None
    for name, u in _precoder_candidates(n, r, base_u, cfg):
        p, val, obj = _secrecy_for(legal.kernels, eve.kernels, u, cfg)
        if best is None or val > best[1] + 1e-12:
            best = (p, val, name, u, obj)
    p, val, name, u, obj = best
    _, q, _, s = obj.parts(p)
    u_ch = Channel(legal.input, legal.input, u, tol=2e-9)
    sym = is_symmetrizable(compose_avc(legal, u_ch)).symmetrizable
    return CapacityReport(max(val, 0.0) / r, "secrecy_lower_bound_r", r, _dist(legal.input, p),
                          u_star=u_ch, q_star=_dist(legal.states, q),
                          s_star=eve.states.symbols[s], certified=False,
                          details={"precoder": name, "raw_value": val / r,
                                   "composed_symmetrizable": sym})


def c_key(avwc: AVWC, G: float, r: int = 1, cfg: OptimizerConfig | None = None) -> CapacityReport:
    """``min{secrecy + G, avc capacity}``: the key rate with ``G`` bits of secret common randomness."""
    if not G > 0:
        raise NonpositiveG(f"G must be positive, got {G}")
    cfg = cfg or OptimizerConfig()
    sec = secrecy_rate_r(avwc, r, cfg)
    cap = avc_capacity(avwc.legal, cfg)
    return _c_key_report(sec, cap, G)


def _c_key_report(sec: CapacityReport, cap: CapacityReport, G: float) -> CapacityReport:
    val = min(sec.value_bits + G, cap.value_bits)
    src = cap if cap.value_bits <= sec.value_bits + G else sec
    return CapacityReport(val, "c_key", sec.r, src.p_star, u_star=src.u_star,
                          q_star=src.q_star, certified=False,
                          details={"G": G, "secrecy_bits": sec.value_bits,
                                   "avc_capacity_bits": cap.value_bits})


def c_s_estimate(avwc: AVWC, r: int = 1, cfg: OptimizerConfig | None = None,
                 _sec: Optional[CapacityReport] = None) -> CapacityReport:
    """Secrecy capacity estimate: exactly 0 for a symmetrizable legal link."""
    verdict = is_symmetrizable(avwc.legal)
    if verdict.symmetrizable:
        return CapacityReport(0.0, "c_s_estimate", r, Distribution.uniform(avwc.input),
                              certified=True,
                              details={"legal_symmetrizable": True,
                                       "residual": verdict.certificate.residual})
    sec = _sec or secrecy_rate_r(avwc, r, cfg)
    return CapacityReport(sec.value_bits, "c_s_estimate", r, sec.p_star, u_star=sec.u_star,
                          q_star=sec.q_star, s_star=sec.s_star, certified=False,
                          details={"legal_symmetrizable": False,
                                   "margin": verdict.infeasibility_margin})


@dataclass(frozen=True, eq=False)
class SuperActivationVerdict:
    cls: str
    reason: str
    evidence: dict


def _verdict_dict(v: SymVerdict) -> dict:
    if v.symmetrizable:
        return {"symmetrizable": True, "residual": v.certificate.residual}
    return {"symmetrizable": False, "margin": v.infeasibility_margin}


def classify_super_activation(a: AVWC, b: AVWC, r: int = 1,
                              cfg: OptimizerConfig | None = None) -> SuperActivationVerdict:
    """Sort a pair of AVWCs into the classes of the super-activation characterisation."""
    cfg = cfg or OptimizerConfig()
    ca, cb = c_s_estimate(a, r, cfg), c_s_estimate(b, r, cfg)
    evidence = {"a": {"legal": _verdict_dict(is_symmetrizable(a.legal)),
                      "c_s_bits": ca.value_bits, "c_s_certified": ca.certified},
                "b": {"legal": _verdict_dict(is_symmetrizable(b.legal)),
                      "c_s_bits": cb.value_bits, "c_s_certified": cb.certified}}
    if ca.value_bits > POSITIVE or cb.value_bits > POSITIVE:
        return SuperActivationVerdict(
            "inconclusive", "an individual pair already has a positive secrecy rate", evidence)
    prod = product_avwc(a, b)
    pv = is_symmetrizable(prod.legal)
    evidence["product"] = {"legal": _verdict_dict(pv)}
    if pv.symmetrizable:
        return SuperActivationVerdict(
            "impossible_symmetrizable_product", "the product legal link is symmetrizable", evidence)
    sec = secrecy_rate_r(prod, r, cfg)
    evidence["product"]["secrecy_lower_bound_bits"] = sec.value_bits
    if sec.value_bits > POSITIVE:
        return SuperActivationVerdict(
            "activated", "product is non-symmetrizable with a positive mean secrecy bound", evidence)
    cap = avc_capacity(prod.legal, cfg)
    evidence["product"]["avc_capacity_bits"] = cap.value_bits
    if cap.value_bits <= POSITIVE:
        return SuperActivationVerdict(
            "impossible_zero_mean", "the product legal link has zero capacity", evidence)
    return SuperActivationVerdict(
        "inconclusive", f"no positive mean secrecy bound found at r={r}; a zero mean "
                        "capacity cannot be certified at finite r", evidence)


@dataclass(frozen=True, eq=False)
class ProbeReport:
    verdict: str
    positive_rate: bool
    rate_bits: float
    legal_symmetrizable: bool
    witness_found: bool
    witnesses: int
    samples: int
    witness: Optional[AVWC] = None
    witness_distance: Optional[float] = None
    witness_margin: Optional[float] = None


def _perturb(avwc: AVWC, eps: float, rng) -> AVWC:
    k0 = avwc.legal.kernels
    noisy = k0 + rng.normal(scale=eps / 2, size=k0.shape)
    k = np.apply_along_axis(project_simplex, -1, noisy)
    cand = AVWC(AVC(avwc.input, avwc.legal.output, avwc.states, k), avwc.eve)
    d = hausdorff_distance(avwc, cand)
    if d >= eps:
        k = k0 + (k - k0) * (0.99 * eps / d)
        cand = AVWC(AVC(avwc.input, avwc.legal.output, avwc.states, k), avwc.eve)
    return cand


def discontinuity_probe(avwc: AVWC, eps: float, samples: int = 200, seed: int = 0,
                        cfg: OptimizerConfig | None = None) -> ProbeReport:
    """Look for a non-symmetrizable legal link within Hausdorff distance ``eps``.

    A missing witness only means none was found among ``samples`` draws.
    """
    if not eps > 0:
        raise ValidationError("eps must be positive")
    cfg = cfg or OptimizerConfig()
    rate = secrecy_rate_r(avwc, 1, cfg).value_bits
    sym = is_symmetrizable(avwc.legal).symmetrizable
    positive = rate > POSITIVE
    if not sym:
        return ProbeReport("continuous", positive, rate, False, False, 0, 0)
    rng = np.random.default_rng(seed)
    found, first = 0, None
    for _ in range(samples):
        cand = _perturb(avwc, eps, rng)
        v = is_symmetrizable(cand.legal)
        if not v.symmetrizable:
            found += 1
            if first is None:
                first = (cand, hausdorff_distance(avwc, cand), v.infeasibility_margin)
    if found and positive:
        verdict = "discontinuity_indicated"
    elif found:
        verdict = "undetermined"
    else:
        verdict = "witness_not_found"
    w, d, m = first if first else (None, None, None)
    return ProbeReport(verdict, positive, rate, True, bool(found), found, samples, w, d, m)


@dataclass(frozen=True, eq=False)
class CurveReport:
    rows: list
    secrecy_bits: float
    avc_capacity_bits: float
    breakpoint: float


def capacity_curve(avwc: AVWC, g_max: float, steps: int, r: int = 1,
                   cfg: OptimizerConfig | None = None) -> CurveReport:
    """``C_key`` on a uniform grid of ``G`` in ``[0, g_max]``.

    At ``G = 0`` the row holds the right limit ``min{secrecy, capacity}``.
    """
    if not g_max > 0 or steps < 2:
        raise ValidationError("need g_max > 0 and steps >= 2")
    cfg = cfg or OptimizerConfig()
    sec = secrecy_rate_r(avwc, r, cfg).value_bits
    cap = avc_capacity(avwc.legal, cfg).value_bits
    rows = [(float(g), min(sec + float(g), cap)) for g in np.linspace(0.0, g_max, steps)]
    vals = [v for _, v in rows]
    if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
        raise ArithmeticError("capacity curve is not monotone")
    return CurveReport(rows, sec, cap, max(cap - sec, 0.0))
