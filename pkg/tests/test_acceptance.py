"""Acceptance criteria, one test each, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""
import io
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from avwc import builtins, files
from avwc.builtins import BIN, ONE, X2
from avwc.capacity import (avc_capacity, capacity_curve, classify_super_activation,
                           secrecy_rate_r)
from avwc.channels import AVC, AVWC, Alphabet, Channel, Distribution, bsc, trash_avc
from avwc.cli import run
from avwc.codesim import (BoundParameters, build_codebook, build_decoding_sets, check_events,
                          chernoff_tail, enumerate_types, evaluate_code, robustification_check,
                          all_sequences, type_class_size)
from avwc.errors import HypothesisViolated
from avwc.info import (EmpiricalType, OptimizerConfig, approximate_by_type, binary_entropy,
                       compositions, entropy_arr, entropy_continuity_bound)
from avwc.symmetrize import (f_value, hull_weights_to_certificate, hulls_intersect,
                             is_symmetrizable, verify_certificate)

RESULTS = []
SUPER_ACTIVATION_BOUND = 0.5  # pinned after the first computation (0.49999999999...)


def _cli(argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], stdout=buf)
    return code, buf.getvalue()


def _single(ch):
    return AVC.from_channels([ch], ONE)


def _random_avc(rng, nx, ns, ny):
    k = rng.dirichlet(np.ones(ny), size=(ns, nx))
    k = np.where(rng.random(k.shape) < 0.3, 0.0, k)
    k[k.sum(-1) == 0, 0] = 1.0
    k /= k.sum(-1, keepdims=True)
    return AVC(Alphabet.of_size(nx, "x"), Alphabet.of_size(ny, "y"), Alphabet.of_size(ns, "s"), k)


# -- criteria -------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as d:
        code, _ = _cli(["example", "precoding-bsc", "--p", 0.4, "--dir", d])
        pre = json.loads(_cli(["sym", Path(d) / "example1_precoded.json"])[1])["report"]
        orig = json.loads(_cli(["sym", Path(d) / "example1.json"])[1])["report"]
        w_pre = files.legal_of(files.parse_channel_file(Path(d) / "example1_precoded.json"))
    lam, mu = 31 / 37, 75 / 148
    res = verify_certificate(w_pre, hull_weights_to_certificate(w_pre, [[lam, 1 - lam], [mu, 1 - mu]]))
    elapsed = time.perf_counter() - t0
    ok = (code == 0 and pre["symmetrizable"] and pre["residual"] <= 1e-10 and res <= 1e-12
          and not orig["symmetrizable"] and orig["infeasibility_margin"] > 0 and elapsed < 1)
    return ok, (f"W' symmetrizable residual={pre.get('residual'):.2e}, 31/37 & 75/148 residual={res:.2e}, "
                f"W margin={orig.get('infeasibility_margin')}, {elapsed:.2f}s")


def criterion_2():
    t0 = time.perf_counter()
    worst, confirmed = 0.0, True
    for eps in (0.1, 0.25, 0.4):
        fam = builtins.family(eps)
        u = hull_weights_to_certificate(fam, [[eps / (1 - eps), 1 - eps / (1 - eps)],
                                              [(1 - 2 * eps) / (1 - eps), eps / (1 - eps)]])
        worst = max(worst, verify_certificate(fam, u))
        confirmed &= is_symmetrizable(fam).symmetrizable
    elapsed = time.perf_counter() - t0
    return worst <= 1e-12 and confirmed and elapsed < 1, \
        f"max residual={worst:.2e}, LP confirms={confirmed}, {elapsed:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    a, b = builtins.super_activation_pair()
    v = classify_super_activation(a, b, 1, OptimizerConfig())
    elapsed = time.perf_counter() - t0
    ev = v.evidence
    bound = ev.get("product", {}).get("secrecy_lower_bound_bits", 0.0)
    ok = (v.cls == "activated" and bound > 0 and ev["a"]["legal"]["symmetrizable"]
          and not ev["product"]["legal"]["symmetrizable"]
          and abs(bound - SUPER_ACTIVATION_BOUND) <= 1e-6 and elapsed < 30)
    return ok, f"class={v.cls}, product bound={bound:.11f} bits, {elapsed:.1f}s"


def criterion_4():
    t0 = time.perf_counter()
    cfg = OptimizerConfig()
    c_bsc = avc_capacity(_single(bsc(0.1, BIN)), OptimizerConfig(grid=1001)).value_bits
    flip = Channel(BIN, BIN, [[0, 1], [1, 0]])
    c_if = avc_capacity(AVC.from_channels([Channel.identity(BIN), flip]), cfg).value_bits
    ident = Channel.identity(BIN)
    sec = secrecy_rate_r(AVWC(_single(ident), _single(Channel.trash(BIN, BIN))), 1, cfg).value_bits
    curve = capacity_curve(AVWC(_single(ident), _single(ident)), 1.0, 11, 1, cfg)
    curve_err = max(abs(v - min(g, 1.0)) for g, v in curve.rows)
    elapsed = time.perf_counter() - t0
    ok = (abs(c_bsc - (1 - binary_entropy(0.1))) <= 1e-3 and abs(c_if) <= 1e-6
          and abs(sec - 1) <= 1e-6 and curve_err <= 1e-6 and elapsed < 10)
    return ok, (f"BSC={c_bsc:.6f}, Id/Flip={c_if:.1e}, Id/trash={sec:.9f}, "
                f"curve err={curve_err:.1e}, {elapsed:.2f}s")


def criterion_5():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2026)
    disagree, n_sym, n_hull = 0, 0, 0
    for _ in range(500):
        nx, ns, ny = (int(v) for v in rng.integers([2, 1, 1], [5, 5, 5]))
        avc = _random_avc(rng, nx, ns, ny)
        verdict = is_symmetrizable(avc).symmetrizable
        n_sym += verdict
        if verdict != (f_value(avc).value < 1e-6):
            disagree += 1
        if nx == 2:
            n_hull += 1
            if verdict != hulls_intersect(avc, 0, 1):
                disagree += 1
    elapsed = time.perf_counter() - t0
    return disagree == 0 and elapsed < 60, \
        f"{disagree} disagreements ({n_sym}/500 symmetrizable, {n_hull} hull checks), {elapsed:.1f}s"


def _chernoff_trials(rng, trials=100_000):
    """Monte-Carlo frequencies of leaving [(1 +- eps) nu] against the bound."""
    worst = -math.inf
    cases = [("uniform", 50, 0.45), ("uniform", 200, 0.25), ("uniform", 1000, 0.1),
             ("bernoulli0.1", 2000, 0.2), ("bernoulli0.01", 40000, 0.2)]
    for kind, L, eps in cases:
        if kind == "uniform":
            nu, hits = 0.5, 0
            for start in range(0, trials, 2000):
                means = rng.random((min(2000, trials - start), L)).mean(axis=1)
                hits += int(np.sum(np.abs(means - nu) > eps * nu))
        else:
            nu = float(kind[len("bernoulli"):])
            means = rng.binomial(L, nu, size=trials) / L
            hits = int(np.sum(np.abs(means - nu) > eps * nu))
        worst = max(worst, hits / trials - chernoff_tail(1.0, nu, eps, L))
    return worst


def _robust_tables(rng, count=100, n=3, eps=0.01):
    s_all = all_sequences(2, n)
    types = [np.array(c) / n for c in compositions(n, 2)]
    held = 0
    for _ in range(count):
        d = rng.exponential(size=len(s_all)) * (rng.random(len(s_all)) < 0.6)
        worst = max(float((d * q[s_all].prod(axis=1)).sum()) for q in types)
        d = d * eps * rng.uniform(0.2, 1.0) / max(worst, 1e-300)
        f = np.clip(1 - d, 0, 1).reshape((2,) * n)
        try:
            held += robustification_check(f, n, eps).holds
        except HypothesisViolated:
            pass
    return held


def criterion_6():
    t0 = time.perf_counter()
    notes, ok = [], True
    disjoint = True
    # (b) blind eavesdropper, (a) disjointness along the way
    trash = builtins.trash_avwc(2)
    zero = True
    for seed in range(20):
        cb = build_codebook(4, 2, 2, 2, EmpiricalType(X2, (2, 2)), seed)
        ds = build_decoding_sets(cb, trash, 0.5)
        disjoint &= ds.disjoint()
        zero &= evaluate_code(cb, ds, trash).leakage == 0.0
    ok &= zero
    notes.append(f"(b) trash leakage exactly 0: {zero}")
    # (c) leakage medians
    eve = AVWC(_single(Channel.identity(BIN)), _single(bsc(0.2, BIN)))
    medians = []
    for lg in (1, 4, 16):
        leaks = []
        for seed in range(50):
            cb = build_codebook(6, 2, lg, 1, EmpiricalType(BIN, (3, 3)), seed)
            ds = build_decoding_sets(cb, eve, 0.5)
            disjoint &= ds.disjoint()
            leaks.append(evaluate_code(cb, ds, eve).leakage)
        medians.append(float(np.median(leaks)))
    dec = medians[0] > medians[1] > medians[2]
    ok &= dec
    notes.append("(c) medians " + ", ".join(f"{m:.4f}" for m in medians))
    # (d) counting events E3-E5
    pair = AVWC(_single(bsc(0.05, BIN)), _single(bsc(0.3, BIN)))
    rates = {}
    for counts in ((7, 1), (4, 4)):
        good = 0
        for seed in range(200):
            cb = build_codebook(8, 2, 2, 1, EmpiricalType(BIN, counts), seed)
            ds = build_decoding_sets(cb, pair, 0.5)
            disjoint &= ds.disjoint()
            f = check_events(cb, pair, BoundParameters(0.5), ds).flags
            good += f["E3"] and f["E4"] and f["E5"]
        rates[counts] = good / 200
    ok &= rates[(7, 1)] >= 0.9
    notes.append(f"(d) E3-E5 rate {rates[(7, 1)]:.3f} at type (7,1) [info: {rates[(4, 4)]:.3f} at (4,4)]")
    # (e) Chernoff tail
    excess = _chernoff_trials(np.random.default_rng(99))
    ok &= excess <= 0
    notes.append(f"(e) max(freq - bound)={excess:.3f}")
    # (f) robustification
    held = _robust_tables(np.random.default_rng(5))
    ok &= held == 100
    notes.append(f"(f) {held}/100 tables")
    ok &= disjoint
    notes.insert(0, f"(a) disjoint: {disjoint}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    return ok, "; ".join(notes) + f"; {elapsed:.1f}s"


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    cont = 0
    for _ in range(1000):
        nx, nz = int(rng.integers(1, 5)), int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(nx))
        w = rng.dirichlet(np.ones(nz), size=nx)
        r = rng.dirichlet(np.ones(nz), size=nx)
        r = (lam := rng.random()) * w + (1 - lam) * r
        delta = min(float(p @ np.abs(w - r).sum(axis=1)), 1.0)
        hw = sum(pi * entropy_arr(row) for pi, row in zip(p, w))
        hr = sum(pi * entropy_arr(row) for pi, row in zip(p, r))
        cont += abs(hw - hr) <= entropy_continuity_bound(delta, nz) + 1e-12
    approx = 0
    for _ in range(1000):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(k * k, 300))
        mass = rng.dirichlet(np.ones(k))
        t = approximate_by_type(Distribution(Alphabet.of_size(k, "a"), mass), n)
        approx += np.abs(t.mass - mass).sum() <= 2 * k / n
    sums = all(sum(type_class_size(t) for t in enumerate_types(n, Alphabet.of_size(k, "a"))) == k ** n
               for k in (2, 3, 4) for n in range(1, 13))
    elapsed = time.perf_counter() - t0
    return cont == 1000 and approx == 1000 and sums and elapsed < 30, \
        f"f1 {cont}/1000, types {approx}/1000, counts sum to |X|^n: {sums}, {elapsed:.1f}s"


def criterion_8():
    with tempfile.TemporaryDirectory() as d:
        for name in builtins.NAMES:
            _cli(["example", name, "--dir", d])
        d = Path(d)
        runs = [["validate", d / "example1.json"],
                ["sym", d / "example1_precoded.json"],
                ["sym", d / "example1.json", "--link", "eve"],
                ["f-value", d / "example1.json", "--mode", "multistart", "--seed", 3],
                ["capacity", d / "example1.json", "--grid", 21, "--seed", 1],
                ["capacity", d / "super_b.json", "--r", 2, "--grid", 21, "--seed", 1],
                ["ckey", d / "super_b.json", "--g", 0.2],
                ["curve", d / "super_b.json", "--g-max", 1, "--steps", 5],
                ["super", d / "super_a.json", d / "super_b.json"],
                ["probe", d / "family_eps0.25.json", "--eps", 0.2, "--samples", 20, "--seed", 8],
                ["simulate", d / "super_b.json", "--n", 6, "--k", 2, "--l", 2, "--gamma", 2,
                 "--tau", 0.5, "--seed", 11, "--events"],
                ["example", "precoding-bsc", "--dir", d / "again"]]
        same = 0
        for argv in runs:
            first, second = _cli(argv), _cli(argv)
            same += first[0] == 0 and first[1] == second[1]
    return same == len(runs), f"{same}/{len(runs)} commands byte-identical on re-run"


CRITERIA = {1: ("Example 1 reproduction", criterion_1),
            2: ("symmetrizable family certificates", criterion_2),
            3: ("super-activation", criterion_3),
            4: ("capacity oracles", criterion_4),
            5: ("symmetrizability cross-validation", criterion_5),
            6: ("codesim suite at desk scale", criterion_6),
            7: ("entropy, type and counting lemmas", criterion_7),
            8: ("determinism", criterion_8)}


def _evaluate(number):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    line = f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = _evaluate(number)
    assert ok, line


if __name__ == "__main__":
    failed = [n for n in sorted(CRITERIA) if not _evaluate(n)[0]]
    sys.exit(1 if failed else 0)
