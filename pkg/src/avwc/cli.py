"""Command-line interface: ``avwc <command> ...``.

Every command prints a key-sorted JSON document (or writes it to ``--out``);
``curve`` prints CSV. Exit status is 0 on success, 2 on invalid input and 3
when an enumeration guard or numerical limit is hit.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, builtins, files
from .capacity import (avc_capacity, c_key, c_s_estimate, capacity_curve,
                       classify_super_activation, discontinuity_probe, secrecy_rate_r)
from .channels import AVWC, Channel
from .codesim import (BoundParameters, all_sequences, build_codebook, build_decoding_sets,
                      check_events, evaluate_code)
from .errors import LimitError, ValidationError
from .info import EmpiricalType, OptimizerConfig
from .symmetrize import (f_value, hull_weights_to_certificate, is_symmetrizable,
                         verify_certificate)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _channel_json(ch: Channel) -> dict:
    return {"input": list(ch.input.symbols), "output": list(ch.output.symbols),
            "kernel": ch.kernel.tolist()}


def _dist_json(d) -> dict:
    return dict(zip(d.alphabet.symbols, d.mass.tolist())) if d is not None else None


def _cap_json(rep) -> dict:
    out = {"value_bits": rep.value_bits, "kind": rep.kind, "r": rep.r,
           "p_star": _dist_json(rep.p_star), "certified": rep.certified}
    if rep.q_star is not None:
        out["q_star"] = _dist_json(rep.q_star)
    if rep.s_star is not None:
        out["s_star"] = rep.s_star
    if rep.u_star is not None:
        out["u_star"] = _channel_json(rep.u_star)
    if rep.details:
        out["details"] = rep.details
    return out


def _verdict_json(v) -> dict:
    out = {"symmetrizable": v.symmetrizable}
    if v.symmetrizable:
        out["certificate"] = _channel_json(v.certificate.u)
        out["residual"] = v.certificate.residual
    else:
        out["infeasibility_margin"] = v.infeasibility_margin
    return out


def _cfg(args) -> OptimizerConfig:
    return OptimizerConfig(grid=args.grid, starts=args.starts, seed=args.seed)


# -- commands ------------------------------------------------------------------

def cmd_validate(args):
    obj = files.parse_channel_file(args.file)
    legal = files.legal_of(obj)
    rep = {"kind": "avwc" if isinstance(obj, AVWC) else "avc",
           "inputs": len(legal.input), "states": len(legal.states),
           "legal_outputs": len(legal.output)}
    if isinstance(obj, AVWC):
        rep["eve_outputs"] = len(obj.eve.output)
    return rep


def cmd_sym(args):
    obj = files.parse_channel_file(args.file)
    avc = files.require_avwc(obj).eve if args.link == "eve" else files.legal_of(obj)
    return {"link": args.link, **_verdict_json(is_symmetrizable(avc, args.tol))}


def cmd_f_value(args):
    avc = files.legal_of(files.parse_channel_file(args.file))
    res = f_value(avc, args.mode, args.starts, args.seed)
    return {"value": res.value, "u_star": _channel_json(res.u),
            "certified_exact": res.certified_exact, "mode": args.mode}


def cmd_capacity(args):
    obj = files.parse_channel_file(args.file)
    cfg = _cfg(args)
    rep = {"avc_capacity": _cap_json(avc_capacity(files.legal_of(obj), cfg))}
    if isinstance(obj, AVWC):
        sec = secrecy_rate_r(obj, args.r, cfg)
        rep["secrecy_lower_bound"] = _cap_json(sec)
        rep["c_s_estimate"] = _cap_json(c_s_estimate(obj, args.r, cfg, _sec=sec))
    return rep


def cmd_ckey(args):
    obj = files.require_avwc(files.parse_channel_file(args.file))
    return _cap_json(c_key(obj, args.g, args.r, _cfg(args)))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_curve(args):
    obj = files.require_avwc(files.parse_channel_file(args.file))
    rep = capacity_curve(obj, args.g_max, args.steps, args.r, _cfg(args))
    text = _csv_text(["G", "c_key_bits"], rep.rows)
    summary = {"rows": len(rep.rows), "secrecy_bits": rep.secrecy_bits,
               "avc_capacity_bits": rep.avc_capacity_bits, "breakpoint": rep.breakpoint}
    return summary, text


def cmd_super(args):
    a = files.require_avwc(files.parse_channel_file(args.file_a))
    b = files.require_avwc(files.parse_channel_file(args.file_b))
    v = classify_super_activation(a, b, args.r, _cfg(args))
    return {"class": v.cls, "reason": v.reason, "evidence": v.evidence}


def cmd_probe(args):
    obj = files.require_avwc(files.parse_channel_file(args.file))
    rep = discontinuity_probe(obj, args.eps, args.samples, args.seed, _cfg(args))
    out = {"verdict": rep.verdict, "conditions": {
        "positive_mean_rate": rep.positive_rate, "legal_symmetrizable": rep.legal_symmetrizable,
        "nonsymmetrizable_neighbour_found": rep.witness_found},
        "rate_bits": rep.rate_bits, "witnesses": rep.witnesses, "samples": rep.samples}
    if rep.witness is not None:
        out["witness"] = {"W": rep.witness.legal.kernels.tolist(),
                          "distance": rep.witness_distance, "margin": rep.witness_margin}
    return out


def _default_type(alphabet, n, spec):
    if spec:
        counts = tuple(int(c) for c in spec.split(","))
    else:
        k = len(alphabet)
        counts = tuple(n // k + (1 if i < n % k else 0) for i in range(k))
    if sum(counts) != n:
        raise ValidationError(f"type counts {counts} do not sum to n={n}")
    return EmpiricalType(alphabet, counts)


def cmd_simulate(args):
    obj = files.require_avwc(files.parse_channel_file(args.file))
    params = BoundParameters(args.tau, args.delta)
    p = _default_type(obj.input, args.n, args.type)
    cb = build_codebook(args.n, args.k, args.l, args.gamma, p, args.seed)
    ds = build_decoding_sets(cb, obj, params.delta)
    rep = evaluate_code(cb, ds, obj)
    out = {"worst_error": rep.worst_error, "worst_error_state": list(rep.worst_error_state),
           "leakage": rep.leakage, "leakage_state": list(rep.leakage_state),
           "leakage_message": rep.leakage_message, "leakage_exact": rep.leakage_exact,
           "decoding_sets_disjoint": ds.disjoint(), "type": list(p.counts),
           "params": {"tau": params.tau, "delta": params.delta, "nu": params.nu}}
    if args.events:
        ev = check_events(cb, obj, params, ds)
        out["events"] = {"flags": ev.flags, "counts": ev.counts, "witnesses": ev.witnesses}
    text = None
    if args.csv:
        states = all_sequences(len(obj.states), args.n)
        labels = ["".join(obj.states.symbols[i] for i in s) for s in states]
        text = _csv_text(["state_sequence", "error"], zip(labels, map(float, rep.state_errors)))
    return out, text


def cmd_example(args):
    made = builtins.build(args.name, eps=args.eps, p=args.p, outputs=args.outputs)
    outdir = Path(args.dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for fname, (obj, name) in made.items():
        (outdir / fname).write_text(files.dumps(files.to_document(obj, name)))
        written.append(fname)
    rep = {"example": args.name, "files": written}
    if args.name == "precoding-bsc":
        pre = builtins.precoded_avc(args.p)
        v = is_symmetrizable(pre)
        rep["precoded"] = _verdict_json(v)
        if v.symmetrizable:
            u = v.certificate.u.kernel
            rep["precoded"]["u_s1_given_x1"] = f"{u[0, 0]:.12f}"
            rep["precoded"]["u_s1_given_x2"] = f"{u[1, 0]:.12f}"
            # the same point read as hull weights on each input's own rows
            rep["precoded"]["hull_weight_x1_rows"] = f"{u[1, 0]:.12f}"
            rep["precoded"]["hull_weight_x2_rows"] = f"{u[0, 0]:.12f}"
        if args.p == 0.4:
            lam, mu = 31 / 37, 75 / 148
            cert = hull_weights_to_certificate(pre, [[lam, 1 - lam], [mu, 1 - mu]])
            rep["precoded"]["reference_hull_weights"] = {"x1_rows": "31/37", "x2_rows": "75/148"}
            rep["precoded"]["reference_residual"] = verify_certificate(pre, cert)
        rep["original"] = _verdict_json(is_symmetrizable(builtins.example1_avc()))
    if args.name == "symmetrizable-family":
        fam = builtins.family(args.eps)
        if args.eps < 0.5:
            cert = hull_weights_to_certificate(fam, builtins.family_certificate(args.eps))
            rep["reference_residual"] = verify_certificate(fam, cert)
        rep["verdict"] = _verdict_json(is_symmetrizable(fam))
    return rep


# -- wiring --------------------------------------------------------------------

def _opt_flags(p, with_r=True):
    if with_r:
        p.add_argument("--r", type=int, default=1, help="letters per super-symbol (1 or 2)")
    p.add_argument("--grid", type=int, default=101, help="simplex grid resolution")
    p.add_argument("--starts", type=int, default=8, help="optimizer starts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avwc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON result (or CSV for curve) to this path")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("validate", parents=[common], help="parse and validate a channel file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sym", parents=[common], help="decide symmetrizability")
    p.add_argument("file")
    p.add_argument("--link", choices=["legal", "eve"], default="legal")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_sym)

    p = sub.add_parser("f-value", parents=[common], help="distance-to-symmetrizability F")
    p.add_argument("file")
    p.add_argument("--mode", choices=["exact", "multistart"], default="exact")
    p.add_argument("--starts", type=int, default=8)
    p.set_defaults(func=cmd_f_value)

    p = sub.add_parser("capacity", parents=[common], help="capacity and secrecy bounds")
    p.add_argument("file")
    _opt_flags(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("ckey", parents=[common], help="key capacity with G bits of common randomness")
    p.add_argument("file")
    p.add_argument("--g", type=float, required=True)
    _opt_flags(p)
    p.set_defaults(func=cmd_ckey)

    p = sub.add_parser("curve", parents=[common], help="C_key as a function of G (CSV)")
    p.add_argument("file")
    p.add_argument("--g-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _opt_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("super", parents=[common], help="classify a pair for super-activation")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _opt_flags(p)
    p.set_defaults(func=cmd_super)

    p = sub.add_parser("probe", parents=[common], help="search for a discontinuity witness")
    p.add_argument("file")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    _opt_flags(p, with_r=False)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("simulate", parents=[common], help="random code simulation")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--gamma", type=int, default=1)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--type", help="codeword type as comma separated counts")
    p.add_argument("--events", action="store_true", help="also evaluate events E1-E5")
    p.add_argument("--csv", help="write per-state error probabilities to this CSV file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", parents=[common], help="write a built-in example")
    p.add_argument("name", choices=builtins.NAMES)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--p", type=float, default=0.4)
    p.add_argument("--outputs", type=int, default=3)
    p.add_argument("--dir", default=".")
    p.set_defaults(func=cmd_example)
    return parser


def _digest(args) -> str:
    h = hashlib.sha256()
    for key, val in sorted(vars(args).items()):
        if key in ("func", "out"):
            continue
        h.update(f"{key}={val!r};".encode())
        if key in ("file", "file_a", "file_b") and val and Path(val).is_file():
            h.update(Path(val).read_bytes())
    return h.hexdigest()


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except LimitError as e:
        print(f"limit: {e}", file=sys.stderr)
        return 3
    csv_text = None
    if isinstance(result, tuple):
        result, csv_text = result
    doc = {"command": args.command, "inputs_digest": _digest(args), "report": _jsonable(result),
           "seed": args.seed, "version": __version__}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.command == "curve":
        if args.out:
            Path(args.out).write_text(csv_text)
            stdout.write(text)
        else:
            stdout.write(csv_text)
        return 0
    if csv_text is not None:
        Path(args.csv).write_text(csv_text)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())
