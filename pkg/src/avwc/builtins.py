"""Built-in example channels.

Each builder returns ``{file name: (object, name)}`` so the CLI can write them
as channel files.
"""
from __future__ import annotations

import numpy as np

from .channels import AVC, AVWC, Alphabet, Channel, bsc, trash_avc
from .errors import EpsOutOfRange, OutOfRange, UnknownExample

X2 = Alphabet(("x1", "x2"))
S2 = Alphabet(("s1", "s2"))
Y3 = Alphabet(("1", "2", "3"))
ONE = Alphabet(("s",))
BIN = Alphabet(("0", "1"))
D1, D2, D3 = np.eye(3)
R12 = np.array([0.6, 0.2, 0.2])
R22 = np.array([0.1, 0.3, 0.6])


def example1_avc() -> AVC:
    """Non-symmetrizable AVC that becomes symmetrizable after BSC pre-coding."""
    return AVC(X2, Y3, S2, [[D1, R12], [D2, R22]])


def precoded_avc(p: float) -> AVC:
    """Pre-coded family with rows as functions of the crossover ``p``.

    Rows for ``x1`` carry weight ``p`` on the original ``x1`` row; at ``p = 0.4``
    the two hulls meet with hull weights 31/37 (``x1`` rows) and 75/148
    (``x2`` rows).
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p={p} outside [0, 1]")
    pp = 1.0 - p
    rows = [[p * D1 + pp * np.array([0.2, 0.6, 0.2]), pp * D1 + p * R12],
            [p * D2 + pp * R22, pp * D2 + p * R22]]
    return AVC(X2, Y3, S2, rows)


def family(eps: float) -> AVC:
    """Two-state family that is symmetrizable for every ``eps`` in [0, 1/2]."""
    if not 0.0 <= eps <= 0.5:
        raise EpsOutOfRange(f"eps={eps} outside [0, 0.5]")
    e = eps
    w1 = [[0.0, e, 1 - e], [1 - e, 0.0, e]]
    w2 = [[1 - e, e, 0.0], [0.0, 1 - e, e]]
    return AVC(X2, Y3, S2, [w1, w2])


def family_certificate(eps: float) -> np.ndarray:
    """Hull weights ``[[u(1|1), 1-u(1|1)], [u(1|2), 1-u(1|2)]]`` for the family."""
    a = eps / (1 - eps)
    b = (1 - 2 * eps) / (1 - eps)
    return np.array([[a, 1 - a], [b, 1 - b]])


def super_activation_pair(p_legal: float = 0.1, p_eve: float = 0.05):
    """Symmetrizable deterministic link with blind Eve, and a degraded BSC pair."""
    w1 = AVC(X2, Y3, S2, [[D1, D3], [D3, D2]])
    a = AVWC(w1, trash_avc(X2, S2, 2))
    b = AVWC(AVC.from_channels([bsc(p_legal, BIN)], ONE), AVC.from_channels([bsc(p_eve, BIN)], ONE))
    return a, b


def trash_avwc(outputs: int = 3) -> AVWC:
    if outputs < 1:
        raise OutOfRange("need at least one output")
    legal = trash_avc(X2, S2, outputs)
    return AVWC(legal, trash_avc(X2, S2, outputs))


NAMES = ("precoding-bsc", "symmetrizable-family", "super-activation", "trash")


def build(name: str, eps: float = 0.25, p: float = 0.4, outputs: int = 3) -> dict:
    if name == "precoding-bsc":
        eve = trash_avc(X2, S2, 2)
        return {"example1.json": (AVWC(example1_avc(), eve), "example1"),
                "example1_precoded.json": (AVWC(precoded_avc(p), eve), f"example1_precoded_p{p:g}")}
    if name == "symmetrizable-family":
        return {f"family_eps{eps:g}.json": (AVWC(family(eps), trash_avc(X2, S2, 2)),
                                           f"family_eps{eps:g}")}
    if name == "super-activation":
        a, b = super_activation_pair()
        return {"super_a.json": (a, "super_a"), "super_b.json": (b, "super_b")}
    if name == "trash":
        return {"trash.json": (trash_avwc(outputs), f"trash_{outputs}")}
    raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(NAMES)}")


def bsc_precoder(p: float) -> Channel:
    return bsc(p, X2)
