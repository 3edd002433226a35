"""Finite alphabets, distributions, channels and arbitrarily varying channels.

All kernels are stored as read-only float64 arrays indexed ``[input, output]``
(``[state, input, output]`` for an AVC). Product alphabets are ordered
lexicographically in (first, second) index, so ``np.kron`` produces them
directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (AlphabetMismatch, DimensionMismatch, NegativeEntry,
                     RowSumViolation, ValidationError)

TOL = 1e-9
COMPUTED_TOL = 2e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        if not syms:
            raise ValidationError("alphabet must be non-empty")
        if len(set(syms)) != len(syms):
            raise ValidationError(f"alphabet labels are not unique: {syms}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def of_size(cls, n: int, prefix: str = "") -> "Alphabet":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def index(self, label) -> int:
        return self.symbols.index(str(label))

    def product(self, other: "Alphabet") -> "Alphabet":
        return Alphabet(tuple(f"({a},{b})" for a in self for b in other))

    def power(self, r: int) -> "Alphabet":
        out = self
        for _ in range(r - 1):
            out = out.product(self)
        return out


def _check_rows(kernel: np.ndarray, tol: float):
    if np.any(kernel < 0):
        bad = np.argwhere(kernel < 0)[0]
        raise NegativeEntry(f"negative entry {kernel[tuple(bad)]!r} at index {tuple(bad)}")
    dev = kernel.sum(axis=-1) - 1.0
    worst = np.unravel_index(np.argmax(np.abs(dev)), dev.shape)
    if abs(dev[worst]) > tol:
        row = worst[0] if len(worst) == 1 else worst
        raise RowSumViolation(row, float(dev[worst]))


@dataclass(frozen=True, eq=False)
class Distribution:
    alphabet: Alphabet
    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass)
        if mass.shape != (len(self.alphabet),):
            raise DimensionMismatch(
                f"distribution has {mass.size} weights for {len(self.alphabet)} symbols")
        _check_rows(mass, TOL)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Distribution":
        return cls(alphabet, np.full(len(alphabet), 1.0 / len(alphabet)))

    @classmethod
    def point(cls, alphabet: Alphabet, index: int) -> "Distribution":
        m = np.zeros(len(alphabet))
        m[index] = 1.0
        return cls(alphabet, m)

    def __len__(self):
        return len(self.alphabet)


@dataclass(frozen=True, eq=False)
class Channel:
    """Stochastic matrix ``kernel[a, b] = w(b|a)``."""

    input: Alphabet
    output: Alphabet
    kernel: np.ndarray
    tol: float = TOL

    def __post_init__(self):
        k = _frozen(self.kernel)
        if k.shape != (len(self.input), len(self.output)):
            raise DimensionMismatch(
                f"kernel shape {k.shape} does not match alphabets "
                f"({len(self.input)}, {len(self.output)})")
        _check_rows(k, self.tol)
        object.__setattr__(self, "kernel", k)

    def row(self, a: int) -> np.ndarray:
        return self.kernel[a]

    def apply(self, p: Distribution) -> Distribution:
        if p.alphabet != self.input:
            raise AlphabetMismatch("distribution is not over the channel input")
        return Distribution(self.output, p.mass @ self.kernel)

    def allclose(self, other: "Channel", atol: float = 1e-12) -> bool:
        return (self.input == other.input and self.output == other.output
                and np.allclose(self.kernel, other.kernel, rtol=0, atol=atol))

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Channel":
        return cls(alphabet, alphabet, np.eye(len(alphabet)))

    @classmethod
    def trash(cls, input: Alphabet, output: Alphabet) -> "Channel":
        return cls(input, output, np.full((len(input), len(output)), 1.0 / len(output)))


def validate_channel(kernel, input: Alphabet, output: Alphabet) -> Channel:
    return Channel(input, output, np.asarray(kernel, dtype=float))


def bsc(p: float, alphabet: Alphabet | None = None) -> Channel:
    """Binary symmetric channel with crossover probability ``p``."""
    alphabet = alphabet or Alphabet(("0", "1"))
    return Channel(alphabet, alphabet, [[1 - p, p], [p, 1 - p]])


@dataclass(frozen=True, eq=False)
class AVC:
    """State-indexed channel family; ``kernels[s, x, y] = w(y|x, s)``."""

    input: Alphabet
    output: Alphabet
    states: Alphabet
    kernels: np.ndarray
    tol: float = TOL

    def __post_init__(self):
        k = _frozen(self.kernels)
        expect = (len(self.states), len(self.input), len(self.output))
        if k.shape != expect:
            raise DimensionMismatch(f"family shape {k.shape}, expected {expect}")
        _check_rows(k, self.tol)
        object.__setattr__(self, "kernels", k)

    @classmethod
    def from_channels(cls, channels: Sequence[Channel], states: Alphabet | None = None) -> "AVC":
        if not channels:
            raise ValidationError("an AVC needs at least one state")
        first = channels[0]
        for c in channels[1:]:
            if c.input != first.input or c.output != first.output:
                raise AlphabetMismatch("member channels do not share alphabets")
        states = states or Alphabet.of_size(len(channels), "s")
        return cls(first.input, first.output, states, np.stack([c.kernel for c in channels]))

    @property
    def family(self) -> tuple:
        return tuple(Channel(self.input, self.output, k, tol=self.tol) for k in self.kernels)

    def __getitem__(self, s: int) -> Channel:
        return Channel(self.input, self.output, self.kernels[s], tol=self.tol)

    def __len__(self):
        return len(self.states)

    def allclose(self, other: "AVC", atol: float = 1e-12) -> bool:
        return (self.kernels.shape == other.kernels.shape
                and np.allclose(self.kernels, other.kernels, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class AVWC:
    legal: AVC
    eve: AVC

    def __post_init__(self):
        if self.legal.input != self.eve.input:
            raise AlphabetMismatch("legal and eavesdropper links have different inputs")
        if self.legal.states != self.eve.states:
            raise AlphabetMismatch("legal and eavesdropper links have different states")

    @property
    def input(self) -> Alphabet:
        return self.legal.input

    @property
    def states(self) -> Alphabet:
        return self.legal.states


def trash_avc(input: Alphabet, states: Alphabet, n_out: int) -> AVC:
    out = Alphabet.of_size(n_out, "z")
    return AVC(input, out, states, np.full((len(states), len(input), n_out), 1.0 / n_out))


def mix_avc(avc: AVC, q: Distribution) -> Channel:
    """The averaged channel ``W_q = sum_s q(s) W_s``."""
    if q.alphabet != avc.states:
        raise AlphabetMismatch("mixing distribution is not over the AVC states")
    return Channel(avc.input, avc.output, np.tensordot(q.mass, avc.kernels, axes=1),
                   tol=COMPUTED_TOL)


def tensor_channel(a: Channel, b: Channel) -> Channel:
    return Channel(a.input.product(b.input), a.output.product(b.output),
                   np.kron(a.kernel, b.kernel), tol=COMPUTED_TOL)


def tensor_avc(a: AVC, b: AVC) -> AVC:
    """Product family indexed by state pairs ``(s, s')`` in lexicographic order."""
    kernels = np.stack([np.kron(ka, kb) for ka in a.kernels for kb in b.kernels])
    return AVC(a.input.product(b.input), a.output.product(b.output),
               a.states.product(b.states), kernels, tol=COMPUTED_TOL)


def tensor_power(avc: AVC, r: int) -> AVC:
    out = avc
    for _ in range(r - 1):
        out = tensor_avc(out, avc)
    return out


def compose_precoding(w: Channel, t: Channel) -> Channel:
    """``w'(b|a') = sum_a w(b|a) t(a|a')``: feed ``t``'s output into ``w``."""
    if t.output != w.input:
        raise AlphabetMismatch("pre-coder output is not the channel input")
    return Channel(t.input, w.output, t.kernel @ w.kernel, tol=COMPUTED_TOL)


def compose_avc(avc: AVC, t: Channel) -> AVC:
    """Apply the same pre-coder in front of every state's channel."""
    if t.output != avc.input:
        raise AlphabetMismatch("pre-coder output is not the AVC input")
    kernels = np.einsum("ab,sbc->sac", t.kernel, avc.kernels)
    return AVC(t.input, avc.output, avc.states, kernels, tol=COMPUTED_TOL)


def compose_avwc(avwc: AVWC, t: Channel) -> AVWC:
    return AVWC(compose_avc(avwc.legal, t), compose_avc(avwc.eve, t))


def product_avwc(a: AVWC, b: AVWC) -> AVWC:
    return AVWC(tensor_avc(a.legal, b.legal), tensor_avc(a.eve, b.eve))


def channel_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``max_x ||a(.|x) - b(.|x)||_1`` for two kernels of equal shape."""
    return float(np.abs(np.asarray(a) - np.asarray(b)).sum(axis=-1).max())


def _directed_g(fa: np.ndarray, fb: np.ndarray) -> float:
    # fa: (S, X, Y), fb: (S', X, Y)
    dist = np.abs(fa[:, None] - fb[None, :]).sum(axis=-1).max(axis=-1)
    return float(dist.min(axis=1).max())


def avc_distance(a: AVC, b: AVC) -> float:
    """Symmetric Hausdorff distance between two state families."""
    if a.input != b.input or len(a.output) != len(b.output):
        raise AlphabetMismatch("AVCs have different input/output alphabets")
    return max(_directed_g(a.kernels, b.kernels), _directed_g(b.kernels, a.kernels))


def joint_family(avwc: AVWC, coupling: str = "diagonal") -> np.ndarray:
    """Kernels of the joint channel to (Bob, Eve) outputs.

    ``diagonal`` pairs ``W_s`` with ``V_s`` for the same state (x -> (y, z)).
    ``product`` takes the full tensor product family over state pairs with
    input pairs.
    """
    if coupling == "diagonal":
        w, v = avwc.legal.kernels, avwc.eve.kernels
        j = w[:, :, :, None] * v[:, :, None, :]
        return j.reshape(w.shape[0], w.shape[1], -1)
    if coupling == "product":
        return tensor_avc(avwc.legal, avwc.eve).kernels
    raise ValueError(f"unknown coupling {coupling!r}")


def hausdorff_distance(a: AVWC, b: AVWC, coupling: str = "diagonal") -> float:
    if (a.input != b.input or len(a.legal.output) != len(b.legal.output)
            or len(a.eve.output) != len(b.eve.output)):
        raise AlphabetMismatch("AVWCs have different alphabets")
    ja, jb = joint_family(a, coupling), joint_family(b, coupling)
    return max(_directed_g(ja, jb), _directed_g(jb, ja))
