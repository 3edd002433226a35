"""Channel files: JSON documents holding an AVC or an AVWC.

Keys: ``name``, ``input_alphabet``, ``state_alphabet``, ``output_alphabet_legal``,
``W`` (indexed ``[state][input][output]``) and optionally ``output_alphabet_eve``
and ``V``. Probabilities may be JSON numbers or strings such as ``"0.25"`` or
``"31/37"``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Union

import numpy as np

from .channels import AVC, AVWC, Alphabet
from .errors import DimensionMismatch, MissingEveLink, ParseError

REQUIRED = ("input_alphabet", "state_alphabet", "output_alphabet_legal", "W")


def _number(v, where):
    if isinstance(v, bool):
        raise ParseError(f"{where}: boolean is not a probability")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(Fraction(v.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: cannot parse {v!r} as a number") from None
    raise ParseError(f"{where}: expected a number, got {type(v).__name__}")


def _array(data, shape, field):
    if not isinstance(data, list) or len(data) != shape[0]:
        raise DimensionMismatch(f"field {field}: expected {shape[0]} states")
    out = np.zeros(shape)
    for s, mat in enumerate(data):
        if not isinstance(mat, list) or len(mat) != shape[1]:
            raise DimensionMismatch(f"field {field}[{s}]: expected {shape[1]} input rows")
        for x, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != shape[2]:
                raise DimensionMismatch(
                    f"field {field}[{s}][{x}]: expected {shape[2]} output entries")
            for y, v in enumerate(row):
                out[s, x, y] = _number(v, f"field {field}[{s}][{x}][{y}]")
    return out


def _alphabet(doc, key):
    val = doc[key]
    if not isinstance(val, list) or not val:
        raise ParseError(f"field {key}: expected a non-empty list of labels")
    return Alphabet(tuple(val))


def from_document(doc: dict) -> Union[AVC, AVWC]:
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    for key in REQUIRED:
        if key not in doc:
            raise ParseError(f"missing field {key}")
    x = _alphabet(doc, "input_alphabet")
    s = _alphabet(doc, "state_alphabet")
    y = _alphabet(doc, "output_alphabet_legal")
    legal = AVC(x, y, s, _array(doc["W"], (len(s), len(x), len(y)), "W"))
    if doc.get("V") is None:
        return legal
    if "output_alphabet_eve" not in doc:
        raise ParseError("field V given without output_alphabet_eve")
    z = _alphabet(doc, "output_alphabet_eve")
    eve = AVC(x, z, s, _array(doc["V"], (len(s), len(x), len(z)), "V"))
    return AVWC(legal, eve)


def loads(text: str) -> Union[AVC, AVWC]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    return from_document(doc)


def parse_channel_file(path) -> Union[AVC, AVWC]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None
    return loads(text)


def load_named(path) -> tuple:
    """Parse a channel file and return ``(object, name)``."""
    obj = parse_channel_file(path)
    doc = json.loads(Path(path).read_text())
    return obj, str(doc.get("name", Path(path).stem))


def require_avwc(obj) -> AVWC:
    if not isinstance(obj, AVWC):
        raise MissingEveLink("this command needs an eavesdropper link (field V)")
    return obj


def legal_of(obj) -> AVC:
    return obj.legal if isinstance(obj, AVWC) else obj


def to_document(obj: Union[AVC, AVWC], name: str) -> dict:
    legal = legal_of(obj)
    doc = {"name": name,
           "input_alphabet": list(legal.input.symbols),
           "state_alphabet": list(legal.states.symbols),
           "output_alphabet_legal": list(legal.output.symbols),
           "W": legal.kernels.tolist()}
    if isinstance(obj, AVWC):
        doc["output_alphabet_eve"] = list(obj.eve.output.symbols)
        doc["V"] = obj.eve.kernels.tolist()
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
