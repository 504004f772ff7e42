"""Channel documents: JSON files holding a channel or instrument as Choi blocks.

A document looks like::

    {
      "schema_version": "1",
      "dim_in": 2,
      "dim_out": 1,
      "outcomes": [0, 1],
      "blocks": [[[[re, im], ...], ...], ...],
      "metadata": {"theta": "1.0471975511965976"}
    }

``outcomes`` present (even if a single outcome) means an instrument; absent
means a plain channel with exactly one block. Every complex entry is a
``[re, im]`` pair. Numbers are written with 17 significant digits so that a
parse/serialize round trip reproduces the text exactly.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .channels import ChoiOperator, Instrument
from .numerics import TOL, partial_trace

SCHEMA_VERSION = "1"

__all__ = [
    "DocumentError",
    "InvariantError",
    "SCHEMA_VERSION",
    "parse_channel_document",
    "serialize_channel_document",
    "channel_document",
    "load_channel",
    "dumps",
    "format_number",
    "document_metadata",
]


class DocumentError(ValueError):
    """Malformed document; ``location`` is a JSON-pointer-like path."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class InvariantError(DocumentError):
    """Well-formed document whose operator violates a channel invariant."""

    def __init__(self, invariant: str, residual: float, location: str = ""):
        self.invariant = invariant
        self.residual = float(residual)
        super().__init__(f"{invariant} violated (measured {self.residual:.6g})", location)


# ---------------------------------------------------------------------------
# writing


def format_number(x) -> str:
    """17 significant digits, integers without a fraction, ``null`` for non-finite values."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent, level)
    if isinstance(obj, (complex, np.complexfloating)):
        return _emit([obj.real, obj.imag], indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric leaves stay on one line
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text; floats use :func:`format_number`, non-finite become null."""
    return _emit(obj, indent, 0) + "\n"


def _complex_rows(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def channel_document(device, metadata: dict | None = None) -> dict:
    """Dictionary form of a channel or instrument."""
    doc: dict = {"schema_version": SCHEMA_VERSION, "dim_in": device.dim_in, "dim_out": device.dim_out}
    if isinstance(device, Instrument):
        doc["outcomes"] = list(device.outcomes)
        doc["blocks"] = [_complex_rows(b) for b in device.blocks]
    elif isinstance(device, ChoiOperator):
        doc["blocks"] = [_complex_rows(device.matrix)]
    else:
        raise TypeError("expected a ChoiOperator or Instrument")
    doc["metadata"] = {str(k): str(v) for k, v in (metadata or {}).items()}
    return doc


def serialize_channel_document(device, metadata: dict | None = None) -> str:
    return dumps(channel_document(device, metadata))


# ---------------------------------------------------------------------------
# reading


def _require(doc: dict, key: str):
    if key not in doc:
        raise DocumentError(f"missing required field {key!r}", "/")
    return doc[key]


def _count(doc: dict, key: str) -> int:
    v = _require(doc, key)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise DocumentError(f"expected a positive integer, got {v!r}", f"/{key}")
    return v


def _finite(v, loc: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DocumentError(f"expected a number, got {v!r}", loc)
    if not math.isfinite(v):
        raise DocumentError("non-finite number", loc)
    return float(v)


def _block(raw, n: int, loc: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n:
        raise DocumentError(f"expected {n} rows", loc)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n:
            raise DocumentError(f"expected {n} entries", f"{loc}/{i}")
        for j, entry in enumerate(row):
            where = f"{loc}/{i}/{j}"
            if not isinstance(entry, list) or len(entry) != 2:
                raise DocumentError("expected a [re, im] pair", where)
            out[i, j] = complex(_finite(entry[0], where + "/0"), _finite(entry[1], where + "/1"))
    return out


def _check_invariants(blocks: np.ndarray, dim_in: int, dim_out: int, tol: float):
    for y, b in enumerate(blocks):
        herm = float(np.max(np.abs(b - b.conj().T))) if b.size else 0.0
        if herm > tol:
            raise InvariantError("hermiticity", herm, f"/blocks/{y}")
        low = float(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0])
        if low < -tol:
            raise InvariantError("positivity (minimum eigenvalue)", low, f"/blocks/{y}")
    total = partial_trace(blocks.sum(axis=0), (dim_out, dim_in), [1])
    res = float(np.max(np.abs(total - np.eye(dim_in))))
    if res > tol:
        raise InvariantError("trace preservation", res, "/blocks")


def parse_channel_document(data: bytes | str, raw: bool = False, tol: float | None = None):
    """Build an :class:`Instrument` (``outcomes`` present) or :class:`ChoiOperator`.

    With ``raw=True`` the invariants are not enforced, for inspecting broken files.
    """
    tol = TOL.document if tol is None else tol
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError(f"not UTF-8 text ({exc.reason})") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("top level must be an object", "/")
    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {version!r}", "/schema_version")
    dim_in, dim_out = _count(doc, "dim_in"), _count(doc, "dim_out")
    raw_blocks = _require(doc, "blocks")
    if not isinstance(raw_blocks, list) or not raw_blocks:
        raise DocumentError("expected a non-empty list", "/blocks")
    n = dim_in * dim_out
    blocks = np.stack([_block(b, n, f"/blocks/{k}") for k, b in enumerate(raw_blocks)])
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        raise DocumentError("expected an object", "/metadata")
    outcomes = doc.get("outcomes")
    if outcomes is None and len(blocks) != 1:
        raise DocumentError("a channel without 'outcomes' must have exactly one block", "/blocks")
    if outcomes is not None:
        if not isinstance(outcomes, list) or len(outcomes) != len(blocks):
            raise DocumentError(f"expected {len(blocks)} labels", "/outcomes")
    if not raw:
        _check_invariants(blocks, dim_in, dim_out, tol)
    if outcomes is None:
        dev = ChoiOperator(dim_in, dim_out, blocks[0], validate=False)
    else:
        dev = Instrument(dim_in, dim_out, blocks, outcomes=tuple(outcomes), validate=False)
    return dev


def load_channel(path, raw: bool = False, tol: float | None = None):
    with open(path, "rb") as fh:
        return parse_channel_document(fh.read(), raw=raw, tol=tol)


def document_metadata(data: bytes | str) -> dict:
    doc = json.loads(data)
    return dict(doc.get("metadata", {})) if isinstance(doc, dict) else {}
