"""JSON interchange for matrices and quantum objects.

A matrix is ``{"dim": n, "entries": [[re, im], ...]}`` with ``n*n`` entries in
row-major order.  Wrappers::

    State        {"rho": matrix}
    Effect       {"a": matrix}
    Observable   {"outcomes": [{"label": str, "effect": matrix}, ...]}
    Operation    {"kraus": [matrix, ...]}
    Instrument   {"outcomes": [{"label": str, "operation": Operation}, ...]}
    Model        {"dimH": n, "dimK": k, "nu": Operation, "sigma": State,
                  "probe": Observable}

States and effects are also accepted as a bare matrix.  Floats are written
with Python's shortest round-trip repr, so a dump/load cycle is exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvariantViolation, SchemaError
from .objects import (
    Effect,
    Instrument,
    KrausMap,
    MeasurementModel,
    Observable,
    Operation,
    State,
)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise SchemaError(f"{where}: expected an object with 'dim' and 'entries'")
    n = obj["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError(f"{where}.dim must be a positive integer")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != n * n:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise SchemaError(f"{where}.entries must hold dim^2 = {n * n} pairs, got {got}")
    out = np.empty(n * n, dtype=np.complex128)
    for i, pair in enumerate(entries):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise SchemaError(f"{where}.entries[{i}] must be a [re, im] pair of numbers")
        if not all(math.isfinite(v) for v in pair):
            raise SchemaError(f"{where}.entries[{i}] is not finite")
        out[i] = complex(pair[0], pair[1])
    return out.reshape(n, n)


def _field(obj: Any, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _wrapped_matrix(obj: Any, key: str, where: str) -> np.ndarray:
    if isinstance(obj, dict) and key in obj:
        return matrix_from_json(obj[key], f"{where}.{key}")
    return matrix_from_json(obj, where)


def _label(item: Any, where: str) -> str:
    lbl = _field(item, "label", where)
    if not isinstance(lbl, str):
        raise SchemaError(f"{where}.label must be a string")
    return lbl


def _outcome_list(obj: Any, where: str) -> list:
    items = _field(obj, "outcomes", where)
    if not isinstance(items, list):
        raise SchemaError(f"{where}.outcomes must be a list")
    return items


def _scoped(where: str, build):
    try:
        return build()
    except InvariantViolation as exc:
        raise InvariantViolation(f"{where}: {exc.invariant}", exc.detail, exc.margin) from exc


def state_from_json(obj: Any, where: str = "state") -> State:
    m = _wrapped_matrix(obj, "rho", where)
    return _scoped(where, lambda: State(m))


def effect_from_json(obj: Any, where: str = "effect") -> Effect:
    m = _wrapped_matrix(obj, "a", where)
    return _scoped(where, lambda: Effect(m))


def observable_from_json(obj: Any, where: str = "observable") -> Observable:
    outcomes = []
    for i, item in enumerate(_outcome_list(obj, where)):
        w = f"{where}.outcomes[{i}]"
        outcomes.append((_label(item, w), effect_from_json(_field(item, "effect", w), f"{w}.effect")))
    return _scoped(where, lambda: Observable(tuple(outcomes)))


def _kraus_list(obj: Any, where: str) -> list[np.ndarray]:
    kraus = _field(obj, "kraus", where)
    if not isinstance(kraus, list):
        raise SchemaError(f"{where}.kraus must be a list")
    return [matrix_from_json(k, f"{where}.kraus[{i}]") for i, k in enumerate(kraus)]


def operation_from_json(obj: Any, where: str = "operation") -> Operation:
    kraus = _kraus_list(obj, where)
    return _scoped(where, lambda: Operation(tuple(kraus)))


def instrument_from_json(obj: Any, where: str = "instrument") -> Instrument:
    outcomes = []
    for i, item in enumerate(_outcome_list(obj, where)):
        w = f"{where}.outcomes[{i}]"
        outcomes.append((_label(item, w), operation_from_json(_field(item, "operation", w), f"{w}.operation")))
    return _scoped(where, lambda: Instrument(tuple(outcomes)))


def model_from_json(obj: Any, where: str = "model") -> MeasurementModel:
    dims = {}
    for key in ("dimH", "dimK"):
        v = _field(obj, key, where)
        if not isinstance(v, int) or isinstance(v, bool):
            raise SchemaError(f"{where}.{key} must be an integer")
        dims[key] = v
    nu = operation_from_json(_field(obj, "nu", where), f"{where}.nu")
    sigma = state_from_json(_field(obj, "sigma", where), f"{where}.sigma")
    probe = observable_from_json(_field(obj, "probe", where), f"{where}.probe")
    return MeasurementModel(dims["dimH"], dims["dimK"], nu, sigma, probe)


def to_json(obj: Any) -> Any:
    """Serialize any supported object (or plain number/list/dict of them)."""
    if isinstance(obj, State):
        return {"rho": matrix_to_json(obj.rho)}
    if isinstance(obj, Effect):
        return {"a": matrix_to_json(obj.a)}
    if isinstance(obj, Observable):
        return {"outcomes": [{"label": lbl, "effect": matrix_to_json(e.a)} for lbl, e in obj]}
    if isinstance(obj, KrausMap):
        return {"kraus": [matrix_to_json(k) for k in obj.kraus]}
    if isinstance(obj, Instrument):
        return {"outcomes": [{"label": lbl, "operation": to_json(op)} for lbl, op in obj]}
    if isinstance(obj, MeasurementModel):
        return {
            "dimH": obj.dim_h,
            "dimK": obj.dim_k,
            "nu": to_json(obj.nu),
            "sigma": to_json(obj.sigma),
            "probe": to_json(obj.probe),
        }
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
            return matrix_to_json(obj)
        return [to_json(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(v) for v in obj]
    return obj


def dumps(obj: Any, indent: int | None = None) -> str:
    return json.dumps(to_json(obj), indent=indent, allow_nan=False)


class JSONParseError(SchemaError):
    def __init__(self, path: str, byte_offset: int, msg: str):
        self.path = path
        self.byte_offset = byte_offset
        super().__init__(f"{path}: invalid JSON at byte {byte_offset}: {msg}")


def load_json(path: str | Path) -> Any:
    """Read a UTF-8 JSON file; parse failures report the byte offset."""
    raw = Path(path).read_bytes()
    text = raw.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise JSONParseError(str(path), offset, exc.msg) from exc
