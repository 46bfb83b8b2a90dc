"""JSON encoding of states, problems and results.

Output is byte-stable: keys are sorted and every float is written with a fixed
number of significant digits (17 by default, enough to round-trip a double).
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .bloch import QubitState, TrackingProblem
from .exceptions import MalformedInput, NonPhysicalState

FLOAT_DIGITS = 17


def _fmt_float(x: float, digits: int) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, f".{digits}g")
    # keep floats recognizable as floats
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _emit(obj: Any, digits: int, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(obj[k], digits, indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # short numeric rows stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_emit(v, digits, indent, level + 1) for v in obj) + "]"
        items = [pad + _emit(v, digits, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), digits, indent, level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj), digits)
    if isinstance(obj, complex):
        return _emit([obj.real, obj.imag], digits, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, digits: int = FLOAT_DIGITS, indent: int = 2) -> str:
    """Deterministic JSON text with sorted keys and ``digits`` significant digits."""
    return _emit(obj, digits, indent, 0) + "\n"


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedInput(f"{where}: expected a number, got {v!r}")
    return float(v)


def _complex(v, where: str) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise MalformedInput(f"{where}: complex entries are [re, im] pairs")
        return complex(_number(v[0], where), _number(v[1], where))
    return complex(_number(v, where))


def decode_state(doc, where: str = "state") -> QubitState:
    """``{"bloch": [x, y, z]}``, ``{"density": 2x2 of [re, im]}`` or a bare 3-list."""
    try:
        if isinstance(doc, list):
            doc = {"bloch": doc}
        if not isinstance(doc, dict):
            raise MalformedInput(f"{where}: expected an object with 'bloch' or 'density'")
        if "bloch" in doc:
            b = doc["bloch"]
            if not isinstance(b, list) or len(b) != 3:
                raise MalformedInput(f"{where}.bloch: expected 3 numbers")
            return QubitState([_number(x, f"{where}.bloch") for x in b])
        if "density" in doc:
            d = doc["density"]
            if not isinstance(d, list) or len(d) != 2 or any(not isinstance(r, list) or len(r) != 2 for r in d):
                raise MalformedInput(f"{where}.density: expected a 2x2 matrix")
            rho = np.array([[_complex(z, f"{where}.density") for z in row] for row in d])
            return QubitState.from_density(rho)
    except NonPhysicalState as e:
        raise NonPhysicalState(f"{where}: {e}") from None
    raise MalformedInput(f"{where}: expected key 'bloch' or 'density'")


def encode_state(s: QubitState) -> dict:
    return {"bloch": s.bloch.tolist()}


def decode_problem(doc) -> TrackingProblem:
    if not isinstance(doc, dict):
        raise MalformedInput("problem: expected a JSON object")
    for key in ("rho1", "rho2", "target1", "target2", "pi1"):
        if key not in doc:
            raise MalformedInput(f"problem: missing field '{key}'")
    states = [decode_state(doc[k], k) for k in ("rho1", "rho2", "target1", "target2")]
    return TrackingProblem(*states, _number(doc["pi1"], "pi1"))


def encode_problem(p: TrackingProblem) -> dict:
    return {
        "rho1": encode_state(p.rho1),
        "rho2": encode_state(p.rho2),
        "target1": encode_state(p.target1),
        "target2": encode_state(p.target2),
        "pi1": p.pi1,
    }


def load_json(text: str, where: str = "input"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"{where}: invalid JSON ({e.msg} at line {e.lineno} column {e.colno})") from None


def read_problem(path: str) -> TrackingProblem:
    """Load a problem from a file path, or from inline JSON if ``path`` starts with ``{``."""
    if path.lstrip().startswith("{"):
        return decode_problem(load_json(path, "inline problem"))
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise MalformedInput(f"cannot read {path}: {e.strerror}") from None
    return decode_problem(load_json(text, path))


def parse_state_arg(text: str, where: str) -> QubitState:
    """CLI state argument: JSON state or comma-separated Bloch components."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        return decode_state(load_json(text, where), where)
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise MalformedInput(f"{where}: expected 'x,y,z' or a JSON state, got {text!r}") from None
    if len(parts) != 3:
        raise MalformedInput(f"{where}: expected 3 Bloch components, got {len(parts)}")
    try:
        return QubitState(parts)
    except NonPhysicalState as e:
        raise NonPhysicalState(f"{where}: {e}") from None
