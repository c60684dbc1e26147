"""Deterministic JSON: fixed key order, floats with 17 significant digits.

``None`` is written as the string ``"undefined"`` so reports mark quantities
that do not exist instead of leaving them null.
"""

from __future__ import annotations

import json
import math

import numpy as np


def _scalar(v) -> str:
    if v is None:
        return '"undefined"'
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"cannot write non-finite float {v!r} as JSON")
        s = format(v, ".17g")
        # keep a float marker so readers do not see an int
        if "." not in s and "e" not in s:
            s += ".0"
        return s
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


def undefined_to_none(obj):
    """Inverse of the ``"undefined"`` marker, for reading reports back."""
    if obj == "undefined":
        return None
    if isinstance(obj, dict):
        return {k: undefined_to_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [undefined_to_none(v) for v in obj]
    return obj
