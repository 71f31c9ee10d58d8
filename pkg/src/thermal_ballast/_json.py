"""Deterministic JSON output with 17-significant-digit floats."""

import json
import math

import numpy as np


def _float(x):
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = [f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return _wrap("{", "}", items, indent, level)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_encode(v, indent, level + 1) for v in obj]
        return _wrap("[", "]", items, indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _wrap(open_, close, items, indent, level):
    if not items:
        return open_ + close
    if not indent:
        return open_ + ", ".join(items) + close
    inner = "\n" + " " * (indent * (level + 1))
    return open_ + inner + ("," + inner).join(items) + "\n" + " " * (indent * level) + close


def dumps(obj, indent=2):
    return _encode(obj, indent, 0)


def dump(obj, path, indent=2):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent))
        fh.write("\n")
