"""Small input-validation helpers shared across modules."""

import math

import numpy as np


def check_positive(value, name, exc=ValueError):
    """Return ``float(value)`` if finite and > 0, else raise ``exc``."""
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise exc(f"{name} must be finite and > 0, got {value!r}")
    return value


def check_non_negative(value, name, exc=ValueError):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise exc(f"{name} must be finite and >= 0, got {value!r}")
    return value


def check_1d(values, name, *, min_length=1, non_negative=False):
    """Coerce to a finite 1-D float array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"{name} needs at least {min_length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if non_negative and np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr


def check_same_length(exc, **arrays):
    lengths = {k: len(v) for k, v in arrays.items()}
    if len(set(lengths.values())) > 1:
        raise exc(f"length mismatch: {lengths}")
    return next(iter(lengths.values()))


def frozen_array(values):
    """Copy into a read-only float array."""
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr
