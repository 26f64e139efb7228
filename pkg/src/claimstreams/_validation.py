"""Input validation helpers shared across the package."""

from __future__ import annotations

import math

import numpy as np


def require_positive(name: str, value: float) -> float:
    """Return ``value`` if it is a finite positive real, else raise ValueError."""
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a finite positive real, got {value!r}")
    return value


def require_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"{name} must be a finite nonnegative real, got {value!r}")
    return value


def require_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def require_count(name: str, value: int) -> int:
    """Validate a nonnegative integer (claim count, period index, ...)."""
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")
    return int(value)


def as_count_array(counts) -> np.ndarray:
    """Coerce a sequence of claim counts to a 1-d integer array.

    Raises ValueError on negative, fractional, or non-finite entries.
    """
    arr = np.asarray(counts)
    if arr.ndim != 1:
        raise ValueError(f"counts must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("counts must be non-empty")
    if not np.all(np.isfinite(arr.astype(float))):
        raise ValueError("counts must be finite")
    out = arr.astype(np.int64)
    if np.any(out.astype(float) != arr.astype(float)):
        raise ValueError("counts must be integers")
    if np.any(out < 0):
        raise ValueError("counts must be nonnegative")
    return out


def as_severity_array(values) -> np.ndarray:
    """Coerce a sequence of claim amounts to a 1-d float array of positive values."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"claim amounts must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("claim amounts must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("claim amounts must be finite")
    if np.any(arr <= 0.0):
        raise ValueError("claim amounts must be strictly positive")
    return arr
