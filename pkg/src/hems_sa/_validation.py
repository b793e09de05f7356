"""Input validation helpers used across the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import DataError, NegativeValue

N_HOURS = 24


def check_hourly(values, name="values", *, nonnegative=True) -> np.ndarray:
    """Return `values` as a read-only float64 array of 24 finite entries."""
    arr = np.array(values, dtype=np.float64).ravel()
    if arr.shape != (N_HOURS,):
        raise DataError(f"{name}: expected {N_HOURS} hourly values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name}: non-finite entry")
    if nonnegative and np.any(arr < 0):
        hour = int(np.argmax(arr < 0)) + 1
        raise NegativeValue(f"{name}: negative value at hour {hour}")
    arr.setflags(write=False)
    return arr


def check_unit_samples(X, d=None) -> np.ndarray:
    """Validate a 2-D array of points in the unit hypercube."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"expected a 2-D sample array, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise DataError(f"expected {d} columns, got {X.shape[1]}")
    if X.size and (np.any(X < 0) or np.any(X > 1) or not np.all(np.isfinite(X))):
        raise DataError("samples must lie in [0, 1]")
    return X


def check_fraction(value, name, *, low_open=True) -> float:
    value = float(value)
    ok = (0 < value <= 1) if low_open else (0 <= value <= 1)
    if not ok:
        interval = "(0, 1]" if low_open else "[0, 1]"
        raise DataError(f"{name} must lie in {interval}, got {value}")
    return value


def check_nonnegative(value, name) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise DataError(f"{name} must be a finite value >= 0, got {value}")
    return value
