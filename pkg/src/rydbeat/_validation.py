"""Small input-validation helpers shared by the simulation and fitting code."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

#: Relative tolerance for "uniformly spaced" grid checks.
GRID_RTOL = 1e-9


def as_1d_array(x, name="array"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_uniform_grid(t, name="grid", allow_single=False):
    """Validate a 1-D uniformly spaced grid and return (array, spacing)."""
    arr = as_1d_array(t, name)
    if arr.size < 2:
        if allow_single and arr.size == 1:
            return arr, 0.0
        raise InvalidInputError(f"{name} needs at least 2 points")
    steps = np.diff(arr)
    dt = steps[0]
    if dt <= 0 or not np.allclose(steps, dt, rtol=GRID_RTOL, atol=0.0):
        raise InvalidInputError(f"{name} must be uniformly increasing")
    return arr, float(dt)


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise InvalidInputError(f"{name} must be a positive finite number, got {value}")
    return float(value)


def check_nonnegative(value, name):
    if not np.isfinite(value) or value < 0:
        raise InvalidInputError(f"{name} must be >= 0, got {value}")
    return float(value)
