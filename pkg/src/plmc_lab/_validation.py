"""Input validation helpers shared by the numerical modules."""

from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionError


def as_point(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite float64 vector, checking its length."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def as_points(X, dim: int | None = None, name: str = "X") -> tuple[np.ndarray, bool]:
    """Coerce a point or a batch of points to a 2-D array.

    Returns the ``(m, n)`` array and a flag telling whether the input was a
    single vector, so callers can hand back the same shape they received.
    """
    arr = np.asarray(X, dtype=np.float64)
    single = arr.ndim <= 1
    if single:
        arr = as_point(arr, dim, name)[None, :]
    else:
        arr = check_array(arr, dtype=np.float64, ensure_2d=True, input_name=name)
        if dim is not None and arr.shape[1] != dim:
            raise DimensionError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr, single


def check_positive(value, name: str, allow_zero: bool = False, allow_inf: bool = False) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if np.isnan(value) or (np.isinf(value) and not allow_inf):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be {bound}, got {value}")
    return value


def check_int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def jsonable(value):
    """Recursively convert numpy values and non-finite floats for JSON output."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value
