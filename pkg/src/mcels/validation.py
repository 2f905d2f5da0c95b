"""Input validation helpers used by the estimators and the functional API."""

import numpy as np

from .errors import DataError


def check_series(x, name="x"):
    """Validate a single multivariate series and return it as a (T, D) float64 array.

    A 1-D array of length T is accepted as shorthand for (T, 1).
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise DataError(f"{name} must be a (T, D) matrix, got ndim={arr.ndim}")
    T, D = arr.shape
    if T < 2 or D < 1:
        raise DataError(f"{name} must have T >= 2 and D >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, name_a="a", name_b="b"):
    if a.shape != b.shape:
        raise DataError(
            f"shape mismatch: {name_a} has {a.shape}, {name_b} has {b.shape}"
        )


def check_panel(X, name="X"):
    """Validate a collection of series and return it as an (n, T, D) float64 array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise DataError(f"{name} must be an (n, T, D) array, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise DataError(f"{name} is empty")
    if arr.shape[1] < 2 or arr.shape[2] < 1:
        raise DataError(f"{name} must have T >= 2 and D >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_labels(y, n, n_classes, name="y"):
    arr = np.asarray(y)
    if arr.shape != (n,):
        raise DataError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise DataError(f"{name} must contain integer class indices")
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(np.int64)
    if n_classes < 2:
        raise DataError(f"need at least 2 classes, got {n_classes}")
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise DataError(
            f"{name} has labels outside 0..{n_classes - 1}"
        )
    return arr
