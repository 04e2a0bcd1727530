"""Input checks shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_size_vector(X):
    """Accept a 1-D vector or a single-column 2-D array of sizes."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=float, ensure_2d=True)
    if arr.shape[1] != 1:
        raise ValueError(f"expected a single size column, got {arr.shape[1]} columns")
    if np.any(arr < 0):
        raise ValueError("sizes must be non-negative")
    return arr[:, 0]


def check_xy(X, y):
    x = check_size_vector(X)
    y = check_array(np.asarray(y, dtype=float).reshape(-1, 1), dtype=float)[:, 0]
    check_consistent_length(x, y)
    return x, y

