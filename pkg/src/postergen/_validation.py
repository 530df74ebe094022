"""Small input-validation helpers shared by the estimators and parsers."""

import math

import numpy as np
from sklearn.utils.validation import check_array


def check_positive(value, name):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")
    return value


def check_fraction(value, name, *, open_low=False):
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    if not (low_ok and value <= 1):
        bracket = "(0, 1]" if open_low else "[0, 1]"
        raise ValueError(f"{name} must lie in {bracket}, got {value!r}")
    return value


def check_features(X, n_features, name="X"):
    """Return ``X`` as a 2-D float array with exactly ``n_features`` columns."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=0)
    if X.shape[1] != n_features:
        raise ValueError(f"{name} must have {n_features} columns, got {X.shape[1]}")
    return X


def with_intercept(X):
    X = np.asarray(X, dtype=np.float64)
    return np.hstack([X, np.ones((X.shape[0], 1))])


def collinear_columns(design, names, tol=1e-10):
    """Names of the columns that take part in a linear dependency of ``design``."""
    _, s, vt = np.linalg.svd(design, full_matrices=True)
    scale = s[0] if s.size else 1.0
    # right singular vectors with (near) zero singular value span the null space
    null = [vt[i] for i in range(vt.shape[0]) if i >= s.size or s[i] <= tol * max(scale, 1.0)]
    involved = set()
    for vec in null:
        involved.update(np.flatnonzero(np.abs(vec) > 1e-6).tolist())
    return [names[i] for i in sorted(involved)]
