"""Input checks shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_features(X, n_features=None) -> np.ndarray:
    """2-D finite float array, with the expected number of columns if known."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, but the estimator was fitted with {n_features}"
        )
    return X


def check_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        y = y.reshape(-1)
    if y.shape[0] != n_samples:
        raise ValueError(f"got {y.shape[0]} labels for {n_samples} samples")
    return y


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_positive_float(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def resolve_seed(random_state) -> int:
    """Turn ``random_state`` into the integer seed of every stream."""
    if random_state is None:
        return int(np.random.SeedSequence().entropy)
    if isinstance(random_state, numbers.Integral) and random_state >= 0:
        return int(random_state)
    raise ValueError(f"random_state must be None or a non-negative int, got {random_state!r}")
