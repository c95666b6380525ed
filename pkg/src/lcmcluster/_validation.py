"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

#: Default clamp applied to item parameters before taking logarithms.
EPS = 1e-6


def check_responses(X, allow_missing=False):
    """Validate a binary response matrix and return it as float64.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_items)
        Cells must be 0 or 1. Missing cells are NaN and only accepted
        when ``allow_missing`` is True.
    allow_missing : bool, default=False

    Returns
    -------
    R : ndarray of shape (n_samples, n_items), dtype float64
    """
    R = check_array(
        X,
        dtype=np.float64,
        ensure_all_finite="allow-nan" if allow_missing else True,
        ensure_min_samples=1,
        ensure_min_features=1,
    )
    observed = R[~np.isnan(R)] if allow_missing else R
    if not np.all((observed == 0.0) | (observed == 1.0)):
        raise ValueError("response matrix must contain only 0/1 entries")
    return R


def check_labels(labels, n_classes=None, n_samples=None):
    """Validate a 0-based label vector.

    Labels must be integers in ``[0, n_classes)``. When ``n_classes`` is
    None it is not checked against an upper bound.
    """
    s = np.asarray(labels)
    if s.ndim != 1:
        raise ValueError(f"labels must be 1-dimensional, got shape {s.shape}")
    if s.size and not np.issubdtype(s.dtype, np.integer):
        if not np.all(np.mod(s, 1) == 0):
            raise ValueError("labels must be integers")
    s = s.astype(np.int64)
    if n_samples is not None and s.shape[0] != n_samples:
        raise ValueError(f"expected {n_samples} labels, got {s.shape[0]}")
    if s.size and s.min() < 0:
        raise ValueError("labels must be nonnegative")
    if n_classes is not None and s.size and s.max() >= n_classes:
        raise ValueError(
            f"label {int(s.max())} out of range for {n_classes} classes"
        )
    return s


def check_n_classes(k, name="n_classes", minimum=1):
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"{name} must be an integer, got {k!r}")
    if k < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {k}")
    return int(k)


def check_theta(theta, n_items=None, n_classes=None, open_interval=False):
    """Validate an item-parameter matrix of shape (n_items, n_classes)."""
    T = np.asarray(theta, dtype=np.float64)
    if T.ndim == 1:
        T = T[np.newaxis, :]
    if T.ndim != 2:
        raise ValueError(f"theta must be 2-dimensional, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise ValueError("theta contains non-finite values")
    if open_interval:
        if np.any((T <= 0.0) | (T >= 1.0)):
            raise ValueError("theta entries must lie strictly inside (0, 1)")
    elif np.any((T < 0.0) | (T > 1.0)):
        raise ValueError("theta entries must lie in [0, 1]")
    if n_items is not None and T.shape[0] != n_items:
        raise ValueError(f"theta has {T.shape[0]} rows, expected {n_items} items")
    if n_classes is not None and T.shape[1] != n_classes:
        raise ValueError(f"theta has {T.shape[1]} columns, expected {n_classes}")
    return T


def clamp_theta(theta, eps=EPS):
    return np.clip(theta, eps, 1.0 - eps)


def as_generator(random_state=None):
    """Return a ``numpy.random.Generator`` for an int, SeedSequence or Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    if isinstance(random_state, np.random.RandomState):
        raise TypeError("legacy RandomState is not supported; pass an int or Generator")
    return np.random.default_rng(random_state)


def spawn_generators(random_state, n):
    """Split ``random_state`` into ``n`` independent child generators."""
    return as_generator(random_state).spawn(n)
