"""Small argument checkers shared across modules."""

import numbers

import numpy as np

from .exceptions import InputError


def as_1d(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def check_probability(u, name="u"):
    """Return ``u`` as float array, rejecting anything outside the open unit interval."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0.0) | ~(arr < 1.0)):
        raise InputError(f"{name} must lie in the open interval (0, 1), got {u!r}")
    return arr


def check_alpha(alpha):
    if not isinstance(alpha, numbers.Real) or not 0.0 < alpha < 0.5:
        raise InputError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    return float(alpha)


def check_rng(seed):
    """Turn ``seed`` (None, int or Generator) into a ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def scalar_or_array(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a
