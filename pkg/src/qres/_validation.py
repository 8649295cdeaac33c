"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ValidationError


def check_random_state(seed) -> np.random.Generator:
    """
    Turn ``seed`` into a :class:`numpy.random.Generator`.

    Accepts ``None``, an int, a sequence of ints (hashed by ``SeedSequence``,
    which is how substreams are keyed), a ``SeedSequence`` or a ``Generator``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    if isinstance(seed, (list, tuple)) and all(isinstance(s, numbers.Integral) for s in seed):
        return np.random.default_rng([int(s) for s in seed])
    raise ValidationError(f"{seed!r} cannot be used to seed a numpy Generator")


def check_cm_stack(X, n_modes: int | None = None) -> np.ndarray:
    """Return ``X`` as a float array of shape ``(n_samples, 2N, 2N)``."""
    arr = np.asarray(
        [getattr(x, "matrix", x) for x in X] if isinstance(X, (list, tuple)) else X,
        dtype=float,
    )
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[1] % 2:
        raise ValidationError(f"expected a stack of covariance matrices, got shape {arr.shape}")
    if n_modes is not None and arr.shape[1] != 2 * n_modes:
        raise ValidationError(f"expected {n_modes}-mode covariance matrices, got shape {arr.shape[1:]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("covariance matrices contain non-finite entries")
    return arr


def check_dm_stack(X, dim: int | None = None) -> np.ndarray:
    """Return ``X`` as a complex array of shape ``(n_samples, d, d)``."""
    arr = np.asarray(
        [getattr(x, "matrix", x) for x in X] if isinstance(X, (list, tuple)) else X,
        dtype=complex,
    )
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValidationError(f"expected a stack of density matrices, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValidationError(f"expected {dim}x{dim} density matrices, got shape {arr.shape[1:]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("density matrices contain non-finite entries")
    return arr


def check_observables(X, n_features: int | None = None) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None]
    if arr.ndim != 2:
        raise ValidationError(f"observables must be a 2-D array, got shape {arr.shape}")
    if n_features is not None and arr.shape[1] != n_features:
        raise ValidationError(f"expected {n_features} observables per sample, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("observables contain non-finite entries")
    return arr
