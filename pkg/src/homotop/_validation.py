"""Input validation helpers shared by every module."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class ComputeError(RuntimeError):
    """Raised when a numerical routine cannot produce a valid result."""


def check_point_cloud(X, *, min_points=1, name="point cloud"):
    """Return ``X`` as a finite float64 array of shape (n_points, n_dims)."""
    try:
        X = check_array(X, dtype=np.float64, ensure_2d=True,
                        ensure_min_samples=1, ensure_all_finite=True)
    except ValueError as exc:
        raise ValidationError(f"invalid {name}: {exc}") from exc
    if X.shape[0] < min_points:
        raise ValidationError(
            f"{name} needs >= {min_points} points, got {X.shape[0]}")
    return X


def check_distance_matrix(D, *, atol=1e-9):
    """Validate a dense distance matrix: square, symmetric, zero diagonal, non-negative."""
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {D.shape}")
    if D.shape[0] == 0:
        raise ValidationError("distance matrix is empty")
    if not np.all(np.isfinite(D)):
        raise ValidationError("distance matrix has non-finite entries")
    if np.any(D < 0):
        raise ValidationError("distance matrix has negative entries")
    if np.any(np.abs(np.diag(D)) > atol):
        raise ValidationError("distance matrix diagonal is not zero")
    if not np.allclose(D, D.T, rtol=0, atol=atol):
        raise ValidationError("distance matrix is not symmetric")
    # exact symmetry downstream
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def check_random_state_seed(seed):
    """Normalise ``seed`` to a :class:`numpy.random.Generator`."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_positive_int(value, name, *, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
