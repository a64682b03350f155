"""Input-validation helpers shared across the package.

All checks raise :class:`~kdsos.exceptions.ValidationError` so the CLI can map
them onto a single exit code.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def as_matrix(X, name: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains non-finite entries")
    return X


def check_square(X, name: str = "matrix") -> np.ndarray:
    X = as_matrix(X, name)
    if X.shape[0] != X.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {X.shape}")
    return X


def check_symmetric(X, tol: float = 1e-9, name: str = "matrix") -> np.ndarray:
    X = check_square(X, name)
    scale = max(1.0, float(np.abs(X).max(initial=0.0)))
    asym = float(np.abs(X - X.T).max(initial=0.0))
    if asym > tol * scale:
        raise ValidationError(
            f"{name} is not symmetric: max |X - X.T| = {asym:.3e} exceeds {tol:.0e} * scale"
        )
    return X


def check_labels(labels, n_communities: int | None = None, name: str = "labels") -> np.ndarray:
    """Validate a 1-based label vector; returns it as an int64 array."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got shape {labels.shape}")
    if labels.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    if not np.issubdtype(labels.dtype, np.integer):
        as_int = labels.astype(np.int64)
        if not np.array_equal(as_int, labels):
            raise ValidationError(f"{name} must be integers in 1..K")
        labels = as_int
    labels = labels.astype(np.int64, copy=False)
    lo, hi = int(labels.min()), int(labels.max())
    if lo < 1:
        raise ValidationError(f"{name} must be 1-based; found label {lo}")
    if n_communities is not None and hi > n_communities:
        raise ValidationError(f"{name} contains label {hi} > K = {n_communities}")
    return labels


def check_label_pair(a, b, n_communities: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    a = check_labels(a, n_communities, "first labels")
    b = check_labels(b, n_communities, "second labels")
    if a.shape != b.shape:
        raise ValidationError(f"label vectors differ in length: {a.size} vs {b.size}")
    return a, b


def check_adjacency(A, name: str = "adjacency") -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValidationError(f"{name} must be symmetric")
    if A.dtype != np.uint8 and not np.isin(np.unique(A), (0, 1)).all():
        raise ValidationError(f"{name} must be binary")
    if A.dtype == np.uint8 and A.max(initial=0) > 1:
        raise ValidationError(f"{name} must be binary")
    if np.any(np.diagonal(A) != 0):
        raise ValidationError(f"{name} must have a zero diagonal")
    return A


def check_probability_matrix(P, name: str = "edge probabilities") -> np.ndarray:
    P = check_symmetric(P, name=name)
    if np.any(P < 0) or np.any(P > 1):
        raise ValidationError(f"{name} must have entries in [0, 1]")
    if np.any(np.diagonal(P) != 0):
        raise ValidationError(f"{name} must have a zero diagonal")
    return P


def check_orthonormal(U, tol: float = 1e-6, name: str = "basis") -> np.ndarray:
    U = as_matrix(U, name)
    k = U.shape[1]
    gram = U.T @ U
    err = float(np.abs(gram - np.eye(k)).max())
    if err > tol:
        raise ValidationError(
            f"{name} is not column-orthonormal: max |U'U - I| = {err:.3e} exceeds {tol:.0e}"
        )
    return U


def check_row_stochastic(P, tol: float = 1e-12, name: str = "transition matrix") -> np.ndarray:
    P = check_square(P, name)
    if np.any(P < 0) or np.any(P > 1):
        raise ValidationError(f"{name} must have entries in [0, 1]")
    row_err = float(np.abs(P.sum(axis=1) - 1.0).max())
    if row_err > tol:
        raise ValidationError(f"{name} rows must sum to 1 (max deviation {row_err:.3e})")
    return P
