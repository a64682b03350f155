"""Shared numerical kernels: top-K symmetric eigendecomposition, k-means with
k-means++ restarts, maximum-weight linear assignment, and the sin-Theta
subspace distance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .exceptions import NumericalError, ValidationError
from .seeding import derive_rng
from .validation import check_orthonormal, check_square, check_symmetric

_GAP_TOL = 1e-12


@dataclass
class EigenBasis:
    """Top-K eigenpairs of a symmetric matrix.

    ``values`` are the K algebraically largest eigenvalues in descending
    order; ``vectors`` is the n x K column-orthonormal matrix of matching
    eigenvectors.  ``degenerate_gap`` flags a (near-)repeated eigenvalue at
    position K, in which case the spanned subspace is still valid but its
    basis is not unique.
    """

    values: np.ndarray
    vectors: np.ndarray
    degenerate_gap: bool = False

    @property
    def n_components(self) -> int:
        return self.values.size


def top_k_eigendecomposition(S, n_components: int, symmetry_tol: float = 1e-9) -> EigenBasis:
    """The ``n_components`` algebraically largest eigenpairs of a symmetric matrix.

    Uses a dense LAPACK solver with subset selection; suitable for the desk
    scales this package targets (n up to a few thousand).
    """
    S = check_symmetric(S, tol=symmetry_tol, name="matrix")
    n = S.shape[0]
    K = int(n_components)
    if not 1 <= K <= n:
        raise ValidationError(f"n_components must lie in 1..{n}, got {n_components}")
    # one extra pair (when available) to detect a degenerate gap at position K
    lo = max(0, n - K - 1)
    try:
        w, v = scipy.linalg.eigh(S, subset_by_index=(lo, n - 1), check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is rare
        raise NumericalError(f"eigendecomposition failed to converge: {exc}") from exc
    w = w[::-1]
    v = v[:, ::-1]
    values = np.ascontiguousarray(w[:K])
    vectors = np.ascontiguousarray(v[:, :K])
    degenerate = False
    if K < n:
        scale = max(1.0, float(np.abs(w).max()))
        degenerate = (w[K - 1] - w[K]) <= _GAP_TOL * scale
    return EigenBasis(values=values, vectors=vectors, degenerate_gap=degenerate)


def _plusplus_centers(rows: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = rows.shape[0]
    centers = np.empty((k, rows.shape[1]), dtype=np.float64)
    centers[0] = rows[rng.integers(n)]
    d2 = ((rows - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = rows[idx]
        d2 = np.minimum(d2, ((rows - centers[j]) ** 2).sum(axis=1))
    return centers


def _batched_d2(rows: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # rows (n, d), centers (R, k, d) -> squared distances (R, n, k)
    cross = np.einsum("nd,rkd->rnk", rows, centers)
    x2 = (rows**2).sum(axis=1)
    c2 = (centers**2).sum(axis=2)
    d2 = x2[None, :, None] - 2.0 * cross + c2[:, None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def kmeans(rows, n_clusters: int, seed, n_restarts: int = 20, max_iter: int = 100) -> np.ndarray:
    """Best-of-``n_restarts`` Lloyd's k-means with k-means++ seeding.

    Returns 1-based labels.  Deterministic given ``seed``: restart r draws
    from the sub-stream ``(seed, r)``, so results do not depend on execution
    order.  Restarts iterate in lockstep (vectorized); each stops once its
    assignments stabilize.  Empty clusters are reseeded at the point
    currently farthest from its assigned center.  The restart with the
    lowest within-cluster sum of squares wins, ties going to the lowest
    restart index.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[:, None]
    n = rows.shape[0]
    k = int(n_clusters)
    if k < 1:
        raise ValidationError("n_clusters must be at least 1")
    if n < k:
        raise ValidationError(f"need at least n_clusters = {k} rows, got {n}")
    if k == 1:
        return np.ones(n, dtype=np.int64)
    R = int(n_restarts)
    centers = np.stack(
        [_plusplus_centers(rows, k, derive_rng(seed, r)) for r in range(R)]
    )
    assign = np.full((R, n), -1, dtype=np.int64)
    done = np.zeros(R, dtype=bool)
    eye = np.eye(k)
    for _ in range(max_iter):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        d2 = _batched_d2(rows, centers[idx])  # (L, n, k)
        new_assign = d2.argmin(axis=2)
        counts = np.bincount(
            (np.arange(idx.size)[:, None] * k + new_assign).ravel(), minlength=idx.size * k
        ).reshape(idx.size, k)
        # reseed empty clusters at the point farthest from its assigned center
        for li in np.flatnonzero((counts == 0).any(axis=1)):
            order = np.argsort(d2[li, np.arange(n), new_assign[li]])[::-1]
            for used, j in enumerate(np.flatnonzero(counts[li] == 0)):
                centers[idx[li], j] = rows[order[used]]
            d2[li] = _batched_d2(rows, centers[idx[li]][None])[0]
            new_assign[li] = d2[li].argmin(axis=1)
        stable = (new_assign == assign[idx]).all(axis=1)
        assign[idx] = new_assign
        done[idx[stable]] = True
        moving = idx[~stable]
        if moving.size:
            onehot = eye[assign[moving]]  # (M, n, k)
            sums = np.einsum("mnk,nd->mkd", onehot, rows)
            cnt = onehot.sum(axis=1)
            centers[moving] = sums / np.maximum(cnt, 1.0)[:, :, None]
    d2 = _batched_d2(rows, centers)
    wcss = d2[np.arange(R)[:, None], np.arange(n)[None, :], assign].sum(axis=1)
    return assign[int(np.argmin(wcss))] + 1


def linear_assignment_max(weights) -> tuple[np.ndarray, float]:
    """Permutation maximizing ``sum_k weights[k, perm[k]]``, plus its value.

    Exact optimum (Hungarian method via scipy).  Among all maximizing
    permutations the lexicographically smallest one is returned, which keeps
    downstream label alignment deterministic.
    """
    W = check_square(weights, "weights")
    K = W.shape[0]
    rows, cols = linear_sum_assignment(W, maximize=True)
    best = float(W[rows, cols].sum())
    tol = 1e-9 * max(1.0, float(np.abs(W).max())) * K

    perm = np.empty(K, dtype=np.int64)
    free = list(range(K))
    target = best
    for k in range(K):
        for c in free:
            rest_rows = np.arange(k + 1, K)
            rest_cols = [x for x in free if x != c]
            if rest_rows.size:
                sub = W[np.ix_(rest_rows, rest_cols)]
                r, cc = linear_sum_assignment(sub, maximize=True)
                sub_best = float(sub[r, cc].sum())
            else:
                sub_best = 0.0
            if W[k, c] + sub_best >= target - tol:
                perm[k] = c
                free.remove(c)
                target = sub_best
                break
        else:  # pragma: no cover - defensive; the optimum always admits a completion
            raise NumericalError("assignment refinement failed to find an optimal completion")
    value = float(W[np.arange(K), perm].sum())
    return perm, value


def sin_theta_distance(U, V, orthonormal_tol: float = 1e-6) -> float:
    """Frobenius sin-Theta distance ``sqrt(K - ||U'V||_F^2)`` between the
    column spans of two n x K orthonormal matrices.

    Lies in ``[0, sqrt(K)]``; invariant to right-rotation of either argument.
    """
    U = check_orthonormal(U, orthonormal_tol, "first basis")
    V = check_orthonormal(V, orthonormal_tol, "second basis")
    if U.shape != V.shape:
        raise ValidationError(f"bases must share a shape, got {U.shape} vs {V.shape}")
    K = U.shape[1]
    radicand = K - float(np.linalg.norm(U.T @ V) ** 2)
    if radicand < -1e-9:
        raise NumericalError(f"sin-Theta radicand {radicand:.3e} below tolerance")
    return float(np.sqrt(max(radicand, 0.0)))
