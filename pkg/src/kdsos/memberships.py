"""Community-label machinery: confusion matrices, optimal label matching,
relative Hamming error, diagonal dominance and alignability checks.

Labels are 1-based (values in ``{1, ..., K}``) at every public interface.
Permutations are encoded as 0-based index arrays ``perm`` where ``perm[k]``
is the column of the confusion matrix matched to row ``k``.

All functions here are pure and safe to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .numerics import linear_assignment_max
from .validation import check_label_pair, check_labels, check_square


@dataclass
class MembershipSequence:
    """Per-time-point community labels for ``n`` nodes over ``T`` time points.

    Attributes
    ----------
    labels : ndarray of shape (T, n)
        Integer community labels in ``{1, ..., n_communities}``.
    n_communities : int
        Number of communities K. Communities may be empty at any time point.
    """

    labels: np.ndarray
    n_communities: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValidationError(f"labels must be a (T, n) array, got shape {labels.shape}")
        if self.n_communities < 1:
            raise ValidationError("n_communities must be at least 1")
        flat = check_labels(labels.ravel(), self.n_communities)
        # own a read-only copy so the sequence is immutable without freezing
        # the caller's array
        labels = flat.reshape(labels.shape).copy()
        labels.setflags(write=False)
        self.labels = labels

    @property
    def n_steps(self) -> int:
        return self.labels.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.labels.shape[1]

    def row(self, t_index: int) -> np.ndarray:
        """Label vector at 1-based time index ``t_index``."""
        if not 1 <= t_index <= self.n_steps:
            raise ValidationError(f"t_index must lie in 1..{self.n_steps}, got {t_index}")
        return self.labels[t_index - 1]

    def one_hot(self, t_index: int) -> np.ndarray:
        """The (n, K) one-hot membership matrix at ``t_index``."""
        return one_hot(self.row(t_index), self.n_communities)

    def community_sizes(self, t_index: int) -> np.ndarray:
        return community_sizes(self.row(t_index), self.n_communities)


def one_hot(labels, n_communities: int) -> np.ndarray:
    labels = check_labels(labels, n_communities)
    M = np.zeros((labels.size, n_communities), dtype=np.int64)
    M[np.arange(labels.size), labels - 1] = 1
    return M


def community_sizes(labels, n_communities: int) -> np.ndarray:
    """Node counts per community (length K, entries sum to n)."""
    labels = check_labels(labels, n_communities)
    return np.bincount(labels - 1, minlength=n_communities)


def confusion_matrix(a, b, n_communities: int) -> np.ndarray:
    """Counts ``C[k, l] = #{i : a_i = k+1 and b_i = l+1}`` as a (K, K) array.

    Row sums equal the community sizes of ``a``; column sums those of ``b``.
    """
    a, b = check_label_pair(a, b, n_communities)
    K = n_communities
    return np.bincount((a - 1) * K + (b - 1), minlength=K * K).reshape(K, K)


def optimal_permutation(confusion) -> np.ndarray:
    """Column matching that maximizes the matched diagonal of the confusion matrix.

    Returns ``perm`` with ``perm[k]`` the column matched to row ``k``. Ties are
    broken toward the lexicographically smallest permutation so output is
    deterministic.
    """
    C = check_square(confusion, "confusion matrix")
    if np.any(C < 0):
        raise ValidationError("confusion matrix must be nonnegative")
    perm, _ = linear_assignment_max(C)
    return perm


def permutation_to_matrix(perm) -> np.ndarray:
    """The K x K permutation matrix R with ``R[perm[k], k] = 1``.

    With this convention ``diag(C @ R)[k] = C[k, perm[k]]``.
    """
    perm = _check_permutation(perm)
    R = np.zeros((perm.size, perm.size), dtype=np.int64)
    R[perm, np.arange(perm.size)] = 1
    return R


def invert_permutation(perm) -> np.ndarray:
    perm = _check_permutation(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def _check_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(perm.size)):
        raise ValidationError(f"not a valid permutation: {perm!r}")
    return perm


def hamming_error(a, b, n_communities: int | None = None) -> float:
    """Fraction of nodes mismatched after the optimal label permutation.

    Symmetric in its arguments and invariant to relabeling either one.
    """
    a, b = check_label_pair(a, b, n_communities)
    K = n_communities if n_communities is not None else int(max(a.max(), b.max()))
    C = confusion_matrix(a, b, K)
    perm = optimal_permutation(C)
    matched = int(C[np.arange(K), perm].sum())
    return 1.0 - matched / a.size


def is_diagonally_dominant(X) -> bool:
    """Row-wise non-strict dominance: ``X[k, k] >= sum_{l != k} |X[k, l]|``."""
    X = check_square(X)
    off = np.abs(X).sum(axis=1) - np.abs(np.diagonal(X))
    return bool(np.all(np.diagonal(X) >= off))


def alignable_pair(a, b, n_communities: int) -> bool:
    """Whether the raw confusion matrices C(a, b) and C(b, a) are both
    diagonally dominant, i.e. the community correspondence is unambiguous
    in the given column order (no permutation applied)."""
    C = confusion_matrix(a, b, n_communities)
    return is_diagonally_dominant(C) and is_diagonally_dominant(C.T)


def alignable_sequence(seq, n_communities: int | None = None) -> tuple[bool, int | None]:
    """Check alignability of every consecutive pair of label rows.

    Parameters
    ----------
    seq : MembershipSequence or (T, n) array
    n_communities : required when ``seq`` is a bare array

    Returns
    -------
    (alignable, first_failing) :
        ``first_failing`` is the 1-based index t of the earliest step where
        the pair (t, t+1) fails, or None when the sequence is alignable.
    """
    if isinstance(seq, MembershipSequence):
        labels, K = seq.labels, seq.n_communities
    else:
        labels = np.asarray(seq)
        if n_communities is None:
            raise ValidationError("n_communities is required for a bare label array")
        K = n_communities
    if labels.ndim != 2 or labels.shape[0] < 2:
        raise ValidationError("need at least T = 2 time points")
    for t in range(labels.shape[0] - 1):
        if not alignable_pair(labels[t], labels[t + 1], K):
            return False, t + 1
    return True, None


def deterministic_alignability_condition(a, b, n_communities: int) -> bool:
    """Sufficient condition for ``alignable_pair(a, b)``: the number of nodes
    whose label differs is strictly less than half the smallest community
    size in ``a``.

    Equivalently, the one-hot membership matrices differ in fewer nonzero
    entries than the smallest community size (each changed node flips two
    one-hot entries).
    """
    a, b = check_label_pair(a, b, n_communities)
    changed = int(np.count_nonzero(a != b))
    min_size = int(community_sizes(a, n_communities).min())
    return 2 * changed < min_size


@dataclass
class DynamicClustering:
    """Temporally aligned clustering of a network sequence.

    ``aligned.labels[t]`` is ``raw_labels[t]`` relabeled through the composed
    step permutations; ``confusions[t]`` is the confusion matrix between the
    aligned labels at step t+1 and the raw labels at step t+2 (1-based),
    before rotation.  ``alignable`` certifies that every rotated confusion
    matrix and its transpose are diagonally dominant.
    """

    raw_labels: np.ndarray
    aligned: MembershipSequence
    permutations: list[np.ndarray] = field(default_factory=list)
    confusions: list[np.ndarray] = field(default_factory=list)
    alignable: bool = True
    first_misaligned_step: int | None = None
    eigenvalues: np.ndarray | None = None
    degenerate_gaps: np.ndarray | None = None

    @property
    def labels(self) -> np.ndarray:
        return self.aligned.labels
