"""The dynamic clustering estimator: per-time spectral clustering of the
debiased kernel aggregate, followed by Hungarian alignment of labels across
time.

Setting the box bandwidth to 0 recovers the "singleton" baseline (each
network clustered alone); bandwidth 1 recovers the "all" baseline (one
aggregate shared by every time point).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .aggregation import AggregatedMatrix, DebiasedAggregator, KernelSpec, aggregate
from .exceptions import ValidationError
from .memberships import (
    DynamicClustering,
    MembershipSequence,
    confusion_matrix,
    invert_permutation,
    is_diagonally_dominant,
    optimal_permutation,
    permutation_to_matrix,
)
from .numerics import EigenBasis, kmeans, top_k_eigendecomposition
from .seeding import derive_seed
from .series import AdjacencySeries


def as_series(X) -> AdjacencySeries:
    if isinstance(X, AdjacencySeries):
        return X
    X = np.asarray(X)
    if X.ndim == 2:
        X = X[None]
    return AdjacencySeries(X)


def cluster_time_point(
    aggregated,
    n_communities: int,
    seed,
    n_restarts: int = 20,
    max_iter: int = 100,
) -> tuple[np.ndarray, EigenBasis]:
    """K-means on the rows of the top-K eigenvector matrix of one aggregate.

    Accepts an :class:`AggregatedMatrix` (whose ``basis`` field is filled in)
    or a bare symmetric matrix.  Returns 1-based labels and the basis.
    """
    if isinstance(aggregated, AggregatedMatrix):
        Z = aggregated.matrix
    else:
        Z = np.asarray(aggregated, dtype=np.float64)
    basis = top_k_eigendecomposition(Z, n_communities)
    labels = kmeans(basis.vectors, n_communities, seed, n_restarts=n_restarts, max_iter=max_iter)
    if isinstance(aggregated, AggregatedMatrix):
        aggregated.basis = basis
    return labels, basis


def align_sequence(raw_labels, n_communities: int) -> DynamicClustering:
    """Chain the per-time labelings into one consistent sequence.

    The first slice is kept as-is; each subsequent slice is relabeled by the
    permutation that maximizes the matched diagonal of its confusion matrix
    against the previous aligned slice.  The certificate ``alignable`` holds
    when every rotated confusion matrix and its transpose are diagonally
    dominant (non-strict).
    """
    raw = np.asarray(raw_labels)
    if raw.ndim != 2:
        raise ValidationError(f"raw labels must be (T, n), got shape {raw.shape}")
    K = int(n_communities)
    if np.any(raw > K) or np.any(raw < 1):
        raise ValidationError("raw labels outside 1..K; was the slice clustered with another K?")
    T = raw.shape[0]
    aligned = raw.copy()
    permutations: list[np.ndarray] = []
    confusions: list[np.ndarray] = []
    alignable = True
    first_bad: int | None = None
    for t in range(T - 1):
        C = confusion_matrix(aligned[t], raw[t + 1], K)
        perm = optimal_permutation(C)
        aligned[t + 1] = invert_permutation(perm)[raw[t + 1] - 1] + 1
        rotated = C @ permutation_to_matrix(perm)
        if not (is_diagonally_dominant(rotated) and is_diagonally_dominant(rotated.T)):
            if alignable:
                first_bad = t + 1
            alignable = False
        permutations.append(perm)
        confusions.append(C)
    return DynamicClustering(
        raw_labels=raw,
        aligned=MembershipSequence(labels=aligned, n_communities=K),
        permutations=permutations,
        confusions=confusions,
        alignable=alignable,
        first_misaligned_step=first_bad,
    )


def kd_sos(
    series,
    n_communities: int,
    kernel: KernelSpec | None = None,
    seed: int = 0,
    aggregator: DebiasedAggregator | None = None,
    n_restarts: int = 20,
    max_iter: int = 100,
) -> DynamicClustering:
    """Full estimate: aggregate and cluster every time point, then align.

    Per-time clustering seeds derive from ``(seed, t_index)``, so time points
    can be processed in any order; the alignment pass is sequential.
    """
    series = as_series(series)
    if kernel is None:
        kernel = KernelSpec("box", 0.0)
    K = int(n_communities)
    if not 1 <= K <= series.n_nodes:
        raise ValidationError(f"n_communities must lie in 1..{series.n_nodes}, got {n_communities}")
    if aggregator is None:
        aggregator = DebiasedAggregator(series)
    T = series.n_steps
    raw = np.empty((T, series.n_nodes), dtype=np.int64)
    eigenvalues = np.empty((T, K))
    degenerate = np.zeros(T, dtype=bool)
    for t_index in range(1, T + 1):
        agg = aggregate(series, t_index, kernel, aggregator)
        labels, basis = cluster_time_point(
            agg, K, derive_cluster_seed(seed, t_index), n_restarts=n_restarts, max_iter=max_iter
        )
        raw[t_index - 1] = labels
        eigenvalues[t_index - 1] = basis.values
        degenerate[t_index - 1] = basis.degenerate_gap
    clustering = align_sequence(raw, K)
    clustering.eigenvalues = eigenvalues
    clustering.degenerate_gaps = degenerate
    return clustering


_CLUSTER_STREAM = 3


def derive_cluster_seed(seed, t_index: int) -> int:
    """Clustering seed for one time point, independent of processing order."""
    return derive_seed(seed, _CLUSTER_STREAM, int(t_index))


class KDSoS(ClusterMixin, BaseEstimator):
    """Dynamic community detection for a time-ordered network sequence.

    Fits per-time community labels by spectral clustering of kernel-smoothed
    debiased sums of squared adjacency matrices, then aligns labels across
    time with a maximum-matching permutation per step.

    Parameters
    ----------
    n_communities : int, default=2
        Number of communities K (not estimated).
    kernel : {"box", "gaussian"}, default="box"
    bandwidth : float or "tune", default="tune"
        Smoothing half-width on the [0, 1] time scale.  ``"tune"`` selects it
        by the split-window subspace-distance score (which always aggregates
        with the box kernel, whatever ``kernel`` the fit itself uses).
    tune_grid : array-like or None
        Candidate bandwidths for tuning; defaults to ``{1..T//3}/T``.
    adjustment : float, default=2.0
        Window-scaling factor used during tuning.
    n_restarts, max_iter : int
        K-means restart and iteration budgets.
    random_state : int, default=0

    Attributes
    ----------
    labels_ : ndarray of shape (T, n)
        Aligned 1-based community labels.
    raw_labels_ : ndarray of shape (T, n)
        Pre-alignment labels per time point.
    permutations_, confusions_ : lists of per-step alignment data.
    alignable_ : bool
        Certificate that every step's matching was unambiguous.
    eigenvalues_ : ndarray of shape (T, K)
    bandwidth_ : float
        The bandwidth actually used (chosen one when tuning).
    score_table_ : BandwidthScoreTable or None
    """

    def __init__(
        self,
        n_communities: int = 2,
        kernel: str = "box",
        bandwidth="tune",
        tune_grid=None,
        adjustment: float = 2.0,
        n_restarts: int = 20,
        max_iter: int = 100,
        random_state: int = 0,
    ):
        self.n_communities = n_communities
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.tune_grid = tune_grid
        self.adjustment = adjustment
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        from .tuning import tune_bandwidth

        series = as_series(X)
        aggregator = DebiasedAggregator(series)
        self.score_table_ = None
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "tune":
                raise ValidationError(f"bandwidth must be a float or 'tune', got {self.bandwidth!r}")
            table = tune_bandwidth(
                series,
                grid=self.tune_grid,
                n_communities=self.n_communities,
                adjustment=self.adjustment,
                aggregator=aggregator,
            )
            self.score_table_ = table
            self.bandwidth_ = float(table.chosen)
        else:
            self.bandwidth_ = float(self.bandwidth)
        clustering = kd_sos(
            series,
            self.n_communities,
            KernelSpec(self.kernel, self.bandwidth_),
            seed=self.random_state,
            aggregator=aggregator,
            n_restarts=self.n_restarts,
            max_iter=self.max_iter,
        )
        self.clustering_ = clustering
        self.labels_ = clustering.labels
        self.raw_labels_ = clustering.raw_labels
        self.permutations_ = clustering.permutations
        self.confusions_ = clustering.confusions
        self.alignable_ = clustering.alignable
        self.eigenvalues_ = clustering.eigenvalues
        self.degenerate_gaps_ = clustering.degenerate_gaps
        return self
