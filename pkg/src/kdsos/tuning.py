"""Data-adaptive bandwidth selection.

For each candidate bandwidth r and each time t, the debiased aggregates of
the left and right halves of the window of half-width ``adjustment * r`` are
compared through the sin-Theta distance of their top-K eigenspaces; the
score of r is the average over time points, and the bandwidth with the
smallest score wins.  A small score says the community structure on both
sides of t agrees and the half-windows are wide enough to estimate it
stably.

Boundary time points whose one-sided window (excluding t itself) is empty
are skipped rather than zero-filled, so the average is over well-defined
scores only.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .aggregation import DebiasedAggregator, box_window
from .estimator import as_series
from .exceptions import ValidationError
from .numerics import sin_theta_distance, top_k_eigendecomposition


@dataclass
class BandwidthScoreTable:
    """Scores per candidate bandwidth, the per-time matrix behind them, and
    the chosen bandwidth (argmin over candidates with at least one scored
    time point; ties go to the smaller bandwidth)."""

    grid: np.ndarray
    scores: np.ndarray
    per_time: np.ndarray  # (len(grid), T), NaN where skipped
    chosen: float
    adjustment: float

    @property
    def n_skipped(self) -> np.ndarray:
        return np.isnan(self.per_time).sum(axis=1)


def split_score_at(
    series,
    t_index: int,
    bandwidth: float,
    n_communities: int,
    adjustment: float = 2.0,
    include_center: bool = True,
    aggregator: DebiasedAggregator | None = None,
) -> float | None:
    """sin-Theta distance between the left- and right-half aggregates at t.

    Returns None (a skip) when either half-window contains no snapshot other
    than t itself.  ``include_center`` keeps t in both halves, which is the
    default; the strict variant drops it from both.
    """
    series = as_series(series)
    if bandwidth <= 0:
        raise ValidationError(f"bandwidth must be > 0 for tuning, got {bandwidth}")
    if adjustment <= 0:
        raise ValidationError(f"adjustment must be > 0, got {adjustment}")
    if aggregator is None:
        aggregator = DebiasedAggregator(series)
    T = series.n_steps
    window = box_window(T, t_index, adjustment * bandwidth)
    lo, hi = int(window[0]), int(window[-1])
    if lo >= t_index or hi <= t_index:
        return None  # a one-sided window holds nothing besides t
    if include_center:
        left = aggregator.range_sum(lo, t_index)
        right = aggregator.range_sum(t_index, hi)
    else:
        left = aggregator.range_sum(lo, t_index - 1)
        right = aggregator.range_sum(t_index + 1, hi)
    basis_left = top_k_eigendecomposition(left, n_communities)
    basis_right = top_k_eigendecomposition(right, n_communities)
    return sin_theta_distance(basis_left.vectors, basis_right.vectors)


def bandwidth_score(
    series,
    bandwidth: float,
    n_communities: int,
    adjustment: float = 2.0,
    include_center: bool = True,
    aggregator: DebiasedAggregator | None = None,
) -> float:
    """Mean split score over the non-skipped time points."""
    series = as_series(series)
    if aggregator is None:
        aggregator = DebiasedAggregator(series)
    scores = [
        split_score_at(
            series, t, bandwidth, n_communities, adjustment, include_center, aggregator
        )
        for t in range(1, series.n_steps + 1)
    ]
    kept = [s for s in scores if s is not None]
    if not kept:
        raise ValidationError(
            f"every time point was skipped at bandwidth {bandwidth}; enlarge it or the grid"
        )
    return float(np.mean(kept))


def default_bandwidth_grid(n_steps: int) -> np.ndarray:
    """Candidates ``{1, ..., T//3} / T`` (window never exceeds a third of the series)."""
    hi = max(1, n_steps // 3)
    return np.arange(1, hi + 1) / n_steps


def tune_bandwidth(
    series,
    grid=None,
    n_communities: int = 2,
    adjustment: float = 2.0,
    include_center: bool = True,
    aggregator: DebiasedAggregator | None = None,
) -> BandwidthScoreTable:
    """Score every candidate bandwidth and pick the minimizer.

    Candidates where every time point is skipped are excluded from the
    argmin (their score is NaN); if all candidates are excluded a
    :class:`ValidationError` is raised.
    """
    series = as_series(series)
    if grid is None:
        grid = default_bandwidth_grid(series.n_steps)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("bandwidth grid must be non-empty")
    if np.any(grid <= 0) or np.any(grid > 1):
        raise ValidationError("bandwidth candidates must lie in (0, 1]")
    if aggregator is None:
        aggregator = DebiasedAggregator(series)
    T = series.n_steps
    per_time = np.full((grid.size, T), np.nan)
    for gi, r in enumerate(grid):
        for t in range(1, T + 1):
            s = split_score_at(series, t, float(r), n_communities, adjustment, include_center, aggregator)
            if s is not None:
                per_time[gi, t - 1] = s
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN rows are handled below
        scores = np.nanmean(per_time, axis=1)
    valid = ~np.isnan(scores)
    if not np.any(valid):
        raise ValidationError("every candidate bandwidth had all time points skipped")
    # ties toward the smaller bandwidth: scan candidates in increasing order
    order = np.argsort(grid, kind="stable")
    best = None
    for gi in order:
        if not valid[gi]:
            continue
        if best is None or scores[gi] < scores[best] - 1e-15:
            best = gi
    return BandwidthScoreTable(
        grid=grid,
        scores=scores,
        per_time=per_time,
        chosen=float(grid[best]),
        adjustment=float(adjustment),
    )


def oracle_bandwidth(gamma: float, n_steps: int, n: int, rho: float, constant: float = 1.0) -> float:
    """Rate-minimizing bandwidth ``min(c / (sqrt(gamma T) n rho), 1)``.

    A diagnostic for simulated data where the switching rate is known; the
    data-adaptive procedure above does not use it.  With ``gamma == 0``
    nothing ever changes, so full averaging (bandwidth 1) is optimal; a
    warning flags that degenerate case.
    """
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    if n_steps < 1 or n < 1:
        raise ValidationError("n_steps and n must be >= 1")
    if not 0.0 < rho <= 1.0:
        raise ValidationError(f"rho must lie in (0, 1], got {rho}")
    if constant <= 0:
        raise ValidationError(f"constant must be > 0, got {constant}")
    if gamma == 0.0:
        warnings.warn("gamma = 0: no dynamics, full averaging is optimal", stacklevel=2)
        return 1.0
    return float(min(constant / (np.sqrt(gamma * n_steps) * n * rho), 1.0))


class BandwidthTuner(BaseEstimator):
    """Estimator wrapper around :func:`tune_bandwidth`.

    Attributes after ``fit``: ``best_bandwidth_``, ``scores_``, ``table_``.
    """

    def __init__(self, n_communities: int = 2, grid=None, adjustment: float = 2.0,
                 include_center: bool = True):
        self.n_communities = n_communities
        self.grid = grid
        self.adjustment = adjustment
        self.include_center = include_center

    def fit(self, X, y=None):
        table = tune_bandwidth(
            as_series(X),
            grid=self.grid,
            n_communities=self.n_communities,
            adjustment=self.adjustment,
            include_center=self.include_center,
        )
        self.table_ = table
        self.scores_ = table.scores
        self.best_bandwidth_ = table.chosen
        return self
