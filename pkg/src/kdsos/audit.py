"""Exactness audit of the box-kernel aggregate's bias-variance split.

For a window around time t the aggregate ``sum_s (A_s^2 - D_s)`` decomposes
into five terms built from the retained ground truth:

* ``membership_bias``   : sum_s (Q_s^2 - Pi_t Q_s^2 Pi_t)
* ``diagonal_bias``     : sum_s (diag(Q_s)^2 - Q_s diag(Q_s) - diag(Q_s) Q_s)
* ``cross_noise``       : sum_s (X_s P_s + P_s X_s)
* ``variance``          : sum_s (X_s^2 - D_s)
* ``signal``            : sum_s (Pi_t Q_s^2 Pi_t)

with ``Pi_t`` the projector onto the column span of the one-hot membership
matrix at t, and the noise taken as ``X_s = A_s - P_s`` (observed minus
expected; this sign convention is what makes the identity exact).

The diagonal-bias summand is evaluated at each in-window ``Q_s``.  A variant
residual where it is frozen at ``Q_t`` is also reported; the two coincide
only when the window is homogeneous.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregation import DebiasedAggregator, box_window
from .estimator import as_series
from .exceptions import ValidationError
from .simulate import GroundTruth


@dataclass
class DecompositionTerms:
    t_index: int
    window: np.ndarray
    membership_bias: np.ndarray
    diagonal_bias: np.ndarray
    cross_noise: np.ndarray
    variance: np.ndarray
    signal: np.ndarray
    projector: np.ndarray
    noise: list[np.ndarray]
    aggregate_norm: float
    residual: float
    residual_fixed_center: float

    def term_sum(self) -> np.ndarray:
        return (
            self.membership_bias
            + self.diagonal_bias
            + self.cross_noise
            + self.variance
            + self.signal
        )

    @property
    def relative_residual(self) -> float:
        return self.residual / max(self.aggregate_norm, 1e-300)


def membership_projector(one_hot: np.ndarray) -> np.ndarray:
    """Projector onto the span of the one-hot columns; empty communities
    contribute nothing (their columns are zero)."""
    M = np.asarray(one_hot, dtype=np.float64)
    sizes = M.sum(axis=0)
    keep = sizes > 0
    Mn = M[:, keep] / np.sqrt(sizes[keep])
    return Mn @ Mn.T


def decomposition_audit(
    series,
    truth: GroundTruth,
    t_index: int,
    bandwidth: float,
    aggregator: DebiasedAggregator | None = None,
) -> DecompositionTerms:
    """Evaluate the five terms and the Frobenius residual against the
    directly computed aggregate (box kernel only).

    Requires a ground truth generated with ``keep_probabilities=True``.
    """
    series = as_series(series)
    if truth.probability_matrices is None:
        raise ValidationError("ground truth must retain probability matrices for the audit")
    T = series.n_steps
    if truth.memberships.n_steps != T:
        raise ValidationError("ground truth and series disagree on the number of time points")
    window = box_window(T, t_index, bandwidth)
    if aggregator is None:
        aggregator = DebiasedAggregator(series)

    Pi = membership_projector(truth.memberships.one_hot(t_index))
    n = series.n_nodes
    membership_bias = np.zeros((n, n))
    diagonal_bias = np.zeros((n, n))
    cross_noise = np.zeros((n, n))
    variance = np.zeros((n, n))
    signal = np.zeros((n, n))
    noise: list[np.ndarray] = []

    Q_t = truth.probability_matrix(t_index)
    d_t = np.diag(np.diagonal(Q_t))
    fixed_center_diag = (d_t @ d_t) - Q_t @ d_t - d_t @ Q_t

    for s in window:
        Q = truth.probability_matrix(int(s))
        P = Q.copy()
        np.fill_diagonal(P, 0.0)
        A = series.snapshot(int(s)).astype(np.float64)
        X = A - P
        d = np.diag(np.diagonal(Q))
        D = np.diag(A.sum(axis=1))
        Q2 = Q @ Q
        proj = Pi @ Q2 @ Pi
        membership_bias += Q2 - proj
        diagonal_bias += (d @ d) - Q @ d - d @ Q
        cross_noise += X @ P + P @ X
        variance += X @ X - D
        signal += proj
        noise.append(X)

    Z = aggregator.range_sum(int(window[0]), int(window[-1]))
    total = membership_bias + diagonal_bias + cross_noise + variance + signal
    residual = float(np.linalg.norm(total - Z))
    fixed_total = total - diagonal_bias + len(window) * fixed_center_diag
    residual_fixed = float(np.linalg.norm(fixed_total - Z))
    return DecompositionTerms(
        t_index=t_index,
        window=window,
        membership_bias=membership_bias,
        diagonal_bias=diagonal_bias,
        cross_noise=cross_noise,
        variance=variance,
        signal=signal,
        projector=Pi,
        noise=noise,
        aggregate_norm=float(np.linalg.norm(Z)),
        residual=residual,
        residual_fixed_center=residual_fixed,
    )
