"""Ground-truth generator for dynamic stochastic block models.

Covers the two membership-switching processes (per-node Poisson events on
[0, 1], or one independent Bernoulli transition draw per observation
interval), block-model edge sampling, and the benchmark transition matrix /
alternating connectivity pair used by the experiment presets.

Random streams: memberships draw from ``(seed, 0)``, the snapshot at time
index t from ``(seed, 1, t)``; distinct trials and time points are therefore
independently reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .memberships import MembershipSequence
from .seeding import check_seed, derive_rng
from .series import AdjacencySeries
from .validation import (
    check_labels,
    check_probability_matrix,
    check_row_stochastic,
    check_symmetric,
)

#: Connectivity pair for the alternating benchmark: ``B_HOMOPHILIC`` is used at
#: odd time indices, ``B_HETEROPHILIC`` (indefinite: its leading 2x2 block has a
#: negative eigenvalue) at even ones.
B_HOMOPHILIC = np.array(
    [[0.62, 0.22, 0.46], [0.22, 0.62, 0.46], [0.46, 0.46, 0.85]]
)
B_HETEROPHILIC = np.array(
    [[0.22, 0.62, 0.46], [0.62, 0.22, 0.46], [0.46, 0.46, 0.85]]
)
B_HOMOPHILIC.setflags(write=False)
B_HETEROPHILIC.setflags(write=False)

#: Initial community split of the benchmark scenario, as fractions of n.
BENCHMARK_SPLIT = (0.4, 0.1, 0.5)


def stationary_markov_transition(gamma: float) -> np.ndarray:
    """Three-community per-step transition matrix with switch rate ``gamma``.

    ``[[1-g, 0, g], [0, 1-g, g], [4g/5, g/5, 1-g]]``.  For an initial split
    proportional to (4, 1, 5) the expected inflow of every community equals
    its outflow, so expected community sizes are stationary.
    """
    g = float(gamma)
    if not 0.0 <= g <= 5.0 / 9.0:
        raise ValidationError(f"switch rate must lie in [0, 5/9], got {g}")
    return np.array(
        [
            [1.0 - g, 0.0, g],
            [0.0, 1.0 - g, g],
            [0.8 * g, 0.2 * g, 1.0 - g],
        ]
    )


def uniform_switch_transition(n_communities: int, switch_probability: float) -> np.ndarray:
    """Per-step transition: stay with probability 1-p, otherwise move to one
    of the other communities uniformly."""
    K = int(n_communities)
    p = float(switch_probability)
    if K < 1:
        raise ValidationError("n_communities must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"switch probability must lie in [0, 1], got {p}")
    if K == 1:
        if p > 0:
            raise ValidationError("cannot switch with a single community")
        return np.ones((1, 1))
    P = np.full((K, K), p / (K - 1))
    np.fill_diagonal(P, 1.0 - p)
    return P


@dataclass
class ConnectivitySchedule:
    """K x K symmetric connectivity matrices over the time grid.

    ``mode`` is one of ``constant`` (one matrix for all t), ``alternating``
    (first matrix at odd t indices, second at even ones) or ``explicit``
    (one matrix per time point).
    """

    mode: str
    matrices: list[np.ndarray]

    def __post_init__(self):
        if self.mode not in ("constant", "alternating", "explicit"):
            raise ValidationError(f"unknown connectivity mode {self.mode!r}")
        mats = [check_symmetric(M, name="connectivity matrix") for M in self.matrices]
        for M in mats:
            if np.any(M < 0) or np.any(M > 1):
                raise ValidationError("connectivity entries must lie in [0, 1]")
            if M.shape != mats[0].shape:
                raise ValidationError("connectivity matrices must share a shape")
        want = {"constant": 1, "alternating": 2}.get(self.mode)
        if want is not None and len(mats) != want:
            raise ValidationError(f"mode {self.mode!r} needs exactly {want} matrices")
        if self.mode == "explicit" and not mats:
            raise ValidationError("explicit schedule needs at least one matrix")
        self.matrices = mats

    @property
    def n_communities(self) -> int:
        return self.matrices[0].shape[0]

    @classmethod
    def constant(cls, B) -> "ConnectivitySchedule":
        return cls("constant", [np.asarray(B, dtype=np.float64)])

    @classmethod
    def alternating(cls, B_odd, B_even) -> "ConnectivitySchedule":
        return cls("alternating", [np.asarray(B_odd, float), np.asarray(B_even, float)])

    @classmethod
    def benchmark(cls) -> "ConnectivitySchedule":
        """The alternating homophilic/heterophilic benchmark pair."""
        return cls.alternating(B_HOMOPHILIC, B_HETEROPHILIC)

    def matrix_at(self, t_index: int) -> np.ndarray:
        if t_index < 1:
            raise ValidationError(f"t_index must be >= 1, got {t_index}")
        if self.mode == "constant":
            return self.matrices[0]
        if self.mode == "alternating":
            return self.matrices[0] if t_index % 2 == 1 else self.matrices[1]
        if t_index > len(self.matrices):
            raise ValidationError(
                f"explicit schedule has {len(self.matrices)} matrices, asked for index {t_index}"
            )
        return self.matrices[t_index - 1]


def alternating_connectivity(t_index: int) -> np.ndarray:
    """Benchmark connectivity at a 1-based time index (odd -> homophilic)."""
    return ConnectivitySchedule.benchmark().matrix_at(t_index)


def benchmark_initial_sizes(n: int) -> np.ndarray:
    """Initial community sizes proportional to the benchmark split, summing to n."""
    sizes = np.floor(np.asarray(BENCHMARK_SPLIT) * n).astype(np.int64)
    sizes[-1] += n - sizes.sum()
    return sizes


@dataclass
class ScenarioConfig:
    """Full description of one simulated dynamic-SBM instance.

    ``transition`` is the per-step row-stochastic switching matrix.  When
    omitted it defaults to :func:`uniform_switch_transition` with per-step
    switch probability ``gamma / n_steps`` for the Bernoulli process (the
    discrete approximation of the event process), and to uniform destination
    choice for the Poisson process.
    """

    n: int
    n_communities: int
    n_steps: int
    gamma: float
    rho: float
    process: str = "bernoulli"
    transition: np.ndarray | None = None
    initial_sizes: np.ndarray | None = None
    connectivity: ConnectivitySchedule | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.n_communities < 1 or self.n_steps < 1:
            raise ValidationError("n, n_communities and n_steps must all be >= 1")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        if not 0.0 < self.rho <= 1.0:
            raise ValidationError(f"rho must lie in (0, 1], got {self.rho}")
        if self.process not in ("poisson", "bernoulli"):
            raise ValidationError(f"process must be 'poisson' or 'bernoulli', got {self.process!r}")
        if self.transition is not None:
            self.transition = check_row_stochastic(np.asarray(self.transition, float))
            if self.transition.shape[0] != self.n_communities:
                raise ValidationError("transition matrix must be K x K")
        if self.initial_sizes is None:
            base = np.full(self.n_communities, self.n // self.n_communities, dtype=np.int64)
            base[: self.n % self.n_communities] += 1
            self.initial_sizes = base
        else:
            sizes = np.asarray(self.initial_sizes, dtype=np.int64)
            if sizes.ndim != 1 or sizes.size != self.n_communities:
                raise ValidationError("initial_sizes must have length K")
            if np.any(sizes < 0) or int(sizes.sum()) != self.n:
                raise ValidationError("initial_sizes must be nonnegative and sum to n")
            self.initial_sizes = sizes
        if self.connectivity is not None and self.connectivity.n_communities != self.n_communities:
            raise ValidationError("connectivity matrices must be K x K")
        self.seed = check_seed(self.seed)

    def resolved_transition(self) -> np.ndarray:
        if self.transition is not None:
            return self.transition
        if self.process == "bernoulli":
            p = self.gamma / self.n_steps
            if p > 1.0:
                raise ValidationError(
                    f"default Bernoulli switch probability gamma/T = {p} exceeds 1"
                )
            return uniform_switch_transition(self.n_communities, p)
        return uniform_switch_transition(
            self.n_communities, 0.0 if self.n_communities == 1 else 1.0
        )


def initial_labels(initial_sizes) -> np.ndarray:
    """1-based labels assigning the first ``sizes[0]`` nodes to community 1, etc."""
    sizes = np.asarray(initial_sizes, dtype=np.int64)
    if np.any(sizes < 0):
        raise ValidationError("initial sizes must be nonnegative")
    return np.repeat(np.arange(1, sizes.size + 1), sizes)


def _sample_rows(cum_rows: np.ndarray, current0: np.ndarray, u: np.ndarray) -> np.ndarray:
    # inverse-CDF sampling of each node's next label from its current row
    return (u[:, None] < cum_rows[current0]).argmax(axis=1)


def simulate_memberships_bernoulli(config: ScenarioConfig) -> MembershipSequence:
    """One independent transition draw per node per observation interval.

    The labels at the first grid point are the initial assignment; each of
    the remaining T-1 steps redraws every node's label from the transition
    row of its current label.
    """
    transition = config.resolved_transition()
    rng = derive_rng(config.seed, 0)
    T, n = config.n_steps, config.n
    labels = np.empty((T, n), dtype=np.int64)
    labels[0] = initial_labels(config.initial_sizes)
    cum = np.cumsum(transition, axis=1)
    cum[:, -1] = 1.0  # guard against rounding, keeps argmax well-defined
    for t in range(1, T):
        u = rng.random(n)
        labels[t] = _sample_rows(cum, labels[t - 1] - 1, u) + 1
    return MembershipSequence(labels=labels, n_communities=config.n_communities)


@dataclass
class PoissonEvents:
    """Exact membership-switch events, sorted by node then time."""

    nodes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    sources: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    destinations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def n_events(self) -> int:
        return self.nodes.size

    def times_for(self, node: int) -> np.ndarray:
        return self.times[self.nodes == node]


def simulate_memberships_poisson(config: ScenarioConfig) -> tuple[MembershipSequence, PoissonEvents]:
    """Per-node rate-``gamma`` event process on [0, 1].

    At every event the node moves to one of the other K-1 communities, drawn
    from its renormalized off-diagonal transition row.  Memberships are
    recorded at the grid times ``1/T .. 1``; the event log keeps the exact
    switch times.
    """
    transition = config.resolved_transition()
    K, T, n = config.n_communities, config.n_steps, config.n
    off = transition.copy()
    np.fill_diagonal(off, 0.0)
    row_mass = off.sum(axis=1)
    if config.gamma > 0 and K > 1 and np.any(row_mass <= 0):
        raise ValidationError(
            "every transition row needs positive off-diagonal mass for the event process"
        )
    if K > 1:
        off = off / np.maximum(row_mass, 1e-300)[:, None]
    cum = np.cumsum(off, axis=1)
    cum[:, -1] = 1.0

    rng = derive_rng(config.seed, 0)
    start = initial_labels(config.initial_sizes)
    counts = rng.poisson(config.gamma, n) if (config.gamma > 0 and K > 1) else np.zeros(n, np.int64)
    total = int(counts.sum())
    raw_times = rng.random(total)
    dest_u = rng.random(total)
    nodes = np.repeat(np.arange(n), counts)
    order = np.lexsort((raw_times, nodes))
    times = raw_times[order]
    dest_u = dest_u[order]

    labels = np.tile(start, (T, 1))
    sources = np.empty(total, dtype=np.int64)
    destinations = np.empty(total, dtype=np.int64)
    state = start.copy()
    for e in range(total):
        i = nodes[e]
        cur0 = state[i] - 1
        dest0 = int((dest_u[e] < cum[cur0]).argmax())
        sources[e] = state[i]
        destinations[e] = dest0 + 1
        state[i] = dest0 + 1
        first = max(1, int(np.ceil(times[e] * T - 1e-12)))
        labels[first - 1 :, i] = dest0 + 1
    seq = MembershipSequence(labels=labels, n_communities=K)
    return seq, PoissonEvents(nodes=nodes, times=times, sources=sources, destinations=destinations)


def build_probability_matrix(labels_row, B, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Block-model edge probabilities for one time point.

    Returns ``Q = rho * M B M'`` (dense, with its block diagonal) and
    ``P = Q - diag(Q)`` (the actual sampling probabilities).
    """
    B = check_symmetric(B, name="connectivity matrix")
    if not 0.0 <= rho <= 1.0:
        raise ValidationError(f"rho must lie in [0, 1], got {rho}")
    scaled = rho * B
    if np.any(scaled < 0) or np.any(scaled > 1):
        raise ValidationError("rho * B must have entries in [0, 1]")
    m0 = check_labels(labels_row, B.shape[0]) - 1
    Q = scaled[np.ix_(m0, m0)]
    P = Q.copy()
    np.fill_diagonal(P, 0.0)
    return Q, P


def sample_network(P, seed=None, rng: np.random.Generator | None = None) -> np.ndarray:
    """One Bernoulli draw per node pair, mirrored to a symmetric 0/1 matrix."""
    P = check_probability_matrix(P)
    if rng is None:
        rng = derive_rng(0 if seed is None else seed)
    n = P.shape[0]
    iu = np.triu_indices(n, k=1)
    draws = (rng.random(iu[0].size) < P[iu]).astype(np.uint8)
    A = np.zeros((n, n), dtype=np.uint8)
    A[iu] = draws
    A += A.T
    return A


@dataclass
class GroundTruth:
    """Retained truth for scoring: memberships, and optionally the per-time
    dense probability matrices Q (P is Q with a zeroed diagonal)."""

    memberships: MembershipSequence
    probability_matrices: list[np.ndarray] | None = None
    events: PoissonEvents | None = None

    def probability_matrix(self, t_index: int) -> np.ndarray:
        if self.probability_matrices is None:
            raise ValidationError("probability matrices were not retained; regenerate with keep_probabilities=True")
        return self.probability_matrices[t_index - 1]


def generate_scenario(
    config: ScenarioConfig, keep_probabilities: bool = False
) -> tuple[AdjacencySeries, GroundTruth]:
    """Memberships -> per-time (Q, P) -> sampled snapshots.

    Deterministic given ``config.seed``.  Snapshot invariants (symmetry,
    binarity, zero diagonal) are enforced by construction of the returned
    :class:`AdjacencySeries`.
    """
    if config.connectivity is None:
        raise ValidationError("config.connectivity is required to generate networks")
    events = None
    if config.process == "poisson":
        memberships, events = simulate_memberships_poisson(config)
    else:
        memberships = simulate_memberships_bernoulli(config)
    T, n = config.n_steps, config.n
    snapshots = np.empty((T, n, n), dtype=np.uint8)
    kept: list[np.ndarray] | None = [] if keep_probabilities else None
    for t_index in range(1, T + 1):
        B = config.connectivity.matrix_at(t_index)
        Q, P = build_probability_matrix(memberships.row(t_index), B, config.rho)
        snapshots[t_index - 1] = sample_network(P, rng=derive_rng(config.seed, 1, t_index))
        if kept is not None:
            kept.append(Q)
    series = AdjacencySeries(snapshots)
    return series, GroundTruth(memberships=memberships, probability_matrices=kept, events=events)
