"""Dynamic community detection for time-ordered network sequences.

Spectral clustering of kernel-smoothed, debiased sums of squared adjacency
matrices, with Hungarian temporal alignment, a dynamic block-model
simulator, a subspace-distance bandwidth tuner, and an experiment harness.
"""

from .aggregation import (
    AggregatedMatrix,
    DebiasedAggregator,
    KernelSpec,
    aggregate,
    box_window,
    debiased_square,
)
from .audit import DecompositionTerms, decomposition_audit
from .estimator import KDSoS, align_sequence, as_series, cluster_time_point, kd_sos
from .exceptions import NumericalError, ValidationError
from .memberships import (
    DynamicClustering,
    MembershipSequence,
    alignable_pair,
    alignable_sequence,
    community_sizes,
    confusion_matrix,
    deterministic_alignability_condition,
    hamming_error,
    invert_permutation,
    is_diagonally_dominant,
    one_hot,
    optimal_permutation,
    permutation_to_matrix,
)
from .numerics import (
    EigenBasis,
    kmeans,
    linear_assignment_max,
    sin_theta_distance,
    top_k_eigendecomposition,
)
from .series import AdjacencySeries, load_series, save_series
from .simulate import (
    B_HETEROPHILIC,
    B_HOMOPHILIC,
    ConnectivitySchedule,
    GroundTruth,
    PoissonEvents,
    ScenarioConfig,
    alternating_connectivity,
    benchmark_initial_sizes,
    build_probability_matrix,
    generate_scenario,
    initial_labels,
    sample_network,
    simulate_memberships_bernoulli,
    simulate_memberships_poisson,
    stationary_markov_transition,
    uniform_switch_transition,
)
from .tuning import (
    BandwidthScoreTable,
    BandwidthTuner,
    bandwidth_score,
    default_bandwidth_grid,
    oracle_bandwidth,
    split_score_at,
    tune_bandwidth,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencySeries",
    "AggregatedMatrix",
    "B_HETEROPHILIC",
    "B_HOMOPHILIC",
    "BandwidthScoreTable",
    "BandwidthTuner",
    "ConnectivitySchedule",
    "DebiasedAggregator",
    "DecompositionTerms",
    "DynamicClustering",
    "EigenBasis",
    "GroundTruth",
    "KDSoS",
    "KernelSpec",
    "MembershipSequence",
    "NumericalError",
    "PoissonEvents",
    "ScenarioConfig",
    "ValidationError",
    "aggregate",
    "align_sequence",
    "alignable_pair",
    "alignable_sequence",
    "alternating_connectivity",
    "as_series",
    "bandwidth_score",
    "benchmark_initial_sizes",
    "box_window",
    "build_probability_matrix",
    "cluster_time_point",
    "community_sizes",
    "confusion_matrix",
    "debiased_square",
    "decomposition_audit",
    "default_bandwidth_grid",
    "deterministic_alignability_condition",
    "generate_scenario",
    "hamming_error",
    "initial_labels",
    "invert_permutation",
    "is_diagonally_dominant",
    "kd_sos",
    "kmeans",
    "linear_assignment_max",
    "load_series",
    "one_hot",
    "optimal_permutation",
    "oracle_bandwidth",
    "permutation_to_matrix",
    "sample_network",
    "save_series",
    "simulate_memberships_bernoulli",
    "simulate_memberships_poisson",
    "sin_theta_distance",
    "split_score_at",
    "stationary_markov_transition",
    "top_k_eigendecomposition",
    "tune_bandwidth",
    "uniform_switch_transition",
]
