import numpy as np
import pytest
from sklearn.base import clone

from kdsos import (
    AdjacencySeries,
    ConnectivitySchedule,
    KDSoS,
    KernelSpec,
    ScenarioConfig,
    ValidationError,
    aggregate,
    align_sequence,
    box_window,
    cluster_time_point,
    confusion_matrix,
    debiased_square,
    generate_scenario,
    hamming_error,
    kd_sos,
    one_hot,
)
from kdsos.estimator import derive_cluster_seed
from kdsos.experiments import mean_hamming


def triangle():
    A = np.ones((3, 3), dtype=np.uint8)
    np.fill_diagonal(A, 0)
    return A


class TestDebiasedSquare:
    def test_empty_graph(self):
        assert not debiased_square(np.zeros((4, 4), dtype=np.uint8)).any()

    def test_triangle_common_neighbors(self):
        S = debiased_square(triangle())
        expected = np.ones((3, 3)) - np.eye(3)
        assert np.array_equal(S, expected)

    def test_star(self):
        A = np.zeros((3, 3), dtype=np.uint8)
        A[0, 1] = A[1, 0] = A[0, 2] = A[2, 0] = 1
        S = debiased_square(A)
        expected = np.zeros((3, 3))
        expected[1, 2] = expected[2, 1] = 1.0
        assert np.array_equal(S, expected)

    def test_diagonal_exactly_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(2, 30))
            A = (rng.random((n, n)) < 0.4).astype(np.uint8)
            A = np.triu(A, 1)
            A = A + A.T
            S = debiased_square(A)
            assert (np.diagonal(S) == 0.0).all()
            assert np.array_equal(S, S.T)


class TestBoxWindow:
    def test_zero_bandwidth(self):
        assert box_window(10, 4, 0.0).tolist() == [4]

    def test_full_bandwidth(self):
        assert box_window(10, 4, 1.0).tolist() == list(range(1, 11))

    def test_interior_window(self):
        # T=10, t=0.5, r=0.1 covers {0.4, 0.5, 0.6}
        assert box_window(10, 5, 0.1).tolist() == [4, 5, 6]

    def test_grid_rounding_robust(self):
        # 5/50 * 50 is not exactly 5 in floating point
        assert box_window(50, 25, 5 / 50).tolist() == list(range(20, 31))


def random_series(rng, n=20, T=5, p=0.3):
    A = np.zeros((T, n, n), dtype=np.uint8)
    for t in range(T):
        raw = np.triu((rng.random((n, n)) < p).astype(np.uint8), 1)
        A[t] = raw + raw.T
    return AdjacencySeries(A)


class TestAggregate:
    def test_box_zero_bandwidth_is_single_square(self):
        series = random_series(np.random.default_rng(1))
        agg = aggregate(series, 3, KernelSpec("box", 0.0))
        assert agg.window.tolist() == [3]
        assert np.array_equal(agg.matrix, debiased_square(series.snapshot(3)))

    def test_box_sum_over_window(self):
        series = random_series(np.random.default_rng(2), T=6)
        agg = aggregate(series, 3, KernelSpec("box", 2 / 6))
        expected = sum(debiased_square(series.snapshot(s)) for s in range(1, 6))
        assert agg.window.tolist() == [1, 2, 3, 4, 5]
        assert np.allclose(agg.matrix, expected)

    def test_gaussian_covers_all_and_weights(self):
        series = random_series(np.random.default_rng(3), T=4)
        agg = aggregate(series, 2, KernelSpec("gaussian", 0.5))
        assert agg.window.tolist() == [1, 2, 3, 4]
        expected = np.zeros((20, 20))
        for s in range(1, 5):
            A = series.snapshot(s).astype(float)
            opnorm = np.abs(np.linalg.eigvalsh(A)).max()
            w = np.exp(-((2 / 4 - s / 4) ** 2) / 0.5**2)
            expected += w / opnorm * debiased_square(series.snapshot(s))
        assert np.allclose(agg.matrix, expected)

    def test_gaussian_skips_empty_snapshot_with_warning(self):
        rng = np.random.default_rng(4)
        series = random_series(rng, T=3)
        A = series.snapshots.copy()
        A[1] = 0
        series = AdjacencySeries(A)
        with pytest.warns(UserWarning, match="zero operator norm"):
            agg = aggregate(series, 1, KernelSpec("gaussian", 0.8))
        assert agg.window.tolist() == [1, 3]

    def test_box_aggregate_has_zero_diagonal(self):
        series = random_series(np.random.default_rng(6), T=7)
        for t in (1, 4, 7):
            agg = aggregate(series, t, KernelSpec("box", 0.5))
            assert (np.diagonal(agg.matrix) == 0.0).all()

    def test_gaussian_requires_positive_bandwidth(self):
        with pytest.raises(ValidationError):
            KernelSpec("gaussian", 0.0)

    def test_bandwidth_range(self):
        with pytest.raises(ValidationError):
            KernelSpec("box", 1.2)
        with pytest.raises(ValidationError):
            KernelSpec("sinc", 0.5)


class TestClusterTimePoint:
    def test_planted_blocks_recovered(self):
        labels_true = np.repeat([1, 2], [15, 10])
        M = one_hot(labels_true, 2).astype(float)
        Z = M @ np.diag([3.0, 2.0]) @ M.T
        labels, basis = cluster_time_point(Z, 2, seed=0)
        assert hamming_error(labels, labels_true, 2) == 0.0
        assert basis.values.shape == (2,)

    def test_single_community(self):
        Z = np.zeros((6, 6))
        labels, _ = cluster_time_point(Z, 1, seed=0)
        assert labels.tolist() == [1] * 6

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        Z = rng.standard_normal((12, 12))
        Z = Z + Z.T
        a, _ = cluster_time_point(Z, 3, seed=4)
        b, _ = cluster_time_point(Z, 3, seed=4)
        assert np.array_equal(a, b)


class TestAlignSequence:
    def test_consistent_labels_identity(self):
        raw = np.tile([1, 1, 2, 2, 3], (4, 1))
        out = align_sequence(raw, 3)
        assert out.alignable
        for perm in out.permutations:
            assert perm.tolist() == [0, 1, 2]
        assert np.array_equal(out.labels, raw)

    def test_label_swap_recovered(self):
        raw = np.array([
            [1, 1, 2, 2],
            [2, 2, 1, 1],  # same partition, swapped names
            [2, 2, 1, 1],
        ])
        out = align_sequence(raw, 2)
        assert out.alignable
        assert (out.labels == out.labels[0]).all()
        assert out.permutations[0].tolist() == [1, 0]
        # raw slices are only relabeled, never re-clustered
        for t in range(3):
            assert hamming_error(out.labels[t], raw[t], 2) == 0.0

    def test_community_collapse_fails_certificate(self):
        raw = np.array([
            [1, 2, 2, 2],
            [1, 1, 1, 1],  # second community vanished
        ])
        out = align_sequence(raw, 2)
        assert not out.alignable
        assert out.first_misaligned_step == 1

    def test_confusions_are_prerotation(self):
        raw = np.array([[1, 1, 2, 2], [2, 2, 1, 1]])
        out = align_sequence(raw, 2)
        assert np.array_equal(out.confusions[0], confusion_matrix(raw[0], raw[1], 2))


class TestKdSos:
    def _noiseless(self, seed=7):
        cfg = ScenarioConfig(
            n=60, n_communities=2, n_steps=5, gamma=0.0, rho=1.0,
            connectivity=ConnectivitySchedule.constant(np.eye(2)),
            initial_sizes=[30, 30], seed=seed,
        )
        return generate_scenario(cfg)

    def test_noiseless_recovery(self):
        series, truth = self._noiseless()
        out = kd_sos(series, 2, KernelSpec("box", 1.0), seed=1)
        assert mean_hamming(out.labels, truth.memberships.labels, 2) == 0.0
        assert out.alignable

    def test_zero_bandwidth_matches_per_time_clustering(self):
        series, _ = self._noiseless()
        out = kd_sos(series, 2, KernelSpec("box", 0.0), seed=3)
        for t in range(1, series.n_steps + 1):
            direct, _ = cluster_time_point(
                debiased_square(series.snapshot(t)), 2, derive_cluster_seed(3, t)
            )
            assert np.array_equal(out.raw_labels[t - 1], direct)

    def test_aligned_is_relabeling_of_raw(self):
        series, _ = self._noiseless(seed=9)
        out = kd_sos(series, 2, KernelSpec("box", 0.4), seed=5)
        for t in range(series.n_steps):
            assert hamming_error(out.labels[t], out.raw_labels[t], 2) == 0.0

    def test_deterministic_given_seed(self):
        series, _ = self._noiseless(seed=2)
        a = kd_sos(series, 2, KernelSpec("box", 0.4), seed=8)
        b = kd_sos(series, 2, KernelSpec("box", 0.4), seed=8)
        assert np.array_equal(a.labels, b.labels)

    def test_eigenvalue_traces_recorded(self):
        series, _ = self._noiseless()
        out = kd_sos(series, 2, KernelSpec("box", 0.2), seed=1)
        assert out.eigenvalues.shape == (5, 2)
        assert out.degenerate_gaps.shape == (5,)

    def test_heterophilic_connectivity_recovered(self):
        # indefinite connectivity, static communities: squaring carries the signal
        from kdsos import B_HETEROPHILIC, benchmark_initial_sizes

        cfg = ScenarioConfig(
            n=200, n_communities=3, n_steps=10, gamma=0.0, rho=0.8,
            connectivity=ConnectivitySchedule.constant(B_HETEROPHILIC),
            initial_sizes=benchmark_initial_sizes(200), seed=21,
        )
        series, truth = generate_scenario(cfg)
        out = kd_sos(series, 3, KernelSpec("box", 1.0), seed=2)
        assert mean_hamming(out.labels, truth.memberships.labels, 3) < 0.05


class TestKDSoSEstimator:
    def _series(self):
        cfg = ScenarioConfig(
            n=50, n_communities=2, n_steps=6, gamma=0.05, rho=0.9,
            connectivity=ConnectivitySchedule.constant(np.array([[0.9, 0.1], [0.1, 0.9]])),
            seed=4,
        )
        return generate_scenario(cfg)[0]

    def test_sklearn_protocol(self):
        est = KDSoS(n_communities=2, bandwidth=0.3, random_state=1)
        params = est.get_params()
        assert params["n_communities"] == 2 and params["bandwidth"] == 0.3
        cloned = clone(est)
        assert cloned.get_params() == params

    def test_fit_predict_matches_labels(self):
        series = self._series()
        est = KDSoS(n_communities=2, bandwidth=0.3, random_state=0)
        labels = est.fit_predict(series)
        assert np.array_equal(labels, est.labels_)
        assert labels.shape == (6, 50)
        assert est.bandwidth_ == 0.3
        assert est.score_table_ is None

    def test_tuned_fit_records_table(self):
        series = self._series()
        est = KDSoS(n_communities=2, bandwidth="tune", random_state=0).fit(series)
        assert est.score_table_ is not None
        assert est.bandwidth_ == est.score_table_.chosen

    def test_bad_bandwidth_string(self):
        with pytest.raises(ValidationError):
            KDSoS(n_communities=2, bandwidth="auto").fit(self._series())

    def test_accepts_raw_array(self):
        series = self._series()
        est = KDSoS(n_communities=2, bandwidth=0.2, random_state=0)
        labels = est.fit_predict(np.asarray(series.snapshots))
        assert labels.shape == (6, 50)

    def test_gaussian_kernel_fit(self):
        series = self._series()
        est = KDSoS(n_communities=2, kernel="gaussian", bandwidth=0.3,
                    random_state=0).fit(series)
        assert est.labels_.shape == (6, 50)
        assert est.eigenvalues_.shape == (6, 2)


class TestDecompositionAudit:
    def _instance(self, seed=11, gamma=0.3, n=24, T=5):
        cfg = ScenarioConfig(
            n=n, n_communities=2, n_steps=T, gamma=gamma, rho=0.7,
            connectivity=ConnectivitySchedule.constant(np.array([[0.9, 0.2], [0.2, 0.6]])),
            seed=seed,
        )
        return generate_scenario(cfg, keep_probabilities=True)

    def test_identity_exact_on_random_instances(self):
        from kdsos import decomposition_audit

        rng = np.random.default_rng(12)
        for i in range(10):
            series, truth = self._instance(seed=100 + i, gamma=float(rng.uniform(0, 2)))
            t = int(rng.integers(1, 6))
            r = int(rng.integers(0, 6)) / 5
            terms = decomposition_audit(series, truth, t, r)
            assert terms.relative_residual <= 1e-8
            rebuilt = terms.term_sum()
            agg = aggregate(series, t, KernelSpec("box", r))
            assert np.allclose(rebuilt, agg.matrix, atol=1e-8)

    def test_noiseless_case_terms(self):
        # binary connectivity at full density makes A equal its expectation
        from kdsos import decomposition_audit

        cfg = ScenarioConfig(
            n=20, n_communities=2, n_steps=4, gamma=0.0, rho=1.0,
            connectivity=ConnectivitySchedule.constant(np.eye(2)),
            initial_sizes=[10, 10], seed=13,
        )
        series, truth = generate_scenario(cfg, keep_probabilities=True)
        terms = decomposition_audit(series, truth, 2, 0.5)
        assert np.allclose(terms.cross_noise, 0.0)
        D_sum = sum(
            np.diag(series.snapshot(int(s)).sum(axis=1).astype(np.int64))
            for s in terms.window
        )
        assert np.allclose(terms.variance, -D_sum)

    def test_static_memberships_zero_membership_bias(self):
        from kdsos import decomposition_audit

        series, truth = self._instance(gamma=0.0)
        terms = decomposition_audit(series, truth, 3, 1.0)
        assert np.abs(terms.membership_bias).max() <= 1e-9 * max(1.0, terms.aggregate_norm)

    def test_fixed_center_variant_differs_when_density_varies(self):
        from kdsos import decomposition_audit

        # alternating connectivity changes Q across the window
        from kdsos import ConnectivitySchedule as CS

        cfg = ScenarioConfig(
            n=30, n_communities=3, n_steps=6, gamma=0.0, rho=0.5,
            connectivity=CS.benchmark(),
            initial_sizes=[10, 10, 10], seed=14,
        )
        series, truth = generate_scenario(cfg, keep_probabilities=True)
        terms = decomposition_audit(series, truth, 3, 0.5)
        assert terms.relative_residual <= 1e-8
        assert terms.residual_fixed_center > 1e-6  # the frozen-center reading is not exact

    def test_requires_probabilities(self):
        from kdsos import decomposition_audit

        series, truth = self._instance()
        truth.probability_matrices = None
        with pytest.raises(ValidationError):
            decomposition_audit(series, truth, 1, 0.2)
