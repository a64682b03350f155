import numpy as np
import pytest

from kdsos import ValidationError, align_sequence
from kdsos.experiments import (
    mean_hamming,
    panel_csv,
    report_json,
    run_alignability,
    run_audit,
    run_experiment,
    run_figure3,
    run_figure4_gamma,
    summarize_transitions,
    write_report,
)
from kdsos.plots import emit_plots, line_chart_svg


class TestMeanHamming:
    def test_zero_for_identical(self):
        labels = np.tile([1, 2, 2], (3, 1))
        assert mean_hamming(labels, labels, 2) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            mean_hamming(np.ones((2, 3), int), np.ones((3, 3), int), 1)


class TestSummarizeTransitions:
    def test_constant_memberships_no_exits(self):
        labels = np.tile([1, 1, 2, 2, 2], (4, 1))
        summary = summarize_transitions(labels, n_communities=2)
        off = summary.percentages.copy()
        for t in range(off.shape[0]):
            np.fill_diagonal(off[t], 0.0)
        assert not off.any()
        assert summary.aligned

    def test_single_mover_percentage(self):
        first = [1] * 10 + [2] * 5
        second = list(first)
        second[0] = 2  # one node leaves community 1 (size 10)
        summary = summarize_transitions(np.array([first, second]), n_communities=2)
        assert summary.counts[0].tolist() == [[9, 1], [0, 5]]
        assert summary.percentages[0, 0, 1] == pytest.approx(10.0)

    def test_row_counts_sum_to_source_sizes(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(1, 4, (5, 40))
        with pytest.warns(UserWarning):
            summary = summarize_transitions(labels, n_communities=3)
        for t in range(4):
            assert np.array_equal(summary.counts[t].sum(axis=1), summary.source_sizes[t])

    def test_unaligned_input_warns(self):
        labels = np.array([[1, 1, 2, 2], [2, 2, 1, 1]])
        with pytest.warns(UserWarning, match="not alignable"):
            summary = summarize_transitions(labels, n_communities=2)
        assert not summary.aligned

    def test_accepts_dynamic_clustering(self):
        raw = np.tile([1, 2, 1, 2], (3, 1))
        clustering = align_sequence(raw, 2)
        summary = summarize_transitions(clustering)
        assert summary.aligned


class TestPresetDispatch:
    def test_unknown_preset(self):
        with pytest.raises(ValidationError, match="unknown preset"):
            run_experiment("figure5")

    def test_unknown_override(self):
        with pytest.raises(ValidationError, match="unknown override"):
            run_experiment("alignability", bandwidth=3)


class TestAuditPreset:
    def test_reduced_audit_is_exact(self):
        report = run_audit(instances=8, max_n=30, max_steps=5, seed=1)
        assert report.payload["max_relative_residual"] <= 1e-8
        assert len(report.payload["instances"]) == 8

    def test_report_serialization_roundtrip(self):
        report = run_audit(instances=2, max_n=20, max_steps=4, seed=2)
        doc = report_json(report)
        import json

        parsed = json.loads(doc)
        assert parsed["preset"] == "audit"
        assert parsed["config"]["instances"] == 2


class TestAlignabilityPreset:
    def test_reduced_regimes(self):
        report = run_alignability(
            seed=3,
            regimes={"fast": (0.7, 40, 6, 30), "slow": (0.001, 60, 10, 30)},
        )
        rows = {r["regime"]: r for r in report.payload["regimes"]}
        assert rows["fast"]["non_alignable_fraction"] > rows["slow"]["non_alignable_fraction"]
        assert rows["slow"]["non_alignable_fraction"] <= 0.2


class TestFigurePresets:
    def test_figure3_smoke_structure(self):
        report = run_figure3(
            n=40, n_steps=6, trials=2, grid=np.array([1, 2]) / 6, seed=4
        )
        payload = report.payload
        assert len(payload["hamming_curve"]["r"]) == 3  # r=0 plus the grid
        assert len(payload["score_curve"]["mean"]) == 2
        assert payload["hamming_argmin"] in (1 / 6, 2 / 6)
        assert len(payload["panels"]) == 1

    def test_figure3_deterministic(self):
        kw = dict(n=40, n_steps=6, trials=2, grid=np.array([1, 2]) / 6, seed=4)
        a = report_json(run_figure3(**kw))
        b = report_json(run_figure3(**kw))
        assert a == b

    def test_figure4_gamma_smoke(self):
        report = run_figure4_gamma(
            n=40, n_steps=6, gammas=[0.0, 0.2], trials=2,
            tune_grid=np.array([1, 2]) / 6, seed=5,
        )
        rows = report.payload["methods"]
        methods = {r["method"] for r in rows}
        assert methods == {"kdsos", "singleton", "all", "kdsos_chosen_bandwidth"}
        hams = [r["mean_hamming"] for r in rows if r["method"] != "kdsos_chosen_bandwidth"]
        assert all(0.0 <= h <= 1.0 for h in hams)


class TestReportFiles:
    def test_write_report_and_plots(self, tmp_path):
        report = run_figure3(n=40, n_steps=6, trials=1, grid=np.array([1, 2]) / 6, seed=6)
        written = write_report(report, tmp_path)
        names = {p.name for p in written}
        assert "report.json" in names
        assert "figure3_bandwidth_sweep.csv" in names
        assert (tmp_path / "timing.log").exists()
        svgs = emit_plots(report, tmp_path)
        assert svgs[0].name == "figure3_bandwidth_sweep.svg"
        body = svgs[0].read_text()
        assert body.startswith("<svg") and "polyline" in body
        assert body.count("stroke-dasharray") == 2  # two min markers

    def test_panel_csv_layout(self):
        panel = {
            "name": "demo", "x": [0.1, 0.2],
            "curves": [{"label": "a", "values": [1.0, 2.0]}],
        }
        text = panel_csv(panel)
        assert text.splitlines()[0] == "x,a"
        assert text.splitlines()[1] == "0.1,1.0"

    def test_empty_sweep_errors_and_writes_nothing(self, tmp_path):
        with pytest.raises(ValidationError, match="empty sweep"):
            line_chart_svg({"name": "bad", "x": [], "curves": []})

    def test_svg_deterministic(self, tmp_path):
        report = run_figure3(n=40, n_steps=6, trials=1, grid=np.array([1, 2]) / 6, seed=6)
        a = emit_plots(report, tmp_path / "a")[0].read_bytes()
        b = emit_plots(report, tmp_path / "b")[0].read_bytes()
        assert a == b
