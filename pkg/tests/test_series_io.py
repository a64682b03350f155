import numpy as np
import pytest

from kdsos import AdjacencySeries, ValidationError, load_series, save_series


def write(tmp_path, text, name="series.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadSeries:
    def test_minimal_file(self, tmp_path):
        series = load_series(write(tmp_path, "# n=3 T=1\n1 0 1\n"))
        assert series.n_nodes == 3 and series.n_steps == 1
        A = series.snapshot(1)
        assert A[0, 1] == 1 and A[1, 0] == 1
        assert A.sum() == 2

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        series = load_series(write(tmp_path, "# n=2 T=1\n# a comment\n\n1 0 1\n"))
        assert series.snapshot(1)[0, 1] == 1

    def test_duplicate_edges_deduplicated(self, tmp_path):
        series = load_series(write(tmp_path, "# n=3 T=1\n1 0 1\n1 1 0\n1 0 1\n"))
        assert series.snapshot(1).sum() == 2

    def test_self_loop_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="self-loop"):
            load_series(write(tmp_path, "# n=3 T=1\n1 2 2\n"))

    def test_node_index_out_of_range(self, tmp_path):
        with pytest.raises(ValidationError, match="node index"):
            load_series(write(tmp_path, "# n=3 T=1\n1 0 3\n"))

    def test_time_index_out_of_range(self, tmp_path):
        with pytest.raises(ValidationError, match="t_index"):
            load_series(write(tmp_path, "# n=3 T=2\n3 0 1\n"))

    def test_malformed_header(self, tmp_path):
        with pytest.raises(ValidationError, match="header"):
            load_series(write(tmp_path, "n=3 T=1\n"))
        with pytest.raises(ValidationError, match="header"):
            load_series(write(tmp_path, ""))

    def test_malformed_edge_line(self, tmp_path):
        with pytest.raises(ValidationError):
            load_series(write(tmp_path, "# n=3 T=1\n1 0\n"))
        with pytest.raises(ValidationError):
            load_series(write(tmp_path, "# n=3 T=1\n1 0 x\n"))


class TestRoundTrip:
    def test_canonical_roundtrip_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        T, n = 3, 12
        snaps = np.zeros((T, n, n), dtype=np.uint8)
        for t in range(T):
            raw = np.triu((rng.random((n, n)) < 0.3).astype(np.uint8), 1)
            snaps[t] = raw + raw.T
        series = AdjacencySeries(snaps)
        p1 = tmp_path / "a.txt"
        p2 = tmp_path / "b.txt"
        save_series(series, p1)
        save_series(load_series(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_save_canonicalizes_unsorted_input(self, tmp_path):
        messy = write(tmp_path, "# n=4 T=2\n2 3 1\n1 2 0\n1 0 1\n")
        out = tmp_path / "canon.txt"
        save_series(load_series(messy), out)
        assert out.read_text() == "# n=4 T=2\n1 0 1\n1 0 2\n2 1 3\n"

    def test_numpy_array_roundtrip(self, tmp_path):
        series = load_series(write(tmp_path, "# n=3 T=2\n1 0 1\n2 1 2\n"))
        again = AdjacencySeries(series.snapshots.copy())
        assert np.array_equal(series.snapshots, again.snapshots)


class TestAdjacencySeriesValidation:
    def test_rejects_asymmetric(self):
        A = np.zeros((1, 3, 3), dtype=np.uint8)
        A[0, 0, 1] = 1
        with pytest.raises(ValidationError):
            AdjacencySeries(A)

    def test_rejects_nonzero_diagonal(self):
        A = np.zeros((1, 3, 3), dtype=np.uint8)
        A[0, 1, 1] = 1
        with pytest.raises(ValidationError):
            AdjacencySeries(A)

    def test_rejects_nonbinary(self):
        A = np.zeros((1, 3, 3), dtype=np.uint8)
        A[0, 0, 1] = A[0, 1, 0] = 2
        with pytest.raises(ValidationError):
            AdjacencySeries(A)

    def test_times_grid(self):
        A = np.zeros((4, 2, 2), dtype=np.uint8)
        assert AdjacencySeries(A).times.tolist() == [0.25, 0.5, 0.75, 1.0]

    def test_degrees(self, tmp_path):
        series = load_series(write(tmp_path, "# n=3 T=1\n1 0 1\n1 0 2\n"))
        assert series.degrees(1).tolist() == [2, 1, 1]
