"""The network-sequence container and its on-disk edge-list format.

File format (UTF-8 text):

* first line: ``# n=<n> T=<T>``
* each subsequent non-comment line: ``<t_index> <i> <j>`` with ``t_index`` in
  ``1..T`` and 0-based node indices ``i != j``; one line per undirected edge
  per snapshot.  Lines starting with ``#`` are comments.

``save_series`` emits the canonical form: edges sorted by
``(t_index, min(i, j), max(i, j))`` with ``i < j``, so a load/save round trip
of a canonical file is byte-identical.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ValidationError

_HEADER_RE = re.compile(r"^#\s*n=(\d+)\s+T=(\d+)\s*$")


@dataclass
class AdjacencySeries:
    """T symmetric binary adjacency snapshots with zero diagonals.

    ``snapshots`` has shape (T, n, n) and dtype uint8.  Time points sit on
    the grid ``t = 1/T, 2/T, ..., 1``; 1-based ``t_index`` maps to ``t_index/T``.
    """

    snapshots: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.snapshots)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValidationError(f"snapshots must have shape (T, n, n), got {A.shape}")
        if A.shape[0] < 1:
            raise ValidationError("need at least one snapshot")
        A = A.astype(np.uint8, copy=True)  # own a read-only copy
        if A.max(initial=0) > 1:
            raise ValidationError("snapshots must be binary")
        if not np.array_equal(A, np.transpose(A, (0, 2, 1))):
            raise ValidationError("every snapshot must be symmetric")
        if np.any(A[:, np.arange(A.shape[1]), np.arange(A.shape[1])] != 0):
            raise ValidationError("every snapshot must have a zero diagonal")
        A.setflags(write=False)
        self.snapshots = A

    @property
    def n_steps(self) -> int:
        return self.snapshots.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.snapshots.shape[1]

    @property
    def times(self) -> np.ndarray:
        T = self.n_steps
        return np.arange(1, T + 1) / T

    def snapshot(self, t_index: int) -> np.ndarray:
        if not 1 <= t_index <= self.n_steps:
            raise ValidationError(f"t_index must lie in 1..{self.n_steps}, got {t_index}")
        return self.snapshots[t_index - 1]

    def degrees(self, t_index: int) -> np.ndarray:
        return self.snapshot(t_index).sum(axis=1).astype(np.int64)


def load_series(path) -> AdjacencySeries:
    """Parse a snapshot edge-list file.

    Duplicate edge lines are deduplicated; self-loops, out-of-range node or
    time indices, and malformed headers raise :class:`ValidationError`.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        raise ValidationError(f"{path}: empty file, expected a '# n=<n> T=<T>' header")
    m = _HEADER_RE.match(lines[0].rstrip("\n"))
    if m is None:
        raise ValidationError(f"{path}: malformed header {lines[0]!r}, expected '# n=<n> T=<T>'")
    n, T = int(m.group(1)), int(m.group(2))
    if n < 1 or T < 1:
        raise ValidationError(f"{path}: header requires n >= 1 and T >= 1")
    A = np.zeros((T, n, n), dtype=np.uint8)
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise ValidationError(f"{path}:{lineno}: expected '<t> <i> <j>', got {line!r}")
        try:
            t, i, j = (int(p) for p in parts)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: non-integer field in {line!r}") from None
        if not 1 <= t <= T:
            raise ValidationError(f"{path}:{lineno}: t_index {t} outside 1..{T}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"{path}:{lineno}: node index outside 0..{n - 1}")
        if i == j:
            raise ValidationError(f"{path}:{lineno}: self-loop on node {i}")
        A[t - 1, i, j] = 1
        A[t - 1, j, i] = 1
    return AdjacencySeries(A)


def save_series(series: AdjacencySeries, path) -> None:
    """Write the canonical edge-list form (sorted, each edge once with i < j)."""
    path = Path(path)
    out = [f"# n={series.n_nodes} T={series.n_steps}\n"]
    for t in range(series.n_steps):
        ii, jj = np.nonzero(np.triu(series.snapshots[t], k=1))
        for i, j in zip(ii.tolist(), jj.tolist()):
            out.append(f"{t + 1} {i} {j}\n")
    path.write_text("".join(out), encoding="utf-8")
