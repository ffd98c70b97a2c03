"""Attributed-graph data model, file ingestion, and adjacency normalization.

Graphs are undirected. Edges are stored as a canonical sorted array of
unordered pairs (min, max), which gives deterministic iteration order for
every seeded operation downstream. The node feature matrix X is dense
float64, shape (num_nodes, num_features).

File formats:
  features  CSV of decimal floats, one node per row, all rows same width
  edges     whitespace-separated integer pairs, 0-based, one edge per line
  labels    one integer class id per line, classes contiguous from 0
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .util import fmt_float


class GraphFormatError(ValueError):
    """Malformed or inconsistent graph input files."""


def canonical_edges(edges: np.ndarray) -> np.ndarray:
    """Collapse a raw (directed, possibly duplicated) edge array to the
    canonical unordered representation: rows (min, max), unique, sorted."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] == 0:
        return edges
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


@dataclass(frozen=True)
class AttributedGraph:
    """Immutable attributed graph: features X, unordered edge set, optional labels."""

    features: np.ndarray
    edges: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if features.ndim != 2:
            raise GraphFormatError(f"features must be 2-D, got shape {features.shape}")
        edges = canonical_edges(self.edges)
        n = features.shape[0]
        if edges.shape[0] and (edges.min() < 0 or edges.max() >= n):
            bad = edges[(edges < 0).any(axis=1) | (edges >= n).any(axis=1)][0]
            raise GraphFormatError(
                f"node index out of range: edge ({bad[0]}, {bad[1]}) with {n} nodes"
            )
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise GraphFormatError(
                    f"labels must have one entry per node: got {labels.shape}, expected ({n},)"
                )
            classes = np.unique(labels)
            if labels.size and (classes[0] != 0 or classes[-1] != classes.size - 1):
                raise GraphFormatError(
                    "labels must form a contiguous class range starting at 0"
                )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)
        self.features.setflags(write=False)
        self.edges.setflags(write=False)
        if labels is not None:
            labels.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        """Count of unordered pairs."""
        return self.edges.shape[0]

    @property
    def feature_indices(self) -> np.ndarray:
        """The full feature index range 0..F-1."""
        return np.arange(self.num_features)

    @property
    def num_classes(self) -> int | None:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def self_loop_count(self) -> int:
        if self.num_edges == 0:
            return 0
        return int((self.edges[:, 0] == self.edges[:, 1]).sum())

    def with_edges(self, edges: np.ndarray) -> "AttributedGraph":
        return AttributedGraph(self.features, edges, self.labels)


@dataclass(frozen=True)
class GraphStats:
    num_nodes: int
    num_features: int
    num_edges: int
    num_classes: int | None = None


def _parse_edge_file(path: Path, num_nodes: int) -> np.ndarray:
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected two integer columns, got {line.strip()!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: malformed integer pair {line.strip()!r}"
                ) from None
            if u < 0 or v < 0 or u >= num_nodes or v >= num_nodes:
                raise GraphFormatError(
                    f"{path}:{lineno}: node index out of range for {num_nodes} nodes"
                )
            rows.append((u, v))
    return np.array(rows, dtype=np.int64).reshape(-1, 2)


def _parse_feature_file(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = [float(tok) for tok in line.strip().split(",")]
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: malformed float row"
                ) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise GraphFormatError(
                    f"{path}:{lineno}: ragged feature row ({len(row)} values, expected {width})"
                )
            rows.append(row)
    if not rows:
        raise GraphFormatError(f"{path}: empty feature file")
    return np.array(rows, dtype=np.float64)


def _parse_label_file(path: Path) -> np.ndarray:
    labels = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                labels.append(int(line.strip()))
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: malformed label {line.strip()!r}"
                ) from None
    return np.array(labels, dtype=np.int64)


def load_features_csv(path: str | Path) -> np.ndarray:
    """Read a dense float matrix in the features/embedding CSV format."""
    return _parse_feature_file(Path(path))


def load_labels(path: str | Path) -> np.ndarray:
    """Read an integer label file, one class id per line."""
    return _parse_label_file(Path(path))


def load_graph(
    edges_path: str | Path,
    features_path: str | Path,
    labels_path: str | Path | None = None,
) -> AttributedGraph:
    """Load and validate a graph from disk.

    The node count is inferred from the feature rows. Duplicate directed
    pairs collapse to one unordered edge; self-loops present in the input
    are preserved (see ``AttributedGraph.self_loop_count``).
    """
    features = _parse_feature_file(Path(features_path))
    edges = _parse_edge_file(Path(edges_path), num_nodes=features.shape[0])
    labels = _parse_label_file(Path(labels_path)) if labels_path is not None else None
    return AttributedGraph(features, edges, labels)


def symmetrize(graph: AttributedGraph) -> AttributedGraph:
    """Close the edge set under pair reversal.

    Storage is already canonical unordered pairs, so this is idempotent;
    it exists as the explicit directed-to-undirected pipeline step.
    """
    return graph.with_edges(graph.edges)


def normalized_adjacency(graph: AttributedGraph) -> sp.csr_matrix:
    """Symmetrically normalized adjacency D^-1/2 (A + I) D^-1/2 as CSR.

    A holds one symmetric entry per stored unordered pair; D is the degree
    matrix of A + I, so isolated nodes keep self-loop weight 1.
    """
    n = graph.num_nodes
    e = graph.edges
    loops = e[:, 0] == e[:, 1]
    plain = e[~loops]
    rows = np.concatenate([plain[:, 0], plain[:, 1], e[loops][:, 0], np.arange(n)])
    cols = np.concatenate([plain[:, 1], plain[:, 0], e[loops][:, 1], np.arange(n)])
    vals = np.ones(rows.shape[0], dtype=np.float64)
    a_hat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(deg)
    d = sp.diags(inv_sqrt)
    return (d @ a_hat @ d).tocsr()


def stats(graph: AttributedGraph) -> GraphStats:
    """Summary counts matching storage exactly."""
    return GraphStats(
        num_nodes=graph.num_nodes,
        num_features=graph.num_features,
        num_edges=graph.num_edges,
        num_classes=graph.num_classes,
    )


def ingest_report(graph: AttributedGraph) -> dict:
    """Validation report emitted by the CLI ``ingest`` command."""
    report = {
        "num_nodes": graph.num_nodes,
        "num_features": graph.num_features,
        "num_edges": graph.num_edges,
        "self_loops": graph.self_loop_count,
        "num_classes": graph.num_classes,
        "class_histogram": None,
    }
    if graph.labels is not None:
        values, counts = np.unique(graph.labels, return_counts=True)
        report["class_histogram"] = {int(v): int(c) for v, c in zip(values, counts)}
    return report


def save_features_csv(features: np.ndarray, path: str | Path) -> None:
    with open(path, "w") as f:
        for row in np.asarray(features, dtype=np.float64):
            f.write(",".join(fmt_float(x) for x in row) + "\n")


def save_edges(edges: np.ndarray, path: str | Path) -> None:
    with open(path, "w") as f:
        for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
            f.write(f"{u} {v}\n")


def save_labels(labels: np.ndarray, path: str | Path) -> None:
    with open(path, "w") as f:
        for y in np.asarray(labels, dtype=np.int64):
            f.write(f"{y}\n")
