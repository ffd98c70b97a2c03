import numpy as np
import pytest

from febaa.graph import AttributedGraph
from febaa.synthetic import planted_signal_graph, sbm_graph


@pytest.fixture
def path_graph():
    """4-node path with 2 features per node."""
    features = np.arange(8, dtype=float).reshape(4, 2)
    edges = [(0, 1), (1, 2), (2, 3)]
    return AttributedGraph(features, edges, labels=[0, 0, 1, 1])


@pytest.fixture
def small_sbm():
    return sbm_graph([20, 20], 0.3, 0.05, 6, seed=7)


@pytest.fixture(scope="session")
def planted_graph():
    return planted_signal_graph(seed=11)


def write_dataset(tmp_path, graph, prefix="g"):
    """Dump a graph to the loader's on-disk formats; returns the three paths."""
    from febaa.graph import save_edges, save_features_csv, save_labels

    edges = tmp_path / f"{prefix}_edges.txt"
    features = tmp_path / f"{prefix}_features.csv"
    labels = tmp_path / f"{prefix}_labels.txt"
    save_edges(graph.edges, edges)
    save_features_csv(graph.features, features)
    if graph.labels is not None:
        save_labels(graph.labels, labels)
        return edges, features, labels
    return edges, features, None
