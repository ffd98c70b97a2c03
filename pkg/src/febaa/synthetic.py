"""Synthetic graph fixtures: stochastic block models with planted features.

Desk-scale stand-ins for the public benchmarks. The generator is seeded
and doubles as the oracle for loader round-trip tests.
"""

from __future__ import annotations

import numpy as np

from .graph import AttributedGraph
from .rng import NS_DATA, substream


def sbm_edges(
    block_sizes: list[int], p_in: float, p_out: float, rng: np.random.Generator
) -> np.ndarray:
    """Undirected SBM edge array: within-block pairs with prob p_in,
    cross-block pairs with prob p_out."""
    n = int(sum(block_sizes))
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    keep = rng.random(iu.shape[0]) < prob
    return np.stack([iu[keep], ju[keep]], axis=1).astype(np.int64)


def sbm_graph(
    block_sizes: list[int],
    p_in: float,
    p_out: float,
    num_features: int,
    feature_signal: float = 1.0,
    noise_scale: float = 1.0,
    seed: int = 0,
) -> AttributedGraph:
    """Attributed SBM with class-informative features.

    Each class gets a random direction in feature space; node features are
    feature_signal * class_direction + Gaussian noise. feature_signal=0
    yields pure-noise features.
    """
    rng = substream(seed, NS_DATA)
    edges = sbm_edges(block_sizes, p_in, p_out, rng)
    labels = np.repeat(np.arange(len(block_sizes)), block_sizes)
    n = labels.shape[0]
    directions = rng.standard_normal((len(block_sizes), num_features))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    X = feature_signal * directions[labels] + noise_scale * rng.standard_normal(
        (n, num_features)
    )
    return AttributedGraph(X, edges, labels)


def planted_signal_graph(
    num_nodes: int = 300,
    num_features: int = 20,
    p_in: float = 0.04,
    p_out: float = 0.01,
    signal_amplitude: float = 2.0,
    signal_noise: float = 0.1,
    noise_scale: float = 0.3,
    seed: int = 0,
) -> AttributedGraph:
    """Two-block graph where feature 0 carries the label and the rest are noise.

    Column 0 equals the scaled one-hot class value plus small Gaussian
    noise, so masking it removes the dominant class signal; columns 1..F-1
    are pure noise. The blocks are assortative enough that neighborhood
    averaging preserves (rather than washes out) the planted column. Used
    to validate influence ranking end to end.
    """
    half = num_nodes // 2
    sizes = [half, num_nodes - half]
    rng = substream(seed, NS_DATA)
    edges = sbm_edges(sizes, p_in, p_out, rng)
    labels = np.repeat(np.arange(2), sizes)
    X = noise_scale * rng.standard_normal((num_nodes, num_features))
    X[:, 0] = signal_amplitude * labels + signal_noise * rng.standard_normal(num_nodes)
    return AttributedGraph(X, edges, labels)
