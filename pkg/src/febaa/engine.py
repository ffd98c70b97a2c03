"""Minimal two-view graph contrastive trainer.

Two-layer graph-convolutional encoder H = A_hat @ relu(A_hat @ X @ W1) @ W2,
a normalized-temperature contrastive objective over cosine similarities
(positive pair = same node across views; negatives = all other nodes in
both views), hand-written gradients, and plain full-batch gradient descent
with L2 weight decay. All float accumulation happens in fixed row-major
order, so a (graph, config, seed) triple reproduces bit-identical runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from .augmentation import ViewConfig, apply_view, candidate_features
from .graph import AttributedGraph, normalized_adjacency
from .rng import NS_EPOCH, NS_INIT, NS_SELECT, substream

if TYPE_CHECKING:
    from .ranking import FeatureRanking

NORM_EPS = 1e-12


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, trace: np.ndarray):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch
        self.trace = trace


@dataclass
class EncoderParams:
    """Two-layer encoder weights; the nonlinearity is a fixed rectifier."""

    W1: np.ndarray
    W2: np.ndarray

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=np.float64)
        self.W2 = np.asarray(self.W2, dtype=np.float64)
        if self.W1.ndim != 2 or self.W2.ndim != 2:
            raise ValueError("W1 and W2 must be matrices")
        if self.W1.shape[1] != self.W2.shape[0]:
            raise ValueError(
                f"hidden dimension mismatch: W1 {self.W1.shape} vs W2 {self.W2.shape}"
            )
        if not (np.isfinite(self.W1).all() and np.isfinite(self.W2).all()):
            raise ValueError("encoder weights must be finite")

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.W1.copy(), self.W2.copy())


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters plus the two per-view augmentation configs."""

    epochs: int = 200
    learning_rate: float = 0.01
    weight_decay: float = 1e-5
    hidden_size: int = 64
    output_size: int = 32
    temperature: float = 0.5
    view1: ViewConfig = field(default_factory=ViewConfig)
    view2: ViewConfig = field(default_factory=ViewConfig)
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.hidden_size < 1 or self.output_size < 1:
            raise ValueError("hidden_size and output_size must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class TrainResult:
    params: EncoderParams
    embedding: np.ndarray
    loss_trace: np.ndarray


def init_params(
    num_features: int, hidden_size: int, output_size: int, rng: np.random.Generator
) -> EncoderParams:
    """Uniform +-sqrt(6 / (fan_in + fan_out)) init, seeded."""

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return EncoderParams(
        glorot(num_features, hidden_size), glorot(hidden_size, output_size)
    )


def encode(params: EncoderParams, adj: sp.csr_matrix, X: np.ndarray) -> np.ndarray:
    """H = A_hat @ relu(A_hat @ X @ W1) @ W2."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != params.W1.shape[0]:
        raise ValueError(
            f"feature dimension mismatch: X has {X.shape[1]}, W1 expects "
            f"{params.W1.shape[0]}"
        )
    if adj.shape[0] != X.shape[0]:
        raise ValueError("adjacency and feature row counts differ")
    Z = (adj @ X) @ params.W1
    H = adj @ np.maximum(Z, 0.0) @ params.W2
    return H


def _normalize_rows(H: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    norms = np.sqrt(np.einsum("ij,ij->i", H, H))
    clipped = norms < NORM_EPS
    safe = np.where(clipped, NORM_EPS, norms)
    return H / safe[:, None], safe, clipped


def _similarity_parts(H1, H2, temperature):
    U, nu, cu = _normalize_rows(np.asarray(H1, dtype=np.float64))
    V, nv, cv = _normalize_rows(np.asarray(H2, dtype=np.float64))
    E_uv = np.exp(U @ V.T / temperature)
    E_uu = np.exp(U @ U.T / temperature)
    E_vv = np.exp(V @ V.T / temperature)
    # denominator per anchor: positive + inter-view negatives + intra-view negatives
    den_u = E_uv.sum(axis=1) + E_uu.sum(axis=1) - np.diag(E_uu)
    den_v = E_uv.sum(axis=0) + E_vv.sum(axis=1) - np.diag(E_vv)
    return U, V, nu, nv, cu, cv, E_uv, E_uu, E_vv, den_u, den_v


def contrastive_loss(H1: np.ndarray, H2: np.ndarray, temperature: float) -> float:
    """Mean normalized-temperature cross-entropy over both view directions."""
    H1 = np.asarray(H1, dtype=np.float64)
    H2 = np.asarray(H2, dtype=np.float64)
    if H1.shape != H2.shape:
        raise ValueError(f"view shapes differ: {H1.shape} vs {H2.shape}")
    n = H1.shape[0]
    if n < 2:
        raise ValueError("contrastive loss needs at least 2 nodes")
    _, _, _, _, _, _, E_uv, _, _, den_u, den_v = _similarity_parts(
        H1, H2, temperature
    )
    pos = np.log(np.diag(E_uv))
    loss_u = -pos + np.log(den_u)
    loss_v = -pos + np.log(den_v)
    return float((loss_u.sum() + loss_v.sum()) / (2 * n))


def loss_and_embedding_grads(
    H1: np.ndarray, H2: np.ndarray, temperature: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus dL/dH1, dL/dH2 in closed form."""
    n = H1.shape[0]
    if n < 2:
        raise ValueError("contrastive loss needs at least 2 nodes")
    U, V, nu, nv, cu, cv, E_uv, E_uu, E_vv, den_u, den_v = _similarity_parts(
        H1, H2, temperature
    )
    pos = np.log(np.diag(E_uv))
    loss = float(((-pos + np.log(den_u)).sum() + (-pos + np.log(den_v)).sum()) / (2 * n))

    c = 1.0 / (2 * n)
    G_uv = c * E_uv * (1.0 / den_u[:, None] + 1.0 / den_v[None, :])
    G_uv[np.diag_indices(n)] -= 2 * c
    G_uu = c * E_uu / den_u[:, None]
    G_uu[np.diag_indices(n)] = 0.0
    G_vv = c * E_vv / den_v[:, None]
    G_vv[np.diag_indices(n)] = 0.0

    dU_hat = (G_uv @ V + (G_uu + G_uu.T) @ U) / temperature
    dV_hat = (G_uv.T @ U + (G_vv + G_vv.T) @ V) / temperature

    def through_normalization(d_hat, unit, norms, clipped):
        inner = np.einsum("ij,ij->i", d_hat, unit)
        grad = (d_hat - inner[:, None] * unit) / norms[:, None]
        if clipped.any():
            grad[clipped] = d_hat[clipped] / norms[clipped, None]
        return grad

    dH1 = through_normalization(dU_hat, U, nu, cu)
    dH2 = through_normalization(dV_hat, V, nv, cv)
    return loss, dH1, dH2


def training_objective(
    params: EncoderParams,
    adj1: sp.csr_matrix,
    X1: np.ndarray,
    adj2: sp.csr_matrix,
    X2: np.ndarray,
    temperature: float,
    weight_decay: float,
) -> float:
    """Contrastive loss of the two encoded views plus (wd/2)|W|^2 penalty."""
    H1 = encode(params, adj1, X1)
    H2 = encode(params, adj2, X2)
    penalty = 0.5 * weight_decay * (
        np.einsum("ij,ij->", params.W1, params.W1)
        + np.einsum("ij,ij->", params.W2, params.W2)
    )
    return contrastive_loss(H1, H2, temperature) + float(penalty)


def gradients(
    params: EncoderParams,
    adj1: sp.csr_matrix,
    X1: np.ndarray,
    adj2: sp.csr_matrix,
    X2: np.ndarray,
    temperature: float,
    weight_decay: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Analytic gradients of training_objective w.r.t. W1 and W2.

    Returns (objective value, dW1, dW2). The adjacency matrices are
    symmetric, which the backward pass relies on.
    """
    P1 = adj1 @ np.asarray(X1, dtype=np.float64)
    P2 = adj2 @ np.asarray(X2, dtype=np.float64)
    Z1 = P1 @ params.W1
    Z2 = P2 @ params.W1
    S1 = np.maximum(Z1, 0.0)
    S2 = np.maximum(Z2, 0.0)
    M1 = adj1 @ S1
    M2 = adj2 @ S2
    H1 = M1 @ params.W2
    H2 = M2 @ params.W2

    loss, dH1, dH2 = loss_and_embedding_grads(H1, H2, temperature)

    gW2 = M1.T @ dH1 + M2.T @ dH2
    dS1 = adj1 @ (dH1 @ params.W2.T)
    dS2 = adj2 @ (dH2 @ params.W2.T)
    dZ1 = dS1 * (Z1 > 0.0)
    dZ2 = dS2 * (Z2 > 0.0)
    gW1 = P1.T @ dZ1 + P2.T @ dZ2

    gW1 += weight_decay * params.W1
    gW2 += weight_decay * params.W2
    penalty = 0.5 * weight_decay * (
        np.einsum("ij,ij->", params.W1, params.W1)
        + np.einsum("ij,ij->", params.W2, params.W2)
    )
    return loss + float(penalty), gW1, gW2


def train(
    graph: AttributedGraph,
    ranking: "FeatureRanking | None",
    cfg: TrainConfig,
) -> TrainResult:
    """Run the two-view contrastive training loop.

    Candidate features are selected once per view before the epoch loop;
    masking and edge dropping resample every epoch from substreams keyed
    by (seed, view, epoch). The returned embedding is computed on the
    unaugmented graph.
    """
    views = (cfg.view1, cfg.view2)
    if any(v.selection_mode == "influential" for v in views) and ranking is None:
        raise ValueError("influential selection mode requires a feature ranking")

    cf = [
        candidate_features(graph, v, ranking, rng=substream(cfg.seed, NS_SELECT, i))
        for i, v in enumerate(views, start=1)
    ]
    params = init_params(
        graph.num_features,
        cfg.hidden_size,
        cfg.output_size,
        substream(cfg.seed, NS_INIT),
    )

    trace = np.zeros(cfg.epochs, dtype=np.float64)
    for epoch in range(cfg.epochs):
        inputs = []
        for i, view_cfg in enumerate(views, start=1):
            view = apply_view(
                graph, cf[i - 1], view_cfg, substream(cfg.seed, NS_EPOCH, i, epoch)
            )
            adj = normalized_adjacency(graph.with_edges(view.edges))
            inputs.append((adj, view.features))
        loss, gW1, gW2 = gradients(
            params,
            inputs[0][0],
            inputs[0][1],
            inputs[1][0],
            inputs[1][1],
            cfg.temperature,
            cfg.weight_decay,
        )
        trace[epoch] = loss
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch, trace[: epoch + 1])
        params.W1 = params.W1 - cfg.learning_rate * gW1
        params.W2 = params.W2 - cfg.learning_rate * gW2

    embedding = encode(params, normalized_adjacency(graph), graph.features)
    return TrainResult(params=params, embedding=embedding, loss_trace=trace)
