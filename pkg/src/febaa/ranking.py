"""Influence ranking of feature dimensions by single-column masking.

For each round r and feature j, the scorer evaluates the graph with
column j zeroed; per-feature scores are averaged over rounds and sorted
ascending, so the features whose masking hurts accuracy the most come
first. Also here: the pre-training iteration budget accounting and CSV
persistence of rankings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .augmentation import ViewConfig
from .engine import TrainConfig, train
from .evaluation import generate_splits, linear_evaluate
from .graph import AttributedGraph
from .rng import NS_RANK_SPLIT, NS_RANK_TRAIN, derive_seed
from .util import fmt_float

# scorer(graph_with_masked_column, epochs, seed, split_seed) -> accuracy in [0, 1];
# split_seed is shared by all features of one round, so the train/test split is
# fixed within a round and resampled across rounds.
Scorer = Callable[[AttributedGraph, int, int, int], float]

RANKING_HEADER = ("rank", "feature_index", "mean_score")


class RankingError(RuntimeError):
    """Scorer failure, annotated with the failing (round, feature) pair."""


@dataclass(frozen=True)
class FeatureRanking:
    """All feature indices sorted ascending by mean masked-accuracy score."""

    entries: tuple
    rounds: int
    epochs_per_run: int

    def __post_init__(self):
        entries = tuple((int(j), float(s)) for j, s in self.entries)
        indices = sorted(j for j, _ in entries)
        if indices != list(range(len(entries))):
            raise ValueError("ranking entries must be a permutation of 0..F-1")
        scores = [s for _, s in entries]
        if any(a > b for a, b in zip(scores, scores[1:])):
            raise ValueError("ranking scores must be non-decreasing")
        object.__setattr__(self, "entries", entries)

    @property
    def num_features(self) -> int:
        return len(self.entries)

    def ordered_indices(self) -> np.ndarray:
        return np.array([j for j, _ in self.entries], dtype=np.int64)

    def mean_scores(self) -> np.ndarray:
        return np.array([s for _, s in self.entries], dtype=np.float64)


@dataclass(frozen=True)
class RankingBudget:
    """Pre-training cost in scorer iterations: F * i * n."""

    total_iterations: int
    num_features: int
    epochs_per_run: int
    rounds: int


def mask_single_feature(X: np.ndarray, j: int) -> np.ndarray:
    """Copy of X with column j zeroed; the original is untouched."""
    X = np.asarray(X, dtype=np.float64)
    if not 0 <= j < X.shape[1]:
        raise IndexError(f"feature index {j} out of range for {X.shape[1]} features")
    masked = X.copy()
    masked[:, j] = 0.0
    return masked


def rank_features(
    graph: AttributedGraph,
    scorer: Scorer,
    epochs: int = 150,
    rounds: int = 3,
    seed: int = 0,
) -> FeatureRanking:
    """Score every feature once per round, average, sort ascending.

    Per-(round, feature) scorer seeds are derived independently, so the
    scoring order never affects results. Ties in the mean score break by
    ascending feature index.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    num_features = graph.num_features
    scores = np.zeros((rounds, num_features))
    for r in range(rounds):
        split_seed = derive_seed(seed, NS_RANK_SPLIT, r)
        for j in range(num_features):
            masked_graph = AttributedGraph(
                mask_single_feature(graph.features, j), graph.edges, graph.labels
            )
            train_seed = derive_seed(seed, NS_RANK_TRAIN, r, j)
            try:
                scores[r, j] = scorer(masked_graph, epochs, train_seed, split_seed)
            except Exception as exc:
                raise RankingError(
                    f"scorer failed at round {r}, feature {j}: {exc}"
                ) from exc
    means = scores.mean(axis=0)
    order = sorted(range(num_features), key=lambda j: (means[j], j))
    entries = tuple((j, float(means[j])) for j in order)
    return FeatureRanking(entries=entries, rounds=rounds, epochs_per_run=epochs)


def pretraining_budget(
    num_features: int, epochs_per_run: int, rounds: int
) -> RankingBudget:
    """Exact iteration count F * i * n of the ranking phase."""
    if num_features < 1 or epochs_per_run < 1 or rounds < 1:
        raise ValueError("budget factors must all be positive")
    return RankingBudget(
        total_iterations=num_features * epochs_per_run * rounds,
        num_features=num_features,
        epochs_per_run=epochs_per_run,
        rounds=rounds,
    )


def save_ranking(ranking: FeatureRanking, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RANKING_HEADER)
        for rank, (j, score) in enumerate(ranking.entries):
            writer.writerow([rank, j, fmt_float(score)])


def load_ranking(
    path: str | Path, rounds: int = 0, epochs_per_run: int = 0
) -> FeatureRanking:
    """Parse and validate a ranking CSV.

    Rejects duplicate or missing feature indices and non-monotone scores.
    """
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != RANKING_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(RANKING_HEADER)!r}, got {header}"
            )
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            try:
                rank, j, score = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed row {row}") from None
            if rank != len(entries):
                raise ValueError(
                    f"{path}:{lineno}: rank {rank} out of order (expected {len(entries)})"
                )
            entries.append((j, score))
    try:
        return FeatureRanking(
            entries=tuple(entries), rounds=rounds, epochs_per_run=epochs_per_run
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def variance_stub_scorer(
    graph: AttributedGraph, epochs: int, seed: int, split_seed: int
) -> float:
    """Deterministic test stub: 1 / (1 + total column variance).

    Masking a high-variance column removes more variance, so the score
    grows with the masked column's variance and the resulting ranking
    equals the ascending-variance order.
    """
    return float(1.0 / (1.0 + graph.features.var(axis=0).sum()))


@dataclass(frozen=True)
class GclScorer:
    """Default scorer: the contrastive trainer at a low setting plus linear eval.

    Both views use stochastic (all-features) augmentation, since no
    ranking exists yet while one is being computed. The learning rate is
    deliberately gentle: at low epoch budgets an aggressive contrastive
    phase degrades linear separability and with it the masking signal.
    """

    hidden_size: int = 32
    output_size: int = 8
    learning_rate: float = 0.01
    weight_decay: float = 0.0
    temperature: float = 0.5
    masking_probability: float = 0.3
    edge_drop_probability: float = 0.2
    n_splits: int = 4
    train_fraction: float = 0.3
    l2: float = 1e-2
    eval_iters: int = 200

    def __call__(
        self, graph: AttributedGraph, epochs: int, seed: int, split_seed: int
    ) -> float:
        if graph.labels is None:
            raise ValueError("the GCL scorer needs node labels for linear evaluation")
        view = ViewConfig(
            selection_mode="all_features",
            feature_masking_probability=self.masking_probability,
            edge_drop_probability=self.edge_drop_probability,
        )
        cfg = TrainConfig(
            epochs=epochs,
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            hidden_size=self.hidden_size,
            output_size=self.output_size,
            temperature=self.temperature,
            view1=view,
            view2=view,
            seed=seed,
        )
        result = train(graph, None, cfg)
        splits = generate_splits(
            graph.num_nodes, self.train_fraction, self.n_splits, split_seed
        )
        outcome = linear_evaluate(
            result.embedding, graph.labels, splits, self.l2, iters=self.eval_iters
        )
        return outcome.mean_f1 / 100.0
