"""Adaptive feature masking and uniform edge dropping.

Two-stage augmentation: a candidate-feature subset is selected once per
run (randomly, by influence ranking, or as all features), then every epoch
each candidate column is zeroed with a Bernoulli draw and each unordered
edge is dropped with a Bernoulli draw. Masking whole columns never changes
the node or edge counts; edge dropping only removes pairs, never adds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .graph import AttributedGraph
from .util import fraction_count

if TYPE_CHECKING:
    from .ranking import FeatureRanking

MODES = ("random", "influential", "all_features")
POSITIONS = ("L", "M")


@dataclass(frozen=True)
class IndicatorVector:
    """{0,1}^F selection mask. Exactly one mode is active per vector."""

    bits: np.ndarray
    mode: str

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be a flat 0/1 vector")
        if self.mode not in ("random", "influential"):
            raise ValueError(f"unknown indicator mode {self.mode!r}")
        object.__setattr__(self, "bits", bits)
        self.bits.setflags(write=False)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    @property
    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class CandidateFeatureSet:
    """Sorted feature indices eligible for masking."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "indices", idx)
        self.indices.setflags(write=False)

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class ViewConfig:
    """Per-view augmentation parameters.

    selection_mode       random | influential | all_features
    feature_masking_ratio       fraction of features placed into the candidate set
    feature_masking_probability per-epoch Bernoulli probability of zeroing a candidate column
    starting_position    "L" (most influential end) or "M" (least influential end),
                         required iff selection_mode == "influential"
    edge_drop_probability       per-edge Bernoulli drop probability
    rng_seed             stream seed for standalone (non-training) application
    """

    selection_mode: str = "all_features"
    feature_masking_ratio: float = 1.0
    feature_masking_probability: float = 0.0
    starting_position: str | None = None
    edge_drop_probability: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.selection_mode not in MODES:
            raise ValueError(
                f"selection_mode must be one of {MODES}, got {self.selection_mode!r}"
            )
        for name in (
            "feature_masking_ratio",
            "feature_masking_probability",
            "edge_drop_probability",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.selection_mode == "influential":
            if self.starting_position not in POSITIONS:
                raise ValueError(
                    "starting_position ('L' or 'M') is required for influential mode"
                )
        elif self.starting_position is not None:
            raise ValueError(
                f"starting_position only applies to influential mode, got "
                f"{self.starting_position!r} with mode {self.selection_mode!r}"
            )
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")


@dataclass(frozen=True)
class GraphView:
    """An augmented view: masked features, reduced edges, and bookkeeping."""

    features: np.ndarray
    edges: np.ndarray
    masked_columns: np.ndarray
    dropped_edges: int


def candidate_count(num_features: int, ratio: float) -> int:
    """|CF| under the round-half-up rule."""
    return fraction_count(num_features, ratio)


def select_random(
    num_features: int, ratio: float, rng: np.random.Generator
) -> IndicatorVector:
    """Uniform selection of round(ratio * F) distinct features."""
    k = candidate_count(num_features, ratio)
    bits = np.zeros(num_features, dtype=np.uint8)
    if k:
        chosen = rng.choice(num_features, size=k, replace=False)
        bits[chosen] = 1
    return IndicatorVector(bits, mode="random")


def select_influential(
    ranking: "FeatureRanking", ratio: float, pos: str
) -> IndicatorVector:
    """Selection from one end of the influence ranking.

    pos="L" takes the first k ranking entries (lowest masked-accuracy
    scores, i.e. the most influential features); pos="M" takes the last k
    (highest scores, least influential).
    """
    if pos not in POSITIONS:
        raise ValueError(f"pos must be 'L' or 'M', got {pos!r}")
    order = ranking.ordered_indices()
    num_features = order.shape[0]
    k = candidate_count(num_features, ratio)
    chosen = order[:k] if pos == "L" else order[num_features - k :]
    bits = np.zeros(num_features, dtype=np.uint8)
    bits[chosen] = 1
    return IndicatorVector(bits, mode="influential")


def candidate_features(
    graph: AttributedGraph,
    cfg: ViewConfig,
    ranking: "FeatureRanking | None" = None,
    rng: np.random.Generator | None = None,
) -> CandidateFeatureSet:
    """Select the candidate set once per run; held fixed across epochs."""
    if cfg.selection_mode == "all_features":
        return CandidateFeatureSet(graph.feature_indices)
    if cfg.selection_mode == "random":
        if rng is None:
            raise ValueError("random mode requires an rng stream")
        return CandidateFeatureSet(
            select_random(graph.num_features, cfg.feature_masking_ratio, rng).indices
        )
    if ranking is None:
        raise ValueError("influential mode requires a feature ranking")
    if ranking.num_features != graph.num_features:
        raise ValueError(
            f"ranking covers {ranking.num_features} features, graph has "
            f"{graph.num_features}"
        )
    return CandidateFeatureSet(
        select_influential(
            ranking, cfg.feature_masking_ratio, cfg.starting_position
        ).indices
    )


def mask_features(
    X: np.ndarray,
    cf: CandidateFeatureSet,
    prob: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Zero each candidate column independently with probability prob.

    Columns outside the candidate set are copied untouched. Resampled
    fresh on every call; callers pass a per-epoch substream.
    """
    masked = np.array(X, dtype=np.float64, copy=True)
    cols = cf.indices
    hits = cols[rng.random(cols.shape[0]) < prob]
    masked[:, hits] = 0.0
    return masked, hits


def drop_edges(
    edges: np.ndarray, p_e: float, rng: np.random.Generator
) -> tuple[np.ndarray, int]:
    """Drop each unordered pair independently with probability p_e.

    No connectivity repair: views may become disconnected.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    keep = rng.random(edges.shape[0]) >= p_e
    kept = edges[keep]
    return kept, int(edges.shape[0] - kept.shape[0])


def apply_view(
    graph: AttributedGraph,
    cf: CandidateFeatureSet,
    cfg: ViewConfig,
    rng: np.random.Generator,
) -> GraphView:
    """Produce one augmented view: mask features, then drop edges.

    Node and feature counts are unchanged; with edge_drop_probability 0
    the edge set is exactly the input's.
    """
    masked, hit_cols = mask_features(
        graph.features, cf, cfg.feature_masking_probability, rng
    )
    kept, dropped = drop_edges(graph.edges, cfg.edge_drop_probability, rng)
    return GraphView(
        features=masked, edges=kept, masked_columns=hit_cols, dropped_edges=dropped
    )
