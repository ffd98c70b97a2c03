"""Adaptive feature-masking augmentation toolkit for graph contrastive learning."""

from .augmentation import (
    CandidateFeatureSet,
    GraphView,
    IndicatorVector,
    ViewConfig,
    apply_view,
    candidate_features,
    drop_edges,
    mask_features,
    select_influential,
    select_random,
)
from .engine import EncoderParams, TrainConfig, TrainResult, contrastive_loss, encode, train
from .evaluation import EvalConfig, EvalResult, generate_splits, linear_evaluate, micro_f1
from .graph import AttributedGraph, load_graph, normalized_adjacency, stats, symmetrize
from .ranking import (
    FeatureRanking,
    GclScorer,
    RankingBudget,
    load_ranking,
    mask_single_feature,
    pretraining_budget,
    rank_features,
    save_ranking,
    variance_stub_scorer,
)
from .sweep import SweepGrid, SweepTable, ablation_ofd, pos_win_analysis, run_sweep

__version__ = "0.1.0"
