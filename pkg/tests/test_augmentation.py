import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from febaa.augmentation import (
    CandidateFeatureSet,
    GraphView,
    ViewConfig,
    apply_view,
    candidate_count,
    candidate_features,
    drop_edges,
    mask_features,
    select_influential,
    select_random,
)
from febaa.graph import AttributedGraph
from febaa.ranking import FeatureRanking
from febaa.rng import substream


def make_ranking(scores):
    order = sorted(range(len(scores)), key=lambda j: (scores[j], j))
    return FeatureRanking(
        entries=tuple((j, float(scores[j])) for j in order), rounds=1, epochs_per_run=1
    )


def exact_round_half_up(ratio: float, total: int) -> int:
    # independent integer-arithmetic oracle on the float's exact rational value
    frac = Fraction(ratio)
    return (2 * frac.numerator * total + frac.denominator) // (2 * frac.denominator)


class TestSelectRandom:
    def test_sixty_percent_of_ten(self):
        vec = select_random(10, 0.6, substream(0))
        assert vec.count == 6
        assert vec.mode == "random"

    def test_zero_ratio(self):
        assert select_random(10, 0.0, substream(0)).count == 0

    def test_full_ratio(self):
        vec = select_random(5, 1.0, substream(0))
        assert vec.count == 5
        assert np.array_equal(vec.indices, np.arange(5))

    def test_uniform_without_replacement(self):
        counts = np.zeros(8)
        rng = substream(42)
        trials = 4000
        for _ in range(trials):
            counts[select_random(8, 0.25, rng).indices] += 1
        # each feature selected with prob 2/8; 4 sigma band
        p = 0.25
        sigma = math.sqrt(p * (1 - p) / trials)
        assert np.abs(counts / trials - p).max() < 4 * sigma


class TestSelectInfluential:
    def test_l_takes_lowest_scores(self):
        ranking = make_ranking([0.9, 0.1, 0.5, 0.3])  # ascending order: 1,3,2,0
        vec = select_influential(ranking, 0.5, "L")
        assert set(vec.indices) == {1, 3}
        assert vec.mode == "influential"

    def test_m_takes_suffix(self):
        # ranking order [3,1,0,2] by ascending scores; suffix of length 2 = {0,2}
        ranking = FeatureRanking(
            entries=((3, 0.1), (1, 0.2), (0, 0.3), (2, 0.4)), rounds=1, epochs_per_run=1
        )
        assert set(select_influential(ranking, 0.5, "M").indices) == {0, 2}

    def test_full_ratio_is_whole_set_for_both_positions(self):
        ranking = make_ranking([0.4, 0.2, 0.9])
        for pos in ("L", "M"):
            assert set(select_influential(ranking, 1.0, pos).indices) == {0, 1, 2}

    def test_bad_pos_rejected(self):
        with pytest.raises(ValueError, match="pos"):
            select_influential(make_ranking([0.1, 0.2]), 0.5, "X")


class TestCandidateFeatures:
    def test_random_mode_cardinality(self, small_sbm):
        cfg = ViewConfig(selection_mode="random", feature_masking_ratio=0.6)
        cf = candidate_features(small_sbm, cfg, rng=substream(1))
        assert len(cf) == candidate_count(small_sbm.num_features, 0.6)

    def test_all_features_mode(self, small_sbm):
        cf = candidate_features(small_sbm, ViewConfig(selection_mode="all_features"))
        assert np.array_equal(cf.indices, np.arange(small_sbm.num_features))

    def test_influential_without_ranking_errors(self, small_sbm):
        cfg = ViewConfig(
            selection_mode="influential",
            feature_masking_ratio=0.5,
            starting_position="L",
        )
        with pytest.raises(ValueError, match="ranking"):
            candidate_features(small_sbm, cfg, ranking=None)

    def test_table_scale_rounding(self):
        # 37.5% of 1433 features rounds to 537
        assert candidate_count(1433, 0.375) == 537


class TestMaskFeatures:
    def test_zero_probability_is_identity(self, small_sbm):
        cf = CandidateFeatureSet(np.arange(small_sbm.num_features))
        masked, cols = mask_features(small_sbm.features, cf, 0.0, substream(0))
        assert np.array_equal(masked, small_sbm.features)
        assert cols.size == 0

    def test_certain_masking_zeroes_all_candidates(self, small_sbm):
        cf = CandidateFeatureSet([0, 2, 4])
        masked, cols = mask_features(small_sbm.features, cf, 1.0, substream(0))
        assert set(cols) == {0, 2, 4}
        assert not masked[:, [0, 2, 4]].any()
        assert np.array_equal(masked[:, [1, 3, 5]], small_sbm.features[:, [1, 3, 5]])

    def test_input_never_mutated(self, small_sbm):
        before = small_sbm.features.copy()
        mask_features(small_sbm.features, CandidateFeatureSet([0]), 1.0, substream(0))
        assert np.array_equal(small_sbm.features, before)

    def test_binomial_masking_rate(self):
        X = np.ones((3, 100))
        cf = CandidateFeatureSet(np.arange(100))
        rng = substream(7)
        trials = 10_000
        sizes = [mask_features(X, cf, 0.3, rng)[1].size for _ in range(trials)]
        mean = np.mean(sizes)
        sigma = math.sqrt(100 * 0.3 * 0.7)
        assert abs(mean - 30.0) < 3 * sigma / math.sqrt(trials)


class TestDropEdges:
    def test_zero_probability_keeps_everything(self, small_sbm):
        kept, dropped = drop_edges(small_sbm.edges, 0.0, substream(0))
        assert np.array_equal(kept, small_sbm.edges)
        assert dropped == 0

    def test_certain_drop_empties_edge_set(self, small_sbm):
        kept, dropped = drop_edges(small_sbm.edges, 1.0, substream(0))
        assert kept.shape == (0, 2)
        assert dropped == small_sbm.num_edges

    def test_binomial_retention_rate(self):
        edges = np.stack([np.arange(5278), np.arange(5278) + 1], axis=1)
        rng = substream(9)
        trials = 10_000
        retained = np.array(
            [drop_edges(edges, 0.2, rng)[0].shape[0] for _ in range(trials)]
        )
        expected = 5278 * 0.8
        sigma = math.sqrt(5278 * 0.8 * 0.2)
        assert abs(retained.mean() - expected) < 3 * sigma / math.sqrt(trials)


class TestApplyView:
    def test_full_identity_config(self, small_sbm):
        cf = CandidateFeatureSet(np.arange(small_sbm.num_features))
        cfg = ViewConfig(feature_masking_probability=0.0, edge_drop_probability=0.0)
        view = apply_view(small_sbm, cf, cfg, substream(3))
        assert np.array_equal(view.features, small_sbm.features)
        assert np.array_equal(view.edges, small_sbm.edges)
        assert view.dropped_edges == 0

    def test_feature_masking_preserves_structure(self, small_sbm):
        cf = CandidateFeatureSet(np.arange(small_sbm.num_features))
        cfg = ViewConfig(feature_masking_probability=0.9, edge_drop_probability=0.0)
        view = apply_view(small_sbm, cf, cfg, substream(3))
        assert np.array_equal(view.edges, small_sbm.edges)
        assert view.masked_columns.size > 0

    def test_same_seed_bit_identical(self, small_sbm):
        cf = CandidateFeatureSet(np.arange(0, small_sbm.num_features, 2))
        cfg = ViewConfig(feature_masking_probability=0.5, edge_drop_probability=0.5)
        a = apply_view(small_sbm, cf, cfg, substream(123, 1, 0))
        b = apply_view(small_sbm, cf, cfg, substream(123, 1, 0))
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.edges, b.edges)
        assert np.array_equal(a.masked_columns, b.masked_columns)


class TestViewConfigValidation:
    def test_ratio_out_of_range(self):
        with pytest.raises(ValueError, match="feature_masking_ratio"):
            ViewConfig(feature_masking_ratio=1.3)

    def test_influential_requires_position(self):
        with pytest.raises(ValueError, match="starting_position"):
            ViewConfig(selection_mode="influential", feature_masking_ratio=0.5)

    def test_position_rejected_outside_influential(self):
        with pytest.raises(ValueError, match="starting_position"):
            ViewConfig(selection_mode="random", starting_position="L")


class TestProperties:
    @settings(deadline=None, max_examples=60)
    @given(
        total=st.integers(1, 10_000),
        percent=st.integers(0, 100),
    )
    def test_cardinality_on_percent_grid(self, total, percent):
        ratio = percent / 100.0
        assert candidate_count(total, ratio) == exact_round_half_up(ratio, total)

    @settings(deadline=None, max_examples=40)
    @given(seed=st.integers(0, 2**32 - 1), p_e=st.floats(0, 1))
    def test_view_edges_always_contained(self, seed, p_e):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 15))
        g = AttributedGraph(
            rng.standard_normal((n, 4)),
            rng.integers(0, n, size=(rng.integers(1, 25), 2)),
        )
        cfg = ViewConfig(feature_masking_probability=0.5, edge_drop_probability=p_e)
        cf = CandidateFeatureSet(np.arange(4))
        view = apply_view(g, cf, cfg, substream(seed))
        original = {tuple(e) for e in g.edges}
        assert {tuple(e) for e in view.edges} <= original
        assert view.features.shape == g.features.shape

    @settings(deadline=None, max_examples=40)
    @given(
        seed=st.integers(0, 2**32 - 1),
        ratio=st.floats(0, 1),
        mode=st.sampled_from(["random", "influential"]),
    )
    def test_indicator_exclusivity_and_cardinality(self, seed, ratio, mode):
        F = 12
        if mode == "random":
            vec = select_random(F, ratio, substream(seed))
        else:
            rng = np.random.default_rng(seed)
            vec = select_influential(
                make_ranking(rng.random(F).tolist()), ratio, "L" if seed % 2 else "M"
            )
        assert vec.mode == mode
        assert vec.count == candidate_count(F, ratio)

    def test_masked_columns_only_inside_candidate_set(self):
        X = np.ones((5, 30))
        cf = CandidateFeatureSet(np.arange(10))
        rng = substream(5)
        for _ in range(200):
            masked, cols = mask_features(X, cf, 0.7, rng)
            assert set(cols) <= set(range(10))
            assert np.array_equal(masked[:, 10:], X[:, 10:])
