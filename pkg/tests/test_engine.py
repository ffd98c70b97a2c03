import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from febaa.augmentation import ViewConfig
from febaa.engine import (
    EncoderParams,
    TrainConfig,
    TrainingDivergedError,
    contrastive_loss,
    encode,
    gradients,
    init_params,
    train,
    training_objective,
)
from febaa.graph import AttributedGraph, normalized_adjacency
from febaa.rng import NS_INIT, substream
from febaa.synthetic import sbm_graph


def random_instance(seed, n=12, f=5, hidden=4, out=3):
    rng = np.random.default_rng(seed)
    g = AttributedGraph(
        rng.standard_normal((n, f)), rng.integers(0, n, size=(2 * n, 2))
    )
    adj = normalized_adjacency(g)
    params = EncoderParams(
        0.5 * rng.standard_normal((f, hidden)), 0.5 * rng.standard_normal((hidden, out))
    )
    X2 = g.features * rng.uniform(0.5, 1.5, size=g.features.shape)
    return params, adj, g.features, X2


def finite_difference_grads(params, adj1, X1, adj2, X2, temp, wd, h=1e-5):
    fds = []
    for W in (params.W1, params.W2):
        fd = np.zeros_like(W)
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                orig = W[i, j]
                W[i, j] = orig + h
                up = training_objective(params, adj1, X1, adj2, X2, temp, wd)
                W[i, j] = orig - h
                down = training_objective(params, adj1, X1, adj2, X2, temp, wd)
                W[i, j] = orig
                fd[i, j] = (up - down) / (2 * h)
        fds.append(fd)
    return fds


def max_rel_err(a, b):
    return (np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)).max()


class TestEncode:
    def test_zero_features_give_zero_embedding(self):
        params = EncoderParams(np.ones((3, 2)), np.ones((2, 2)))
        g = AttributedGraph(np.zeros((4, 3)), [(0, 1), (2, 3)])
        H = encode(params, normalized_adjacency(g), g.features)
        assert not H.any()

    def test_single_node_identity_weights(self):
        # isolated node: A_hat = [1], so H = relu(x @ W1) @ W2
        x = np.array([[1.0, -2.0, 3.0]])
        W1 = np.eye(3)
        W2 = np.eye(3)[:, :2]
        params = EncoderParams(W1, W2)
        g = AttributedGraph(x, np.zeros((0, 2), dtype=int))
        H = encode(params, normalized_adjacency(g), x)
        assert np.allclose(H, np.maximum(x, 0.0)[:, :2])

    def test_matches_dense_reimplementation(self):
        params, adj, X, _ = random_instance(5)
        dense = adj.toarray()
        expected = dense @ np.maximum((dense @ X) @ params.W1, 0.0) @ params.W2
        assert np.allclose(encode(params, adj, X), expected, atol=1e-10)

    def test_dimension_mismatch(self):
        params = EncoderParams(np.ones((3, 2)), np.ones((2, 2)))
        g = AttributedGraph(np.zeros((2, 4)), [(0, 1)])
        with pytest.raises(ValueError, match="dimension"):
            encode(params, normalized_adjacency(g), g.features)


class TestContrastiveLoss:
    def test_closed_form_two_orthogonal_nodes(self):
        H = np.array([[1.0, 0.0], [0.0, 1.0]])
        # per node and direction: -log(e / (e + 2 e^0)); identical for all four terms
        expected = -math.log(math.e / (math.e + 2.0))
        assert contrastive_loss(H, H.copy(), 1.0) == pytest.approx(expected, abs=1e-12)

    def test_scale_invariance_whole_views(self):
        rng = np.random.default_rng(0)
        H1, H2 = rng.standard_normal((6, 4)), rng.standard_normal((6, 4))
        base = contrastive_loss(H1, H2, 0.5)
        assert contrastive_loss(5.0 * H1, 5.0 * H2, 0.5) == pytest.approx(base, abs=1e-10)

    def test_scale_invariance_single_row(self):
        rng = np.random.default_rng(1)
        H1, H2 = rng.standard_normal((6, 4)), rng.standard_normal((6, 4))
        base = contrastive_loss(H1, H2, 0.5)
        H1b = H1.copy()
        H1b[2] *= 7.5
        assert contrastive_loss(H1b, H2, 0.5) == pytest.approx(base, abs=1e-10)

    def test_matches_brute_force_pairwise_oracle(self):
        rng = np.random.default_rng(2)
        n, k, temp = 6, 4, 0.7
        H1, H2 = rng.standard_normal((n, k)), rng.standard_normal((n, k))

        def cos(a, b):
            return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

        total = 0.0
        for U, V in ((H1, H2), (H2, H1)):
            for i in range(n):
                num = math.exp(cos(U[i], V[i]) / temp)
                den = sum(math.exp(cos(U[i], V[k_]) / temp) for k_ in range(n))
                den += sum(
                    math.exp(cos(U[i], U[k_]) / temp) for k_ in range(n) if k_ != i
                )
                total += -math.log(num / den)
        expected = total / (2 * n)
        assert contrastive_loss(H1, H2, temp) == pytest.approx(expected, abs=1e-10)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_symmetric_in_view_order(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 10))
        H1, H2 = rng.standard_normal((n, 3)), rng.standard_normal((n, 3))
        a = contrastive_loss(H1, H2, 0.5)
        b = contrastive_loss(H2, H1, 0.5)
        assert a == pytest.approx(b, abs=1e-12)
        assert a >= 0.0

    def test_rejects_single_node(self):
        with pytest.raises(ValueError, match="2 nodes"):
            contrastive_loss(np.ones((1, 3)), np.ones((1, 3)), 0.5)


class TestGradients:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, seed):
        params, adj, X1, X2 = random_instance(seed)
        temp, wd = 0.5, 1e-3
        _, gW1, gW2 = gradients(params, adj, X1, adj, X2, temp, wd)
        fd1, fd2 = finite_difference_grads(params, adj, X1, adj, X2, temp, wd)
        assert max_rel_err(gW1, fd1) < 1e-4
        assert max_rel_err(gW2, fd2) < 1e-4

    def test_decay_only_gradient_is_exact(self):
        # W2 = 0 makes both embeddings zero, so the contrastive part of the
        # gradient vanishes exactly and only the decay term remains
        rng = np.random.default_rng(3)
        params = EncoderParams(rng.standard_normal((4, 3)), np.zeros((3, 2)))
        g = AttributedGraph(rng.standard_normal((5, 4)), [(0, 1), (2, 3), (3, 4)])
        adj = normalized_adjacency(g)
        wd = 0.3
        _, gW1, gW2 = gradients(params, adj, g.features, adj, g.features, 0.5, wd)
        assert np.array_equal(gW1, wd * params.W1)
        assert np.array_equal(gW2, wd * params.W2)

    def test_identical_scaled_views_stay_finite(self):
        params, adj, X, _ = random_instance(7)
        _, gW1, gW2 = gradients(params, adj, X, adj, 3.0 * X, 100.0, 0.0)
        assert np.isfinite(gW1).all() and np.isfinite(gW2).all()


class TestTrain:
    @staticmethod
    def config(epochs, seed=0, **kw):
        view = ViewConfig(
            selection_mode="all_features",
            feature_masking_probability=0.3,
            edge_drop_probability=0.3,
        )
        defaults = dict(
            epochs=epochs,
            learning_rate=0.05,
            weight_decay=1e-5,
            hidden_size=16,
            output_size=8,
            temperature=0.5,
            view1=view,
            view2=view,
            seed=seed,
        )
        defaults.update(kw)
        return TrainConfig(**defaults)

    def test_zero_epochs_returns_init_embedding(self, small_sbm):
        cfg = self.config(epochs=0)
        result = train(small_sbm, None, cfg)
        init = init_params(
            small_sbm.num_features, 16, 8, substream(cfg.seed, NS_INIT)
        )
        expected = encode(init, normalized_adjacency(small_sbm), small_sbm.features)
        assert np.array_equal(result.embedding, expected)
        assert result.loss_trace.size == 0

    def test_loss_decreases_on_sbm(self, small_sbm):
        result = train(small_sbm, None, self.config(epochs=60))
        assert result.loss_trace[-1] < result.loss_trace[0]
        assert np.isfinite(result.loss_trace).all()

    def test_same_seed_identical_to_last_bit(self, small_sbm):
        a = train(small_sbm, None, self.config(epochs=15, seed=9))
        b = train(small_sbm, None, self.config(epochs=15, seed=9))
        assert np.array_equal(a.loss_trace, b.loss_trace)
        assert np.array_equal(a.embedding, b.embedding)

    def test_influential_mode_without_ranking_rejected(self, small_sbm):
        view = ViewConfig(
            selection_mode="influential",
            feature_masking_ratio=0.5,
            feature_masking_probability=0.3,
            starting_position="L",
        )
        cfg = self.config(epochs=2, view2=view)
        with pytest.raises(ValueError, match="ranking"):
            train(small_sbm, None, cfg)

    def test_divergence_reports_epoch(self, small_sbm):
        # a huge learning rate overflows the weights within a few steps
        cfg = self.config(epochs=200, learning_rate=1e12)
        with np.errstate(all="ignore"):
            with pytest.raises(TrainingDivergedError) as info:
                train(small_sbm, None, cfg)
        assert info.value.epoch < 200
        assert info.value.trace.size == info.value.epoch + 1


class TestInit:
    def test_glorot_bounds_and_determinism(self):
        a = init_params(10, 6, 4, substream(3, NS_INIT))
        b = init_params(10, 6, 4, substream(3, NS_INIT))
        assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)
        assert np.abs(a.W1).max() <= math.sqrt(6.0 / 16)
        assert np.abs(a.W2).max() <= math.sqrt(6.0 / 10)
