"""Linear evaluation of frozen embeddings.

L2-regularized multinomial logistic regression trained by full-batch
gradient descent from zero init (fixed iteration budget, deterministic),
scored with micro-averaged F1 over repeated seeded random splits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import NS_EVAL, substream
from .util import fraction_count


@dataclass(frozen=True)
class EvalConfig:
    n_splits: int = 20
    train_fraction: float = 0.1
    l2: float = 1e-2
    iters: int = 500
    learning_rate: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.n_splits < 1:
            raise ValueError("n_splits must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.iters < 1 or self.learning_rate <= 0:
            raise ValueError("iters must be >= 1 and learning_rate positive")


@dataclass(frozen=True)
class SplitSet:
    splits: tuple
    train_fraction: float
    seed: int


@dataclass(frozen=True)
class EvalResult:
    """Scores in percent, Table-style mean +- std."""

    mean_f1: float
    std_f1: float
    per_split_scores: tuple

    def summary(self) -> str:
        return f"{self.mean_f1:.2f}±{self.std_f1:.2f}"


def generate_splits(
    num_labeled: int, train_fraction: float, n_splits: int, seed: int
) -> SplitSet:
    """Independent seeded train/test splits over all labeled nodes."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if n_splits < 1:
        raise ValueError("n_splits must be >= 1")
    k = fraction_count(num_labeled, train_fraction)
    if k == 0 or k == num_labeled:
        raise ValueError(
            f"degenerate split: {k} train nodes out of {num_labeled}"
        )
    rng = substream(seed, NS_EVAL)
    splits = []
    for _ in range(n_splits):
        perm = rng.permutation(num_labeled)
        splits.append((np.sort(perm[:k]), np.sort(perm[k:])))
    return SplitSet(splits=tuple(splits), train_fraction=train_fraction, seed=seed)


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(X @ self.weights + self.bias, axis=1)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def logreg_objective(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> float:
    """Mean cross-entropy plus l2 * |W|^2 (bias unregularized)."""
    p = _softmax(X @ W + b)
    ce = -np.mean(np.log(p[np.arange(X.shape[0]), y]))
    return float(ce + l2 * np.einsum("ij,ij->", W, W))


def logreg_gradient(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, np.ndarray]:
    n = X.shape[0]
    p = _softmax(X @ W + b)
    p[np.arange(n), y] -= 1.0
    gW = X.T @ p / n + 2.0 * l2 * W
    gb = p.mean(axis=0)
    return gW, gb


def fit_logreg(
    H_train: np.ndarray,
    y_train: np.ndarray,
    l2: float,
    iters: int = 500,
    learning_rate: float = 0.5,
) -> LogisticModel:
    """Multinomial logistic regression by full-batch gradient descent.

    Deterministic from zero init; runs a fixed iteration budget rather
    than a convergence test.
    """
    X = np.asarray(H_train, dtype=np.float64)
    y = np.asarray(y_train, dtype=np.int64)
    classes = int(y.max()) + 1
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    W = np.zeros((X.shape[1], classes))
    b = np.zeros(classes)
    for _ in range(iters):
        gW, gb = logreg_gradient(W, b, X, y, l2)
        W -= learning_rate * gW
        b -= learning_rate * gb
    return LogisticModel(weights=W, bias=b)


def micro_f1(predictions: np.ndarray, truth: np.ndarray) -> float:
    """Micro-averaged F1 from per-class TP/FP/FN aggregates.

    For single-label multiclass input this equals plain accuracy; the
    test suite asserts that identity against an independent computation.
    """
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape or predictions.ndim != 1:
        raise ValueError("predictions and truth must be equal-length vectors")
    if predictions.size == 0:
        raise ValueError("micro_f1 of empty input")
    classes = np.union1d(predictions, truth)
    tp = fp = fn = 0
    for c in classes:
        tp += int(((predictions == c) & (truth == c)).sum())
        fp += int(((predictions == c) & (truth != c)).sum())
        fn += int(((predictions != c) & (truth == c)).sum())
    return tp / (tp + 0.5 * (fp + fn))


def linear_evaluate(
    H: np.ndarray,
    labels: np.ndarray,
    splits: SplitSet,
    l2: float,
    iters: int = 500,
    learning_rate: float = 0.5,
) -> EvalResult:
    """Fit one classifier per split on frozen embeddings; report percent scores.

    Embedding rows are L2-normalized before fitting (keeps the fixed-step
    optimizer well-scaled across encoders); inputs are never mutated.
    """
    H = np.asarray(H, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    norms = np.linalg.norm(H, axis=1, keepdims=True)
    Hn = H / np.maximum(norms, 1e-12)
    scores = []
    for train_idx, test_idx in splits.splits:
        model = fit_logreg(
            Hn[train_idx], labels[train_idx], l2, iters=iters,
            learning_rate=learning_rate,
        )
        pred = model.predict(Hn[test_idx])
        scores.append(100.0 * micro_f1(pred, labels[test_idx]))
    arr = np.array(scores)
    return EvalResult(
        mean_f1=float(arr.mean()),
        std_f1=float(arr.std()),
        per_split_scores=tuple(float(s) for s in scores),
    )
