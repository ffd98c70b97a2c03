"""Seeded substream derivation.

Every stochastic operation in the toolkit draws from a generator obtained
here. Substreams are keyed by integer tuples, so the same (seed, key)
always yields the same stream and disjoint keys yield independent streams.

Key namespaces used across the package (first tuple element):
  0 = candidate-feature selection, 1 = per-epoch view augmentation,
  2 = weight init, 3 = ranking scorer training, 4 = ranking eval split,
  5 = evaluation splits, 6 = sweep cells, 7 = synthetic data.
"""

import numpy as np

NS_SELECT = 0
NS_EPOCH = 1
NS_INIT = 2
NS_RANK_TRAIN = 3
NS_RANK_SPLIT = 4
NS_EVAL = 5
NS_SWEEP = 6
NS_DATA = 7


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for (seed, key)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key) into a fresh 64-bit seed for nested runs."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    state = np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(2)
    return int(state[0]) << 32 | int(state[1])
