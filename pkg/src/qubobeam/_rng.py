"""Seed derivation for reproducible, order-independent random streams."""

import numpy as np

_MOD = 1 << 63


def _normalize(seed):
    # SeedSequence entropy must be non-negative
    return int(seed) % _MOD


def rng_stream(seed, *path):
    """Generator keyed by (seed, *path); independent of creation order."""
    return np.random.default_rng((_normalize(seed),) + tuple(int(p) for p in path))


def derive_seed(seed, *path):
    """Integer child seed for APIs that accept a plain integer seed."""
    ss = np.random.SeedSequence((_normalize(seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def derive_seeds(seed, count, *path):
    """`count` integer child seeds in one deterministic batch."""
    ss = np.random.SeedSequence((_normalize(seed),) + tuple(int(p) for p in path))
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]
