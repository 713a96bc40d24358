"""Deterministic random generators derived from a root seed and a task key."""

import numpy as np


def derive_seed_sequence(root_seed: int, *key: int) -> np.random.SeedSequence:
    """Return the seed sequence owned by the task ``key`` under ``root_seed``."""
    return np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(k) for k in key))


def derive_rng(root_seed: int, *key: int) -> np.random.Generator:
    """Return a generator that depends only on the root seed and the task key."""
    return np.random.default_rng(derive_seed_sequence(root_seed, *key))
