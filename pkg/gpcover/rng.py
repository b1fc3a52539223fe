import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Counter-based generator for the sub-stream (seed, *keys).

    Streams for distinct key paths are statistically independent, and a stream
    depends only on its own path, so replications can run in any order.
    """
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))
