from __future__ import annotations

import numpy as np


# Stream tags mixed into derived seeds.
SAMPLE_STREAM = 0
SPLIT_STREAM = 1
CALIBRATION_STREAM = 2
REPLICATE_STREAM = 3


def make_generator(seed: int) -> np.random.Generator:
    """Philox counter-based generator for a non-negative integer seed."""
    if int(seed) < 0:
        raise ValueError(f"seeds must be non-negative; got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(seed: int, *keys: int) -> int:
    """
    Child seed for (seed, key_1, key_2, ...).

    Depends only on the integers passed, so replicate i sees the same stream
    whatever the worker count.
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    if min(entropy) < 0:
        raise ValueError(f"seed keys must be non-negative; got {entropy}")
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])
