"""Derived random streams.

Every stochastic routine draws from a counter-based Philox generator keyed by
(master seed, stream tag, item index). Streams derived this way are
statistically independent and do not depend on scheduling, so results are
bit-for-bit reproducible no matter how work is split across workers.
"""

from __future__ import annotations

import numpy as np

# Stream tags. Keeping them distinct means e.g. resampling never reuses the
# variates of the walk that produced its input.
STREAM_WALK = 0
STREAM_RESAMPLE = 1
STREAM_BOUNDARY = 2
STREAM_RETURN = 3


def derived_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(ss))


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Generator for one path of a batch; distinct paths get distinct streams."""
    return derived_rng(seed, STREAM_WALK, path_index)
