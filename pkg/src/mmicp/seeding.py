"""Seed derivation.

Every random stream is ``SeedSequence(root_seed, spawn_key=path)`` where
``path`` is a tuple of small integers naming the stream, e.g.
``(run_seed, STREAM_ROUND, round, STREAM_JITTER)``. Streams with
different paths are statistically independent, and the same path
always reproduces the same draws.
"""

from __future__ import annotations

import numpy as np

# stream tags (second path element)
STREAM_SPLIT = 0
STREAM_ROUND = 1
STREAM_JITTER = 2
STREAM_SCORE = 3
STREAM_RANDOM_EPU = 4
STREAM_DATA = 5


def seed_for(root: int, *path: int) -> int:
    """A 63-bit integer seed for the stream at ``path``."""
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0]) >> 1


def rng_for(root: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(root), spawn_key=tuple(int(p) for p in path)))
