"""
Seeded random substreams.

Every random consumer gets its own counter-based Philox generator keyed by a
tuple, so a run is reproducible bit-for-bit and independent runs (seeds, grid
points) can execute in any order or in parallel.

Key layout:
    (0,)          plant noise of one learning run
    (1, j)        perturbation directions of epoch j
    (2, ...)      experiment-specific streams via child()
"""

from typing import Tuple

import numpy as np

NOISE_KEY = 0
DIRECTIONS_KEY = 1
CHILD_KEY = 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for `seed` and spawn key `key`."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


class SeedStreams:
    """Named substreams derived from one integer seed."""

    def __init__(self, seed: int, prefix: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.prefix = tuple(prefix)

    def noise(self) -> np.random.Generator:
        return substream(self.seed, *self.prefix, NOISE_KEY)

    def directions(self, epoch: int) -> np.random.Generator:
        return substream(self.seed, *self.prefix, DIRECTIONS_KEY, epoch)

    def child(self, *key: int) -> "SeedStreams":
        """Independent family of streams, e.g. one per (horizon, seed) grid point."""
        return SeedStreams(self.seed, self.prefix + (CHILD_KEY,) + tuple(int(k) for k in key))

    def generator(self, *key: int) -> np.random.Generator:
        return substream(self.seed, *self.prefix, CHILD_KEY, *key)

    def __repr__(self) -> str:
        return f"SeedStreams(seed={self.seed}, prefix={self.prefix})"


def as_streams(rng) -> SeedStreams:
    """Accept an int seed or an existing SeedStreams."""
    if isinstance(rng, SeedStreams):
        return rng
    if isinstance(rng, (int, np.integer)):
        return SeedStreams(int(rng))
    raise TypeError(f"expected int seed or SeedStreams, got {type(rng).__name__}")
