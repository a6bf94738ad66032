# trawlkit/core/random.py
#
# Splittable, counter-based random streams for reproducible Monte Carlo.
#
# Notes:
# - Replicate r always draws from the Philox substream keyed by
#   (master_seed, r); results do not depend on thread scheduling.
# - There is no module-level generator. Every sampler takes a stream.

from typing import List

import numpy as np


class RandomStream:
    """Thin wrapper around a Philox-backed ``numpy.random.Generator``."""

    def __init__(self, master_seed: int, *path: int):
        if master_seed < 0 or any(p < 0 for p in path):
            raise ValueError("seeds and substream indices must be non-negative")
        self.master_seed = int(master_seed)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(seq))

    @classmethod
    def for_replicate(cls, master_seed: int, replicate: int) -> "RandomStream":
        return cls(master_seed, replicate)

    def substream(self, index: int) -> "RandomStream":
        """Child stream (path extended by ``index``); independent of draws made so far."""
        return RandomStream(self.master_seed, *self.path, index)

    def spawn(self, count: int) -> List["RandomStream"]:
        return [self.substream(i) for i in range(count)]

    def __repr__(self) -> str:
        return f"RandomStream(master_seed={self.master_seed}, path={self.path})"
