"""Deterministic random streams.

Every random draw comes from numpy's PCG64 generator seeded through a
``SeedSequence`` whose spawn key is (stream, block).  A block's numbers
depend only on the job seed and the block index, so splitting work across
any number of workers cannot change the output.
"""
from __future__ import annotations

import numpy as np


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed & (2**64 - 1), spawn_key=(stream, block))
    return np.random.Generator(np.random.PCG64(ss))
