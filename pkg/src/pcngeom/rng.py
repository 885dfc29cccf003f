"""Seeded random streams.

Every stochastic routine in the package draws from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=key)))``.
Streams are addressed by a master ``seed`` and an integer ``key`` tuple, so
chunk ``i`` of an estimator always sees the same numbers no matter how many
workers process the chunks or in which order they finish.
"""

from __future__ import annotations

import numpy as np

RNG_NAME = "numpy-PCG64-SeedSequence"
RNG_VERSION = 1


def make_rng(seed: int, *key: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError("seed must be a nonnegative integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    """Split ``total`` samples into fixed-size chunks (last one may be short)."""
    if total < 0:
        raise ValueError("total must be >= 0")
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes
