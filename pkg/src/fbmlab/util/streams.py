"""
Reproducible random streams.

Each replicate draws from its own counter-based Philox generator keyed by
``(seed, stream_id)`` through ``SeedSequence.spawn_key``, so a replicate's
numbers do not depend on how replicates are batched or scheduled.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

__all__ = ["stream_generator", "standard_normals"]


def stream_generator(seed: int, stream_id: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(seq))


def standard_normals(seed: int, stream_ids: Iterable[int], size: int) -> np.ndarray:
    """One row of ``size`` standard normals per stream id."""
    ids = [int(s) for s in stream_ids]
    out = np.empty((len(ids), size))
    for row, sid in enumerate(ids):
        out[row] = stream_generator(seed, sid).standard_normal(size)
    return out
