"""
Batch runner shared by the experiments.

Replicates are split into batches of consecutive stream ids.  Every
replicate draws from its own stream, so batches are independent; they run
on a thread pool and are re-assembled in batch order before any reduction,
which keeps results identical for every thread count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping

import numpy as np

from fbmlab.errors import ConfigError

__all__ = ["run_batches", "batch_ranges", "resolve_threads", "THREADS_ENV"]

logger = logging.getLogger(__name__)

THREADS_ENV = "FBMLAB_THREADS"

BatchFn = Callable[[np.ndarray], Mapping[str, np.ndarray]]


def resolve_threads(threads: int | None = None) -> int:
    """Explicit budget, else ``FBMLAB_THREADS``, else the CPU count."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigError(f"thread budget must be at least 1, got {threads}")
    return int(threads)


def batch_ranges(n_replicates: int, batch_size: int) -> list[np.ndarray]:
    if batch_size < 1:
        raise ConfigError(f"batch size must be at least 1, got {batch_size}")
    return [
        np.arange(start, min(start + batch_size, n_replicates))
        for start in range(0, n_replicates, batch_size)
    ]


def run_batches(
    fn: BatchFn,
    n_replicates: int,
    *,
    batch_size: int = 500,
    threads: int | None = None,
) -> dict[str, np.ndarray]:
    """Apply ``fn`` to each batch of stream ids and concatenate its outputs in order."""
    batches = batch_ranges(n_replicates, batch_size)
    workers = min(resolve_threads(threads), max(len(batches), 1))
    logger.debug("%d replicates in %d batches on %d threads", n_replicates, len(batches), workers)
    if workers == 1:
        results = [fn(ids) for ids in batches]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, batches))
    if not results:
        return {}
    return {key: np.concatenate([r[key] for r in results], axis=0) for key in results[0]}
