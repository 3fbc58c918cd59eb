"""Compensated reductions shared by the integrator, market and experiments."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["fsum", "fsum_last"]


def fsum(values) -> float:
    """Correctly rounded sum of a flat sequence."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def fsum_last(values: np.ndarray) -> np.ndarray | float:
    """``math.fsum`` along the last axis; a float for 1-D input."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    if arr.ndim == 1:
        return math.fsum(arr.tolist())
    flat = arr.reshape(-1, arr.shape[-1])
    out = np.fromiter((math.fsum(row) for row in flat.tolist()), dtype=float, count=flat.shape[0])
    return out.reshape(arr.shape[:-1])
