"""
Standard Brownian driver on [-L, T].

The driver is the single source of randomness: every fractional path, the
W/R decomposition and the Brownian reference integral are functions of the
same increments.  Increments are stored on

* fine cells of width ``grid.step`` covering [-L_near, T], chronological, and
* far-history cells [-d_{k+1}, -d_k] with geometrically growing d_k up to L,
  nearest first, each an exact Gaussian draw with variance equal to its width.

Leading axes (if any) index replicates; the last axis is always time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from fbmlab.errors import ConfigError
from fbmlab.fbm.grid import HurstParam, TimeGrid
from fbmlab.fbm.kernels import history_length
from fbmlab.util.streams import standard_normals

__all__ = ["DriverPath", "sample_driver", "far_cell_edges", "common_history_length"]

logger = logging.getLogger(__name__)

DEFAULT_FAR_RATIO = 1.1


@dataclass(frozen=True)
class DriverPath:
    grid: TimeGrid
    history_length: float
    increments: np.ndarray  # (..., n_near + N)
    far_edges: np.ndarray  # (F + 1,) distances from the origin, empty if F == 0
    far_increments: np.ndarray  # (..., F)
    seed: int
    stream_id: int | np.ndarray

    # ------------------------------------------------------------------
    @property
    def n_near(self) -> int:
        return self.increments.shape[-1] - self.grid.N

    @property
    def near_length(self) -> float:
        return self.n_near * self.grid.step

    @property
    def n_far(self) -> int:
        return self.far_increments.shape[-1]

    @property
    def forward(self) -> np.ndarray:
        """Increments of the cells of [0, T]."""
        return self.increments[..., self.n_near :]

    @property
    def history(self) -> np.ndarray:
        """Fine increments of [-L_near, 0], chronological."""
        return self.increments[..., : self.n_near]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.increments.shape[:-1]

    def running_sum(self) -> np.ndarray:
        """B(t_i) - B(0) on the grid, i = 0..N."""
        values = np.zeros(self.batch_shape + (self.grid.N + 1,))
        values[..., 1:] = np.cumsum(self.forward, axis=-1)
        return values

    # ------------------------------------------------------------------
    def replicate(self, index: int) -> "DriverPath":
        if not self.batch_shape:
            raise IndexError("driver holds a single replicate")
        return replace(
            self,
            increments=self.increments[index],
            far_increments=self.far_increments[index],
            stream_id=int(np.asarray(self.stream_id)[index]),
        )

    def coarsen(self, factor: int) -> "DriverPath":
        """The same Brownian path read on a grid ``factor`` times coarser."""
        if factor == 1:
            return self
        grid = self.grid.coarsen(factor)
        if self.n_near % factor:
            raise ConfigError(
                f"near history of {self.n_near} cells cannot be coarsened by {factor}"
            )
        shape = self.batch_shape + (self.increments.shape[-1] // factor, factor)
        return replace(self, grid=grid, increments=self.increments.reshape(shape).sum(axis=-1))

    def with_increments(
        self,
        increments: np.ndarray | None = None,
        far_increments: np.ndarray | None = None,
    ) -> "DriverPath":
        return replace(
            self,
            increments=self.increments if increments is None else np.asarray(increments, float),
            far_increments=(
                self.far_increments if far_increments is None else np.asarray(far_increments, float)
            ),
        )

    def dict(self) -> dict:
        return {
            "grid": self.grid.dict(),
            "history_length": self.history_length,
            "near_length": self.near_length,
            "n_far": self.n_far,
            "seed": self.seed,
            "stream_id": self.stream_id,
        }


# ----------------------------------------------------------------------
def far_cell_edges(near: float, L: float, ratio: float = DEFAULT_FAR_RATIO) -> np.ndarray:
    """Distances d_0 = near < d_1 < ... < d_F = L with d_{k+1} = min(ratio*d_k, L)."""
    if L <= near:
        return np.empty(0)
    if near <= 0:
        raise ConfigError("far history needs a positive near-history window")
    if ratio <= 1.0:
        raise ConfigError(f"far-cell ratio must exceed 1, got {ratio!r}")
    edges = [near]
    while edges[-1] < L:
        edges.append(min(edges[-1] * ratio, L))
    return np.asarray(edges)


def sample_driver(
    grid: TimeGrid,
    L: float,
    seed: int,
    stream_id: int | Iterable[int] = 0,
    *,
    near_history: float | None = None,
    far_ratio: float = DEFAULT_FAR_RATIO,
) -> DriverPath:
    """
    Draw the driver increments for one stream id (1-D arrays) or for a
    sequence of stream ids (one row per id).

    Without ``near_history`` the whole history [-L, 0] is fine-gridded and L
    must be a multiple of the step.  With it, cells beyond ``near_history``
    grow geometrically up to L.
    """
    if not math.isfinite(L) or L < 0:
        raise ConfigError(f"history length must be nonnegative, got {L!r}")
    if near_history is None:
        n_near = grid.steps_in(L, what="history length")
        edges = np.empty(0)
    else:
        n_window = grid.steps_in(near_history, what="near history")
        if L <= near_history:
            n_near = min(n_window, int(math.ceil(L / grid.step - 1e-9)))
            edges = np.empty(0)
        else:
            n_near = n_window
            edges = far_cell_edges(near_history, L, far_ratio)
    n_far = max(len(edges) - 1, 0)

    single = np.isscalar(stream_id)
    ids: Sequence[int] = [int(stream_id)] if single else [int(s) for s in stream_id]
    draws = standard_normals(seed, ids, grid.N + n_near + n_far)

    # draw order: forward cells, history backwards from 0, then far cells
    forward = draws[:, : grid.N]
    history = draws[:, grid.N : grid.N + n_near][:, ::-1]
    increments = np.concatenate([history, forward], axis=1) * math.sqrt(grid.step)
    far = draws[:, grid.N + n_near :] * np.sqrt(np.diff(edges)) if n_far else draws[:, :0]

    if n_far:
        logger.debug("driver: %d fine history cells, %d far cells up to L=%.4g", n_near, n_far, L)
    return DriverPath(
        grid=grid,
        history_length=float(L if n_far else n_near * grid.step),
        increments=increments[0] if single else increments,
        far_edges=edges,
        far_increments=far[0] if single else far,
        seed=int(seed),
        stream_id=int(stream_id) if single else np.asarray(ids),
    )


def common_history_length(hursts: Iterable[HurstParam | float], T: float, tail_tol: float) -> float:
    """History long enough for every H in ``hursts`` (one driver serves them all)."""
    return max((history_length(H, T, tail_tol) for H in hursts), default=0.0)
