"""Pieces shared by the experiment runners."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Iterable

from fbmlab.config.loader import ExperimentConfig
from fbmlab.errors import ConfigError
from fbmlab.fbm.decomposition import TruncationCheck, truncation_check
from fbmlab.fbm.driver import DriverPath, common_history_length, sample_driver
from fbmlab.fbm.generators import FbmPath
from fbmlab.fbm.grid import HurstParam, TimeGrid
from fbmlab.experiments.report import ExperimentReport, utc_now
from fbmlab.market.model import MarketModel

__all__ = [
    "DriverSpec",
    "brownian_path",
    "market_for",
    "new_report",
    "finish_report",
    "cell_key",
    "truncation_checks",
]

logger = logging.getLogger(__name__)

BROWNIAN = "brownian-driver"
TRUNCATION_REPLICATES = 1000


@dataclass(frozen=True)
class DriverSpec:
    """How every replicate's driver is drawn; one history serves every H of the run."""

    grid: TimeGrid
    history_length: float
    near_history: float
    far_ratio: float
    seed: int

    @classmethod
    def for_config(cls, cfg: ExperimentConfig, grid: TimeGrid, hursts: Iterable[float]) -> "DriverSpec":
        hursts = list(hursts)
        L = common_history_length(hursts, cfg.T, cfg.truncation.tail_tol)
        near = cfg.truncation.near_history if cfg.truncation.near_history is not None else cfg.T
        if 0 < L < near:
            # the fine window never extends past the history
            L = near
        logger.info(
            "history length %.4g (fine window %.4g) for H in %s at tail tolerance %g",
            L,
            near,
            hursts,
            cfg.truncation.tail_tol,
        )
        return cls(grid, L, near, cfg.truncation.far_ratio, cfg.seed)

    def sample(self, stream_ids) -> DriverPath:
        return sample_driver(
            self.grid,
            self.history_length,
            self.seed,
            stream_ids,
            near_history=self.near_history,
            far_ratio=self.far_ratio,
        )

    def truncation_check(self, H: float, stream_ids, tail_tol: float, pass_se: float) -> TruncationCheck:
        return truncation_check(
            self.grid,
            H,
            self.history_length,
            self.seed,
            stream_ids,
            tail_tol=tail_tol,
            near_history=self.near_history,
            far_ratio=self.far_ratio,
            pass_se=pass_se,
        )


def brownian_path(driver: DriverPath) -> FbmPath:
    """The driver itself on [0, T], as a path with H = 1/2."""
    return FbmPath(
        grid=driver.grid,
        H=HurstParam(0.5),
        values=driver.running_sum(),
        provenance=BROWNIAN,
        seed=driver.seed,
    )


def market_for(cfg: ExperimentConfig, path: FbmPath) -> MarketModel:
    return MarketModel(path, S0=cfg.market.S0, sigma=cfg.market.sigma)


def cell_key(*parts) -> str:
    return "|".join(f"{p:g}" if isinstance(p, float) else str(p) for p in parts)


def new_report(cfg: ExperimentConfig, kind: str) -> ExperimentReport:
    if cfg.kind != kind:
        raise ConfigError(f"expected a {kind!r} config, got {cfg.kind!r}")
    report = ExperimentReport(kind, cfg.dict())
    report.timing["started"] = utc_now()
    report.timing["_t0"] = time.perf_counter()
    logger.info("%s: %d replicates, seed %d", kind, cfg.replicates, cfg.seed)
    return report


def finish_report(report: ExperimentReport) -> ExperimentReport:
    t0 = report.timing.pop("_t0", None)
    report.timing["finished"] = utc_now()
    if t0 is not None:
        report.timing["seconds"] = round(time.perf_counter() - t0, 3)
    logger.info(
        "%s: %d/%d verdicts pass",
        report.kind,
        sum(v.passed for v in report.verdicts),
        len(report.verdicts),
    )
    return report

def truncation_checks(cfg: ExperimentConfig) -> list[TruncationCheck]:
    """Doubling-L check on the finest grid for every H > 1/2, on streams past the Monte Carlo range."""
    grid = max(cfg.grids(), key=lambda g: g.N)
    hursts = sorted(set(cfg.H))
    spec = DriverSpec.for_config(cfg, grid, hursts)
    ids = range(cfg.replicates, cfg.replicates + TRUNCATION_REPLICATES)
    checks = []
    for h in hursts:
        if h == 0.5:
            continue
        check = spec.truncation_check(h, ids, cfg.truncation.tail_tol, cfg.thresholds.pass_se)
        if not check.passed:
            logger.warning(
                "truncation: doubling L=%.4g changes Var R(T) by %.3g (se %.2g) at H=%g; bound %.3g",
                check.L,
                check.delta,
                check.se,
                h,
                check.bound,
            )
        checks.append(check)
    return checks
