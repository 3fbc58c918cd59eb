"""
Experiment reports: a JSON document plus one CSV table per result family,
and the run manifest written next to them.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from fbmlab import __version__
from fbmlab.experiments.stats import Estimate, ProportionEstimate, Verdict
from fbmlab.fbm.decomposition import TruncationCheck
from fbmlab.util.serialization import sanitize_for_serialization

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "TableRow",
    "ExperimentReport",
    "RunManifest",
    "config_checksum",
    "utc_now",
]

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ["H", "eps", "N", "estimate", "se", "lo", "hi", "oracle", "verdict"]
FLOAT_FORMAT = "%.12g"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_checksum(config: dict) -> str:
    """sha256 of the canonical JSON form of a config echo."""
    canonical = json.dumps(sanitize_for_serialization(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TableRow:
    H: float
    eps: float | None
    N: int
    estimate: float
    se: float
    lo: float | None = None
    hi: float | None = None
    oracle: float | None = None
    verdict: str = ""

    @classmethod
    def from_mean(cls, H, eps, N, est: Estimate, *, oracle=None, verdict: Verdict | None = None):
        return cls(
            H=H,
            eps=eps,
            N=N,
            estimate=est.mean,
            se=est.se,
            oracle=oracle,
            verdict=_verdict_tag(verdict),
        )

    @classmethod
    def from_proportion(cls, H, eps, N, est: ProportionEstimate, *, verdict: Verdict | None = None):
        return cls(
            H=H,
            eps=eps,
            N=N,
            estimate=est.p,
            se=est.se,
            lo=est.lo,
            hi=est.hi,
            verdict=_verdict_tag(verdict),
        )

    def dict(self) -> dict:
        return {
            "H": self.H,
            "eps": self.eps,
            "N": self.N,
            "estimate": self.estimate,
            "se": self.se,
            "lo": self.lo,
            "hi": self.hi,
            "oracle": self.oracle,
            "verdict": self.verdict,
        }


def _verdict_tag(verdict: Verdict | None) -> str:
    if verdict is None:
        return ""
    return "pass" if verdict.passed else "fail"


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    tables: dict[str, list[TableRow]] = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def hard_failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if v.hard_fail]

    def add_row(self, table: str, row: TableRow) -> None:
        self.tables.setdefault(table, []).append(row)

    def add_verdict(self, verdict: Verdict) -> Verdict:
        self.verdicts.append(verdict)
        level = logging.INFO if verdict.passed else logging.WARNING
        logger.log(level, "%s: %s %s", self.kind, "pass" if verdict.passed else "FAIL", verdict.rule)
        return verdict

    def dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "passed": self.passed,
            "config": self.config,
            "notes": self.notes,
            "verdicts": self.verdicts,
            "tables": self.tables,
            "timing": self.timing,
        }

    # ------------------------------------------------------------------
    def table_frame(self, table: str) -> pd.DataFrame:
        rows = [r.dict() for r in self.tables.get(table, [])]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def write(self, out_dir: str | Path) -> list[Path]:
        """Write ``<kind>_report.json`` and ``<kind>_<table>.csv``; return the paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = self.kind.replace("-", "_")
        paths = []
        for table in self.tables:
            path = out_dir / f"{stem}_{table}.csv"
            self.table_frame(table).to_csv(path, index=False, float_format=FLOAT_FORMAT)
            paths.append(path)
        report_path = out_dir / f"{stem}_report.json"
        report_path.write_text(json.dumps(sanitize_for_serialization(self), indent=2) + "\n")
        paths.append(report_path)
        logger.info("wrote %d files to %s", len(paths), out_dir)
        return paths


@dataclass
class RunManifest:
    config_checksum: str
    started: str
    finished: str | None = None
    outputs: dict[str, list[str]] = field(default_factory=dict)
    truncation: list[TruncationCheck] = field(default_factory=list)
    version: str = __version__

    def dict(self) -> dict:
        return {
            "config_checksum": self.config_checksum,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "truncation": self.truncation,
        }

    def write(self, out_dir: str | Path) -> Path:
        path = Path(out_dir) / "manifest.json"
        path.write_text(json.dumps(sanitize_for_serialization(self), indent=2) + "\n")
        return path

