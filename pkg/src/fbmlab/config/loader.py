"""
YAML experiment configuration.

A config file is a mapping with the experiment ``kind`` and its sweeps;
nested sections ``truncation``, ``market``, ``thresholds`` and (for the
no-arbitrage experiment) ``family`` fall back to defaults when omitted.
Loading validates everything at once and raises ``ConfigError`` listing
each problem with its field path.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from fbmlab.config import CONFIG_DIR
from fbmlab.errors import ConfigError
from fbmlab.fbm.grid import TimeGrid
from fbmlab.market.rules import RULES, make_rule
from fbmlab.market.strategy import KINDS, Strategy

__all__ = [
    "EXPERIMENT_KINDS",
    "OUTPUT_ENV",
    "TruncationConfig",
    "MarketConfig",
    "Thresholds",
    "MemberConfig",
    "ExperimentConfig",
    "resolve_output_dir",
]

EXPERIMENT_KINDS = ("arbitrage", "continuity", "delay-gap", "no-arbitrage")
OUTPUT_ENV = "FBMLAB_OUTPUT_DIR"
MIN_REPLICATES = 100


@dataclass(frozen=True)
class TruncationConfig:
    tail_tol: float = 1e-4
    near_history: float | None = None  # fine-gridded history; None means T
    far_ratio: float = 1.1


@dataclass(frozen=True)
class MarketConfig:
    S0: float = 0.0
    sigma: float = 1.0


@dataclass(frozen=True)
class Thresholds:
    pass_se: float = 3.0
    fail_se: float = 4.0
    confidence: float = 0.99
    continuity_ratio: float = 0.25


@dataclass(frozen=True)
class MemberConfig:
    """One strategy of the no-arbitrage family."""

    name: str
    kind: str
    rule: str
    eps: float | None = None
    rebalance: tuple[float, ...] | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def build(self) -> Strategy:
        rule = make_rule(self.rule, **dict(self.params))
        if self.kind == "delayed":
            return Strategy.delayed(rule, self.eps, name=self.name)
        return Strategy.piecewise(rule, self.eps, self.rebalance, name=self.name)

    def dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "rule": self.rule, "eps": self.eps}
        if self.rebalance is not None:
            out["rebalance"] = list(self.rebalance)
        if self.params:
            out["params"] = dict(self.params)
        return out


# ----------------------------------------------------------------------
def _section(cls, data: Any, path: str, errors: list[str]):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        errors.append(f"{path}: expected a mapping")
        return cls()
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        errors.append(f"{path}: unknown keys {unknown}")
    try:
        return cls(**{k: v for k, v in data.items() if k in names})
    except TypeError as e:
        errors.append(f"{path}: {e}")
        return cls()


def _member(data: Any, path: str, errors: list[str]) -> MemberConfig | None:
    if not isinstance(data, Mapping):
        errors.append(f"{path}: expected a mapping")
        return None
    missing = [k for k in ("name", "kind", "rule") if k not in data]
    if missing:
        errors.append(f"{path}: missing {missing}")
        return None
    known = {"name", "kind", "rule", "eps", "rebalance", "params"}
    unknown = sorted(set(data) - known)
    if unknown:
        errors.append(f"{path}: unknown keys {unknown}")
    rebalance = data.get("rebalance")
    return MemberConfig(
        name=str(data["name"]),
        kind=str(data["kind"]),
        rule=str(data["rule"]),
        eps=None if data.get("eps") is None else float(data["eps"]),
        rebalance=None if rebalance is None else tuple(float(t) for t in rebalance),
        params=dict(data.get("params") or {}),
    )


def _floats(value: Any, path: str, errors: list[str]) -> tuple[float, ...]:
    if value is None:
        return ()
    items = value if isinstance(value, (list, tuple)) else [value]
    try:
        return tuple(float(v) for v in items)
    except (TypeError, ValueError):
        errors.append(f"{path}: expected numbers, got {value!r}")
        return ()


def _ints(value: Any, path: str, errors: list[str]) -> tuple[int, ...]:
    items = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for i, v in enumerate(items):
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{path}[{i}]: expected an integer, got {v!r}")
        else:
            out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    H: tuple[float, ...]
    steps: tuple[int, ...]
    eps: tuple[float, ...] = ()
    T: float = 1.0
    replicates: int = 10_000
    seed: int = 0
    batch_size: int = 500
    output: str | None = None
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    market: MarketConfig = field(default_factory=MarketConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    family: tuple[MemberConfig, ...] = ()

    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, data: Mapping[str, Any], *, validate: bool = True) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a mapping at the top level")
        errors: list[str] = []
        top = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - top)
        if unknown:
            errors.append(f"unknown keys {unknown}")
        for key in ("kind", "H", "steps"):
            if key not in data:
                errors.append(f"{key}: required")
        if errors:
            raise ConfigError(errors)

        family = tuple(
            m
            for i, raw in enumerate(data.get("family") or [])
            if (m := _member(raw, f"family[{i}]", errors)) is not None
        )
        cfg = cls(
            kind=str(data["kind"]),
            H=_floats(data["H"], "H", errors),
            steps=_ints(data["steps"], "steps", errors),
            eps=_floats(data.get("eps"), "eps", errors),
            T=float(data.get("T", 1.0)),
            replicates=data.get("replicates", 10_000),
            seed=data.get("seed", 0),
            batch_size=data.get("batch_size", 500),
            output=data.get("output"),
            truncation=_section(TruncationConfig, data.get("truncation"), "truncation", errors),
            market=_section(MarketConfig, data.get("market"), "market", errors),
            thresholds=_section(Thresholds, data.get("thresholds"), "thresholds", errors),
            family=family,
        )
        if validate:
            errors.extend(cfg.validate())
        if errors:
            raise ConfigError(errors)
        return cfg

    @classmethod
    def from_yaml(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}") from None
        return cls.from_dict(data or {})

    @classmethod
    def default(cls, kind: str) -> "ExperimentConfig":
        """The packaged default config for an experiment kind."""
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment {kind!r}; choose from {EXPERIMENT_KINDS}")
        return cls.from_yaml(CONFIG_DIR / f"{kind.replace('-', '_')}.yaml")

    def replace(self, **changes) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, **changes)
        errors = cfg.validate()
        if errors:
            raise ConfigError(errors)
        return cfg

    # ------------------------------------------------------------------
    def grids(self) -> list[TimeGrid]:
        return [TimeGrid(self.T, n) for n in self.steps]

    @property
    def finest_grid(self) -> TimeGrid:
        return TimeGrid(self.T, max(self.steps))

    def strategies(self) -> list[Strategy]:
        return [m.build() for m in self.family]

    def validate(self) -> list[str]:
        """Every violation found, each prefixed with its field path."""
        errors: list[str] = []
        if self.kind not in EXPERIMENT_KINDS:
            errors.append(f"kind: must be one of {list(EXPERIMENT_KINDS)}, got {self.kind!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            errors.append(f"T: must be positive, got {self.T!r}")
            return errors

        if not self.H:
            errors.append("H: at least one Hurst exponent is required")
        for i, h in enumerate(self.H):
            if not 0.5 <= h < 1.0:
                errors.append(f"H[{i}]: must lie in [0.5, 1), got {h!r}")

        if not self.steps:
            errors.append("steps: at least one step count is required")
        for i, n in enumerate(self.steps):
            if n < 1:
                errors.append(f"steps[{i}]: must be positive, got {n!r}")
        grids = [TimeGrid(self.T, n) for n in self.steps if n >= 1]
        if self.kind == "arbitrage":
            finest = max(self.steps, default=0)
            for i, n in enumerate(self.steps):
                if n >= 1 and finest >= 1 and finest % n:
                    errors.append(f"steps[{i}]: {n} does not divide the finest step count {finest}")
        elif len(self.steps) > 1:
            errors.append(f"steps: the {self.kind} experiment runs on one grid, got {list(self.steps)}")

        if self.kind in ("continuity", "delay-gap") and not self.eps:
            errors.append(f"eps: the {self.kind} experiment needs at least one delay")
        if self.kind == "continuity" and len(self.eps) > 1:
            errors.append(f"eps: the continuity experiment takes one delay, got {list(self.eps)}")
        for i, e in enumerate(self.eps):
            errors.extend(_check_eps(f"eps[{i}]", e, self.T, grids))

        if isinstance(self.replicates, bool) or not isinstance(self.replicates, int):
            errors.append(f"replicates: expected an integer, got {self.replicates!r}")
        elif self.replicates < MIN_REPLICATES:
            errors.append(f"replicates: must be at least {MIN_REPLICATES}, got {self.replicates}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            errors.append(f"seed: expected a nonnegative integer, got {self.seed!r}")
        if isinstance(self.batch_size, bool) or not isinstance(self.batch_size, int) or self.batch_size < 1:
            errors.append(f"batch_size: expected a positive integer, got {self.batch_size!r}")

        tr = self.truncation
        if not 0 < tr.tail_tol < 1:
            errors.append(f"truncation.tail_tol: must lie in (0, 1), got {tr.tail_tol!r}")
        if not tr.far_ratio > 1:
            errors.append(f"truncation.far_ratio: must exceed 1, got {tr.far_ratio!r}")
        if tr.near_history is not None:
            for g in grids:
                try:
                    n_near = g.steps_in(tr.near_history, what="near history")
                except ConfigError as e:
                    errors.append(f"truncation.near_history: {e} (N={g.N})")
                    continue
                if n_near < 1:
                    errors.append("truncation.near_history: must be positive")

        if not (math.isfinite(self.market.S0)):
            errors.append(f"market.S0: must be finite, got {self.market.S0!r}")
        if not self.market.sigma > 0:
            errors.append(f"market.sigma: must be positive, got {self.market.sigma!r}")

        th = self.thresholds
        if not 0 < th.pass_se < th.fail_se:
            errors.append(
                f"thresholds: need 0 < pass_se < fail_se, got {th.pass_se!r} and {th.fail_se!r}"
            )
        if not 0 < th.confidence < 1:
            errors.append(f"thresholds.confidence: must lie in (0, 1), got {th.confidence!r}")
        if not th.continuity_ratio > 0:
            errors.append(f"thresholds.continuity_ratio: must be positive, got {th.continuity_ratio!r}")

        if self.kind == "no-arbitrage" and not self.family:
            errors.append("family: the no-arbitrage experiment needs at least one strategy")
        seen: set[str] = set()
        for i, m in enumerate(self.family):
            errors.extend(_check_member(f"family[{i}]", m, self.T, grids))
            if m.name in seen:
                errors.append(f"family[{i}].name: duplicate name {m.name!r}")
            seen.add(m.name)
        return errors

    def dict(self) -> dict:
        return {
            "kind": self.kind,
            "H": list(self.H),
            "steps": list(self.steps),
            "eps": list(self.eps),
            "T": self.T,
            "replicates": self.replicates,
            "seed": self.seed,
            "batch_size": self.batch_size,
            "output": self.output,
            "truncation": dataclasses.asdict(self.truncation),
            "market": dataclasses.asdict(self.market),
            "thresholds": dataclasses.asdict(self.thresholds),
            "family": [m.dict() for m in self.family],
        }


def _check_eps(path: str, eps: float, T: float, grids: list[TimeGrid]) -> list[str]:
    if not (math.isfinite(eps) and 0 < eps <= T):
        return [f"{path}: must lie in (0, T={T:g}], got {eps!r}"]
    return [
        f"{path}: eps={eps:g} is smaller than the grid step {g.step:g} at N={g.N}"
        for g in grids
        if g.floor_steps(eps) < 1
    ]


def _check_member(path: str, m: MemberConfig, T: float, grids: list[TimeGrid]) -> list[str]:
    errors = []
    if m.kind not in KINDS:
        errors.append(f"{path}.kind: must be one of {list(KINDS)}, got {m.kind!r}")
    if m.rule not in RULES:
        errors.append(f"{path}.rule: must be one of {sorted(RULES)}, got {m.rule!r}")
    if errors:
        return errors
    if m.kind == "adapted":
        errors.append(f"{path}.kind: family members must be delayed or piecewise, got 'adapted'")
    elif m.eps is None:
        errors.append(f"{path}.eps: required for {m.kind} strategies")
    else:
        errors.extend(_check_eps(f"{path}.eps", m.eps, T, grids))
    if errors:
        return errors
    try:
        strategy = m.build()
        if m.kind == "piecewise":
            for g in grids:
                strategy.rebalance_nodes(g)
    except ConfigError as e:
        errors.append(f"{path}: {e}")
    return errors


def resolve_output_dir(cfg: ExperimentConfig, override: str | Path | None = None) -> Path:
    """--out flag, then ``FBMLAB_OUTPUT_DIR``/<kind>, then the config's ``output``, then results/<kind>."""
    if override is not None:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / cfg.kind
    if cfg.output:
        return Path(cfg.output)
    return Path("results") / cfg.kind
