"""Pipeline configuration: a single JSON file with documented defaults.

Every analysis default (commodity prefix, the three time windows, 1000
Monte Carlo iterations, 10% topic holdout) lives here so a run is fully
reproducible from one artifact. The master seed is mandatory because two
stages are stochastic.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .regression import DEFAULT_REGRESSORS
from .trade_ingest import SCRAP_HS_PREFIX, TimeWindow

DEFAULT_WINDOW_BOUNDS = ((2007, 2011), (2012, 2016), (2017, 2021))


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass(frozen=True)
class LdaSettings:
    topic_grid: tuple[int, ...] = (2, 3, 4, 5, 6)
    iterations: int = 200
    doc_topic_prior: float | None = None  # None -> 50 / n_topics
    topic_word_prior: float = 0.1
    holdout_fraction: float = 0.1
    top_terms: int = 12


@dataclass(frozen=True)
class ExtrapolationSettings:
    n_draws: int = 10_000
    iterations: int = 1000
    min_country_firms: int = 30
    coupled: bool = False
    # None -> take the fitted n_firms coefficient from the regression stage.
    coefficient_mean: float | None = None
    coefficient_sd: float | None = None


@dataclass(frozen=True)
class PipelineConfig:
    output_dir: str
    master_seed: int
    trade_file: str | None = None
    firm_registry_file: str | None = None
    capacity_file: str | None = None
    observations_file: str | None = None
    commodity_prefix: str = SCRAP_HS_PREFIX
    windows: tuple[tuple[int, int], ...] = DEFAULT_WINDOW_BOUNDS
    backbone_alpha: float = 0.05
    keep_degree_one: bool = False
    keyword: str = "scrap"
    exclusions: tuple[str, ...] = ("scraper", "scrapers")
    delimiter: str = ","
    regressors: tuple[str, ...] = DEFAULT_REGRESSORS
    robust_se: bool = False
    lda: LdaSettings = field(default_factory=LdaSettings)
    extrapolation: ExtrapolationSettings = field(default_factory=ExtrapolationSettings)

    def time_windows(self) -> tuple[TimeWindow, ...]:
        return tuple(TimeWindow(a, b) for a, b in self.windows)

    def input_files(self) -> dict[str, str]:
        """Configured input paths by field name (only the ones set)."""
        names = ("trade_file", "firm_registry_file", "capacity_file", "observations_file")
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}


def _build(cls, data: dict, context: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown {context} key(s): {unknown}; known keys: {sorted(known)}")
    kwargs = {}
    for name, value in data.items():
        if name == "lda":
            value = _build(LdaSettings, _as_dict(value, name), name)
        elif name == "extrapolation":
            value = _build(ExtrapolationSettings, _as_dict(value, name), name)
        elif isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad {context} configuration: {exc}") from exc


def _as_dict(value, name: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be an object, got {type(value).__name__}")
    return value


def config_from_dict(data: dict) -> PipelineConfig:
    config = _build(PipelineConfig, _as_dict(data, "top-level"), "top-level")
    validate_config(config)
    return config


def load_config(path: str | Path) -> PipelineConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def validate_config(config: PipelineConfig) -> None:
    """Static checks that do not touch the filesystem."""
    if not isinstance(config.master_seed, int) or config.master_seed < 0:
        raise ConfigError("master_seed must be a non-negative integer")
    if not config.output_dir:
        raise ConfigError("output_dir is required")
    if not config.commodity_prefix:
        raise ConfigError("commodity_prefix must be non-empty")
    if not 0.0 < config.backbone_alpha < 1.0:
        raise ConfigError("backbone_alpha must be in (0, 1)")
    if not config.keyword or config.keyword != config.keyword.lower():
        raise ConfigError("keyword must be non-empty and lowercase")
    for bounds in config.windows:
        if len(bounds) != 2 or bounds[0] > bounds[1]:
            raise ConfigError(f"bad window {bounds}: expected [start_year, end_year]")
    bad = [r for r in config.regressors if r not in DEFAULT_REGRESSORS]
    if bad:
        raise ConfigError(f"unknown regressor(s) {bad}; choose from {DEFAULT_REGRESSORS}")
    lda = config.lda
    if lda.topic_grid and (min(lda.topic_grid) < 1 or lda.iterations < 1):
        raise ConfigError("lda.topic_grid entries and lda.iterations must be >= 1")
    if not 0.0 < lda.holdout_fraction < 1.0:
        raise ConfigError("lda.holdout_fraction must be in (0, 1)")
    ext = config.extrapolation
    if ext.n_draws < 1 or ext.iterations < 1:
        raise ConfigError("extrapolation.n_draws and .iterations must be >= 1")
    if (ext.coefficient_mean is None) != (ext.coefficient_sd is None):
        raise ConfigError("extrapolation coefficient_mean and coefficient_sd must be set together")
    if ext.coefficient_mean is not None and ext.coefficient_mean <= 0:
        raise ConfigError("extrapolation.coefficient_mean must be positive")
    if ext.coefficient_sd is not None and ext.coefficient_sd < 0:
        raise ConfigError("extrapolation.coefficient_sd must be >= 0")


def validate_input_paths(config: PipelineConfig, base_dir: Path | None = None) -> None:
    """All configured input files must exist before any stage runs."""
    base = base_dir or Path.cwd()
    missing = []
    for name, value in config.input_files().items():
        p = Path(value)
        if not p.is_absolute():
            p = base / p
        if not p.is_file():
            missing.append(f"{name}={value}")
    if missing:
        raise ConfigError(f"input file(s) not found: {missing}")


def config_to_dict(config: PipelineConfig) -> dict:
    """Round-trippable plain-dict form, embedded in the run manifest."""
    return json.loads(json.dumps(dataclasses.asdict(config)))
