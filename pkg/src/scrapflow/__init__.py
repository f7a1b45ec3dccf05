"""scrapflow: scrap-trade network analysis, firm-ecosystem characterization,
and electric-arc-furnace capacity extrapolation.

The package is organized as a batch pipeline over five analysis stages:

- trade_ingest: bilateral trade records -> time-windowed flow networks
- backbone: disparity-filter significance pruning of those networks
- firm_registry / topic_model: keyword-matched firm population, summary
  statistics, and a topic model of business descriptions
- regression: no-intercept least squares linking trade and firm variables
  to furnace capacity
- extrapolate: Monte Carlo projection of the firm ecosystem implied by
  planned capacity

Every stochastic step draws from named substreams of one master seed, so a
full run is reproducible bit-for-bit from its JSON configuration.
"""
from .backbone import BackboneParams, disparity_alpha, extract_backbone
from .config import ConfigError, PipelineConfig, load_config
from .extrapolate import (
    CapacityPlan,
    EmpiricalCDF,
    additional_companies,
    aggregate_totals,
    extrapolate_ecosystem,
    inverse_sample,
    simulate_population,
)
from .firm_registry import FirmPopulation, FirmRecord, match_scrap_firms, pearson
from .pipeline import run
from .regression import CountryObservation, RegressionFit, fit_no_intercept, predict
from .topic_model import LdaModel, build_corpus, fit_lda, held_out_perplexity, preprocess, select_topic_count
from .trade_ingest import TimeWindow, TradeNetwork, TradeRecord, build_network, parse_trade_records

__version__ = "0.1.0"

__all__ = [
    "BackboneParams",
    "CapacityPlan",
    "ConfigError",
    "CountryObservation",
    "EmpiricalCDF",
    "FirmPopulation",
    "FirmRecord",
    "LdaModel",
    "PipelineConfig",
    "RegressionFit",
    "TimeWindow",
    "TradeNetwork",
    "TradeRecord",
    "__version__",
    "additional_companies",
    "aggregate_totals",
    "build_corpus",
    "build_network",
    "disparity_alpha",
    "extract_backbone",
    "extrapolate_ecosystem",
    "fit_lda",
    "fit_no_intercept",
    "held_out_perplexity",
    "inverse_sample",
    "load_config",
    "match_scrap_firms",
    "parse_trade_records",
    "pearson",
    "predict",
    "preprocess",
    "run",
    "select_topic_count",
    "simulate_population",
]
