"""Serialization of pipeline artifacts to delimited, structured, and graph
text formats.

All numeric cells use Python's shortest round-trip float representation and
all JSON is key-sorted, so identical artifacts serialize byte-identically
(the reproducibility contract checks output hashes).
"""
from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .backbone import BackboneSummary, EdgeSignificance
from .extrapolate import ExtrapolationResult
from .firm_registry import DESCRIPTION_FIELDS, CountryFirmAggregate, FirmPopulation, NaicsShares
from .regression import RegressionFit
from .topic_model import LdaModel, TopicCountSelection, top_terms
from .trade_ingest import CountryTradeStats, CountryTimeSeries, ParseResult, TradeNetwork


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def jsonable(obj: Any) -> Any:
    """Plain-JSON form: dataclasses to dicts, arrays to lists, sets sorted."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {_json_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _json_key(key: Any) -> str:
    if isinstance(key, tuple):
        return "|".join(str(k) for k in key)
    return str(key)


def write_json(path: Path, obj: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Trade networks


def network_rows(network: TradeNetwork) -> list[tuple[str, str, float]]:
    return [(e, i, w) for (e, i), w in sorted(network.edges.items())]


def write_network_csv(path: Path, network: TradeNetwork) -> Path:
    return write_table(path, ("exporter", "importer", "tonnes_per_year"), network_rows(network))


def write_network_dot(
    path: Path,
    network: TradeNetwork,
    alphas: dict[tuple[str, str], float] | None = None,
    name: str = "trade",
) -> Path:
    """Graph-description text: one edge per line with its weight and, when
    given, the smaller of the two endpoint significance values."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"digraph {name} {{"]
    for (exp, imp), w in sorted(network.edges.items()):
        attrs = f"weight={repr(float(w))}"
        if alphas is not None and (exp, imp) in alphas:
            attrs += f", alpha={repr(float(alphas[(exp, imp)]))}"
        lines.append(f'  "{exp}" -> "{imp}" [{attrs}];')
    lines.append("}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_country_stats_csv(path: Path, stats: Sequence[CountryTradeStats]) -> Path:
    header = ("country", "imports_t_per_year", "exports_t_per_year", "net_exports_t_per_year")
    return write_table(path, header, [(s.country, s.imports, s.exports, s.net) for s in stats])


def write_time_series_csv(path: Path, series: CountryTimeSeries) -> Path:
    header = ("year", "imports_t", "exports_t")
    years = sorted(series.imports)
    return write_table(path, header, [(y, series.imports[y], series.exports[y]) for y in years])


def write_significances_csv(path: Path, sigs: Sequence[EdgeSignificance]) -> Path:
    header = ("exporter", "importer", "tonnes_per_year", "alpha_exporter", "alpha_importer", "alpha_min")
    rows = [(s.exporter, s.importer, s.weight, s.alpha_exporter, s.alpha_importer, s.alpha) for s in sigs]
    return write_table(path, header, rows)


# ---------------------------------------------------------------------------
# Firm registry


def write_population_csv(path: Path, population: FirmPopulation) -> Path:
    header = ("id", "country", "naics4", "revenue", "employees", *DESCRIPTION_FIELDS, "matched_field")
    rows = []
    for firm, matched in zip(population.firms, population.matched_fields):
        rows.append(
            (
                firm.firm_id,
                firm.country,
                firm.naics4,
                firm.revenue,
                firm.employees,
                *(firm.descriptions.get(f, "") for f in DESCRIPTION_FIELDS),
                matched,
            )
        )
    return write_table(path, header, rows)


def write_country_aggregates_csv(path: Path, aggregates: Sequence[CountryFirmAggregate]) -> Path:
    header = ("country", "firm_count", "employees_total", "revenue_total_usd_per_year")
    rows = [(a.country, a.firm_count, a.employees_total, a.revenue_total) for a in aggregates]
    return write_table(path, header, rows)


def write_naics_shares_csv(path: Path, shares: NaicsShares) -> Path:
    """Code rows are shares of coded firms; the trailing (missing) row is the
    fraction of all matched firms without a code."""
    rows: list[tuple[str, float]] = list(shares.shares.items())
    rows.append(("(missing)", shares.missing_share))
    return write_table(path, ("naics4", "share"), rows)


# ---------------------------------------------------------------------------
# Regression


def write_regression_csv(path: Path, fit: RegressionFit) -> Path:
    header = ("variable", "estimate", "sd", "p_value")
    rows = [(c.name, c.estimate, c.se, c.p_value) for c in fit.coefficients]
    return write_table(path, header, rows)


def write_predicted_vs_actual_csv(path: Path, fit: RegressionFit) -> Path:
    header = ("country", "actual_eaf_kt_per_year", "predicted_eaf_kt_per_year", "residual_kt_per_year")
    rows = [
        (c, a, f, r)
        for c, a, f, r in zip(fit.countries, fit.actual, fit.fitted, fit.residuals)
    ]
    return write_table(path, header, rows)


def regression_diagnostics(fit: RegressionFit) -> dict:
    return {
        "coefficients": [jsonable(c) for c in fit.coefficients],
        "r2_uncentered": fit.r2,
        "adjusted_r2": fit.adjusted_r2,
        "n_observations": fit.n_observations,
        "n_regressors": fit.n_regressors,
        "robust_se": fit.robust,
    }


# ---------------------------------------------------------------------------
# Topic model


def write_topic_terms_csv(path: Path, model: LdaModel, n_terms: int) -> Path:
    rows = []
    for topic in range(model.n_topics):
        for rank, (term, weight) in enumerate(top_terms(model, topic, n_terms), start=1):
            rows.append((topic, rank, term, weight))
    return write_table(path, ("topic", "rank", "term", "probability"), rows)


def write_doc_topics_csv(path: Path, model: LdaModel) -> Path:
    rows = []
    for d in range(model.doc_topic.shape[0]):
        for k in range(model.n_topics):
            rows.append((d, k, float(model.doc_topic[d, k])))
    return write_table(path, ("document", "topic", "weight"), rows)


def write_perplexity_curve_csv(path: Path, selection: TopicCountSelection) -> Path:
    return write_table(path, ("n_topics", "heldout_perplexity"), list(selection.curve))


# ---------------------------------------------------------------------------
# Extrapolation


def write_extrapolation_csv(path: Path, results: Sequence[ExtrapolationResult]) -> Path:
    header = (
        "country",
        "planned_eaf_kt_per_year",
        "companies_point",
        "companies_rounded",
        "companies_mean",
        "companies_sd",
        "revenue_median_usd_per_year",
        "revenue_q25_usd_per_year",
        "revenue_q75_usd_per_year",
        "employees_median",
        "employees_q25",
        "employees_q75",
        "cdf_source",
    )
    rows = [
        (
            r.country,
            r.planned_eaf,
            r.companies_point,
            r.companies_rounded,
            r.companies_mean,
            r.companies_sd,
            r.revenue.median,
            r.revenue.q25,
            r.revenue.q75,
            r.employees.median,
            r.employees.q25,
            r.employees.q75,
            r.cdf_source,
        )
        for r in results
    ]
    return write_table(path, header, rows)


# ---------------------------------------------------------------------------
# Generic dispatch

_FORMATS: list[tuple[type, dict[str, Any]]] = [
    (TradeNetwork, {"csv": write_network_csv, "json": write_json, "dot": write_network_dot}),
    (FirmPopulation, {"csv": write_population_csv, "json": write_json}),
    (NaicsShares, {"csv": write_naics_shares_csv, "json": write_json}),
    (RegressionFit, {"csv": write_regression_csv, "json": lambda p, f: write_json(p, regression_diagnostics(f))}),
    (BackboneSummary, {"json": write_json}),
    (ParseResult, {"json": write_json}),
    (TopicCountSelection, {"csv": write_perplexity_curve_csv, "json": write_json}),
]


def export_artifact(artifact: Any, fmt: str, path: Path) -> Path:
    """Write one artifact in the requested format; unknown formats raise with
    the supported list for that artifact type."""
    for kind, formats in _FORMATS:
        if isinstance(artifact, kind):
            if fmt not in formats:
                raise ValueError(
                    f"unsupported format {fmt!r} for {kind.__name__}; supported: {sorted(formats)}"
                )
            writer = formats[fmt]
            if kind is TradeNetwork and fmt == "json":
                return write_json(path, {"window": artifact.window.label(), "edges": artifact.edges})
            return writer(path, artifact)
    raise ValueError(f"no exporter for artifact type {type(artifact).__name__}")


__all__ = [
    "export_artifact",
    "jsonable",
    "regression_diagnostics",
    "write_country_aggregates_csv",
    "write_country_stats_csv",
    "write_doc_topics_csv",
    "write_extrapolation_csv",
    "write_json",
    "write_naics_shares_csv",
    "write_network_csv",
    "write_network_dot",
    "write_perplexity_curve_csv",
    "write_population_csv",
    "write_predicted_vs_actual_csv",
    "write_regression_csv",
    "write_significances_csv",
    "write_table",
    "write_time_series_csv",
    "write_topic_terms_csv",
]
