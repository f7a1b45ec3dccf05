"""Parse bilateral trade records and aggregate them into time-windowed networks.

Input files follow the common bilateral-trade layout: one row per
(year, exporter, importer, commodity) flow with a value and a quantity
column. Quantities are metric tonnes, values thousand USD (carried but
unused downstream).
"""
from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .countries import normalize_country

log = logging.getLogger(__name__)

DEFAULT_YEAR_RANGE = (2007, 2021)
SCRAP_HS_PREFIX = "7204"


class SchemaError(ValueError):
    """Required column missing from the input header."""


@dataclass(frozen=True)
class TradeSchema:
    """Column names for the six required fields."""

    year: str = "t"
    exporter: str = "i"
    importer: str = "j"
    hs_code: str = "k"
    value: str = "v"
    quantity: str = "q"

    def columns(self) -> tuple[str, ...]:
        return (self.year, self.exporter, self.importer, self.hs_code, self.value, self.quantity)


BACI_SCHEMA = TradeSchema()


@dataclass(frozen=True)
class TradeRecord:
    year: int
    exporter: str
    importer: str
    hs_code: str
    quantity: float  # tonnes
    value: float  # thousand USD


@dataclass(frozen=True)
class TimeWindow:
    start_year: int
    end_year: int

    def __post_init__(self) -> None:
        if self.start_year > self.end_year:
            raise ValueError(f"empty window {self.start_year}-{self.end_year}")

    @property
    def length(self) -> int:
        return self.end_year - self.start_year + 1

    def __contains__(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    def label(self) -> str:
        return f"{self.start_year}-{self.end_year}"


DEFAULT_WINDOWS = (TimeWindow(2007, 2011), TimeWindow(2012, 2016), TimeWindow(2017, 2021))


@dataclass
class SkipReport:
    """Row-level issues encountered while parsing; never fatal."""

    unparseable: int = 0
    self_loops: int = 0
    out_of_range: int = 0
    defaulted_values: int = 0
    unknown_codes: Counter = field(default_factory=Counter)

    @property
    def skipped_rows(self) -> int:
        return self.unparseable + self.self_loops + self.out_of_range


@dataclass
class ParseResult:
    records: list[TradeRecord]
    skipped: SkipReport


@dataclass(frozen=True)
class TradeNetwork:
    """Directed graph of average annual flows (tonnes/year) for one window."""

    window: TimeWindow
    edges: dict[tuple[str, str], float]
    nodes: frozenset[str]

    @property
    def total_flow(self) -> float:
        return sum(self.edges.values())


@dataclass(frozen=True)
class CountryTradeStats:
    country: str
    imports: float  # tonnes/year
    exports: float  # tonnes/year

    @property
    def net(self) -> float:
        return self.exports - self.imports


@dataclass(frozen=True)
class CountryTimeSeries:
    country: str
    imports: dict[int, float]  # year -> tonnes
    exports: dict[int, float]


def _open_source(source: str | Path | TextIO | Iterable[str]):
    if isinstance(source, (str, Path)):
        return open(source, "r", newline="", encoding="utf-8"), True
    return source, False


def parse_trade_records(
    source: str | Path | TextIO | Iterable[str],
    schema: TradeSchema = BACI_SCHEMA,
    delimiter: str = ",",
    year_range: tuple[int, int] | None = DEFAULT_YEAR_RANGE,
) -> ParseResult:
    """Read delimited trade rows into TradeRecords.

    Malformed rows (missing fields, unparseable or negative quantity/year)
    are counted and skipped; self-loop rows and rows outside year_range are
    skipped with their own counters. Country codes are normalized to alpha-3
    where recognized; unrecognized codes pass through verbatim with a warning.
    An unparseable value field defaults to 0.0 (the value column is carried
    but unused downstream).
    """
    stream, owned = _open_source(source)
    report = SkipReport()
    records: list[TradeRecord] = []
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in schema.columns() if c not in header]
        if missing:
            raise SchemaError(f"missing required column(s) {missing}; header was {header}")
        for row in reader:
            try:
                year = int(str(row[schema.year]).strip())
                quantity = float(str(row[schema.quantity]).strip())
            except (TypeError, ValueError):
                report.unparseable += 1
                continue
            if quantity < 0.0 or quantity != quantity:  # NaN guard
                report.unparseable += 1
                continue
            if year_range is not None and not (year_range[0] <= year <= year_range[1]):
                report.out_of_range += 1
                continue
            raw_value = row.get(schema.value)
            try:
                value = float(str(raw_value).strip())
                if value < 0.0 or value != value:
                    raise ValueError
            except (TypeError, ValueError):
                value = 0.0
                report.defaulted_values += 1
            exporter, exp_known = normalize_country(str(row[schema.exporter]))
            importer, imp_known = normalize_country(str(row[schema.importer]))
            for code, known in ((exporter, exp_known), (importer, imp_known)):
                if not known:
                    if code not in report.unknown_codes:
                        log.warning("unrecognized country code %r passed through verbatim", code)
                    report.unknown_codes[code] += 1
            if exporter == importer:
                report.self_loops += 1
                continue
            records.append(
                TradeRecord(year, exporter, importer, str(row[schema.hs_code]).strip(), quantity, value)
            )
    finally:
        if owned:
            stream.close()
    return ParseResult(records, report)


def filter_commodity(records: Iterable[TradeRecord], prefix: str = SCRAP_HS_PREFIX) -> list[TradeRecord]:
    """Keep records whose commodity code starts with the given prefix."""
    if not prefix:
        raise ValueError("commodity prefix must be non-empty")
    return [r for r in records if r.hs_code.startswith(prefix)]


def build_network(
    records: Iterable[TradeRecord],
    window: TimeWindow,
    divisor: str = "window_length",
) -> TradeNetwork:
    """Aggregate flows inside the window into average annual edge weights.

    Edge weight = total tonnes over the window divided by the window length
    in years; years without a record count as zero flow.  divisor
    "observed_years" divides by the number of distinct years with trade on
    that edge instead (sensitivity-analysis variant).  Edges with zero total
    are omitted, so all stored weights are positive.
    """
    if divisor not in ("window_length", "observed_years"):
        raise ValueError(f"unknown divisor mode {divisor!r}")
    totals: dict[tuple[str, str], float] = {}
    years_seen: dict[tuple[str, str], set[int]] = {}
    for r in records:
        if r.year not in window:
            continue
        key = (r.exporter, r.importer)
        totals[key] = totals.get(key, 0.0) + r.quantity
        years_seen.setdefault(key, set()).add(r.year)
    edges: dict[tuple[str, str], float] = {}
    for key, total in totals.items():
        if total <= 0.0:
            continue
        div = window.length if divisor == "window_length" else len(years_seen[key])
        edges[key] = total / div
    nodes = frozenset(c for pair in edges for c in pair)
    return TradeNetwork(window=window, edges=edges, nodes=nodes)


def country_totals(network: TradeNetwork) -> list[CountryTradeStats]:
    """Per-country imports (in-flow sum) and exports (out-flow sum), sorted by country."""
    imports: dict[str, float] = {c: 0.0 for c in network.nodes}
    exports: dict[str, float] = {c: 0.0 for c in network.nodes}
    for (exp, imp), w in network.edges.items():
        exports[exp] += w
        imports[imp] += w
    return [CountryTradeStats(c, imports[c], exports[c]) for c in sorted(network.nodes)]


def country_time_series(
    records: Iterable[TradeRecord],
    country: str,
    years: Sequence[int] | None = None,
) -> CountryTimeSeries:
    """Annual import/export tonnes for one country.

    The year axis defaults to the span observed in the records; countries
    absent from the data yield all-zero series (not an error).
    """
    records = list(records)
    if years is None:
        observed = [r.year for r in records]
        years = range(min(observed), max(observed) + 1) if observed else range(0)
    imports = {y: 0.0 for y in years}
    exports = {y: 0.0 for y in years}
    for r in records:
        if r.year not in imports:
            continue
        if r.importer == country:
            imports[r.year] += r.quantity
        if r.exporter == country:
            exports[r.year] += r.quantity
    return CountryTimeSeries(country=country, imports=imports, exports=exports)
