"""Company registry parsing, keyword filtering, and population summaries.

The registry is delimited text with one firm per row: an opaque id, a
country code, an optional 4-digit industry code, optional revenue (USD/yr)
and employees, and four free-text description columns. Firms are admitted
to the study population by a token-prefix keyword rule over the description
fields.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from scipy import stats

from .countries import normalize_country

# Description columns, in match-priority order.
DESCRIPTION_FIELDS = (
    "full overview",
    "main products and services",
    "main activity",
    "primary business line",
)

DEFAULT_KEYWORD = "scrap"
DEFAULT_EXCLUSIONS = ("scraper", "scrapers")

_TOKEN_RE = re.compile(r"[a-z]+")


class RegistrySchemaError(ValueError):
    """Required column missing from the registry header."""


class CorrelationError(ValueError):
    """Correlation undefined (zero variance or too few pairs)."""


@dataclass(frozen=True)
class FirmRecord:
    firm_id: str
    country: str
    naics4: str | None = None
    revenue: float | None = None  # USD/year
    employees: int | None = None
    descriptions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.revenue is not None and self.revenue < 0:
            raise ValueError(f"firm {self.firm_id}: negative revenue")
        if self.employees is not None and self.employees < 0:
            raise ValueError(f"firm {self.firm_id}: negative employees")

    def description_text(self) -> str:
        """All description fields joined, in canonical field order."""
        return " ".join(self.descriptions.get(f, "") for f in DESCRIPTION_FIELDS).strip()


@dataclass(frozen=True)
class FirmPopulation:
    """Firms admitted by the keyword rule, with the field that matched each."""

    firms: tuple[FirmRecord, ...]
    matched_fields: tuple[str, ...]  # aligned with firms; first matching field
    provenance: str = "registry"

    def __post_init__(self) -> None:
        if len(self.firms) != len(self.matched_fields):
            raise ValueError("firms and matched_fields must align")

    def __len__(self) -> int:
        return len(self.firms)


def _parse_optional_float(raw: str | None) -> float | None:
    if raw is None:
        return None
    text = raw.strip()
    if not text or text.upper() in ("NA", "N/A", "NAN", "NULL", "NONE"):
        return None
    value = float(text)
    if math.isnan(value):
        return None
    return value


def parse_firm_registry(
    source: str | Path | TextIO | Iterable[str],
    delimiter: str = ",",
) -> list[FirmRecord]:
    """Read a registry export into FirmRecords.

    Required columns: id, country; optional: naics4, revenue, employees, and
    the four description columns (absent description columns read as empty).
    Empty or NA-like numeric cells become missing values; negative values are
    rejected (the registry is otherwise taken at face value).
    """
    owned = isinstance(source, (str, Path))
    stream = open(source, "r", newline="", encoding="utf-8") if owned else source
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in ("id", "country") if c not in header]
        if missing:
            raise RegistrySchemaError(f"missing required column(s) {missing}; header was {header}")
        firms: list[FirmRecord] = []
        for row in reader:
            naics = (row.get("naics4") or "").strip() or None
            revenue = _parse_optional_float(row.get("revenue"))
            employees_f = _parse_optional_float(row.get("employees"))
            employees = int(employees_f) if employees_f is not None else None
            country, _ = normalize_country(str(row["country"]))
            descriptions = {
                f: (row.get(f) or "").strip() for f in DESCRIPTION_FIELDS if (row.get(f) or "").strip()
            }
            firms.append(
                FirmRecord(
                    firm_id=str(row["id"]).strip(),
                    country=country,
                    naics4=naics,
                    revenue=revenue,
                    employees=employees,
                    descriptions=descriptions,
                )
            )
        return firms
    finally:
        if owned:
            stream.close()


def _field_matches(text: str, keyword: str, exclusions: frozenset[str]) -> bool:
    for token in _TOKEN_RE.findall(text.lower()):
        if token.startswith(keyword) and token not in exclusions:
            return True
    return False


def match_scrap_firms(
    records: Iterable[FirmRecord],
    keyword: str = DEFAULT_KEYWORD,
    exclusions: Sequence[str] = DEFAULT_EXCLUSIONS,
    provenance: str = "registry",
) -> FirmPopulation:
    """Admit firms where any description field contains a token with the
    given prefix, excluding tokens on the exclusion list.

    Matching is case-insensitive on tokens split at non-letter boundaries,
    so "SCRAP metal" and "scrapyard" match while "skyscraper" does not.
    Idempotent and order-independent.
    """
    if not keyword or keyword != keyword.lower():
        raise ValueError("keyword must be non-empty and lowercase")
    excluded = frozenset(e.lower() for e in exclusions)
    firms: list[FirmRecord] = []
    matched: list[str] = []
    for rec in records:
        for fname in DESCRIPTION_FIELDS:
            if _field_matches(rec.descriptions.get(fname, ""), keyword, excluded):
                firms.append(rec)
                matched.append(fname)
                break
    return FirmPopulation(firms=tuple(firms), matched_fields=tuple(matched), provenance=provenance)


@dataclass(frozen=True)
class NaicsShares:
    """Shares over firms with a non-missing industry code; the no-code
    fraction of the whole population is reported separately."""

    shares: dict[str, float]
    missing_share: float


def naics_distribution(population: FirmPopulation) -> NaicsShares:
    """Industry-code shares among coded firms, summing to 1 within 1e-12."""
    if len(population) == 0:
        return NaicsShares(shares={}, missing_share=0.0)
    counts: dict[str, int] = {}
    n_missing = 0
    for firm in population.firms:
        if firm.naics4 is None:
            n_missing += 1
        else:
            counts[firm.naics4] = counts.get(firm.naics4, 0) + 1
    n_coded = len(population) - n_missing
    shares = {code: c / n_coded for code, c in sorted(counts.items())} if n_coded else {}
    return NaicsShares(shares=shares, missing_share=n_missing / len(population))


@dataclass(frozen=True)
class CountryFirmAggregate:
    country: str
    firm_count: int
    employees_total: int  # firms with missing headcount contribute 0
    revenue_total: float  # USD/year, missing contribute 0


def country_aggregates(population: FirmPopulation) -> list[CountryFirmAggregate]:
    """Per-country firm counts and employee/revenue totals, sorted by country.

    Counts include every firm; totals skip missing values rather than
    imputing them.
    """
    counts: dict[str, int] = {}
    employees: dict[str, int] = {}
    revenue: dict[str, float] = {}
    for firm in population.firms:
        counts[firm.country] = counts.get(firm.country, 0) + 1
        if firm.employees is not None:
            employees[firm.country] = employees.get(firm.country, 0) + firm.employees
        if firm.revenue is not None:
            revenue[firm.country] = revenue.get(firm.country, 0.0) + firm.revenue
    return [
        CountryFirmAggregate(
            country=c,
            firm_count=counts[c],
            employees_total=employees.get(c, 0),
            revenue_total=revenue.get(c, 0.0),
        )
        for c in sorted(counts)
    ]


def pearson(
    x: Sequence[float | None],
    y: Sequence[float | None],
) -> tuple[float, float]:
    """Product-moment correlation and two-sided p-value (t, n-2 dof).

    Pairs with a missing value on either side are dropped first; at least 3
    complete pairs and non-zero variance on both sides are required.
    """
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    pairs = [
        (float(a), float(b))
        for a, b in zip(x, y)
        if a is not None and b is not None and not (math.isnan(float(a)) or math.isnan(float(b)))
    ]
    n = len(pairs)
    if n < 3:
        raise CorrelationError(f"need >= 3 complete pairs, got {n}")
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((a - mx) ** 2 for a in xs)
    syy = sum((b - my) ** 2 for b in ys)
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("zero variance in at least one variable")
    sxy = sum((a - mx) * (b - my) for a, b in pairs)
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return r, p
