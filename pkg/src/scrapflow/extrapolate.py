"""Firm-ecosystem extrapolation from planned furnace capacity.

Company counts follow from the fitted capacity-per-firm coefficient; their
uncertainty is propagated by Monte Carlo draws of that coefficient, one draw
shared across all countries per iteration (a single fitted coefficient
applies everywhere, so per-country errors are fully correlated and SDs add
roughly linearly under aggregation). Revenue and employee totals come from
inverse-transform sampling of empirical distributions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .countries import EUROPE_POOL
from .firm_registry import FirmPopulation
from .util import derive_rng, derive_seed_sequence, round_half_up


class CapacitySchemaError(ValueError):
    """Capacity table header missing required columns."""


@dataclass(frozen=True)
class CapacityPlan:
    country: str
    planned_eaf: float  # kt/year

    def __post_init__(self) -> None:
        if self.planned_eaf < 0 or self.planned_eaf != self.planned_eaf:
            raise ValueError(f"{self.country}: planned capacity must be >= 0")


CAPACITY_COLUMNS = ("country", "planned_eaf_kt_per_year")


def parse_capacity_plans(source: str | Path | TextIO | Iterable[str], delimiter: str = ",") -> list[CapacityPlan]:
    owned = isinstance(source, (str, Path))
    stream = open(source, "r", newline="", encoding="utf-8") if owned else source
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in CAPACITY_COLUMNS if c not in header]
        if missing:
            raise CapacitySchemaError(f"missing required column(s) {missing}; header was {header}")
        return [
            CapacityPlan(country=row["country"].strip(), planned_eaf=float(row["planned_eaf_kt_per_year"]))
            for row in reader
        ]
    finally:
        if owned:
            stream.close()


@dataclass(frozen=True)
class EmpiricalCDF:
    """Step CDF with jump 1/n at each sorted sample value (ties stack)."""

    values: np.ndarray  # sorted ascending, float64

    def __post_init__(self) -> None:
        if self.values.size == 0:
            raise ValueError("empirical CDF needs at least one value")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("values must be sorted ascending")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "EmpiricalCDF":
        arr = np.asarray([v for v in values if v is not None and not math.isnan(float(v))], dtype=np.float64)
        return cls(values=np.sort(arr))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def cdf(self, x: float) -> float:
        """Fraction of sample values <= x (right-continuous)."""
        return float(np.searchsorted(self.values, x, side="right")) / self.n


def _inverse_indices(u: np.ndarray, n: int) -> np.ndarray:
    idx = np.ceil(u * n).astype(np.int64) - 1
    return np.clip(idx, 0, n - 1)


def inverse_sample(cdf: EmpiricalCDF, u: float) -> float:
    """Generalized inverse: the smallest sample value v with CDF(v) >= u.

    Uniform u reproduces the empirical distribution exactly (each sample
    value drawn with probability 1/n, ties stacking).
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must be in [0, 1), got {u}")
    idx = min(max(math.ceil(u * cdf.n) - 1, 0), cdf.n - 1)
    return float(cdf.values[idx])


def sample_quantile(values: np.ndarray, q: float) -> float:
    """Order-statistic quantile: the smallest value with at least fraction q
    of the sample at or below it (no interpolation, matching inverse_sample)."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must be in (0, 1], got {q}")
    s = np.sort(np.asarray(values, dtype=np.float64))
    idx = min(max(math.ceil(q * s.size) - 1, 0), s.size - 1)
    return float(s[idx])


def draw_firm_coefficients(mean: float, sd: float, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """Normal coefficient draws; non-positive draws are rejected and redrawn
    (a capacity-per-firm coefficient must be positive for counts to exist)."""
    if mean <= 0:
        raise ValueError("coefficient mean must be positive")
    if sd < 0:
        raise ValueError("coefficient sd must be >= 0")
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    draws = rng.normal(mean, sd, size=n_draws)
    bad = draws <= 0.0
    while np.any(bad):
        draws[bad] = rng.normal(mean, sd, size=int(bad.sum()))
        bad = draws <= 0.0
    return draws


@dataclass(frozen=True)
class Quartiles:
    median: float
    q25: float
    q75: float

    def __post_init__(self) -> None:
        if not self.q25 <= self.median <= self.q75:
            raise ValueError(f"quartile ordering violated: {self}")

    @classmethod
    def of(cls, values: np.ndarray) -> "Quartiles":
        return cls(
            median=sample_quantile(values, 0.5),
            q25=sample_quantile(values, 0.25),
            q75=sample_quantile(values, 0.75),
        )


@dataclass(frozen=True)
class AdditionalCompanies:
    point: float  # planned / coefficient mean
    mean: float  # Monte Carlo mean of planned / coefficient draw
    sd: float  # Monte Carlo SD (sample convention)

    @property
    def rounded(self) -> int:
        return round_half_up(self.point)


def additional_companies(
    plan: CapacityPlan,
    beta_firms: float,
    beta_sd: float,
    n_draws: int = 10_000,
    seed: int = 0,
    coefficient_draws: np.ndarray | None = None,
) -> AdditionalCompanies:
    """Company count implied by planned capacity at beta_firms kt/yr per firm.

    Pass the same coefficient_draws array for every country to share the
    coefficient uncertainty across them (the pipeline convention); without
    it, draws come from a stream labeled by the seed alone.
    """
    if coefficient_draws is None:
        coefficient_draws = draw_firm_coefficients(
            beta_firms, beta_sd, n_draws, derive_rng(seed, "firm-coefficient")
        )
    draws = plan.planned_eaf / coefficient_draws
    sd = float(np.std(draws, ddof=1)) if draws.size > 1 else 0.0
    return AdditionalCompanies(point=plan.planned_eaf / beta_firms, mean=float(np.mean(draws)), sd=sd)


@dataclass(frozen=True)
class SimulatedPopulation:
    """Per-iteration totals over a sampled firm population."""

    n_companies: int
    revenue_sums: np.ndarray  # one total per iteration, USD/year
    employee_sums: np.ndarray

    @property
    def revenue(self) -> Quartiles:
        return Quartiles.of(self.revenue_sums)

    @property
    def employees(self) -> Quartiles:
        return Quartiles.of(self.employee_sums)


def simulate_population(
    n_companies: int,
    revenue_cdf: EmpiricalCDF,
    employee_cdf: EmpiricalCDF,
    iterations: int = 1000,
    seed: int = 0,
    labels: Sequence[str] = (),
    coupled: bool = False,
) -> SimulatedPopulation:
    """Draw n_companies (revenue, employees) pairs per iteration and total them.

    Each iteration consumes its own substream spawned from the seed and
    labels, so results are independent of execution order and reproducible
    for a fixed seed. Variables are drawn independently unless coupled, in
    which case the same uniforms feed both CDFs (comonotone draws, a
    sensitivity mode for the ignored revenue-employee correlation).
    """
    if n_companies < 0:
        raise ValueError("n_companies must be >= 0")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    revenue_sums = np.zeros(iterations, dtype=np.float64)
    employee_sums = np.zeros(iterations, dtype=np.float64)
    if n_companies > 0:
        children = derive_seed_sequence(seed, "population-iterations", *labels).spawn(iterations)
        for i, child in enumerate(children):
            rng = np.random.Generator(np.random.PCG64(child))
            u_rev = rng.random(n_companies)
            u_emp = u_rev if coupled else rng.random(n_companies)
            revenue_sums[i] = revenue_cdf.values[_inverse_indices(u_rev, revenue_cdf.n)].sum()
            employee_sums[i] = employee_cdf.values[_inverse_indices(u_emp, employee_cdf.n)].sum()
    return SimulatedPopulation(n_companies=n_companies, revenue_sums=revenue_sums, employee_sums=employee_sums)


@dataclass(frozen=True)
class ExtrapolationResult:
    """Serializable per-country (or total) summary row."""

    country: str
    planned_eaf: float
    companies_point: float
    companies_rounded: int
    companies_mean: float
    companies_sd: float
    revenue: Quartiles
    employees: Quartiles
    cdf_source: str  # "country" or "pooled"


@dataclass(frozen=True)
class CountryExtrapolation:
    """Full Monte Carlo state for one country, reducible to a result row."""

    country: str
    planned_eaf: float
    companies_point: float
    company_draws: np.ndarray  # planned / shared coefficient draws
    simulated: SimulatedPopulation
    cdf_source: str

    def result(self) -> ExtrapolationResult:
        sd = float(np.std(self.company_draws, ddof=1)) if self.company_draws.size > 1 else 0.0
        return ExtrapolationResult(
            country=self.country,
            planned_eaf=self.planned_eaf,
            companies_point=self.companies_point,
            companies_rounded=round_half_up(self.companies_point),
            companies_mean=float(np.mean(self.company_draws)),
            companies_sd=sd,
            revenue=self.simulated.revenue,
            employees=self.simulated.employees,
            cdf_source=self.cdf_source,
        )


def aggregate_totals(extrapolations: Sequence[CountryExtrapolation]) -> CountryExtrapolation:
    """Overall row: company draws summed per shared coefficient draw, revenue
    and employee totals summed per iteration, then summarized.

    Requires every country to have been computed with the same coefficient
    draw array and iteration count, which the pipeline guarantees.
    """
    if not extrapolations:
        raise ValueError("nothing to aggregate")
    n_draws = {e.company_draws.size for e in extrapolations}
    n_iters = {e.simulated.revenue_sums.size for e in extrapolations}
    if len(n_draws) != 1 or len(n_iters) != 1:
        raise ValueError("per-country runs have mismatched draw or iteration counts")
    company_draws = np.sum([e.company_draws for e in extrapolations], axis=0)
    revenue_sums = np.sum([e.simulated.revenue_sums for e in extrapolations], axis=0)
    employee_sums = np.sum([e.simulated.employee_sums for e in extrapolations], axis=0)
    return CountryExtrapolation(
        country="TOTAL",
        planned_eaf=float(sum(e.planned_eaf for e in extrapolations)),
        companies_point=float(sum(e.companies_point for e in extrapolations)),
        company_draws=company_draws,
        simulated=SimulatedPopulation(
            n_companies=int(sum(e.simulated.n_companies for e in extrapolations)),
            revenue_sums=revenue_sums,
            employee_sums=employee_sums,
        ),
        cdf_source="aggregate",
    )


def build_variable_cdfs(
    population: FirmPopulation,
    min_country_firms: int = 30,
    pool_countries: frozenset[str] = EUROPE_POOL,
) -> tuple[Mapping[str, EmpiricalCDF], Mapping[str, EmpiricalCDF], EmpiricalCDF, EmpiricalCDF]:
    """Per-country revenue/employee CDFs where the country has enough matched
    firms, plus the pooled fallback CDFs over the pool countries."""
    by_country: dict[str, list] = {}
    for firm in population.firms:
        by_country.setdefault(firm.country, []).append(firm)
    pooled_rev = [f.revenue for f in population.firms if f.country in pool_countries and f.revenue is not None]
    pooled_emp = [f.employees for f in population.firms if f.country in pool_countries and f.employees is not None]
    if not pooled_rev or not pooled_emp:
        raise ValueError("pooled CDFs are empty: no revenue/employee values among pool countries")
    pooled_rev_cdf = EmpiricalCDF.from_values(pooled_rev)
    pooled_emp_cdf = EmpiricalCDF.from_values(pooled_emp)
    rev_cdfs: dict[str, EmpiricalCDF] = {}
    emp_cdfs: dict[str, EmpiricalCDF] = {}
    for country, firms in by_country.items():
        if len(firms) < min_country_firms:
            continue
        rev = [f.revenue for f in firms if f.revenue is not None]
        emp = [f.employees for f in firms if f.employees is not None]
        if rev:
            rev_cdfs[country] = EmpiricalCDF.from_values(rev)
        if emp:
            emp_cdfs[country] = EmpiricalCDF.from_values(emp)
    return rev_cdfs, emp_cdfs, pooled_rev_cdf, pooled_emp_cdf


def extrapolate_ecosystem(
    plans: Sequence[CapacityPlan],
    beta_firms: float,
    beta_sd: float,
    population: FirmPopulation,
    n_draws: int = 10_000,
    iterations: int = 1000,
    seed: int = 0,
    min_country_firms: int = 30,
    pool_countries: frozenset[str] = EUROPE_POOL,
    coupled: bool = False,
) -> tuple[list[CountryExtrapolation], CountryExtrapolation]:
    """Per-country extrapolations plus the aggregate row.

    The coefficient draw array is generated once and shared by every country;
    population sizes for the revenue/employee simulation are the rounded
    point estimates. Countries with fewer than min_country_firms matched
    firms (or no observed values) fall back to the pooled CDFs.
    """
    if not plans:
        raise ValueError("no capacity plans given")
    rev_cdfs, emp_cdfs, pooled_rev, pooled_emp = build_variable_cdfs(
        population, min_country_firms=min_country_firms, pool_countries=pool_countries
    )
    coefficients = draw_firm_coefficients(beta_firms, beta_sd, n_draws, derive_rng(seed, "firm-coefficient"))
    out: list[CountryExtrapolation] = []
    for plan in sorted(plans, key=lambda p: p.country):
        point = plan.planned_eaf / beta_firms
        n_sim = round_half_up(point)
        rev_cdf = rev_cdfs.get(plan.country)
        emp_cdf = emp_cdfs.get(plan.country)
        n_own = sum(c is not None for c in (rev_cdf, emp_cdf))
        source = ("pooled", "mixed", "country")[n_own]
        simulated = simulate_population(
            n_sim,
            rev_cdf if rev_cdf is not None else pooled_rev,
            emp_cdf if emp_cdf is not None else pooled_emp,
            iterations=iterations,
            seed=seed,
            labels=(plan.country,),
            coupled=coupled,
        )
        out.append(
            CountryExtrapolation(
                country=plan.country,
                planned_eaf=plan.planned_eaf,
                companies_point=point,
                company_draws=plan.planned_eaf / coefficients,
                simulated=simulated,
                cdf_source=source,
            )
        )
    return out, aggregate_totals(out)
