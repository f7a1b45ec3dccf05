"""No-intercept least squares linking trade and firm variables to EAF capacity.

One observation per country; the model is fit through the origin, so the
coefficient of determination uses the uncentered convention (total sum of
squares about zero), as is standard when no intercept is estimated.

Units contract, enforced by the loader's column names: capacities in
kilotonnes/year, trade flows in tonnes/year, revenue in USD/year, employees
in persons. Coefficient magnitudes are only meaningful under these units.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
from scipy import linalg, stats


class SingularDesignError(ValueError):
    """Design matrix is rank deficient."""


class InsufficientDataError(ValueError):
    """Fewer observations than regressors plus one."""


class ObservationSchemaError(ValueError):
    """Observation table header missing required unit-bearing columns."""


@dataclass(frozen=True)
class CountryObservation:
    country: str
    eaf_capacity: float  # kt/year, dependent variable
    exports: float  # t/year, window average
    imports: float  # t/year, window average
    n_firms: float
    employees: float
    revenue: float  # USD/year
    bof_capacity: float  # kt/year

    def __post_init__(self) -> None:
        for name in ("eaf_capacity", "exports", "imports", "n_firms", "employees", "revenue", "bof_capacity"):
            v = getattr(self, name)
            if v < 0 or v != v:
                raise ValueError(f"{self.country}: {name} must be >= 0, got {v}")


DEFAULT_REGRESSORS = ("exports", "imports", "n_firms", "bof_capacity", "revenue", "employees")

# Loader column names carry the units; exact match required.
OBSERVATION_COLUMNS = {
    "country": "country",
    "eaf_capacity": "eaf_capacity_kt_per_year",
    "exports": "exports_t_per_year",
    "imports": "imports_t_per_year",
    "n_firms": "n_firms",
    "employees": "employees",
    "revenue": "revenue_usd_per_year",
    "bof_capacity": "bof_capacity_kt_per_year",
}


@dataclass(frozen=True)
class Coefficient:
    name: str
    estimate: float
    se: float
    t_stat: float
    p_value: float


@dataclass(frozen=True)
class RegressionFit:
    coefficients: tuple[Coefficient, ...]
    r2: float  # uncentered
    adjusted_r2: float
    residuals: np.ndarray
    fitted: np.ndarray
    countries: tuple[str, ...]
    actual: np.ndarray
    n_observations: int
    n_regressors: int
    robust: bool

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)


def parse_observations(source: str | Path | TextIO | Iterable[str], delimiter: str = ",") -> list[CountryObservation]:
    """Read the country observation table; headers must carry the documented
    unit suffixes so mismatched units fail loudly at load time."""
    owned = isinstance(source, (str, Path))
    stream = open(source, "r", newline="", encoding="utf-8") if owned else source
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        header = reader.fieldnames or []
        missing = [c for c in OBSERVATION_COLUMNS.values() if c not in header]
        if missing:
            raise ObservationSchemaError(f"missing required column(s) {missing}; header was {header}")
        rows = []
        for row in reader:
            rows.append(
                CountryObservation(
                    country=row[OBSERVATION_COLUMNS["country"]].strip(),
                    eaf_capacity=float(row[OBSERVATION_COLUMNS["eaf_capacity"]]),
                    exports=float(row[OBSERVATION_COLUMNS["exports"]]),
                    imports=float(row[OBSERVATION_COLUMNS["imports"]]),
                    n_firms=float(row[OBSERVATION_COLUMNS["n_firms"]]),
                    employees=float(row[OBSERVATION_COLUMNS["employees"]]),
                    revenue=float(row[OBSERVATION_COLUMNS["revenue"]]),
                    bof_capacity=float(row[OBSERVATION_COLUMNS["bof_capacity"]]),
                )
            )
        return rows
    finally:
        if owned:
            stream.close()


def _collinear_columns(X: np.ndarray, names: Sequence[str], rank: int) -> list[str]:
    # Pivoted QR: columns pivoted past the numerical rank are the dependent ones.
    _, _, pivot = linalg.qr(X, mode="economic", pivoting=True)
    return sorted(names[i] for i in pivot[rank:])


def fit_no_intercept(
    observations: Sequence[CountryObservation],
    regressors: Sequence[str] = DEFAULT_REGRESSORS,
    robust: bool = False,
) -> RegressionFit:
    """OLS through the origin with classical (or HC1 robust) standard errors.

    p-values are two-sided under the t-distribution with n - k degrees of
    freedom. Residual sums below machine precision relative to the total sum
    of squares are treated as an exact fit (SE 0, R-squared 1).
    """
    if not regressors:
        raise ValueError("at least one regressor required")
    unknown = [r for r in regressors if r not in DEFAULT_REGRESSORS]
    if unknown:
        raise ValueError(f"unknown regressor(s) {unknown}; choose from {DEFAULT_REGRESSORS}")
    X = np.array([[getattr(o, r) for r in regressors] for o in observations], dtype=np.float64)
    y = np.array([o.eaf_capacity for o in observations], dtype=np.float64)
    n, k = X.shape
    if n <= k:
        raise InsufficientDataError(f"{n} observation(s) cannot identify {k} regressor(s)")
    rank = int(np.linalg.matrix_rank(X))
    if rank < k:
        bad = _collinear_columns(X, list(regressors), rank)
        raise SingularDesignError(f"design matrix rank {rank} < {k}; collinear column(s): {bad}")

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ beta
    ssr = float(residuals @ residuals)
    tss = float(y @ y)
    if tss > 0.0 and ssr / tss < 1e-14:
        ssr = 0.0
        residuals = np.zeros_like(residuals)

    xtx_inv = np.linalg.inv(X.T @ X)
    dof = n - k
    if robust:
        meat = (X * residuals[:, None] ** 2).T @ X
        cov = xtx_inv @ meat @ xtx_inv * (n / dof)
    else:
        cov = (ssr / dof) * xtx_inv
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))

    coefficients = []
    for name, b, s in zip(regressors, beta, se):
        if s > 0.0:
            t = float(b / s)
            p = float(2.0 * stats.t.sf(abs(t), dof))
        else:
            t = math.inf if b > 0 else (-math.inf if b < 0 else 0.0)
            p = 0.0 if b != 0 else 1.0
        coefficients.append(Coefficient(name=name, estimate=float(b), se=float(s), t_stat=t, p_value=p))

    r2 = 1.0 - ssr / tss if tss > 0.0 else 1.0
    adjusted = 1.0 - (1.0 - r2) * n / dof
    return RegressionFit(
        coefficients=tuple(coefficients),
        r2=r2,
        adjusted_r2=adjusted,
        residuals=residuals,
        fitted=X @ beta,
        countries=tuple(o.country for o in observations),
        actual=y,
        n_observations=n,
        n_regressors=k,
        robust=robust,
    )


def predict(fit: RegressionFit, observation: CountryObservation | Mapping[str, float]) -> float:
    """Inner product of fitted coefficients and the observation's regressors;
    no intercept, so the origin maps to exactly zero."""
    total = 0.0
    for c in fit.coefficients:
        if isinstance(observation, Mapping):
            if c.name not in observation:
                raise ValueError(f"observation missing regressor {c.name!r}")
            value = observation[c.name]
        else:
            value = getattr(observation, c.name)
        total += c.estimate * float(value)
    return total
