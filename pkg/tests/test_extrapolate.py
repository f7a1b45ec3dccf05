"""Empirical CDFs, inverse-transform sampling, and ecosystem extrapolation."""
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scrapflow.extrapolate import (
    AdditionalCompanies,
    CapacityPlan,
    CapacitySchemaError,
    EmpiricalCDF,
    Quartiles,
    additional_companies,
    aggregate_totals,
    build_variable_cdfs,
    draw_firm_coefficients,
    extrapolate_ecosystem,
    inverse_sample,
    parse_capacity_plans,
    sample_quantile,
    simulate_population,
)
from scrapflow.firm_registry import FirmPopulation, FirmRecord
from scrapflow.util import derive_rng

# ---------------------------------------------------------------------------
# EmpiricalCDF


def test_single_value_cdf():
    cdf = EmpiricalCDF.from_values([5.0])
    assert cdf.n == 1
    assert cdf.cdf(4.999) == 0.0
    assert cdf.cdf(5.0) == 1.0
    assert cdf.cdf(100.0) == 1.0


def test_two_value_cdf_steps():
    cdf = EmpiricalCDF.from_values([3.0, 1.0])
    assert list(cdf.values) == [1.0, 3.0]
    assert cdf.cdf(0.5) == 0.0
    assert cdf.cdf(1.0) == 0.5
    assert cdf.cdf(2.0) == 0.5
    assert cdf.cdf(3.0) == 1.0


def test_from_values_drops_missing():
    cdf = EmpiricalCDF.from_values([2.0, None, float("nan"), 1.0])
    assert list(cdf.values) == [1.0, 2.0]


def test_empty_cdf_rejected():
    with pytest.raises(ValueError):
        EmpiricalCDF.from_values([])
    with pytest.raises(ValueError):
        EmpiricalCDF.from_values([None, float("nan")])


def test_unsorted_construction_rejected():
    with pytest.raises(ValueError):
        EmpiricalCDF(values=np.array([3.0, 1.0]))


# ---------------------------------------------------------------------------
# inverse_sample / sample_quantile


def test_inverse_sample_two_values():
    cdf = EmpiricalCDF.from_values([1.0, 3.0])
    assert inverse_sample(cdf, 0.0) == 1.0
    assert inverse_sample(cdf, 0.25) == 1.0
    assert inverse_sample(cdf, 0.5) == 1.0  # smallest v with CDF(v) >= 0.5
    assert inverse_sample(cdf, 0.500001) == 3.0
    assert inverse_sample(cdf, 0.999) == 3.0


def test_inverse_sample_domain():
    cdf = EmpiricalCDF.from_values([1.0])
    with pytest.raises(ValueError):
        inverse_sample(cdf, 1.0)
    with pytest.raises(ValueError):
        inverse_sample(cdf, -0.1)


def test_inverse_sample_reproduces_empirical_distribution():
    # binomial three-sigma check on 100 equiprobable values
    values = np.arange(100, dtype=np.float64)
    cdf = EmpiricalCDF.from_values(values)
    rng = derive_rng(10, "sampling-check")
    n = 100_000
    draws = np.array([inverse_sample(cdf, float(u)) for u in rng.random(n)])
    counts = np.bincount(draws.astype(int), minlength=100)
    expected = n / 100
    band = 3.0 * math.sqrt(n * 0.01 * 0.99)
    assert np.max(np.abs(counts - expected)) < band


def test_sample_quantile_conventions():
    values = np.array([4.0, 1.0, 3.0, 2.0])
    assert sample_quantile(values, 0.25) == 1.0
    assert sample_quantile(values, 0.5) == 2.0  # lower median, no interpolation
    assert sample_quantile(values, 0.75) == 3.0
    assert sample_quantile(values, 1.0) == 4.0
    odd = np.array([5.0, 1.0, 3.0])
    assert sample_quantile(odd, 0.5) == 3.0
    with pytest.raises(ValueError):
        sample_quantile(values, 0.0)
    with pytest.raises(ValueError):
        sample_quantile(values, 1.1)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
@settings(max_examples=80)
def test_quartiles_ordered(values):
    q = Quartiles.of(np.array(values))
    assert q.q25 <= q.median <= q.q75
    assert q.q25 in values and q.median in values and q.q75 in values


def test_quartile_ordering_enforced():
    with pytest.raises(ValueError):
        Quartiles(median=1.0, q25=2.0, q75=3.0)


def test_quantile_matches_inverse_sample_convention():
    # same order-statistic rule on both paths
    values = np.array([10.0, 20.0, 30.0, 40.0, 50.0])
    cdf = EmpiricalCDF.from_values(values)
    for q in (0.2, 0.25, 0.5, 0.75, 0.9):
        assert sample_quantile(values, q) == inverse_sample(cdf, q - 1e-12)


# ---------------------------------------------------------------------------
# coefficient draws


def test_draw_firm_coefficients_all_positive_under_heavy_rejection():
    rng = derive_rng(0, "firm-coefficient")
    draws = draw_firm_coefficients(1.0, 10.0, 5000, rng)
    assert draws.shape == (5000,)
    assert np.all(draws > 0.0)


def test_draw_firm_coefficients_zero_sd_degenerate():
    rng = derive_rng(0, "firm-coefficient")
    draws = draw_firm_coefficients(79.0, 0.0, 100, rng)
    assert np.all(draws == 79.0)


def test_draw_firm_coefficients_validation():
    rng = derive_rng(0, "firm-coefficient")
    with pytest.raises(ValueError):
        draw_firm_coefficients(0.0, 1.0, 10, rng)
    with pytest.raises(ValueError):
        draw_firm_coefficients(79.0, -1.0, 10, rng)
    with pytest.raises(ValueError):
        draw_firm_coefficients(79.0, 1.0, 0, rng)


# ---------------------------------------------------------------------------
# additional_companies


def test_point_estimates_from_planned_capacity():
    aut = additional_companies(CapacityPlan("AUT", 2450.0), 79.0, 11.0, n_draws=2000, seed=1)
    deu = additional_companies(CapacityPlan("DEU", 17600.0), 79.0, 11.0, n_draws=2000, seed=1)
    assert aut.point == pytest.approx(2450.0 / 79.0, rel=1e-12)
    assert aut.rounded == 31
    assert deu.rounded == 223


def test_zero_plan_degenerates():
    out = additional_companies(CapacityPlan("LUX", 0.0), 79.0, 11.0, n_draws=500, seed=2)
    assert out.point == 0.0
    assert out.mean == 0.0
    assert out.sd == 0.0
    assert out.rounded == 0


def test_shared_coefficient_draws_scale_exactly():
    rng = derive_rng(3, "firm-coefficient")
    shared = draw_firm_coefficients(79.0, 11.0, 1000, rng)
    a = additional_companies(CapacityPlan("A", 1000.0), 79.0, 11.0, coefficient_draws=shared)
    b = additional_companies(CapacityPlan("B", 3000.0), 79.0, 11.0, coefficient_draws=shared)
    assert b.mean == pytest.approx(3.0 * a.mean, rel=1e-12)
    assert b.sd == pytest.approx(3.0 * a.sd, rel=1e-12)


def test_negative_plan_rejected():
    with pytest.raises(ValueError):
        CapacityPlan("AUT", -1.0)


# ---------------------------------------------------------------------------
# simulate_population


def test_zero_companies_all_zero_totals():
    cdf = EmpiricalCDF.from_values([1.0])
    sim = simulate_population(0, cdf, cdf, iterations=10, seed=0)
    assert np.all(sim.revenue_sums == 0.0)
    assert np.all(sim.employee_sums == 0.0)
    assert sim.revenue.median == 0.0 and sim.revenue.q75 - sim.revenue.q25 == 0.0


def test_degenerate_cdfs_give_exact_totals():
    rev = EmpiricalCDF.from_values([1e6])
    emp = EmpiricalCDF.from_values([10.0])
    sim = simulate_population(31, rev, emp, iterations=50, seed=4)
    assert np.all(sim.revenue_sums == 3.1e7)
    assert np.all(sim.employee_sums == 310.0)
    assert sim.revenue.median == 3.1e7
    assert sim.employees.q75 - sim.employees.q25 == 0.0


def test_two_point_cdfs_enumerate_exactly():
    # two firms from {1e6, 3e6} x {10, 50}: sums enumerate to
    # [2e6, 4e6, 4e6, 6e6] and [20, 60, 60, 100]; with enough iterations the
    # simulated quartiles land on the enumeration quartiles exactly
    rev = EmpiricalCDF.from_values([1e6, 3e6])
    emp = EmpiricalCDF.from_values([10.0, 50.0])
    sim = simulate_population(2, rev, emp, iterations=1000, seed=11)
    assert set(np.unique(sim.revenue_sums)) <= {2e6, 4e6, 6e6}
    assert set(np.unique(sim.employee_sums)) <= {20.0, 60.0, 100.0}
    want_rev = Quartiles.of(np.array([2e6, 4e6, 4e6, 6e6]))
    want_emp = Quartiles.of(np.array([20.0, 60.0, 60.0, 100.0]))
    assert (sim.revenue.q25, sim.revenue.median, sim.revenue.q75) == (
        want_rev.q25, want_rev.median, want_rev.q75)
    assert (sim.employees.q25, sim.employees.median, sim.employees.q75) == (
        want_emp.q25, want_emp.median, want_emp.q75)


def test_simulation_deterministic_and_label_separated():
    rev = EmpiricalCDF.from_values([1.0, 2.0, 3.0])
    emp = EmpiricalCDF.from_values([10.0, 20.0])
    a = simulate_population(5, rev, emp, iterations=20, seed=6, labels=("AUT",))
    b = simulate_population(5, rev, emp, iterations=20, seed=6, labels=("AUT",))
    c = simulate_population(5, rev, emp, iterations=20, seed=6, labels=("DEU",))
    assert np.array_equal(a.revenue_sums, b.revenue_sums)
    assert np.array_equal(a.employee_sums, b.employee_sums)
    assert not np.array_equal(a.revenue_sums, c.revenue_sums)


def test_coupled_mode_is_comonotone():
    rev = EmpiricalCDF.from_values([1e6, 3e6])
    emp = EmpiricalCDF.from_values([10.0, 50.0])
    sim = simulate_population(2, rev, emp, iterations=200, seed=7, coupled=True)
    # same uniforms feed both CDFs, so employee sums are a deterministic map
    # of revenue sums: 2e6 -> 20, 4e6 -> 60, 6e6 -> 100
    mapping = {2e6: 20.0, 4e6: 60.0, 6e6: 100.0}
    for r, e in zip(sim.revenue_sums, sim.employee_sums):
        assert mapping[float(r)] == float(e)


def test_simulate_population_validation():
    cdf = EmpiricalCDF.from_values([1.0])
    with pytest.raises(ValueError):
        simulate_population(-1, cdf, cdf)
    with pytest.raises(ValueError):
        simulate_population(1, cdf, cdf, iterations=0)


# ---------------------------------------------------------------------------
# aggregation


def _degenerate_extrapolations():
    rev_a = EmpiricalCDF.from_values([1e6])
    emp_a = EmpiricalCDF.from_values([10.0])
    rev_b = EmpiricalCDF.from_values([2e6])
    emp_b = EmpiricalCDF.from_values([20.0])
    shared = draw_firm_coefficients(79.0, 11.0, 500, derive_rng(8, "firm-coefficient"))
    from scrapflow.extrapolate import CountryExtrapolation

    def one(country, planned, rev, emp, n_sim):
        return CountryExtrapolation(
            country=country,
            planned_eaf=planned,
            companies_point=planned / 79.0,
            company_draws=planned / shared,
            simulated=simulate_population(n_sim, rev, emp, iterations=40, seed=8, labels=(country,)),
            cdf_source="country",
        )

    return one("AAA", 790.0, rev_a, emp_a, 10), one("BBB", 1580.0, rev_b, emp_b, 20)


def test_aggregate_single_country_identity():
    a, _ = _degenerate_extrapolations()
    total = aggregate_totals([a])
    assert total.country == "TOTAL"
    assert np.array_equal(total.company_draws, a.company_draws)
    assert np.array_equal(total.simulated.revenue_sums, a.simulated.revenue_sums)
    assert total.planned_eaf == a.planned_eaf


def test_aggregate_sums_elementwise():
    a, b = _degenerate_extrapolations()
    total = aggregate_totals([a, b])
    assert np.all(total.simulated.revenue_sums == 10 * 1e6 + 20 * 2e6)
    assert np.all(total.simulated.employee_sums == 10 * 10.0 + 20 * 20.0)
    assert total.simulated.n_companies == 30
    np.testing.assert_allclose(total.company_draws, a.company_draws + b.company_draws)


def test_shared_draw_sd_adds_linearly():
    a, b = _degenerate_extrapolations()
    total = aggregate_totals([a, b]).result()
    sd_a = a.result().companies_sd
    sd_b = b.result().companies_sd
    assert total.companies_sd == pytest.approx(sd_a + sd_b, rel=1e-10)
    assert total.companies_sd > math.hypot(sd_a, sd_b)  # exceeds the independent-error value


def test_aggregate_mismatched_runs_rejected():
    a, b = _degenerate_extrapolations()
    from scrapflow.extrapolate import CountryExtrapolation

    short = CountryExtrapolation(
        country=b.country,
        planned_eaf=b.planned_eaf,
        companies_point=b.companies_point,
        company_draws=b.company_draws[:-1],
        simulated=b.simulated,
        cdf_source=b.cdf_source,
    )
    with pytest.raises(ValueError):
        aggregate_totals([a, short])
    with pytest.raises(ValueError):
        aggregate_totals([])


# ---------------------------------------------------------------------------
# CDF sourcing and full extrapolation


def _population(counts: dict[str, int]) -> FirmPopulation:
    firms = []
    matched = []
    for country, n in counts.items():
        for i in range(n):
            firms.append(
                FirmRecord(
                    firm_id=f"{country}{i}",
                    country=country,
                    revenue=1e6 * (i + 1),
                    employees=10 * (i + 1),
                    descriptions={"trade description english": "scrap"},
                )
            )
            matched.append("trade description english")
    return FirmPopulation(firms=tuple(firms), matched_fields=tuple(matched))


def test_variable_cdfs_gate_on_population_size():
    pop = _population({"DEU": 40, "AUT": 5})
    rev, emp, pooled_rev, pooled_emp = build_variable_cdfs(pop, min_country_firms=30)
    assert "DEU" in rev and "DEU" in emp
    assert "AUT" not in rev and "AUT" not in emp
    assert pooled_rev.n == 45 and pooled_emp.n == 45


def test_extrapolation_sources_and_totals():
    pop = _population({"DEU": 40, "AUT": 5})
    plans = [CapacityPlan("DEU", 17600.0), CapacityPlan("AUT", 2450.0)]
    rows, total = extrapolate_ecosystem(
        plans, 79.0, 11.0, pop, n_draws=1000, iterations=50, seed=5, min_country_firms=30
    )
    by = {r.country: r for r in rows}
    assert [r.country for r in rows] == ["AUT", "DEU"]  # sorted
    assert by["DEU"].cdf_source == "country"
    assert by["AUT"].cdf_source == "pooled"
    assert total.country == "TOTAL"
    res = total.result()
    assert res.companies_point == pytest.approx((17600.0 + 2450.0) / 79.0, rel=1e-12)
    assert res.companies_rounded == round((17600.0 + 2450.0) / 79.0)
    r_deu = by["DEU"].result()
    assert r_deu.companies_rounded == 223
    assert r_deu.revenue.q25 <= r_deu.revenue.median <= r_deu.revenue.q75


def test_extrapolation_deterministic():
    pop = _population({"DEU": 40})
    plans = [CapacityPlan("DEU", 17600.0)]
    a_rows, a_total = extrapolate_ecosystem(plans, 79.0, 11.0, pop, n_draws=500, iterations=20, seed=9)
    b_rows, b_total = extrapolate_ecosystem(plans, 79.0, 11.0, pop, n_draws=500, iterations=20, seed=9)
    assert np.array_equal(a_rows[0].company_draws, b_rows[0].company_draws)
    assert np.array_equal(a_total.simulated.revenue_sums, b_total.simulated.revenue_sums)


def test_extrapolation_requires_plans():
    with pytest.raises(ValueError):
        extrapolate_ecosystem([], 79.0, 11.0, _population({"DEU": 40}))


# ---------------------------------------------------------------------------
# loader


def test_parse_capacity_plans_roundtrip():
    text = "country,planned_eaf_kt_per_year\nAUT,2450.0\nDEU,17600.0\n"
    plans = parse_capacity_plans(io.StringIO(text))
    assert [(p.country, p.planned_eaf) for p in plans] == [("AUT", 2450.0), ("DEU", 17600.0)]


def test_parse_capacity_plans_missing_column():
    with pytest.raises(CapacitySchemaError, match="planned_eaf_kt_per_year"):
        parse_capacity_plans(io.StringIO("country,planned\nAUT,1\n"))


def test_parse_capacity_fixture(capacity_csv):
    plans = parse_capacity_plans(capacity_csv)
    assert len(plans) == 14
    assert sum(p.planned_eaf for p in plans) == pytest.approx(57380.0)
