"""No-intercept OLS: estimates, standard errors, diagnostics, loader."""
import io

import numpy as np
import pytest
from scipy import special

from scrapflow.regression import (
    DEFAULT_REGRESSORS,
    CountryObservation,
    InsufficientDataError,
    ObservationSchemaError,
    SingularDesignError,
    fit_no_intercept,
    parse_observations,
    predict,
)


def obs(country="AUT", eaf_capacity=0.0, exports=0.0, imports=0.0, n_firms=0.0,
        employees=0.0, revenue=0.0, bof_capacity=0.0):
    return CountryObservation(
        country=country, eaf_capacity=eaf_capacity, exports=exports,
        imports=imports, n_firms=n_firms, employees=employees,
        revenue=revenue, bof_capacity=bof_capacity,
    )


# ---------------------------------------------------------------------------
# exact fits and hand-checked estimates


def test_two_regressor_hand_solution():
    rows = [
        obs("A", eaf_capacity=1.0, exports=1.0, imports=0.0),
        obs("B", eaf_capacity=2.0, exports=0.0, imports=1.0),
        obs("C", eaf_capacity=3.0, exports=1.0, imports=1.0),
    ]
    fit = fit_no_intercept(rows, regressors=("exports", "imports"))
    assert fit.coefficient("exports").estimate == pytest.approx(1.0, abs=1e-12)
    assert fit.coefficient("imports").estimate == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(fit.residuals, 0.0)
    assert fit.r2 == 1.0


def test_exact_proportional_fit_clamps_to_zero_residuals():
    rows = [obs(c, eaf_capacity=2.0 * x, exports=x) for c, x in zip("ABC", (1.0, 2.0, 3.0))]
    fit = fit_no_intercept(rows, regressors=("exports",))
    c = fit.coefficient("exports")
    assert c.estimate == pytest.approx(2.0, rel=1e-13)
    assert c.se == 0.0
    assert c.t_stat == float("inf")
    assert c.p_value == 0.0
    assert fit.r2 == 1.0
    assert fit.adjusted_r2 == 1.0
    assert np.all(fit.residuals == 0.0)


def test_uncentered_r2_and_adjustment():
    rows = [
        obs("A", eaf_capacity=1.0, exports=1.0),
        obs("B", eaf_capacity=1.0, exports=2.0),
        obs("C", eaf_capacity=2.0, exports=3.0),
    ]
    fit = fit_no_intercept(rows, regressors=("exports",))
    # beta = sum(xy)/sum(x^2) = (1 + 2 + 6) / 14 = 9/14
    beta = 9.0 / 14.0
    ssr = sum((y - beta * x) ** 2 for x, y in ((1, 1), (2, 1), (3, 2)))
    tss = 1.0 + 1.0 + 4.0  # about zero, not about the mean
    assert fit.coefficient("exports").estimate == pytest.approx(beta, rel=1e-13)
    assert fit.r2 == pytest.approx(1.0 - ssr / tss, rel=1e-13)
    assert fit.adjusted_r2 == pytest.approx(1.0 - (1.0 - fit.r2) * 3 / 2, rel=1e-13)


def test_classical_se_and_p_value_oracle():
    rng = np.random.default_rng(4)
    x = rng.uniform(1.0, 5.0, 8)
    y = 2.0 * x + rng.uniform(0.0, 1.0, 8)
    rows = [obs(f"C{i}", eaf_capacity=float(yi), exports=float(xi)) for i, (xi, yi) in enumerate(zip(x, y))]
    fit = fit_no_intercept(rows, regressors=("exports",))
    beta = float(x @ y / (x @ x))
    resid = y - beta * x
    dof = 8 - 1
    se = float(np.sqrt((resid @ resid) / dof / (x @ x)))
    t = beta / se
    # two-sided t-distribution tail via the regularized incomplete beta identity
    p = float(special.betainc(dof / 2.0, 0.5, dof / (dof + t * t)))
    c = fit.coefficient("exports")
    assert c.estimate == pytest.approx(beta, rel=1e-12)
    assert c.se == pytest.approx(se, rel=1e-12)
    assert c.t_stat == pytest.approx(t, rel=1e-12)
    assert c.p_value == pytest.approx(p, rel=1e-10)


def test_lstsq_agrees_with_normal_equations_on_random_instances():
    rng = np.random.default_rng(2024)
    regressor_pool = list(DEFAULT_REGRESSORS)
    worst = 0.0
    for trial in range(50):
        k = int(rng.integers(1, 5))
        names = list(rng.choice(regressor_pool, size=k, replace=False))
        n = int(rng.integers(k + 2, k + 12))
        X = rng.uniform(0.5, 10.0, (n, k))
        beta_true = rng.uniform(0.5, 3.0, k)
        y = X @ beta_true + rng.uniform(0.0, 0.5, n)
        rows = []
        for i in range(n):
            fields = dict(zip(names, X[i]))
            rows.append(obs(f"C{i}", eaf_capacity=float(y[i]), **{k_: float(v) for k_, v in fields.items()}))
        fit = fit_no_intercept(rows, regressors=tuple(names))
        beta_ref = np.linalg.solve(X.T @ X, X.T @ y)
        got = np.array([fit.coefficient(nm).estimate for nm in names])
        rel = float(np.max(np.abs(got - beta_ref) / np.maximum(np.abs(beta_ref), 1e-12)))
        worst = max(worst, rel)
    assert worst < 1e-9


def test_residuals_orthogonal_to_design():
    rng = np.random.default_rng(7)
    n = 20
    rows = [
        obs(
            f"C{i}",
            eaf_capacity=float(rng.uniform(0, 100)),
            exports=float(rng.uniform(0, 10)),
            imports=float(rng.uniform(0, 10)),
            n_firms=float(rng.uniform(0, 50)),
        )
        for i in range(n)
    ]
    fit = fit_no_intercept(rows, regressors=("exports", "imports", "n_firms"))
    X = np.array([[getattr(o, r) for r in ("exports", "imports", "n_firms")] for o in rows])
    dot = X.T @ fit.residuals
    scale = np.linalg.norm(X, axis=0) * np.linalg.norm(fit.actual)
    assert np.all(np.abs(dot) / scale < 1e-8)


# ---------------------------------------------------------------------------
# invariances


def _random_rows(seed, n=12):
    rng = np.random.default_rng(seed)
    return [
        obs(
            f"C{i}",
            eaf_capacity=float(rng.uniform(1, 100)),
            exports=float(rng.uniform(1, 10)),
            imports=float(rng.uniform(1, 10)),
        )
        for i in range(n)
    ]


def test_observation_order_invariance():
    rows = _random_rows(1)
    fit_a = fit_no_intercept(rows, regressors=("exports", "imports"))
    fit_b = fit_no_intercept(rows[::-1], regressors=("exports", "imports"))
    for name in ("exports", "imports"):
        assert fit_a.coefficient(name).estimate == pytest.approx(fit_b.coefficient(name).estimate, rel=1e-12)
        assert fit_a.coefficient(name).se == pytest.approx(fit_b.coefficient(name).se, rel=1e-12)
    assert fit_a.r2 == pytest.approx(fit_b.r2, rel=1e-12)


def test_regressor_order_invariance():
    rows = _random_rows(2)
    fit_a = fit_no_intercept(rows, regressors=("exports", "imports"))
    fit_b = fit_no_intercept(rows, regressors=("imports", "exports"))
    for name in ("exports", "imports"):
        assert fit_a.coefficient(name).estimate == pytest.approx(fit_b.coefficient(name).estimate, rel=1e-10)
        assert fit_a.coefficient(name).p_value == pytest.approx(fit_b.coefficient(name).p_value, rel=1e-10)


def test_column_scaling_rescales_estimate_and_se_only():
    rows = _random_rows(3)
    c = 100.0
    scaled = [
        obs(o.country, eaf_capacity=o.eaf_capacity, exports=o.exports * c, imports=o.imports)
        for o in rows
    ]
    fit_a = fit_no_intercept(rows, regressors=("exports", "imports"))
    fit_b = fit_no_intercept(scaled, regressors=("exports", "imports"))
    assert fit_b.coefficient("exports").estimate == pytest.approx(fit_a.coefficient("exports").estimate / c, rel=1e-10)
    assert fit_b.coefficient("exports").se == pytest.approx(fit_a.coefficient("exports").se / c, rel=1e-10)
    assert fit_b.coefficient("exports").t_stat == pytest.approx(fit_a.coefficient("exports").t_stat, rel=1e-10)
    assert fit_b.coefficient("exports").p_value == pytest.approx(fit_a.coefficient("exports").p_value, rel=1e-10)
    assert fit_b.r2 == pytest.approx(fit_a.r2, rel=1e-12)


# ---------------------------------------------------------------------------
# robust covariance


def test_hc1_covariance_oracle():
    rows = _random_rows(5)
    fit = fit_no_intercept(rows, regressors=("exports", "imports"), robust=True)
    X = np.array([[o.exports, o.imports] for o in rows])
    y = np.array([o.eaf_capacity for o in rows])
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    e = y - X @ beta
    n, k = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    cov = xtx_inv @ (X * e[:, None] ** 2).T @ X @ xtx_inv * (n / (n - k))
    se_ref = np.sqrt(np.diag(cov))
    assert fit.robust is True
    assert fit.coefficient("exports").se == pytest.approx(se_ref[0], rel=1e-10)
    assert fit.coefficient("imports").se == pytest.approx(se_ref[1], rel=1e-10)
    classical = fit_no_intercept(rows, regressors=("exports", "imports"))
    assert classical.coefficient("exports").estimate == pytest.approx(fit.coefficient("exports").estimate, rel=1e-12)
    assert classical.coefficient("exports").se != pytest.approx(fit.coefficient("exports").se, rel=1e-6)


# ---------------------------------------------------------------------------
# error handling


def test_collinear_design_rejected_with_column_names():
    rows = [
        obs(f"C{i}", eaf_capacity=float(i + 1), exports=float(i + 1), imports=2.0 * (i + 1))
        for i in range(5)
    ]
    with pytest.raises(SingularDesignError) as err:
        fit_no_intercept(rows, regressors=("exports", "imports"))
    assert "exports" in str(err.value) or "imports" in str(err.value)


def test_too_few_observations_rejected():
    rows = _random_rows(6, n=2)
    with pytest.raises(InsufficientDataError):
        fit_no_intercept(rows, regressors=("exports", "imports"))


def test_unknown_regressor_rejected():
    with pytest.raises(ValueError, match="unknown regressor"):
        fit_no_intercept(_random_rows(7), regressors=("exports", "gdp"))


def test_empty_regressors_rejected():
    with pytest.raises(ValueError):
        fit_no_intercept(_random_rows(8), regressors=())


def test_negative_observation_value_rejected():
    with pytest.raises(ValueError, match="revenue"):
        obs("AUT", revenue=-5.0)


def test_nan_observation_value_rejected():
    with pytest.raises(ValueError):
        obs("AUT", exports=float("nan"))


# ---------------------------------------------------------------------------
# predict


def test_predict_origin_is_zero():
    rows = _random_rows(9)
    fit = fit_no_intercept(rows, regressors=("exports", "imports"))
    assert predict(fit, obs("ZZZ")) == 0.0


def test_predict_matches_hand_value():
    rows = [obs(c, eaf_capacity=2.0 * x, exports=x) for c, x in zip("ABC", (1.0, 2.0, 3.0))]
    fit = fit_no_intercept(rows, regressors=("exports",))
    assert predict(fit, {"exports": 7.0}) == pytest.approx(14.0, rel=1e-12)


def test_predict_mapping_missing_regressor():
    rows = _random_rows(10)
    fit = fit_no_intercept(rows, regressors=("exports", "imports"))
    with pytest.raises(ValueError, match="imports"):
        predict(fit, {"exports": 1.0})


# ---------------------------------------------------------------------------
# loader


HEADER = (
    "country,eaf_capacity_kt_per_year,exports_t_per_year,imports_t_per_year,"
    "n_firms,employees,revenue_usd_per_year,bof_capacity_kt_per_year"
)


def test_parse_observations_round_trip():
    text = HEADER + "\nAUT,1590,120000.5,80000,31,4000,9.1e9,5000\n"
    rows = parse_observations(io.StringIO(text))
    assert len(rows) == 1
    o = rows[0]
    assert o.country == "AUT"
    assert o.eaf_capacity == 1590.0
    assert o.exports == 120000.5
    assert o.revenue == 9.1e9


def test_parse_observations_missing_column():
    text = HEADER.replace(",employees", "") + "\n"
    with pytest.raises(ObservationSchemaError, match="employees"):
        parse_observations(io.StringIO(text.replace(",4000", "")))


def test_parse_observations_fixture(observations_csv):
    rows = parse_observations(observations_csv)
    assert len(rows) == 14
    assert len({o.country for o in rows}) == 14
    assert all(o.eaf_capacity >= 0 for o in rows)
