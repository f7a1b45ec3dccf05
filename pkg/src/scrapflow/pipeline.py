"""Stage orchestration: run the configured analyses in dependency order and
record every artifact in a content-hashed manifest.

Stages: trade -> backbone; firms -> topics; regression -> extrapolation
(extrapolation also needs the firm population for its distributions, and the
regression coefficient unless one is configured). A stage failure marks all
later stages "not run" and still writes the partial manifest.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import export
from .backbone import BackboneParams, edge_significances, extract_backbone, summarize_backbone
from .config import ConfigError, PipelineConfig, config_to_dict, validate_input_paths
from .extrapolate import extrapolate_ecosystem, parse_capacity_plans
from .firm_registry import (
    CorrelationError,
    country_aggregates,
    match_scrap_firms,
    naics_distribution,
    parse_firm_registry,
    pearson,
)
from .regression import fit_no_intercept, parse_observations
from .topic_model import (
    build_corpus,
    corpus_topic_contributions,
    fit_lda,
    preprocess,
    select_topic_count,
)
from .trade_ingest import build_network, country_totals, filter_commodity, parse_trade_records
from .util import derive_seed, sha256_file

log = logging.getLogger(__name__)

STAGE_ORDER = ("trade", "backbone", "firms", "topics", "regression", "extrapolation")

NOT_REQUESTED = "not requested"
NOT_CONFIGURED = "input not configured"
UPSTREAM = "upstream failure"


@dataclass
class StageReport:
    name: str
    status: str = "not run"  # "completed" | "failed" | "not run"
    detail: str = ""
    artifacts: list[str] = field(default_factory=list)
    seconds: float | None = None  # in-memory only; never serialized


@dataclass
class RunReport:
    output_dir: Path
    stages: dict[str, StageReport]
    manifest_path: Path
    ok: bool

    def stage(self, name: str) -> StageReport:
        return self.stages[name]


class _Runner:
    def __init__(self, config: PipelineConfig, base_dir: Path):
        self.config = config
        self.base = base_dir
        self.out = self._resolve(config.output_dir)
        # cross-stage products
        self.networks = {}
        self.population = None
        self.fit = None

    def _resolve(self, path_str: str) -> Path:
        p = Path(path_str)
        return p if p.is_absolute() else self.base / p

    def _input(self, field_name: str) -> Path:
        return self._resolve(getattr(self.config, field_name))

    def _add(self, report: StageReport, path: Path) -> Path:
        # record immediately so a later failure cannot orphan this file
        report.artifacts.append(path.relative_to(self.out).as_posix())
        return path

    # -- stage availability ------------------------------------------------

    def available_stages(self) -> dict[str, str]:
        """Stage -> '' if runnable from this config, else the gating reason."""
        c = self.config
        gates: dict[str, str] = {}
        gates["trade"] = "" if c.trade_file else NOT_CONFIGURED
        gates["backbone"] = "" if c.trade_file else NOT_CONFIGURED
        gates["firms"] = "" if c.firm_registry_file else NOT_CONFIGURED
        if not c.firm_registry_file:
            gates["topics"] = NOT_CONFIGURED
        elif not c.lda.topic_grid:
            gates["topics"] = "empty lda.topic_grid"
        else:
            gates["topics"] = ""
        gates["regression"] = "" if c.observations_file else NOT_CONFIGURED
        ext = c.extrapolation
        if not c.capacity_file:
            gates["extrapolation"] = NOT_CONFIGURED
        elif not c.firm_registry_file:
            gates["extrapolation"] = "firm registry required for revenue/employee distributions"
        elif ext.coefficient_mean is None and (not c.observations_file or "n_firms" not in c.regressors):
            gates["extrapolation"] = (
                "no coefficient source: set extrapolation.coefficient_mean/sd "
                "or configure the regression stage with the n_firms regressor"
            )
        else:
            gates["extrapolation"] = ""
        return gates

    # -- stages ------------------------------------------------------------

    def run_trade(self, report: StageReport) -> None:
        c = self.config
        parsed = parse_trade_records(self._input("trade_file"), delimiter=c.delimiter)
        scrap = filter_commodity(parsed.records, c.commodity_prefix)
        log.info(
            "trade: %d record(s) parsed, %d matched prefix %s, %d skipped",
            len(parsed.records), len(scrap), c.commodity_prefix, parsed.skipped.skipped_rows,
        )
        self._add(
            report,
            export.write_json(
                self.out / "trade" / "ingest_report.json",
                {
                    "records_parsed": len(parsed.records),
                    "records_matching_prefix": len(scrap),
                    "commodity_prefix": c.commodity_prefix,
                    "skipped": parsed.skipped,
                },
            ),
        )
        for window in c.time_windows():
            network = build_network(scrap, window)
            label = window.label()
            self.networks[label] = network
            self._add(report, export.write_network_csv(self.out / "trade" / f"network_{label}.csv", network))
            self._add(report, export.write_network_dot(self.out / "trade" / f"network_{label}.dot", network))
            self._add(
                report,
                export.write_country_stats_csv(
                    self.out / "trade" / f"country_totals_{label}.csv", country_totals(network)
                ),
            )

    def run_backbone(self, report: StageReport) -> None:
        c = self.config
        params = BackboneParams(alpha=c.backbone_alpha, keep_degree_one=c.keep_degree_one)
        summaries = []
        for label, network in sorted(self.networks.items()):
            sigs = edge_significances(network)
            bb = extract_backbone(network, params)
            alphas = {(s.exporter, s.importer): s.alpha for s in sigs if (s.exporter, s.importer) in bb.edges}
            self._add(report, export.write_network_csv(self.out / "backbone" / f"backbone_{label}.csv", bb))
            self._add(
                report,
                export.write_network_dot(
                    self.out / "backbone" / f"backbone_{label}.dot", bb, alphas=alphas, name="backbone"
                ),
            )
            self._add(
                report, export.write_significances_csv(self.out / "backbone" / f"significance_{label}.csv", sigs)
            )
            summaries.append(summarize_backbone(network, bb, c.backbone_alpha))
            log.info("backbone %s: %d -> %d edges", label, len(network.edges), len(bb.edges))
        self._add(report, export.write_json(self.out / "backbone" / "summary.json", summaries))

    def run_firms(self, report: StageReport) -> None:
        c = self.config
        registry = parse_firm_registry(self._input("firm_registry_file"), delimiter=c.delimiter)
        population = match_scrap_firms(
            registry, keyword=c.keyword, exclusions=c.exclusions, provenance=Path(c.firm_registry_file).name
        )
        self.population = population
        log.info("firms: %d of %d registry rows matched %r", len(population), len(registry), c.keyword)
        shares = naics_distribution(population)
        aggregates = country_aggregates(population)
        employees = [f.employees for f in population.firms]
        revenue = [f.revenue for f in population.firms]
        try:
            r, p = pearson(employees, revenue)
            correlation = {"pearson_r": r, "p_value": p}
        except CorrelationError as exc:
            correlation = {"pearson_r": None, "p_value": None, "reason": str(exc)}
        self._add(report, export.write_population_csv(self.out / "firms" / "population.csv", population))
        self._add(
            report, export.write_country_aggregates_csv(self.out / "firms" / "country_aggregates.csv", aggregates)
        )
        self._add(report, export.write_naics_shares_csv(self.out / "firms" / "naics_shares.csv", shares))
        self._add(
            report,
            export.write_json(
                self.out / "firms" / "summary.json",
                {
                    "registry_rows": len(registry),
                    "matched_firms": len(population),
                    "keyword": c.keyword,
                    "exclusions": list(c.exclusions),
                    "naics_missing_share": shares.missing_share,
                    "employees_vs_revenue": correlation,
                },
            ),
        )

    def run_topics(self, report: StageReport) -> None:
        c = self.config
        assert self.population is not None
        docs = [preprocess(f.description_text()) for f in self.population.firms]
        corpus = build_corpus(docs)
        if corpus.n_documents < 2:
            raise ValueError(f"topic stage needs >= 2 non-empty documents, got {corpus.n_documents}")
        selection = select_topic_count(
            corpus,
            c.lda.topic_grid,
            holdout_fraction=c.lda.holdout_fraction,
            seed=derive_seed(c.master_seed, "topics", "selection"),
            iterations=c.lda.iterations,
            doc_topic_prior=c.lda.doc_topic_prior,
            topic_word_prior=c.lda.topic_word_prior,
        )
        log.info("topics: selected K=%d from grid %s", selection.selected, list(c.lda.topic_grid))
        model = fit_lda(
            corpus,
            selection.selected,
            iterations=c.lda.iterations,
            seed=derive_seed(c.master_seed, "topics", "final-fit"),
            doc_topic_prior=c.lda.doc_topic_prior,
            topic_word_prior=c.lda.topic_word_prior,
        )
        contributions = corpus_topic_contributions(model, corpus)
        self._add(report, export.write_perplexity_curve_csv(self.out / "topics" / "perplexity_curve.csv", selection))
        self._add(report, export.write_topic_terms_csv(self.out / "topics" / "topic_terms.csv", model, c.lda.top_terms))
        self._add(report, export.write_doc_topics_csv(self.out / "topics" / "doc_topics.csv", model))
        self._add(
            report,
            export.write_table(
                self.out / "topics" / "topic_contributions.csv",
                ("topic", "corpus_contribution"),
                [(k, float(contributions[k])) for k in range(model.n_topics)],
            ),
        )
        self._add(
            report,
            export.write_json(
                self.out / "topics" / "selection.json",
                {
                    "selected_n_topics": selection.selected,
                    "perplexity_curve": list(selection.curve),
                    "n_holdout_documents": selection.n_holdout,
                    "documents": corpus.n_documents,
                    "dropped_empty_documents": corpus.dropped_empty,
                    "vocabulary_size": corpus.vocabulary_size,
                    "doc_topic_prior": model.doc_topic_prior,
                    "topic_word_prior": model.topic_word_prior,
                    "iterations": c.lda.iterations,
                },
            ),
        )

    def run_regression(self, report: StageReport) -> None:
        c = self.config
        observations = parse_observations(self._input("observations_file"), delimiter=c.delimiter)
        fit = fit_no_intercept(observations, regressors=c.regressors, robust=c.robust_se)
        self.fit = fit
        log.info("regression: n=%d, k=%d, adjusted R2=%.4f", fit.n_observations, fit.n_regressors, fit.adjusted_r2)
        self._add(report, export.write_regression_csv(self.out / "regression" / "coefficients.csv", fit))
        self._add(
            report, export.write_predicted_vs_actual_csv(self.out / "regression" / "predicted_vs_actual.csv", fit)
        )
        self._add(
            report,
            export.write_json(self.out / "regression" / "diagnostics.json", export.regression_diagnostics(fit)),
        )

    def run_extrapolation(self, report: StageReport) -> None:
        c = self.config
        assert self.population is not None
        plans = parse_capacity_plans(self._input("capacity_file"), delimiter=c.delimiter)
        ext = c.extrapolation
        if ext.coefficient_mean is not None:
            beta, beta_sd = ext.coefficient_mean, ext.coefficient_sd
            source = "configured"
        else:
            if self.fit is None:
                raise ConfigError("extrapolation needs the regression stage or a configured coefficient")
            coef = self.fit.coefficient("n_firms")
            beta, beta_sd = coef.estimate, coef.se
            source = "regression"
            if beta <= 0:
                raise ValueError(f"fitted n_firms coefficient must be positive, got {beta}")
        results, totals = extrapolate_ecosystem(
            plans,
            beta,
            beta_sd,
            self.population,
            n_draws=ext.n_draws,
            iterations=ext.iterations,
            seed=derive_seed(c.master_seed, "extrapolation"),
            min_country_firms=ext.min_country_firms,
            coupled=ext.coupled,
        )
        rows = [r.result() for r in results] + [totals.result()]
        log.info(
            "extrapolation: %d countries, total companies %.1f (SD %.1f)",
            len(results), rows[-1].companies_mean, rows[-1].companies_sd,
        )
        self._add(report, export.write_extrapolation_csv(self.out / "extrapolation" / "extrapolation.csv", rows))
        self._add(
            report,
            export.write_json(
                self.out / "extrapolation" / "extrapolation.json",
                {
                    "coefficient_kt_per_firm": beta,
                    "coefficient_sd": beta_sd,
                    "coefficient_source": source,
                    "n_draws": ext.n_draws,
                    "iterations": ext.iterations,
                    "results": rows,
                },
            ),
        )


def run(config: PipelineConfig, base_dir: Path | None = None, stages: tuple[str, ...] | None = None) -> RunReport:
    """Execute the requested stages (default: all runnable from the config).

    Input paths are validated up front; nothing is written when any
    configured input is missing. On a stage failure the remaining stages are
    skipped and the manifest still records what completed.
    """
    base = base_dir or Path.cwd()
    unknown = [s for s in (stages or ()) if s not in STAGE_ORDER]
    if unknown:
        raise ConfigError(f"unknown stage(s) {unknown}; known: {list(STAGE_ORDER)}")
    validate_input_paths(config, base)
    runner = _Runner(config, base)
    gates = runner.available_stages()
    if stages is not None:
        requested = set(stages)
        # pull in hard prerequisites of the requested stages
        if "backbone" in requested:
            requested.add("trade")
        if "topics" in requested:
            requested.add("firms")
        if "extrapolation" in requested:
            requested.add("firms")
            if config.extrapolation.coefficient_mean is None:
                requested.add("regression")
        for name in sorted(requested):
            if gates[name]:
                raise ConfigError(f"stage {name!r} cannot run: {gates[name]}")
    else:
        requested = {s for s in STAGE_ORDER if not gates[s]}

    reports = {name: StageReport(name=name) for name in STAGE_ORDER}
    runners = {
        "trade": runner.run_trade,
        "backbone": runner.run_backbone,
        "firms": runner.run_firms,
        "topics": runner.run_topics,
        "regression": runner.run_regression,
        "extrapolation": runner.run_extrapolation,
    }
    runner.out.mkdir(parents=True, exist_ok=True)
    ok = True
    for name in STAGE_ORDER:
        report = reports[name]
        if name not in requested:
            report.status = "not run"
            report.detail = gates[name] or NOT_REQUESTED
            continue
        if not ok:
            report.status = "not run"
            report.detail = UPSTREAM
            continue
        started = time.perf_counter()
        try:
            runners[name](report)
        except Exception as exc:  # stage failure: record it, skip the rest
            report.status = "failed"
            report.detail = f"{type(exc).__name__}: {exc}"
            report.seconds = time.perf_counter() - started
            log.error("stage %s failed: %s", name, report.detail)
            ok = False
            continue
        report.status = "completed"
        report.seconds = time.perf_counter() - started
        log.info("stage %s completed in %.2fs", name, report.seconds)

    manifest_path = _write_manifest(runner.out, config, reports)
    return RunReport(output_dir=runner.out, stages=reports, manifest_path=manifest_path, ok=ok)


def _write_manifest(out: Path, config: PipelineConfig, reports: dict[str, StageReport]) -> Path:
    artifacts = []
    for report in reports.values():
        for rel in report.artifacts:
            p = out / rel
            artifacts.append({"path": rel, "sha256": sha256_file(p), "bytes": p.stat().st_size})
    artifacts.sort(key=lambda a: a["path"])
    manifest = {
        "config": config_to_dict(config),
        "stages": {
            name: {"status": r.status, "detail": r.detail, "artifacts": sorted(r.artifacts)}
            for name, r in reports.items()
        },
        "artifacts": artifacts,
    }
    return export.write_json(out / "manifest.json", manifest)
