"""Command-line entry point.

Subcommands run one stage (plus its prerequisites) or the whole pipeline
from a JSON config. Relative paths inside the config resolve against the
config file's directory. Logging goes to stderr; data only to files.

Exit codes: 0 success, 2 configuration error, 1 stage failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, load_config, validate_config

SUBCOMMAND_STAGES: dict[str, tuple[str, ...] | None] = {
    "ingest": ("trade",),
    "backbone": ("backbone",),
    "firms": ("firms",),
    "topics": ("topics",),
    "regress": ("regression",),
    "extrapolate": ("extrapolation",),
    "run": None,  # everything the config makes runnable
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scrapflow",
        description=(
            "Scrap-trade network analysis, firm-ecosystem characterization, "
            "and furnace-capacity extrapolation pipeline."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--output-dir", help="override output_dir")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
        return p

    p = add("ingest", "parse trade records and build windowed networks")
    p.add_argument("--prefix", help="override commodity_prefix")
    p = add("backbone", "extract disparity-filter backbones (runs ingest first)")
    p.add_argument("--alpha", type=float, help="override backbone_alpha")
    p = add("firms", "filter the firm registry and summarize the population")
    p.add_argument("--keyword", help="override the match keyword")
    p = add("topics", "fit the topic model on matched firm descriptions")
    p.add_argument("--topic-grid", help="override lda.topic_grid, comma-separated (e.g. 2,3,4)")
    p = add("regress", "fit the no-intercept capacity regression")
    p = add("extrapolate", "extrapolate the firm ecosystem from planned capacity")
    p.add_argument("--n-draws", type=int, help="override extrapolation.n_draws")
    p.add_argument("--mc-iterations", type=int, help="override extrapolation.iterations")
    add("run", "run every stage the config provides inputs for")
    return parser


def _apply_overrides(config, args: argparse.Namespace):
    replacements = {}
    if args.output_dir is not None:
        replacements["output_dir"] = args.output_dir
    if args.seed is not None:
        replacements["master_seed"] = args.seed
    if getattr(args, "prefix", None) is not None:
        replacements["commodity_prefix"] = args.prefix
    if getattr(args, "alpha", None) is not None:
        replacements["backbone_alpha"] = args.alpha
    if getattr(args, "keyword", None) is not None:
        replacements["keyword"] = args.keyword
    if getattr(args, "topic_grid", None) is not None:
        try:
            grid = tuple(int(k) for k in args.topic_grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --topic-grid {args.topic_grid!r}: {exc}") from exc
        replacements["lda"] = dataclasses.replace(config.lda, topic_grid=grid)
    ext_replacements = {}
    if getattr(args, "n_draws", None) is not None:
        ext_replacements["n_draws"] = args.n_draws
    if getattr(args, "mc_iterations", None) is not None:
        ext_replacements["iterations"] = args.mc_iterations
    if ext_replacements:
        replacements["extrapolation"] = dataclasses.replace(config.extrapolation, **ext_replacements)
    if replacements:
        config = dataclasses.replace(config, **replacements)
        validate_config(config)
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    log = logging.getLogger("scrapflow")
    try:
        config = load_config(args.config)
        config = _apply_overrides(config, args)
        base_dir = Path(args.config).resolve().parent
        report = pipeline.run(config, base_dir=base_dir, stages=SUBCOMMAND_STAGES[args.command])
    except ConfigError as exc:
        print(f"scrapflow: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # unexpected failure outside a stage
        print(f"scrapflow: error: {exc}", file=sys.stderr)
        return 1
    for name, stage in report.stages.items():
        if stage.status == "completed":
            log.info("stage %-13s completed (%d artifact(s))", name, len(stage.artifacts))
        elif stage.status == "failed":
            print(f"scrapflow: stage {name} failed: {stage.detail}", file=sys.stderr)
        else:
            log.info("stage %-13s not run: %s", name, stage.detail)
    log.info("manifest: %s", report.manifest_path)
    return 0 if report.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
