#!/usr/bin/env python3
"""Generate the shipped synthetic fixtures and a ready-to-run config.

Writes trade.csv, firms.csv, capacity.csv, observations.csv, and config.json
into the fixtures directory. Regenerating with the default seed reproduces
the committed files byte for byte; pass --seed to build variants.
"""
from __future__ import annotations

import argparse
import csv
import json
from pathlib import Path

from scrapflow.synthetic import (
    capacity_rows,
    synthetic_observations,
    synthetic_registry_rows,
    synthetic_trade_rows,
)

REPO_ROOT = Path(__file__).resolve().parent.parent


def write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def default_config() -> dict:
    return {
        "output_dir": "out",
        "master_seed": 42,
        "trade_file": "trade.csv",
        "firm_registry_file": "firms.csv",
        "capacity_file": "capacity.csv",
        "observations_file": "observations.csv",
        "lda": {"topic_grid": [2, 3, 4, 5, 6], "iterations": 200},
        "extrapolation": {"n_draws": 10000, "iterations": 1000},
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=REPO_ROOT / "fixtures", help="target directory")
    parser.add_argument("--seed", type=int, default=0, help="generator seed for all synthetic tables")
    args = parser.parse_args()

    write_csv(args.out / "trade.csv", synthetic_trade_rows(seed=args.seed))
    write_csv(args.out / "firms.csv", synthetic_registry_rows(seed=args.seed))
    write_csv(args.out / "capacity.csv", capacity_rows())
    write_csv(args.out / "observations.csv", synthetic_observations(seed=args.seed))

    config_path = args.out / "config.json"
    config_path.write_text(json.dumps(default_config(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {config_path}")


if __name__ == "__main__":
    main()
