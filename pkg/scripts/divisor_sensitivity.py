#!/usr/bin/env python3
"""Compare the two window-average conventions on a trade file.

Edge weights divide the window quantity sum either by the full window length
(years with no observed trade count as zeros) or by the number of years the
corridor was actually observed. The first is the reporting convention; the
second is an upper bound that inflates corridors with missing years. This
script quantifies the gap per window so the choice can be defended.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from scrapflow.config import DEFAULT_WINDOW_BOUNDS
from scrapflow.trade_ingest import TimeWindow, build_network, filter_commodity, parse_trade_records

REPO_ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trade", type=Path, default=REPO_ROOT / "fixtures" / "trade.csv")
    parser.add_argument("--prefix", default="7204", help="commodity code prefix")
    args = parser.parse_args()

    parsed = parse_trade_records(args.trade)
    scrap = filter_commodity(parsed.records, args.prefix)
    print(f"{len(scrap)} records matching prefix {args.prefix!r}; skipped: {parsed.skipped.skipped_rows}")

    for start, end in DEFAULT_WINDOW_BOUNDS:
        window = TimeWindow(start, end)
        full = build_network(scrap, window, divisor="window_length")
        observed = build_network(scrap, window, divisor="observed_years")
        ratios = [observed.edges[e] / full.edges[e] for e in full.edges]
        inflated = sum(1 for r in ratios if r > 1.0 + 1e-12)
        print(
            f"{window.label()}: {len(full.edges)} edges, total flow "
            f"{full.total_flow:,.0f} -> {observed.total_flow:,.0f} t/yr "
            f"({observed.total_flow / full.total_flow - 1.0:+.1%}); "
            f"{inflated} corridor(s) inflated, max ratio {max(ratios):.2f}"
        )


if __name__ == "__main__":
    main()
