#!/usr/bin/env python3
"""Run the benchmark suite and print the results table (or CSV)."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from aever.driver import run_benchmarks
from aever.solver import default_config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "directory",
        nargs="?",
        default=str(Path(__file__).resolve().parents[1] / "benchmarks"),
    )
    ap.add_argument("--timeout-ms", type=int, default=30_000)
    ap.add_argument("--csv", action="store_true")
    args = ap.parse_args()

    report = run_benchmarks(args.directory, default_config(timeout_ms=args.timeout_ms))
    print(report.to_csv() if args.csv else report.render())
    if not report.rows:
        print("no input files found", file=sys.stderr)
    return 0 if report.all_agree else 1


if __name__ == "__main__":
    sys.exit(main())
