"""Command-line entry point.

Exit codes: 0 verdict matches the expected annotation (or none given),
1 mismatch, 2 verdict unknown, 3 tool error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .driver import run_benchmarks, run_oracle_check, run_verification
from .errors import AeverError
from .frontend import parse_input
from .imp import DEFAULT_HAVOC_DOMAIN, IntRange
from .solver import default_config


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aever",
        description="Verify forall/exists relational properties of imperative programs.",
    )
    p.add_argument("input", nargs="?", help="verification input file")
    p.add_argument("--bench", metavar="DIR", help="run every input file in a directory")
    p.add_argument("--solver", metavar="CMD", help="solver command line (default: z3 or bundled)")
    p.add_argument("--timeout-ms", type=int, default=30_000, metavar="N")
    p.add_argument("--dump-vcs", metavar="PATH", help="write the generated VC to a file")
    p.add_argument(
        "--oracle-check",
        action="store_true",
        help="cross-check the verdict against the bounded semantic oracle",
    )
    p.add_argument(
        "--domain",
        type=IntRange.parse,
        default=DEFAULT_HAVOC_DOMAIN,
        metavar="LO..HI",
        help="enumeration domain for the oracle (default -4..4)",
    )
    p.add_argument("--fuel", type=int, default=16, metavar="N")
    p.add_argument("--csv", action="store_true", help="benchmark report as CSV rows")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides: dict = {"timeout_ms": args.timeout_ms}
    if args.solver:
        import shlex

        overrides["command"] = tuple(shlex.split(args.solver))
    try:
        config = default_config(**overrides)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    if args.bench:
        try:
            report = run_benchmarks(args.bench, config)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
        print(report.to_csv() if args.csv else report.render())
        return 0 if report.all_agree else 1

    if not args.input:
        print("error: provide an input file or --bench DIR", file=sys.stderr)
        return 3

    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        problem = parse_input(text)
        result = run_verification(problem, config)
    except AeverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    if args.dump_vcs:
        Path(args.dump_vcs).write_text(result.vc_text + "\n")

    verdict = result.verdict
    print(f"verdict: {verdict.status}")
    if verdict.is_invalid and verdict.model:
        print("falsifying model:")
        for name, value in sorted(verdict.model.items()):
            print(f"  {name} = {value}")
    if verdict.is_unknown:
        print(f"reason: {verdict.reason}")
    if result.expected is not None:
        note = "agrees" if result.agrees else "MISMATCH"
        print(f"expected: {result.expected} ({note})")

    if args.oracle_check:
        try:
            report = run_oracle_check(problem, args.domain, args.fuel)
        except AeverError as exc:
            print(f"oracle error: {exc}", file=sys.stderr)
            return 3
        if report.holds:
            print(
                f"oracle: no counterexample over {args.domain} "
                f"({report.seeds_checked} seed tuples"
                + (", truncated search)" if report.truncated else ")")
            )
        else:
            print("oracle: counterexample")
            for line in report.render_lines():
                print(f"  {line}")

    if verdict.is_unknown:
        return 2
    if result.expected is not None and not result.agrees:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
