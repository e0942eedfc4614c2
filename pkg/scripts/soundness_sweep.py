#!/usr/bin/env python3
"""Sweep randomly generated relational problems through the verifier and
confirm every `valid` verdict against the bounded semantic oracle.

A disagreement (a verdict the oracle can refute at the test domain) is a
soundness bug and makes the script exit nonzero.
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from aever.driver import run_verification
from aever.imp import IntRange
from aever.generate import LIBRARY_IMPLS, generate_problem
from aever.oracles import check_relational_semantics
from aever.solver import default_config
from aever.specs import check_context_compatible


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20240817)
    ap.add_argument("--domain", type=IntRange.parse, default=IntRange(-2, 2))
    ap.add_argument("--fuel", type=int, default=8)
    ap.add_argument("--timeout-ms", type=int, default=30_000)
    args = ap.parse_args()

    config = default_config(timeout_ms=args.timeout_ms)
    failures = check_context_compatible(
        LIBRARY_IMPLS, generate_problem(random.Random(0)).problem.spec_context(),
        args.domain, args.fuel * 4,
    )
    if failures:
        print(f"library implementations incompatible with their contracts: {failures}")
        return 1

    rng = random.Random(args.seed)
    counts = {"valid": 0, "invalid": 0, "unknown": 0}
    mismatches = 0
    started = time.perf_counter()
    for i in range(args.count):
        gen = generate_problem(rng)
        result = run_verification(gen.problem, config)
        counts[result.verdict.status] += 1
        if result.verdict.is_valid:
            report = check_relational_semantics(gen.problem, None, args.domain, args.fuel)
            if not report.holds:
                mismatches += 1
                print(f"[{i}] {gen.kind}: valid verdict refuted by the oracle")
                for line in report.render_lines():
                    print(f"      {line}")
    elapsed = time.perf_counter() - started
    print(
        f"{args.count} problems in {elapsed:.1f}s: "
        f"{counts['valid']} valid / {counts['invalid']} invalid / "
        f"{counts['unknown']} unknown; {mismatches} oracle disagreements"
    )
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
