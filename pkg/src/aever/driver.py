"""Verification pipeline and benchmark runner."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import AeverError, PipelineError
from .frontend import VerificationProblem, instantiate_copies, parse_input
from .imp import IntRange
from .oracles import RelationalReport, check_relational_semantics
from .solver import SolverConfig, Verdict, default_config, verify
from .terms import Term, to_smtlib
from .vcgen import relational_vc


@dataclass(frozen=True)
class RunResult:
    verdict: Verdict
    vc: Term
    vc_text: str
    expected: str | None

    @property
    def agrees(self) -> bool | None:
        if self.expected is None:
            return None
        return self.expected == self.verdict.status


def generate_vc(problem: VerificationProblem) -> Term:
    universals, existentials = instantiate_copies(problem)
    return relational_vc(problem.pre, universals, existentials, problem.post, problem.spec_context())


def run_verification(problem: VerificationProblem, config: SolverConfig | None = None) -> RunResult:
    """Instantiate copies, generate the verification condition and discharge it."""
    try:
        vc = generate_vc(problem)
    except AeverError as exc:
        raise PipelineError("vc generation", exc) from exc
    try:
        verdict = verify(vc, config or default_config())
    except AeverError as exc:
        raise PipelineError("solver", exc) from exc
    return RunResult(verdict, vc, to_smtlib(vc), problem.expected)


def run_oracle_check(
    problem: VerificationProblem, domain: IntRange, fuel: int
) -> RelationalReport:
    return check_relational_semantics(problem, None, domain, fuel)


@dataclass(frozen=True)
class BenchmarkRow:
    name: str
    seconds: float
    expected: str | None
    verified: str  # verdict status or "error"
    agree: bool | None

    @property
    def agree_known(self) -> bool:
        return self.agree is not False


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]

    @property
    def all_agree(self) -> bool:
        return all(r.agree is not False for r in self.rows)

    def render(self) -> str:
        name_w = max([len(r.name) for r in self.rows], default=4)
        header = f"{'':<{name_w}}  {'Time (s)':>8}  {'Valid':>8}  {'Verified':>8}"
        lines = [header]
        mark = {"valid": "yes", "invalid": "no", None: "-"}
        for r in self.rows:
            expected = mark.get(r.expected, str(r.expected))
            verified = mark.get(r.verified, str(r.verified))
            flag = "" if r.agree is not False else "  <- mismatch"
            lines.append(
                f"{r.name:<{name_w}}  {r.seconds:>8.3f}  {expected:>8}  {verified:>8}{flag}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["name", "seconds", "expected", "verified", "agree"])
        for r in self.rows:
            writer.writerow(
                [
                    r.name,
                    f"{r.seconds:.3f}",
                    r.expected or "",
                    r.verified,
                    "" if r.agree is None else str(r.agree).lower(),
                ]
            )
        return buf.getvalue()


def run_benchmarks(
    directory: str | Path,
    config: SolverConfig | None = None,
    pattern: str = "*.ae",
) -> BenchmarkReport:
    """Verify every input file in ``directory``; per-file failures become
    rows rather than aborting the batch."""
    config = config or default_config()
    rows = []
    for path in sorted(Path(directory).glob(pattern)):
        started = time.perf_counter()
        expected = None
        try:
            problem = parse_input(path.read_text())
            expected = problem.expected
            result = run_verification(problem, config)
            verified = result.verdict.status
            agree = result.agrees
        except Exception:  # a bad input never aborts the batch
            verified = "error"
            agree = False
        elapsed = time.perf_counter() - started
        rows.append(BenchmarkRow(path.stem, elapsed, expected, verified, agree))
    return BenchmarkReport(tuple(rows))
