"""Per-file checks over the shipped benchmark corpus."""

import pytest

from aever.driver import run_verification
from aever.frontend import parse_input
from aever.imp import IntRange
from aever.solver import model_falsifies

from conftest import BENCH_DIR

FILES = sorted(BENCH_DIR.glob("*.ae"))


@pytest.mark.parametrize("path", FILES, ids=lambda p: p.stem)
def test_benchmark_matches_expectation(path, solver_config):
    problem = parse_input(path.read_text())
    assert problem.expected in ("valid", "invalid")
    result = run_verification(problem, solver_config)
    assert result.verdict.status == problem.expected
    if result.verdict.is_invalid:
        # the reported model must actually break the verification condition
        assert model_falsifies(result.vc, result.verdict.model, IntRange(-6, 6))
