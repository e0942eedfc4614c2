"""Acceptance gate: one check per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import random
import time

from aever import imp
from aever import terms as tm
from aever.driver import generate_vc, run_benchmarks, run_verification
from aever.frontend import parse_input
from aever.imp import ImplContext, IntRange, State
from aever.generate import LIBRARY_ASPECS, LIBRARY_ESPECS, LIBRARY_IMPLS, generate_problem
from aever.oracles import check_relational_semantics, exec_under
from aever.solver import model_falsifies
from aever.specs import (
    SpecContext,
    check_context_compatible,
    check_exists_compatible,
    check_forall_compatible,
)
from aever.vcgen import EXISTENTIAL, UNIVERSAL, statement_vc

from conftest import (
    BENCH_DIR,
    REFINEMENT_VC_TARGET,
    make_bucket_espec,
    make_rand_below_impls,
    make_rand_below_specs,
    norm,
)
from test_vcgen import _rand_goal, _rand_loopfree


def _report(criterion: int, description: str, ok: bool):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {description}")
    assert ok, f"criterion {criterion} failed: {description}"


def test_criterion_1_golden_verdicts(flipcoin_valid_text, flipcoin_invalid_text, solver_config):
    started = time.perf_counter()
    valid_result = run_verification(parse_input(flipcoin_valid_text), solver_config)
    valid_elapsed = time.perf_counter() - started

    started = time.perf_counter()
    invalid_result = run_verification(parse_input(flipcoin_invalid_text), solver_config)
    invalid_elapsed = time.perf_counter() - started

    ok = (
        valid_result.verdict.is_valid
        and invalid_result.verdict.is_invalid
        and model_falsifies(invalid_result.vc, invalid_result.verdict.model, IntRange(-4, 4))
        and valid_elapsed < 5.0
        and invalid_elapsed < 5.0
    )
    _report(
        1,
        "noninterference listings verify valid/invalid with a mechanically "
        f"falsifying model ({valid_elapsed:.2f}s / {invalid_elapsed:.2f}s)",
        ok,
    )


def test_criterion_2_refinement_vc_shape(refinement_text, solver_config):
    problem = parse_input(refinement_text)
    vc = generate_vc(problem)
    target = tm.parse_term(REFINEMENT_VC_TARGET)
    shape_ok = tm.alpha_equivalent(norm(vc), norm(target))
    verdict = run_verification(problem, solver_config).verdict
    _report(
        2,
        "refinement VC matches the expected formula up to renaming and "
        "conjunction regrouping, and verifies valid",
        shape_ok and verdict.is_valid,
    )


def test_criterion_3_existential_while(exists_while_text, solver_config):
    started = time.perf_counter()
    result = run_verification(parse_input(exists_while_text), solver_config)
    elapsed = time.perf_counter() - started
    _report(
        3,
        f"annotated existential loop proves a terminating path ({elapsed:.2f}s)",
        result.verdict.is_valid and elapsed < 5.0,
    )


def test_criterion_4_compatibility_matrix():
    impls = make_rand_below_impls()
    aspec, espec = make_rand_below_specs()
    domain, fuel = IntRange(0, 8), 32
    forall_ok = {
        n for n, d in impls.items() if check_forall_compatible(d, aspec, domain, fuel)
    }
    exists_ok = {
        n for n, d in impls.items() if check_exists_compatible(d, espec, domain, fuel)
    }
    _report(
        4,
        "bounded-random implementations split exactly into the expected "
        "universal/existential compatibility sets",
        forall_ok == {"const_zero", "mod_reduce"} and exists_ok == {"mod_reduce", "unbounded"},
    )


def test_criterion_5_bucket_enumeration():
    specs = SpecContext({}, {"randBucket": make_bucket_espec()})
    domain = IntRange(0, 20)
    two_calls = imp.Seq(
        imp.Call("x", "randBucket", (imp.IntLit(10),)),
        imp.Call("y", "randBucket", (imp.IntLit(20),)),
    )
    produced = exec_under(specs, State(), two_calls, domain, 8).state_sets()
    products = set()
    for xs in (range(0, 5), range(5, 10)):
        for ys in (range(0, 10), range(10, 20)):
            products.add(frozenset(State({"x": m, "y": n}) for m in xs for n in ys))

    single = imp.Call("y", "randBucket", (imp.IntLit(20),))
    single_sets = exec_under(specs, State(), single, domain, 8).state_sets()
    rejected = [
        frozenset({State({"y": 5})}),
        frozenset(State({"y": n}) for n in range(5, 15)),
    ]
    loop = imp.While(imp.BNot(imp.BEq(imp.Var("y"), imp.IntLit(10))), single)
    loop_sets = exec_under(specs, State({"y": 0}), loop, domain, 8).state_sets()
    rejected_ok = (
        all(bad not in single_sets for bad in rejected)
        and frozenset(State({"y": n}) for n in range(10, 20)) not in loop_sets
    )
    _report(
        5,
        "two bucket calls produce exactly the four product state-sets and "
        "none of the unguaranteed ones",
        produced == frozenset(products) and rejected_ok,
    )


def test_criterion_6_soundness_sweep(solver_config):
    domain, fuel = IntRange(-2, 2), 8
    library = SpecContext(LIBRARY_ASPECS, LIBRARY_ESPECS)
    assert not check_context_compatible(LIBRARY_IMPLS, library, domain, 32)

    rng = random.Random(20240817)
    total, valids, refuted = 200, 0, 0
    for _ in range(total):
        gen = generate_problem(rng)
        result = run_verification(gen.problem, solver_config)
        if result.verdict.is_valid:
            valids += 1
            report = check_relational_semantics(gen.problem, None, domain, fuel)
            if not report.holds:
                refuted += 1
    _report(
        6,
        f"{total} random problems, {valids} valid verdicts, "
        f"{refuted} refuted by the semantic oracle",
        refuted == 0 and valids >= 20,
    )


def test_criterion_7_benchmark_suite(solver_config):
    report = run_benchmarks(BENCH_DIR, solver_config)
    names = {row.name for row in report.rows}
    required = {
        "refinement_simple",
        "refinement_simple_non",
        "gni_const_branches",
        "gni_implicit_flow",
        "release_parity",
        "release_parity_nodr",
        "param_three_used",
        "param_completely_unused",
    }
    ok = (
        len(report.rows) >= 8
        and required <= names
        and report.all_agree
        and all(row.seconds < 30.0 for row in report.rows)
    )
    slowest = max(row.seconds for row in report.rows)
    _report(
        7,
        f"{len(report.rows)} benchmark inputs all match their expected "
        f"verdicts (slowest {slowest:.2f}s)",
        ok,
    )


def test_criterion_8_wp_oracle_duality():
    specs = SpecContext(LIBRARY_ASPECS, LIBRARY_ESPECS)
    rng = random.Random(2718)
    domain = IntRange(-2, 2)
    seeds = [State({"x": a, "y": b}) for a in domain for b in domain]
    goals = [_rand_goal(rng) for _ in range(50)]
    disagreements = 0
    checked = 0
    for i in range(60):
        stmt = _rand_loopfree(rng, 3)
        for goal in rng.sample(goals, k=4):
            vc_all = statement_vc(stmt, UNIVERSAL, goal, specs)
            vc_some = statement_vc(stmt, EXISTENTIAL, goal, specs)
            for seed in seeds:
                finals = imp.exec_concrete(ImplContext(), seed, stmt, domain, 16)
                env = seed.as_dict()
                want_all = all(tm.eval_term(goal, f.as_dict(), domain) for f in finals)
                want_some = any(tm.eval_term(goal, f.as_dict(), domain) for f in finals)
                checked += 1
                if tm.eval_term(vc_all, env, domain) != want_all:
                    disagreements += 1
                if tm.eval_term(vc_some, env, domain) != want_some:
                    disagreements += 1
    _report(
        8,
        f"universal/existential weakest preconditions agree with exhaustive "
        f"execution on {checked} statement/goal/seed checks",
        disagreements == 0 and checked >= 50 * 25,
    )
