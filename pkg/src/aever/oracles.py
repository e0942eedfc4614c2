"""Executable approximations of program behavior and empirical soundness checks.

Two bounded-enumeration semantics sit at the core: an overapproximate one
that replaces calls by their universal contracts (any return satisfying the
postcondition, or anything at all when the precondition fails), and an
underapproximate one that replaces calls by chosen behaviors of their
existential contracts.  On top of them sit checkers that test, at desk scale,
the containment guarantee of universal contracts, the realizability
guarantee of existential contracts, and the defining formula of relational
forall/exists assertions.

Conventions for the underapproximate semantics, where the inference rules
leave room:

* a havoc step contributes one derivation per domain value (a singleton
  result set each), mirroring the existential havoc proof rule;
* continuing a derivation from a set of states uses one shared choice
  schedule for the whole set, so a straight-line program with existential
  calls yields exactly the product of per-call behavior selections;
* when control splits over a state set, the branches' trace entries are
  concatenated then-branch first;
* derivations still looping when fuel runs out assert nothing and are
  dropped, with a truncation flag recorded on the result.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator

from .errors import ArityMismatch, EmptyPostcondition
from .imp import (
    DIVERGED,
    Assign,
    Call,
    Havoc,
    If,
    ImplContext,
    IntRange,
    Outcome,
    Seq,
    Skip,
    State,
    Stmt,
    While,
    eval_aexp,
    eval_bexp,
    exec_concrete,
    read_before_write,
)
from .specs import (
    CompatReport,
    SpecContext,
    check_exists_compatible,
    check_forall_compatible,
)
from .terms import RET, eval_term, free_vars

if TYPE_CHECKING:  # pragma: no cover
    from .frontend import VerificationProblem

TraceEntry = tuple[int, tuple[tuple[str, int], ...]]
ChoiceTrace = tuple[TraceEntry, ...]


@dataclass(frozen=True)
class Derivation:
    """One underapproximate evaluation: the choices taken and the state set
    the program is then guaranteed to reach."""

    trace: ChoiceTrace
    states: frozenset[State]


@dataclass(frozen=True)
class UnderResult:
    derivations: frozenset[Derivation]
    truncated: bool = False

    def __iter__(self) -> Iterator[Derivation]:
        return iter(self.derivations)

    def __len__(self) -> int:
        return len(self.derivations)

    def state_sets(self) -> frozenset[frozenset[State]]:
        return frozenset(d.states for d in self.derivations)


# ---------------------------------------------------------------------------
# overapproximate execution


def exec_over(
    specs: SpecContext,
    state: State,
    stmt: Stmt,
    domain: IntRange,
    fuel: int = 64,
) -> frozenset[Outcome]:
    """Final states under universal contracts, havoc and call returns
    enumerated over ``domain``; loops are bounded by ``fuel``."""
    finals: set[Outcome] = set()
    for out in _over(specs, state, stmt, domain, fuel, {}):
        finals.add(DIVERGED if out is DIVERGED else out[0])
    return frozenset(finals)


def _over(
    specs: SpecContext, state: State, stmt: Stmt, dom: IntRange, fuel: int, memo: dict
) -> frozenset:
    key = (id(stmt), state, fuel)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out: set = set()
    match stmt:
        case Skip():
            out.add((state, fuel))
        case Assign(target, value):
            out.add((state.set(target, eval_aexp(state, value)), fuel))
        case Havoc(target):
            for v in dom:
                out.add((state.set(target, v), fuel))
        case Seq(first, second):
            for o in _over(specs, state, first, dom, fuel, memo):
                if o is DIVERGED:
                    out.add(DIVERGED)
                else:
                    out |= _over(specs, o[0], second, dom, o[1], memo)
        case If(cond, then, orelse):
            branch = then if eval_bexp(state, cond) else orelse
            out |= _over(specs, state, branch, dom, fuel, memo)
        case While(cond, body):
            if not eval_bexp(state, cond):
                out.add((state, fuel))
            elif fuel == 0:
                out.add(DIVERGED)
            else:
                for o in _over(specs, state, body, dom, fuel - 1, memo):
                    if o is DIVERGED:
                        out.add(DIVERGED)
                    else:
                        out |= _over(specs, o[0], stmt, dom, o[1], memo)
        case Call(target, fname, args):
            spec = specs.lookup_universal(fname)
            if len(args) != len(spec.params):
                raise ArityMismatch(fname, len(spec.params), len(args))
            vals = [eval_aexp(state, a) for a in args]
            env = dict(zip(spec.params, vals))
            if eval_term(spec.pre, env, dom):
                returns = (r for r in dom if eval_term(spec.post, {**env, RET: r}, dom))
            else:
                # failed precondition: any return at all (restricted to the
                # enumeration domain)
                returns = iter(dom)
            for r in returns:
                out.add((state.set(target, r), fuel))
        case _:
            raise TypeError(f"not a statement: {stmt!r}")
    result = frozenset(out)
    memo[key] = result
    return result


# ---------------------------------------------------------------------------
# underapproximate execution


def _number_choice_sites(stmt: Stmt) -> dict[tuple[int, ...], int]:
    sites: dict[tuple[int, ...], int] = {}

    def walk(s: Stmt, path: tuple[int, ...]):
        match s:
            case Call() | Havoc():
                sites[path] = len(sites)
            case Seq(a, b):
                walk(a, path + (0,))
                walk(b, path + (1,))
            case If(_, a, b):
                walk(a, path + (0,))
                walk(b, path + (1,))
            case While(_, body):
                walk(body, path + (0,))
            case _:
                pass

    walk(stmt, ())
    return sites


def exec_under(
    specs: SpecContext,
    state: State,
    stmt: Stmt,
    domain: IntRange,
    fuel: int = 64,
) -> UnderResult:
    """All underapproximate evaluations of ``stmt`` from ``state``.

    Each derivation pairs the trace of choices made at existential calls (and
    havoc statements) with a nonempty set of states, every compatible
    implementation being guaranteed to reach at least one of them.
    """
    sites = _number_choice_sites(stmt)
    truncated = [False]

    def rec(states: frozenset[State], s: Stmt, path: tuple[int, ...], fuel: int):
        match s:
            case Skip():
                yield ((), states)
            case Assign(target, value):
                yield ((), frozenset(q.set(target, eval_aexp(q, value)) for q in states))
            case Havoc(target):
                site = sites[path]
                for v in domain:
                    entry = (site, ((target, v),))
                    yield ((entry,), frozenset(q.set(target, v) for q in states))
            case Call(target, fname, args):
                spec = specs.lookup_existential(fname)
                if len(args) != len(spec.params):
                    raise ArityMismatch(fname, len(spec.params), len(args))
                site = sites[path]
                arg_envs = [
                    (q, dict(zip(spec.params, (eval_aexp(q, a) for a in args))))
                    for q in states
                ]
                for choice in itertools.product(domain, repeat=len(spec.choice_vars)):
                    kmap = dict(zip(spec.choice_vars, choice))
                    if not all(
                        eval_term(spec.pre, {**env, **kmap}, domain) for _, env in arg_envs
                    ):
                        continue
                    out: set[State] = set()
                    for q, env in arg_envs:
                        rs = [
                            r
                            for r in domain
                            if eval_term(spec.post, {**env, **kmap, RET: r}, domain)
                        ]
                        if not rs:
                            raise EmptyPostcondition(fname, choice)
                        out.update(q.set(target, r) for r in rs)
                    entry = (site, tuple(zip(spec.choice_vars, choice)))
                    yield ((entry,), frozenset(out))
            case Seq(a, b):
                for t1, s1 in rec(states, a, path + (0,), fuel):
                    for t2, s2 in rec(s1, b, path + (1,), fuel):
                        yield (t1 + t2, s2)
            case If(cond, then, orelse):
                taken = frozenset(q for q in states if eval_bexp(q, cond))
                other = states - taken
                if not other:
                    yield from rec(taken, then, path + (0,), fuel)
                elif not taken:
                    yield from rec(other, orelse, path + (1,), fuel)
                else:
                    for tt, st in rec(taken, then, path + (0,), fuel):
                        for te, se in rec(other, orelse, path + (1,), fuel):
                            yield (tt + te, st | se)
            case While(cond, body):
                looping = frozenset(q for q in states if eval_bexp(q, cond))
                done = states - looping
                if not looping:
                    yield ((), states)
                elif fuel == 0:
                    truncated[0] = True
                else:
                    for tb, sb in rec(looping, body, path + (0,), fuel):
                        for tw, sw in rec(sb, s, path, fuel - 1):
                            yield (tb + tw, done | sw)
            case _:
                raise TypeError(f"not a statement: {s!r}")

    derivs = frozenset(
        Derivation(trace, ss) for trace, ss in rec(frozenset((state,)), stmt, (), fuel)
    )
    return UnderResult(derivs, truncated[0])


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ViolationLine:
    seed: str
    universal_finals: str
    missing_witness: str

    def render(self) -> str:
        return f"{self.seed} | {self.universal_finals} | {self.missing_witness}"


@dataclass(frozen=True)
class ContainmentReport:
    compat_failures: tuple[tuple[str, CompatReport], ...] = ()
    violations: tuple[ViolationLine, ...] = ()
    truncated: bool = False
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.compat_failures and not self.violations

    def render_lines(self) -> list[str]:
        lines = [f"{f}: incompatible, witness {r.witness}" for f, r in self.compat_failures]
        lines.extend(v.render() for v in self.violations)
        return lines


def check_over_containment(
    impls: ImplContext,
    specs: SpecContext,
    stmt: Stmt,
    seeds: frozenset[State] | set[State],
    domain: IntRange,
    fuel: int = 64,
) -> ContainmentReport:
    """Every terminating concrete run must land inside the overapproximate
    executions, provided the implementations respect their universal
    contracts.  Violations falsify the implementation, not the guarantee."""
    failures = []
    for fname, defn in impls.defs.items():
        if fname in specs.universal:
            rep = check_forall_compatible(defn, specs.universal[fname], domain, fuel)
            if not rep:
                failures.append((fname, rep))
    if failures:
        return ContainmentReport(compat_failures=tuple(failures))

    violations = []
    truncated = False
    checked = 0
    for seed in sorted(seeds, key=lambda s: s.items()):
        over = exec_over(specs, seed, stmt, domain, fuel)
        for final in exec_concrete(impls, seed, stmt, domain, fuel):
            if final is DIVERGED:
                truncated = True
                continue
            checked += 1
            if final not in over:
                violations.append(ViolationLine(repr(seed), repr(final), "not overapproximated"))
    return ContainmentReport((), tuple(violations), truncated, checked)


def check_under_realizability(
    impls: ImplContext,
    specs: SpecContext,
    stmt: Stmt,
    seeds: frozenset[State] | set[State],
    domain: IntRange,
    fuel: int = 64,
) -> ContainmentReport:
    """Every underapproximate state set must be inhabited by some terminating
    concrete run, provided the implementations realize their existential
    contracts."""
    failures = []
    for fname, defn in impls.defs.items():
        if fname in specs.existential:
            rep = check_exists_compatible(defn, specs.existential[fname], domain, fuel)
            if not rep:
                failures.append((fname, rep))
    if failures:
        return ContainmentReport(compat_failures=tuple(failures))

    violations = []
    truncated = False
    checked = 0
    for seed in sorted(seeds, key=lambda s: s.items()):
        under = exec_under(specs, seed, stmt, domain, fuel)
        truncated |= under.truncated
        concrete = frozenset(
            f for f in exec_concrete(impls, seed, stmt, domain, fuel) if f is not DIVERGED
        )
        for deriv in under:
            checked += 1
            if not (concrete & deriv.states):
                violations.append(
                    ViolationLine(repr(seed), "-", f"no concrete run reaches {set(deriv.states)}")
                )
    return ContainmentReport((), tuple(violations), truncated, checked)


# ---------------------------------------------------------------------------
# relational triple semantics


@dataclass(frozen=True)
class RelationalReport:
    counterexample: ViolationLine | None = None
    compat_failures: tuple[tuple[str, CompatReport], ...] = ()
    seeds_checked: int = 0
    tuples_checked: int = 0
    truncated: bool = False

    @property
    def holds(self) -> bool:
        return self.counterexample is None and not self.compat_failures

    def render_lines(self) -> list[str]:
        lines = [f"{f}: incompatible, witness {r.witness}" for f, r in self.compat_failures]
        if self.counterexample:
            lines.append(self.counterexample.render())
        return lines


def _copy_seed_vars(problem: "VerificationProblem", name: str, index: int) -> list[str]:
    program = problem.programs[name]
    seed_vars = set(program.params) | set(read_before_write(program.body))
    prefix = f"{name}!{index}!"
    for t in (problem.pre, problem.post):
        for fv in free_vars(t):
            if fv.startswith(prefix):
                seed_vars.add(fv[len(prefix):])
    return sorted(seed_vars)


def _prefixed(name: str, index: int, state: State) -> dict[str, int]:
    prefix = f"{name}!{index}!"
    return {prefix + k: v for k, v in state.items()}


def check_relational_semantics(
    problem: "VerificationProblem",
    impls: ImplContext | None,
    domain: IntRange,
    fuel: int = 64,
) -> RelationalReport:
    """Brute-force the defining formula of the relational forall/exists
    assertion: for every seed tuple satisfying the precondition and every
    tuple of overapproximate finals of the universal copies, some shared
    underapproximate derivation of the existential copies must reach only
    states that, joined with the universal finals, satisfy the postcondition.

    ``impls``, when given, is first checked compatible with both spec
    contexts; the semantic check itself runs purely on the contracts.
    """
    specs = problem.spec_context()
    if impls is not None:
        from .specs import check_context_compatible

        failures = check_context_compatible(impls, specs, domain, fuel)
        if failures:
            return RelationalReport(compat_failures=tuple(sorted(failures.items())))

    ucopies = list(problem.universal_copies)
    ecopies = list(problem.existential_copies)

    useeds = [
        list(_seed_states(problem, name, index, domain)) for name, index in ucopies
    ]
    eseeds = [
        list(_seed_states(problem, name, index, domain)) for name, index in ecopies
    ]

    over_cache: dict[tuple[int, State], list[State]] = {}
    under_cache: dict[tuple[int, State], UnderResult] = {}
    truncated = [False]

    def over_finals(i: int, seed: State) -> list[State]:
        key = (i, seed)
        if key not in over_cache:
            name, _ = ucopies[i]
            outs = exec_over(specs, seed, problem.programs[name].body, domain, fuel)
            if DIVERGED in outs:
                truncated[0] = True
            over_cache[key] = [o for o in outs if o is not DIVERGED]
        return over_cache[key]

    def under_derivs(i: int, seed: State) -> UnderResult:
        key = (i, seed)
        if key not in under_cache:
            name, _ = ecopies[i]
            res = exec_under(specs, seed, problem.programs[name].body, domain, fuel)
            truncated[0] |= res.truncated
            under_cache[key] = res
        return under_cache[key]

    seeds_checked = 0
    tuples_checked = 0
    for useed in itertools.product(*useeds) if useeds else [()]:
        for eseed in itertools.product(*eseeds) if eseeds else [()]:
            env0: dict[str, int] = {}
            for (name, index), st in zip(ucopies, useed):
                env0.update(_prefixed(name, index, st))
            for (name, index), st in zip(ecopies, eseed):
                env0.update(_prefixed(name, index, st))
            if not eval_term(problem.pre, env0, domain):
                continue
            seeds_checked += 1

            all_under = [under_derivs(i, st) for i, st in enumerate(eseed)]
            for ufinals in itertools.product(
                *(over_finals(i, st) for i, st in enumerate(useed))
            ):
                tuples_checked += 1
                uenv: dict[str, int] = {}
                for (name, index), st in zip(ucopies, ufinals):
                    uenv.update(_prefixed(name, index, st))

                def combo_ok(combo: tuple[Derivation, ...]) -> bool:
                    for estates in itertools.product(*(d.states for d in combo)):
                        env = dict(uenv)
                        for (name, index), st in zip(ecopies, estates):
                            env.update(_prefixed(name, index, st))
                        if not eval_term(problem.post, env, domain):
                            return False
                    return True

                if not any(
                    combo_ok(combo)
                    for combo in itertools.product(*(list(u) for u in all_under))
                ):
                    return RelationalReport(
                        counterexample=ViolationLine(
                            repr(env0),
                            repr([repr(st) for st in ufinals]),
                            "no existential derivation satisfies the postcondition",
                        ),
                        seeds_checked=seeds_checked,
                        tuples_checked=tuples_checked,
                        truncated=truncated[0],
                    )
    return RelationalReport(
        seeds_checked=seeds_checked,
        tuples_checked=tuples_checked,
        truncated=truncated[0],
    )


def _seed_states(
    problem: "VerificationProblem", name: str, index: int, domain: IntRange
) -> Iterator[State]:
    from .imp import enumerate_states

    return enumerate_states(_copy_seed_vars(problem, name, index), domain)
