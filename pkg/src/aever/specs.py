"""Function contracts and enumerative compatibility checking.

A universal contract bounds what any implementation may do; an existential
contract lists behaviors every implementation must be able to exhibit, one
per instantiation of its choice variables.  The checkers here decide desk-
scale conformance of a concrete definition by exhaustive enumeration of
arguments, choice values and havoc within a finite domain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ArityMismatch, MissingExistentialSpec, MissingUniversalSpec
from .imp import DIVERGED, FunDef, ImplContext, IntRange, State, eval_aexp, exec_concrete
from .terms import RET, Term, eval_term, free_vars


@dataclass(frozen=True)
class UniversalSpec:
    """Upper bound on behavior: every terminating run from a state satisfying
    ``pre`` returns a value satisfying ``post``."""

    fname: str
    params: tuple[str, ...]
    pre: Term
    post: Term

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"duplicate parameters in spec of {self.fname}")
        if RET in free_vars(self.pre):
            raise ValueError(f"{RET} may not occur in the precondition of {self.fname}")
        bad = free_vars(self.pre) - set(self.params)
        if bad:
            raise ValueError(f"precondition of {self.fname} mentions {sorted(bad)}")
        bad = free_vars(self.post) - set(self.params) - {RET}
        if bad:
            raise ValueError(f"postcondition of {self.fname} mentions {sorted(bad)}")


@dataclass(frozen=True)
class ExistentialSpec:
    """Lower bound on behavior: for every choice-variable instantiation
    satisfying ``pre``, some run must return a value satisfying ``post``."""

    fname: str
    params: tuple[str, ...]
    choice_vars: tuple[str, ...]
    pre: Term
    post: Term

    def __post_init__(self):
        names = self.params + self.choice_vars
        if len(set(names)) != len(names):
            raise ValueError(f"parameters and choice variables of {self.fname} overlap")
        if RET in names:
            raise ValueError(f"{RET} cannot be a parameter or choice variable")
        bad = free_vars(self.pre) - set(names)
        if bad:
            raise ValueError(f"precondition of {self.fname} mentions {sorted(bad)}")
        bad = free_vars(self.post) - set(names) - {RET}
        if bad:
            raise ValueError(f"postcondition of {self.fname} mentions {sorted(bad)}")


@dataclass(frozen=True)
class SpecContext:
    universal: Mapping[str, UniversalSpec] = field(default_factory=dict)
    existential: Mapping[str, ExistentialSpec] = field(default_factory=dict)

    def lookup_universal(self, fname: str) -> UniversalSpec:
        try:
            return self.universal[fname]
        except KeyError:
            raise MissingUniversalSpec(fname) from None

    def lookup_existential(self, fname: str) -> ExistentialSpec:
        try:
            return self.existential[fname]
        except KeyError:
            raise MissingExistentialSpec(fname) from None


@dataclass(frozen=True)
class CompatReport:
    compatible: bool
    # forall side: (args, return value); exists side: (args, choice values)
    witness: tuple | None = None
    # an exists-side search hit the fuel bound, so False is inconclusive
    truncated: bool = False

    def __bool__(self) -> bool:
        return self.compatible


def _self_ctx(defn: FunDef) -> ImplContext:
    return ImplContext({defn.name: defn})


def check_forall_compatible(
    defn: FunDef, spec: UniversalSpec, domain: IntRange, fuel: int
) -> CompatReport:
    """Does every terminating run of ``defn`` stay within ``spec``?

    Divergent runs are vacuously fine; the judgment quantifies only over
    terminating evaluations.
    """
    if len(defn.params) != len(spec.params):
        raise ArityMismatch(defn.name, len(spec.params), len(defn.params))
    ctx = _self_ctx(defn)
    for args in itertools.product(domain, repeat=len(spec.params)):
        env = dict(zip(spec.params, args))
        if not eval_term(spec.pre, env, domain):
            continue
        start = State(zip(defn.params, args))
        for final in exec_concrete(ctx, start, defn.body, domain, fuel):
            if final is DIVERGED:
                continue
            ret = eval_aexp(final, defn.ret)
            if not eval_term(spec.post, {**env, RET: ret}, domain):
                return CompatReport(False, (args, ret))
    return CompatReport(True)


def check_exists_compatible(
    defn: FunDef, spec: ExistentialSpec, domain: IntRange, fuel: int
) -> CompatReport:
    """Can ``defn`` realize every behavior the spec demands?

    Choice values are enumerated over the same domain as havoc.  When no
    realizing run is found but some run was cut off by fuel, the result is
    inconclusive and reported as a truncated failure.
    """
    if len(defn.params) != len(spec.params):
        raise ArityMismatch(defn.name, len(spec.params), len(defn.params))
    ctx = _self_ctx(defn)
    for args in itertools.product(domain, repeat=len(spec.params)):
        for choices in itertools.product(domain, repeat=len(spec.choice_vars)):
            env = dict(zip(spec.params, args))
            env.update(zip(spec.choice_vars, choices))
            if not eval_term(spec.pre, env, domain):
                continue
            start = State(zip(defn.params, args))
            finals = exec_concrete(ctx, start, defn.body, domain, fuel)
            truncated = DIVERGED in finals
            realized = False
            for final in finals:
                if final is DIVERGED:
                    continue
                ret = eval_aexp(final, defn.ret)
                if eval_term(spec.post, {**env, RET: ret}, domain):
                    realized = True
                    break
            if not realized:
                return CompatReport(False, (args, choices), truncated=truncated)
    return CompatReport(True)


def check_context_compatible(
    impls: ImplContext, specs: SpecContext, domain: IntRange, fuel: int
) -> dict[str, CompatReport]:
    """Check every implemented function against the specs that mention it;
    returns the failing reports keyed by function name."""
    failures: dict[str, CompatReport] = {}
    for fname, defn in impls.defs.items():
        if fname in specs.universal:
            rep = check_forall_compatible(defn, specs.universal[fname], domain, fuel)
            if not rep:
                failures[fname] = rep
        if fname in specs.existential:
            rep = check_exists_compatible(defn, specs.existential[fname], domain, fuel)
            if not rep:
                failures[fname] = rep
    return failures
