"""Core imperative language: syntax and concrete big-step execution.

Programs are statements over integer variables with function calls and a
``havoc`` form for nondeterministic assignment.  The concrete executor
enumerates every final state reachable when havoc ranges over a caller-given
finite domain; loop iterations and call entries consume fuel, and paths that
run out of fuel contribute a Diverged marker instead of a state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import ArityMismatch, UnboundVariable, UnknownFunction
from .terms import Term


@dataclass(frozen=True)
class IntRange:
    """Inclusive integer interval, the enumeration domain for havoc and
    spec-level choice values."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty range {self.lo}..{self.hi}")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __contains__(self, v: int) -> bool:
        return self.lo <= v <= self.hi

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"

    @classmethod
    def parse(cls, text: str) -> "IntRange":
        lo, _, hi = text.partition("..")
        return cls(int(lo), int(hi))


DEFAULT_HAVOC_DOMAIN = IntRange(-4, 4)


# ---------------------------------------------------------------------------
# syntax


class AExp:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(AExp):
    value: int


@dataclass(frozen=True)
class Var(AExp):
    # Surface programs use plain identifiers; copy instantiation rewrites
    # them to namespaced names carrying '!' separators.
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty variable name")


@dataclass(frozen=True)
class AAdd(AExp):
    left: AExp
    right: AExp


@dataclass(frozen=True)
class ASub(AExp):
    left: AExp
    right: AExp


@dataclass(frozen=True)
class AMul(AExp):
    left: AExp
    right: AExp


class BExp:
    __slots__ = ()


@dataclass(frozen=True)
class BoolLit(BExp):
    value: bool


@dataclass(frozen=True)
class BEq(BExp):
    left: AExp
    right: AExp


@dataclass(frozen=True)
class BLt(BExp):
    left: AExp
    right: AExp


@dataclass(frozen=True)
class BNot(BExp):
    arg: BExp


@dataclass(frozen=True)
class BAnd(BExp):
    left: BExp
    right: BExp


@dataclass(frozen=True)
class LoopAnnotation:
    """Invariant and (for existential reasoning) variant of a while loop."""

    invariant: Term
    variant: Term | None = None


class Stmt:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: BExp
    then: Stmt
    orelse: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: BExp
    body: Stmt
    annotation: LoopAnnotation | None = None


@dataclass(frozen=True)
class Assign(Stmt):
    target: str
    value: AExp


@dataclass(frozen=True)
class Havoc(Stmt):
    target: str


@dataclass(frozen=True)
class Call(Stmt):
    target: str
    fname: str
    args: tuple[AExp, ...]


@dataclass(frozen=True)
class FunDef:
    name: str
    params: tuple[str, ...]
    body: Stmt
    ret: AExp

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"duplicate parameters in {self.name}")


@dataclass(frozen=True)
class ImplContext:
    defs: Mapping[str, FunDef] = field(default_factory=dict)

    def lookup(self, fname: str) -> FunDef:
        try:
            return self.defs[fname]
        except KeyError:
            raise UnknownFunction(fname) from None


class State:
    """Immutable finite map from variable names to integers."""

    __slots__ = ("_items", "_map")

    def __init__(self, bindings: Iterable[tuple[str, int]] | Mapping[str, int] = ()):
        m = dict(bindings.items() if isinstance(bindings, Mapping) else bindings)
        object.__setattr__(self, "_map", m)
        object.__setattr__(self, "_items", tuple(sorted(m.items())))

    def get(self, name: str) -> int:
        try:
            return self._map[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def set(self, name: str, value: int) -> "State":
        m = dict(self._map)
        m[name] = value
        return State(m)

    def items(self) -> tuple[tuple[str, int], ...]:
        return self._items

    def as_dict(self) -> dict[str, int]:
        return dict(self._map)

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __eq__(self, other) -> bool:
        return isinstance(other, State) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self._items)
        return f"{{{inner}}}"


class _Diverged:
    __slots__ = ()

    def __repr__(self) -> str:
        return "Diverged"


DIVERGED = _Diverged()

Outcome = State | _Diverged


# ---------------------------------------------------------------------------
# evaluation


def eval_aexp(state: State, e: AExp) -> int:
    match e:
        case IntLit(v):
            return v
        case Var(name):
            return state.get(name)
        case AAdd(l, r):
            return eval_aexp(state, l) + eval_aexp(state, r)
        case ASub(l, r):
            return eval_aexp(state, l) - eval_aexp(state, r)
        case AMul(l, r):
            return eval_aexp(state, l) * eval_aexp(state, r)
        case _:
            raise TypeError(f"not an arithmetic expression: {e!r}")


def eval_bexp(state: State, b: BExp) -> bool:
    match b:
        case BoolLit(v):
            return v
        case BEq(l, r):
            return eval_aexp(state, l) == eval_aexp(state, r)
        case BLt(l, r):
            return eval_aexp(state, l) < eval_aexp(state, r)
        case BNot(a):
            return not eval_bexp(state, a)
        case BAnd(l, r):
            return eval_bexp(state, l) and eval_bexp(state, r)
        case _:
            raise TypeError(f"not a boolean expression: {b!r}")


def exec_concrete(
    ctx: ImplContext,
    state: State,
    stmt: Stmt,
    havoc_domain: IntRange = DEFAULT_HAVOC_DOMAIN,
    fuel: int = 64,
) -> frozenset[Outcome]:
    """All final states reachable from ``state``, havoc ranging over
    ``havoc_domain``; paths that exceed ``fuel`` loop iterations plus call
    entries yield the Diverged marker."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    finals: set[Outcome] = set()
    for out in _run(ctx, state, stmt, havoc_domain, fuel, {}):
        finals.add(DIVERGED if out is DIVERGED else out[0])
    return frozenset(finals)


def _run(
    ctx: ImplContext, state: State, stmt: Stmt, dom: IntRange, fuel: int, memo: dict
) -> frozenset:
    """Outcomes as (state, remaining fuel) pairs or the Diverged marker,
    memoized per statement node so loop enumeration stays polynomial."""
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
            for o in _run(ctx, state, first, dom, fuel, memo):
                if o is DIVERGED:
                    out.add(DIVERGED)
                else:
                    out |= _run(ctx, o[0], second, dom, o[1], memo)
        case If(cond, then, orelse):
            branch = then if eval_bexp(state, cond) else orelse
            out |= _run(ctx, state, branch, dom, fuel, memo)
        case While(cond, body):
            if not eval_bexp(state, cond):
                out.add((state, fuel))
            elif fuel == 0:
                out.add(DIVERGED)
            else:
                for o in _run(ctx, state, body, dom, fuel - 1, memo):
                    if o is DIVERGED:
                        out.add(DIVERGED)
                    else:
                        out |= _run(ctx, o[0], stmt, dom, o[1], memo)
        case Call(target, fname, args):
            fdef = ctx.lookup(fname)
            if len(args) != len(fdef.params):
                raise ArityMismatch(fname, len(fdef.params), len(args))
            vals = [eval_aexp(state, a) for a in args]
            if fuel == 0:
                out.add(DIVERGED)
            else:
                # callee frame binds parameters only; caller locals invisible
                frame = State(zip(fdef.params, vals))
                for o in _run(ctx, frame, fdef.body, dom, fuel - 1, memo):
                    if o is DIVERGED:
                        out.add(DIVERGED)
                    else:
                        ret = eval_aexp(o[0], fdef.ret)
                        out.add((state.set(target, ret), o[1]))
        case _:
            raise TypeError(f"not a statement: {stmt!r}")
    result = frozenset(out)
    memo[key] = result
    return result


# ---------------------------------------------------------------------------
# structure helpers


def normalize(stmt: Stmt) -> tuple[Stmt, ...]:
    """Flatten nested sequencing into a list of non-Seq statements."""
    match stmt:
        case Seq(first, second):
            return normalize(first) + normalize(second)
        case _:
            return (stmt,)


def denormalize(stmts: Iterable[Stmt]) -> Stmt:
    items = list(stmts)
    if not items:
        return Skip()
    out = items[-1]
    for s in reversed(items[:-1]):
        out = Seq(s, out)
    return out


def assigned_vars(stmt: Stmt) -> frozenset[str]:
    """Variables written anywhere in ``stmt`` (assignment, havoc and call
    targets), the renaming set for loop-rule verification conditions."""
    match stmt:
        case Assign(target, _) | Havoc(target) | Call(target, _, _):
            return frozenset((target,))
        case Seq(a, b):
            return assigned_vars(a) | assigned_vars(b)
        case If(_, a, b):
            return assigned_vars(a) | assigned_vars(b)
        case While(_, body):
            return assigned_vars(body)
        case _:
            return frozenset()


def _aexp_vars(e: AExp) -> frozenset[str]:
    match e:
        case Var(name):
            return frozenset((name,))
        case AAdd(l, r) | ASub(l, r) | AMul(l, r):
            return _aexp_vars(l) | _aexp_vars(r)
        case _:
            return frozenset()


def _bexp_vars(b: BExp) -> frozenset[str]:
    match b:
        case BEq(l, r) | BLt(l, r):
            return _aexp_vars(l) | _aexp_vars(r)
        case BNot(a):
            return _bexp_vars(a)
        case BAnd(l, r):
            return _bexp_vars(l) | _bexp_vars(r)
        case _:
            return frozenset()


def read_before_write(stmt: Stmt) -> frozenset[str]:
    """Variables whose initial value a statement may observe."""

    def rec(s: Stmt, written: frozenset[str]) -> tuple[frozenset[str], frozenset[str]]:
        match s:
            case Skip():
                return frozenset(), written
            case Assign(target, value):
                return _aexp_vars(value) - written, written | {target}
            case Havoc(target):
                return frozenset(), written | {target}
            case Call(target, _, args):
                reads = frozenset()
                for a in args:
                    reads |= _aexp_vars(a)
                return reads - written, written | {target}
            case Seq(a, b):
                r1, w1 = rec(a, written)
                r2, w2 = rec(b, w1)
                return r1 | r2, w2
            case If(cond, a, b):
                r0 = _bexp_vars(cond) - written
                r1, w1 = rec(a, written)
                r2, w2 = rec(b, written)
                return r0 | r1 | r2, w1 & w2
            case While(cond, body):
                r0 = _bexp_vars(cond) - written
                r1, _ = rec(body, written)
                return r0 | r1, written
            case _:
                raise TypeError(f"not a statement: {s!r}")

    reads, _ = rec(stmt, frozenset())
    return reads


def occurring_vars(stmt: Stmt) -> frozenset[str]:
    match stmt:
        case Skip():
            return frozenset()
        case Assign(target, value):
            return frozenset((target,)) | _aexp_vars(value)
        case Havoc(target):
            return frozenset((target,))
        case Call(target, _, args):
            out = frozenset((target,))
            for a in args:
                out |= _aexp_vars(a)
            return out
        case Seq(a, b):
            return occurring_vars(a) | occurring_vars(b)
        case If(cond, a, b):
            return _bexp_vars(cond) | occurring_vars(a) | occurring_vars(b)
        case While(cond, body):
            return _bexp_vars(cond) | occurring_vars(body)
        case _:
            raise TypeError(f"not a statement: {stmt!r}")


def enumerate_states(names: Iterable[str], domain: IntRange) -> Iterator[State]:
    """All states binding ``names`` to values from ``domain``."""
    names = sorted(set(names))
    for vals in itertools.product(domain, repeat=len(names)):
        yield State(zip(names, vals))
