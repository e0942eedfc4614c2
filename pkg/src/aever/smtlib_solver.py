"""Self-contained SMT-LIB2 solver for quantified linear integer arithmetic.

Runs as a subprocess (``python -m aever.smtlib_solver``) reading an SMT-LIB2
script on stdin and answering ``check-sat``/``get-model`` on stdout, so the
verification backend can treat it exactly like any external solver.  The
decision procedure is quantifier elimination for Presburger arithmetic
(Cooper's method) with two front-end elaborations:

* integer division by a positive constant is removed by introducing the
  (unique) quotient as a quantified variable with its bounding constraints;
* formulas outside the linear fragment (variable products, division by a
  non-constant) make ``check-sat`` answer ``unknown``.

Models are extracted by replaying the elimination stack: with outer
variables fixed, each variable admits a finite candidate set derived from
the atom thresholds and divisibility periods.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from math import gcd
from typing import Mapping

from .errors import ParseError
from .terms import (
    BOOL,
    INT,
    Add,
    And,
    BoolConst,
    Div,
    Eq,
    Exists,
    Forall,
    Ge,
    Gt,
    Implies,
    IntConst,
    Le,
    Lt,
    Mul,
    Neg,
    Not,
    Or,
    Sub,
    Term,
    VarRef,
    all_names,
    fresh,
    parse_sexprs,
    smt_symbol,
    term_from_sexpr,
)


class Unsupported(Exception):
    pass


class Timeout(Exception):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# linear terms


@dataclass(frozen=True)
class Lin:
    """Linear combination sum(coeff_i * var_i) + const."""

    coeffs: tuple[tuple[str, int], ...]
    const: int

    @staticmethod
    def make(coeffs: Mapping[str, int], const: int) -> "Lin":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return Lin(items, const)

    @staticmethod
    def of_const(k: int) -> "Lin":
        return Lin((), k)

    @staticmethod
    def of_var(name: str) -> "Lin":
        return Lin(((name, 1),), 0)

    def coeff(self, name: str) -> int:
        for v, c in self.coeffs:
            if v == name:
                return c
        return 0

    def add(self, other: "Lin") -> "Lin":
        m = dict(self.coeffs)
        for v, c in other.coeffs:
            m[v] = m.get(v, 0) + c
        return Lin.make(m, self.const + other.const)

    def scale(self, k: int) -> "Lin":
        if k == 0:
            return Lin.of_const(0)
        return Lin(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    def plus_const(self, k: int) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def drop(self, name: str) -> "Lin":
        return Lin(tuple((v, c) for v, c in self.coeffs if v != name), self.const)

    def subst(self, name: str, repl: "Lin") -> "Lin":
        c = self.coeff(name)
        if c == 0:
            return self
        return self.drop(name).add(repl.scale(c))

    def is_ground(self) -> bool:
        return not self.coeffs

    def names(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)



# ---------------------------------------------------------------------------
# quantifier-free formulas in negation normal form


class F:
    __slots__ = ()


@dataclass(frozen=True)
class FBool(F):
    value: bool


@dataclass(frozen=True)
class FLt(F):  # lin < 0
    lin: Lin


@dataclass(frozen=True)
class FEq(F):  # lin = 0
    lin: Lin


@dataclass(frozen=True)
class FDvd(F):  # d | lin
    d: int
    lin: Lin


@dataclass(frozen=True)
class FNDvd(F):  # not (d | lin)
    d: int
    lin: Lin


@dataclass(frozen=True)
class FAnd(F):
    args: tuple[F, ...]


@dataclass(frozen=True)
class FOr(F):
    args: tuple[F, ...]


FTRUE = FBool(True)
FFALSE = FBool(False)

_NODE_BUDGET = 400_000


def _mk_and(args: list[F]) -> F:
    flat: list[F] = []
    seen = set()
    for a in args:
        if a == FFALSE:
            return FFALSE
        if a == FTRUE:
            continue
        parts = a.args if isinstance(a, FAnd) else (a,)
        for p in parts:
            if p == FFALSE:
                return FFALSE
            if p != FTRUE and p not in seen:
                seen.add(p)
                flat.append(p)
    if not flat:
        return FTRUE
    if len(flat) == 1:
        return flat[0]
    return FAnd(tuple(flat))


def _mk_or(args: list[F]) -> F:
    flat: list[F] = []
    seen = set()
    for a in args:
        if a == FTRUE:
            return FTRUE
        if a == FFALSE:
            continue
        parts = a.args if isinstance(a, FOr) else (a,)
        for p in parts:
            if p == FTRUE:
                return FTRUE
            if p != FFALSE and p not in seen:
                seen.add(p)
                flat.append(p)
    if not flat:
        return FFALSE
    if len(flat) == 1:
        return flat[0]
    return FOr(tuple(flat))


def _atom_lt(lin: Lin) -> F:
    if lin.is_ground():
        return FBool(lin.const < 0)
    return FLt(lin)


def _atom_eq(lin: Lin) -> F:
    if lin.is_ground():
        return FBool(lin.const == 0)
    return FEq(lin)


def _atom_dvd(d: int, lin: Lin, positive: bool) -> F:
    d = abs(d)
    if d == 1:
        return FBool(positive)
    if lin.is_ground():
        return FBool((lin.const % d == 0) == positive)
    g = d
    for _, c in lin.coeffs:
        g = gcd(g, abs(c))
    g = gcd(g, abs(lin.const))
    if g > 1:
        d //= g
        lin = Lin(tuple((v, c // g) for v, c in lin.coeffs), lin.const // g)
        if d == 1:
            return FBool(positive)
    return FDvd(d, lin) if positive else FNDvd(d, lin)


def fneg(f: F) -> F:
    match f:
        case FBool(v):
            return FBool(not v)
        case FLt(lin):
            # not (lin < 0)  <=>  -lin - 1 < 0
            return _atom_lt(lin.scale(-1).plus_const(-1))
        case FEq(lin):
            return _mk_or([_atom_lt(lin), _atom_lt(lin.scale(-1))])
        case FDvd(d, lin):
            return _atom_dvd(d, lin, False)
        case FNDvd(d, lin):
            return _atom_dvd(d, lin, True)
        case FAnd(args):
            return _mk_or([fneg(a) for a in args])
        case FOr(args):
            return _mk_and([fneg(a) for a in args])
        case _:
            raise TypeError(repr(f))


def _fsize(f: F) -> int:
    match f:
        case FAnd(args) | FOr(args):
            return 1 + sum(_fsize(a) for a in args)
        case _:
            return 1


def _fvars(f: F) -> frozenset[str]:
    match f:
        case FLt(lin) | FEq(lin) | FDvd(_, lin) | FNDvd(_, lin):
            return lin.names()
        case FAnd(args) | FOr(args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= _fvars(a)
            return out
        case _:
            return frozenset()


def _fsubst(f: F, name: str, repl: Lin) -> F:
    match f:
        case FBool():
            return f
        case FLt(lin):
            return _atom_lt(lin.subst(name, repl))
        case FEq(lin):
            return _atom_eq(lin.subst(name, repl))
        case FDvd(d, lin):
            return _atom_dvd(d, lin.subst(name, repl), True)
        case FNDvd(d, lin):
            return _atom_dvd(d, lin.subst(name, repl), False)
        case FAnd(args):
            return _mk_and([_fsubst(a, name, repl) for a in args])
        case FOr(args):
            return _mk_or([_fsubst(a, name, repl) for a in args])
        case _:
            raise TypeError(repr(f))


def _feval(f: F) -> bool:
    match f:
        case FBool(v):
            return v
        case FAnd(args):
            return all(_feval(a) for a in args)
        case FOr(args):
            return any(_feval(a) for a in args)
        case _:
            raise ValueError(f"formula is not ground: {f!r}")


# ---------------------------------------------------------------------------
# Cooper elimination of one existential variable


def _one_point(name: str, f: F) -> F | None:
    # exists x. (x = t /\ rest)  =>  rest[t/x]
    if isinstance(f, FEq):
        f = FAnd((f,))
    if not isinstance(f, FAnd):
        return None
    for i, a in enumerate(f.args):
        if isinstance(a, FEq):
            c = a.lin.coeff(name)
            if abs(c) == 1:
                repl = a.lin.drop(name).scale(-c)
                rest = [x for j, x in enumerate(f.args) if j != i]
                return _mk_and([_fsubst(x, name, repl) for x in rest])
    return None


def cooper_exists(name: str, f: F, deadline: float | None = None) -> F:
    if deadline is not None and time.monotonic() > deadline:
        raise Timeout()
    if name not in _fvars(f):
        return f
    shortcut = _one_point(name, f)
    if shortcut is not None:
        return shortcut

    delta = 1
    for atom in _atoms(f):
        c = atom.lin.coeff(name)
        if c:
            delta = _lcm(delta, abs(c))

    def scaled(g: F) -> F:
        match g:
            case FBool():
                return g
            case FLt(lin):
                c = lin.coeff(name)
                if c == 0:
                    return g
                m = delta // abs(c)
                return FLt(_unitize(lin.scale(m), name))
            case FEq(lin):
                c = lin.coeff(name)
                if c == 0:
                    return g
                m = delta // abs(c)
                l2 = _unitize(lin.scale(m), name)
                # split x = t into x < t+1 and x > t-1 so bound collection
                # only deals with strict inequalities
                return FAnd((FLt(l2.plus_const(-1)), FLt(l2.scale(-1).plus_const(-1))))
            case FDvd(d, lin) | FNDvd(d, lin):
                c = lin.coeff(name)
                if c == 0:
                    return g
                m = delta // abs(c)
                l2 = _unitize(lin.scale(m), name)
                cls = FDvd if isinstance(g, FDvd) else FNDvd
                return cls(d * m, l2)
            case FAnd(args):
                return _mk_and([scaled(a) for a in args])
            case FOr(args):
                return _mk_or([scaled(a) for a in args])
            case _:
                raise TypeError(repr(g))

    g = _mk_and([scaled(f), _atom_dvd(delta, Lin.of_var(name), True)])

    lowers: list[Lin] = []
    uppers: list[Lin] = []
    big_d = 1
    for atom in _atoms(g):
        c = atom.lin.coeff(name)
        if c == 0:
            continue
        if isinstance(atom, (FDvd, FNDvd)):
            big_d = _lcm(big_d, atom.d)
        elif isinstance(atom, FLt):
            rest = atom.lin.drop(name)
            if c > 0:
                uppers.append(rest.scale(-1))  # x < -rest
            else:
                lowers.append(rest)  # x > rest
        else:
            raise AssertionError(f"unexpected atom {atom!r}")

    disjuncts: list[F] = []
    if len(lowers) <= len(uppers):
        # minus-infinity form over lower-bound substitution points
        for j in range(1, big_d + 1):
            disjuncts.append(_project_inf(g, name, j, low=True))
        for b in lowers:
            for j in range(1, big_d + 1):
                disjuncts.append(_fsubst(g, name, b.plus_const(j)))
    else:
        for j in range(1, big_d + 1):
            disjuncts.append(_project_inf(g, name, -j, low=False))
        for a in uppers:
            for j in range(1, big_d + 1):
                disjuncts.append(_fsubst(g, name, a.plus_const(-j)))

    out = _mk_or(disjuncts)
    if _fsize(out) > _NODE_BUDGET:
        raise Unsupported("formula blew up during quantifier elimination")
    return out


def _unitize(lin: Lin, name: str) -> Lin:
    # coefficient of `name` is +-delta here; rewrite to +-1 (change of variable)
    c = lin.coeff(name)
    sign = 1 if c > 0 else -1
    return lin.drop(name).add(Lin.of_var(name).scale(sign))


def _project_inf(g: F, name: str, j: int, *, low: bool) -> F:
    """Replace x by a value below every lower bound (or above every upper
    bound); inequalities decide by sign, periodic atoms take x = j."""
    match g:
        case FBool():
            return g
        case FLt(lin):
            c = lin.coeff(name)
            if c == 0:
                return g
            towards_true = c > 0 if low else c < 0
            return FTRUE if towards_true else FFALSE
        case FDvd(_, lin) | FNDvd(_, lin):
            if lin.coeff(name) == 0:
                return g
            return _fsubst(g, name, Lin.of_const(j))
        case FEq(lin):
            if lin.coeff(name) == 0:
                return g
            return FFALSE
        case FAnd(args):
            return _mk_and([_project_inf(a, name, j, low=low) for a in args])
        case FOr(args):
            return _mk_or([_project_inf(a, name, j, low=low) for a in args])
        case _:
            raise TypeError(repr(g))


def _atoms(f: F):
    match f:
        case FAnd(args) | FOr(args):
            for a in args:
                yield from _atoms(a)
        case FBool():
            return
        case _:
            yield f


# ---------------------------------------------------------------------------
# Term -> formula conversion (with on-the-fly quantifier elimination)


def _lin_of(t: Term, bools: frozenset[str]) -> Lin:
    match t:
        case IntConst(v):
            return Lin.of_const(v)
        case VarRef(name):
            if name in bools:
                raise Unsupported("boolean variable in arithmetic position")
            return Lin.of_var(name)
        case Add(args):
            out = Lin.of_const(0)
            for a in args:
                out = out.add(_lin_of(a, bools))
            return out
        case Sub(l, r):
            return _lin_of(l, bools).add(_lin_of(r, bools).scale(-1))
        case Neg(a):
            return _lin_of(a, bools).scale(-1)
        case Mul(args):
            lins = [_lin_of(a, bools) for a in args]
            out = Lin.of_const(1)
            for lin in lins:
                if out.is_ground():
                    out = lin.scale(out.const)
                elif lin.is_ground():
                    out = out.scale(lin.const)
                else:
                    raise Unsupported("nonlinear multiplication")
            return out
        case Div():
            raise Unsupported("unelaborated integer division")
        case _:
            raise Unsupported(f"not an integer term: {t!r}")


def _contains_div(t: Term) -> bool:
    if isinstance(t, Div):
        return True
    from .terms import children

    return any(_contains_div(c) for c in children(t))


def _elaborate_divs(t: Term, used: set[str]) -> Term:
    """Rewrite every comparison containing (div a k) into an equivalent
    quantified form with the quotient named explicitly."""
    from .terms import children as kids

    def innermost_div(x: Term) -> Div | None:
        if isinstance(x, Div):
            inner = innermost_div(x.left) or innermost_div(x.right)
            return inner if inner is not None else x
        for c in kids(x):
            d = innermost_div(c)
            if d is not None:
                return d
        return None

    def replace(x: Term, target: Term, repl: Term) -> Term:
        if x == target:
            return repl
        match x:
            case Forall(b, body):
                return Forall(b, replace(body, target, repl))
            case Exists(b, body):
                return Exists(b, replace(body, target, repl))
            case _:
                from .terms import _rebuild

                return _rebuild(x, [replace(c, target, repl) for c in kids(x)])

    def fix_atom(atom: Term) -> Term:
        while _contains_div(atom):
            d = innermost_div(atom)
            assert d is not None
            if not isinstance(d.right, IntConst) or d.right.value <= 0:
                raise Unsupported("division by a non-positive or non-constant divisor")
            k = d.right.value
            q = fresh("q!", used)
            used.add(q)
            qv = VarRef(q)
            atom = Exists(
                ((q, INT),),
                And(
                    (
                        Le(Mul((IntConst(k), qv)), d.left),
                        Lt(d.left, Add((Mul((IntConst(k), qv)), IntConst(k)))),
                        replace(atom, d, qv),
                    )
                ),
            )
        return atom

    match t:
        case Eq() | Lt() | Le() | Gt() | Ge():
            return fix_atom(t) if _contains_div(t) else t
        case Forall(b, body):
            return Forall(b, _elaborate_divs(body, used))
        case Exists(b, body):
            return Exists(b, _elaborate_divs(body, used))
        case And(args):
            return And(tuple(_elaborate_divs(a, used) for a in args))
        case Or(args):
            return Or(tuple(_elaborate_divs(a, used) for a in args))
        case Not(a):
            return Not(_elaborate_divs(a, used))
        case Implies(l, r):
            return Implies(_elaborate_divs(l, used), _elaborate_divs(r, used))
        case _:
            return t


_BOOLISH = (BoolConst, Not, And, Or, Implies, Forall, Exists, Eq, Lt, Le, Gt, Ge)


def to_formula(t: Term, bools: frozenset[str], deadline: float | None) -> F:
    """Quantifier-free equivalent of ``t``; quantifiers are eliminated
    bottom-up as they are encountered."""
    match t:
        case BoolConst(v):
            return FBool(v)
        case VarRef(name):
            if name in bools:
                raise Unsupported("free boolean variables are not supported")
            raise Unsupported(f"integer variable {name} used as a formula")
        case Not(a):
            return fneg(to_formula(a, bools, deadline))
        case And(args):
            return _mk_and([to_formula(a, bools, deadline) for a in args])
        case Or(args):
            return _mk_or([to_formula(a, bools, deadline) for a in args])
        case Implies(l, r):
            return _mk_or(
                [fneg(to_formula(l, bools, deadline)), to_formula(r, bools, deadline)]
            )
        case Eq(l, r):
            if isinstance(l, _BOOLISH) or isinstance(r, _BOOLISH):
                fl = to_formula(l, bools, deadline)
                fr = to_formula(r, bools, deadline)
                return _mk_or([_mk_and([fl, fr]), _mk_and([fneg(fl), fneg(fr)])])
            return _atom_eq(_lin_of(l, bools).add(_lin_of(r, bools).scale(-1)))
        case Lt(l, r):
            return _atom_lt(_lin_of(l, bools).add(_lin_of(r, bools).scale(-1)))
        case Le(l, r):
            # a <= b  <=>  a - b - 1 < 0
            return _atom_lt(
                _lin_of(l, bools).add(_lin_of(r, bools).scale(-1)).plus_const(-1)
            )
        case Gt(l, r):
            return _atom_lt(_lin_of(r, bools).add(_lin_of(l, bools).scale(-1)))
        case Ge(l, r):
            return _atom_lt(
                _lin_of(r, bools).add(_lin_of(l, bools).scale(-1)).plus_const(-1)
            )
        case Forall(bound, body):
            inner = fneg(to_formula(body, bools, deadline))
            for name, srt in reversed(bound):
                if srt != INT:
                    raise Unsupported("only Int quantifiers are supported")
                inner = cooper_exists(name, inner, deadline)
            return fneg(inner)
        case Exists(bound, body):
            inner = to_formula(body, bools, deadline)
            for name, srt in reversed(bound):
                if srt != INT:
                    raise Unsupported("only Int quantifiers are supported")
                inner = cooper_exists(name, inner, deadline)
            return inner
        case _:
            raise Unsupported(f"term not supported: {t!r}")


# ---------------------------------------------------------------------------
# satisfiability and model extraction


def _candidates(f: F, name: str) -> list[int]:
    roots: set[int] = {0}
    big_d = 1
    for atom in _atoms(f):
        c = atom.lin.coeff(name)
        if c == 0:
            continue
        big_d = _lcm(big_d, abs(c))
        if isinstance(atom, (FDvd, FNDvd)):
            big_d = _lcm(big_d, atom.d)
        rest = atom.lin.drop(name)
        if not rest.is_ground():
            raise AssertionError("candidate extraction needs a univariate formula")
        roots.add((-rest.const) // c)
    out: set[int] = set()
    for r in roots:
        for t in range(-(big_d + 1), big_d + 2):
            out.add(r + t)
    return sorted(out)


class Decision:
    def __init__(self, status: str, stack: list[tuple[str, F]] | None = None):
        self.status = status  # "sat" | "unsat" | "unknown"
        self.stack = stack or []
        self.reason: str | None = None


def decide(assertion: Term, declared: Mapping[str, str], timeout_ms: int | None) -> Decision:
    deadline = None if not timeout_ms else time.monotonic() + timeout_ms / 1000.0
    bools = frozenset(n for n, s in declared.items() if s == BOOL)
    try:
        used = set(all_names(assertion)) | set(declared)
        t = _elaborate_divs(assertion, used)
        f = to_formula(t, bools, deadline)
        free = sorted(_fvars(f))
        # eliminate free variables one by one, remembering the formula each
        # variable was eliminated from so a model can be replayed later
        stack: list[tuple[str, F]] = []
        for name in reversed(free):
            stack.append((name, f))
            f = cooper_exists(name, f, deadline)
        sat = _feval(f)
        decision = Decision("sat" if sat else "unsat", stack)
        return decision
    except Unsupported as exc:
        d = Decision("unknown")
        d.reason = str(exc)
        return d
    except Timeout:
        d = Decision("unknown")
        d.reason = "timeout"
        return d


def extract_model(decision: Decision, declared: Mapping[str, str]) -> dict[str, int]:
    if decision.status != "sat":
        raise ValueError("no model unless sat")
    env: dict[str, int] = {}
    for name, f in reversed(decision.stack):
        g = f
        for k, v in env.items():
            g = _fsubst(g, k, Lin.of_const(v))
        value = None
        for cand in _candidates(g, name):
            h = _fsubst(g, name, Lin.of_const(cand))
            if _feval(h):
                value = cand
                break
        if value is None:
            raise AssertionError("sat formula lost its witness")
        env[name] = value
    return {n: env.get(n, 0) for n in declared}


# ---------------------------------------------------------------------------
# SMT-LIB2 session over stdin/stdout


def run_session(script: str, out) -> int:
    declared: dict[str, str] = {}
    assertions: list[Term] = []
    timeout_ms: int | None = None
    last: Decision | None = None

    try:
        commands = parse_sexprs(script)
    except ParseError as exc:
        print(f'(error "{exc}")', file=out)
        return 1

    for cmd in commands:
        if not isinstance(cmd, list) or not cmd:
            print('(error "expected a command")', file=out)
            continue
        head = cmd[0]
        match head:
            case "set-logic" | "set-info" | "push" | "pop":
                pass
            case "reset":
                declared.clear()
                assertions.clear()
                last = None
            case "set-option":
                if len(cmd) == 3 and cmd[1] == ":timeout":
                    try:
                        timeout_ms = int(cmd[2])
                    except ValueError:
                        print('(error "bad :timeout value")', file=out)
            case "declare-const":
                if len(cmd) == 3 and isinstance(cmd[1], str) and cmd[2] in (INT, BOOL):
                    declared[cmd[1]] = cmd[2]
                else:
                    print('(error "malformed declare-const")', file=out)
            case "declare-fun":
                if (
                    len(cmd) == 4
                    and isinstance(cmd[1], str)
                    and cmd[2] == []
                    and cmd[3] in (INT, BOOL)
                ):
                    declared[cmd[1]] = cmd[3]
                else:
                    print('(error "only nullary declare-fun is supported")', file=out)
            case "assert":
                if len(cmd) != 2:
                    print('(error "malformed assert")', file=out)
                    continue
                try:
                    assertions.append(term_from_sexpr(cmd[1]))
                except ParseError as exc:
                    print(f'(error "{exc}")', file=out)
            case "check-sat":
                goal: Term = (
                    And(tuple(assertions))
                    if len(assertions) > 1
                    else (assertions[0] if assertions else BoolConst(True))
                )
                last = decide(goal, declared, timeout_ms)
                print(last.status, file=out)
            case "get-model":
                if last is None or last.status != "sat":
                    print('(error "model is not available")', file=out)
                    continue
                model = extract_model(last, declared)
                lines = [
                    f"  (define-fun {smt_symbol(n)} () Int {v if v >= 0 else f'(- {-v})'})"
                    for n, v in sorted(model.items())
                ]
                print("(\n" + "\n".join(lines) + "\n)", file=out)
            case "exit":
                break
            case _:
                print(f'(error "unsupported command {head}")', file=out)
    return 0


def main() -> int:
    return run_session(sys.stdin.read(), sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
