"""Assertion-logic terms over integers and booleans.

Terms are the formulas appearing in function contracts, loop annotations,
relational pre/postconditions and generated verification conditions.  They
serialize to and parse from SMT-LIB2 s-expressions.  Besides the AST this
module provides capture-avoiding substitution, deterministic fresh-name
generation, the variable-indexing pass used to keep multiple program copies
apart, a bounded-domain evaluator, and alpha-equivalence helpers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import AlreadyIndexed, ParseError, SortMismatch, UnboundVariable

# Reserved symbol for a function's return value in contract postconditions.
RET = "ret!"

INT = "Int"
BOOL = "Bool"

Binder = tuple[str, str]  # (name, sort)


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return to_smtlib(self)


@dataclass(frozen=True)
class BoolConst(Term):
    value: bool


@dataclass(frozen=True)
class IntConst(Term):
    value: int


@dataclass(frozen=True)
class VarRef(Term):
    name: str


@dataclass(frozen=True)
class Add(Term):
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Mul(Term):
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Div(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Lt(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Le(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Gt(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Ge(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Term):
    arg: Term


@dataclass(frozen=True)
class And(Term):
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Or(Term):
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Implies(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Forall(Term):
    bound: tuple[Binder, ...]
    body: Term


@dataclass(frozen=True)
class Exists(Term):
    bound: tuple[Binder, ...]
    body: Term


TRUE = BoolConst(True)
FALSE = BoolConst(False)


class Side(Enum):
    UNIVERSAL = "forall"
    EXISTENTIAL = "exists"


@dataclass(frozen=True)
class ExecId:
    """Identity of one program copy inside a relational problem.

    The copy's variables live in the namespace ``name!index!`` on the wire.
    """

    name: str
    index: int
    side: Side

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"copy index must be positive, got {self.index}")

    @property
    def label(self) -> str:
        return f"{self.name}!{self.index}"


_NARY = (Add, Mul, And, Or)
_BIN = (Sub, Div, Eq, Lt, Le, Gt, Ge, Implies)
_QUANT = (Forall, Exists)


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, _NARY):
        return t.args
    if isinstance(t, _BIN):
        return (t.left, t.right)
    if isinstance(t, (Neg, Not)):
        return (t.arg,)
    if isinstance(t, _QUANT):
        return (t.body,)
    return ()


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case VarRef(name):
            return frozenset((name,))
        case Forall(bound, body) | Exists(bound, body):
            return free_vars(body) - {n for n, _ in bound}
        case _:
            out: frozenset[str] = frozenset()
            for c in children(t):
                out |= free_vars(c)
            return out


def all_names(t: Term) -> frozenset[str]:
    """Every variable name occurring in ``t``, free or bound."""
    match t:
        case VarRef(name):
            return frozenset((name,))
        case Forall(bound, body) | Exists(bound, body):
            return all_names(body) | {n for n, _ in bound}
        case _:
            out: frozenset[str] = frozenset()
            for c in children(t):
                out |= all_names(c)
            return out


def fresh(hint: str, used: Iterable[str]) -> str:
    """Deterministically pick a name based on ``hint`` that is not in ``used``."""
    taken = set(used)
    if hint not in taken:
        return hint
    i = 0
    while f"{hint}!{i}" in taken:
        i += 1
    return f"{hint}!{i}"


def _rebuild(t: Term, new_children: list[Term]) -> Term:
    if isinstance(t, _NARY):
        return type(t)(tuple(new_children))
    if isinstance(t, _BIN):
        return type(t)(new_children[0], new_children[1])
    if isinstance(t, (Neg, Not)):
        return type(t)(new_children[0])
    if isinstance(t, _QUANT):
        return type(t)(t.bound, new_children[0])
    return t


def subst(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution of free variables.

    Raises SortMismatch when a replacement does not fit the sort of the
    position it lands in.
    """
    if not mapping:
        return t
    needs_check = False
    for repl in mapping.values():
        if sort_of(repl) is BOOL:
            needs_check = True
    out = _subst(t, dict(mapping))
    if needs_check:
        sort_of(out)
    return out


def _subst(t: Term, m: dict[str, Term]) -> Term:
    match t:
        case VarRef(name):
            return m.get(name, t)
        case BoolConst() | IntConst():
            return t
        case Forall(bound, body) | Exists(bound, body):
            bnames = [n for n, _ in bound]
            m2 = {k: v for k, v in m.items() if k not in bnames}
            if not m2:
                return t
            repl_free: set[str] = set()
            for v in m2.values():
                repl_free |= free_vars(v)
            if repl_free & set(bnames):
                used = set(all_names(body)) | repl_free | set(bnames) | set(m2)
                renaming: dict[str, Term] = {}
                new_bound = []
                for n, srt in bound:
                    if n in repl_free:
                        n2 = fresh(n, used)
                        used.add(n2)
                        renaming[n] = VarRef(n2)
                        new_bound.append((n2, srt))
                    else:
                        new_bound.append((n, srt))
                body = _subst(body, renaming)
                bound = tuple(new_bound)
            return type(t)(bound, _subst(body, m2))
        case _:
            return _rebuild(t, [_subst(c, m) for c in children(t)])


def rename_free(t: Term, renaming: Mapping[str, str]) -> Term:
    return subst(t, {k: VarRef(v) for k, v in renaming.items()})


def index_vars(t: Term, exec_id: ExecId, *, passthrough_indexed: bool = False) -> Term:
    """Move every free program variable of ``t`` into ``exec_id``'s namespace.

    Bound variables and the reserved return symbol stay untouched.  Names
    already carrying a ``!`` separator are rejected; with
    ``passthrough_indexed`` they are kept as-is instead, which is how loop
    annotations may refer to other copies' variables.
    """
    prefix = f"{exec_id.name}!{exec_id.index}!"

    def rec(t: Term, bound: frozenset[str]) -> Term:
        match t:
            case VarRef(name):
                if name in bound or name == RET:
                    return t
                if "!" in name:
                    if passthrough_indexed:
                        return t
                    raise AlreadyIndexed(name)
                return VarRef(prefix + name)
            case Forall(b, body) | Exists(b, body):
                return type(t)(b, rec(body, bound | {n for n, _ in b}))
            case _:
                kids = [rec(c, bound) for c in children(t)]
                return _rebuild(t, kids)

    return rec(t, frozenset())


# ---------------------------------------------------------------------------
# sorts


def sort_of(t: Term, env: Mapping[str, str] | None = None) -> str:
    """Infer the sort of ``t``, raising SortMismatch if it is ill-sorted.

    Free variables default to Int; quantifier binders carry explicit sorts.
    """
    env = dict(env) if env else {}

    def want(t: Term, expected: str, e: dict[str, str]) -> None:
        got = rec(t, e)
        if got != expected:
            raise SortMismatch(f"expected {expected}, got {got} in {to_smtlib(t)}")

    def rec(t: Term, e: dict[str, str]) -> str:
        match t:
            case BoolConst():
                return BOOL
            case IntConst():
                return INT
            case VarRef(name):
                return e.get(name, INT)
            case Add(args) | Mul(args):
                for a in args:
                    want(a, INT, e)
                return INT
            case Sub(l, r) | Div(l, r):
                want(l, INT, e)
                want(r, INT, e)
                return INT
            case Neg(a):
                want(a, INT, e)
                return INT
            case Eq(l, r):
                ls, rs = rec(l, e), rec(r, e)
                if ls != rs:
                    raise SortMismatch(f"= applied to {ls} and {rs} in {to_smtlib(t)}")
                return BOOL
            case Lt(l, r) | Le(l, r) | Gt(l, r) | Ge(l, r):
                want(l, INT, e)
                want(r, INT, e)
                return BOOL
            case Not(a):
                want(a, BOOL, e)
                return BOOL
            case And(args) | Or(args):
                for a in args:
                    want(a, BOOL, e)
                return BOOL
            case Implies(l, r):
                want(l, BOOL, e)
                want(r, BOOL, e)
                return BOOL
            case Forall(bound, body) | Exists(bound, body):
                names = [n for n, _ in bound]
                if len(set(names)) != len(names):
                    raise SortMismatch(f"duplicate bound names in {to_smtlib(t)}")
                e2 = dict(e)
                for n, srt in bound:
                    if srt not in (INT, BOOL):
                        raise SortMismatch(f"unknown sort {srt}")
                    e2[n] = srt
                want(body, BOOL, e2)
                return BOOL
            case _:
                raise SortMismatch(f"not a term: {t!r}")

    return rec(t, env)


# ---------------------------------------------------------------------------
# evaluation


def euclidean_div(a: int, b: int) -> int:
    # SMT-LIB Int division: remainder is always in [0, |b|).
    if b == 0:
        raise ZeroDivisionError("div by zero")
    r = a % abs(b)
    return (a - r) // b


def eval_term(t: Term, env: Mapping[str, int | bool], qdomain: Iterable[int] | None = None):
    """Evaluate a term in a full environment.

    Quantified subterms range over ``qdomain`` (bounded enumeration); passing
    None restricts evaluation to quantifier-free terms.
    """
    match t:
        case BoolConst(v):
            return v
        case IntConst(v):
            return v
        case VarRef(name):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariable(name) from None
        case Add(args):
            return sum(eval_term(a, env, qdomain) for a in args)
        case Sub(l, r):
            return eval_term(l, env, qdomain) - eval_term(r, env, qdomain)
        case Neg(a):
            return -eval_term(a, env, qdomain)
        case Mul(args):
            out = 1
            for a in args:
                out *= eval_term(a, env, qdomain)
            return out
        case Div(l, r):
            return euclidean_div(eval_term(l, env, qdomain), eval_term(r, env, qdomain))
        case Eq(l, r):
            return eval_term(l, env, qdomain) == eval_term(r, env, qdomain)
        case Lt(l, r):
            return eval_term(l, env, qdomain) < eval_term(r, env, qdomain)
        case Le(l, r):
            return eval_term(l, env, qdomain) <= eval_term(r, env, qdomain)
        case Gt(l, r):
            return eval_term(l, env, qdomain) > eval_term(r, env, qdomain)
        case Ge(l, r):
            return eval_term(l, env, qdomain) >= eval_term(r, env, qdomain)
        case Not(a):
            return not eval_term(a, env, qdomain)
        case And(args):
            return all(eval_term(a, env, qdomain) for a in args)
        case Or(args):
            return any(eval_term(a, env, qdomain) for a in args)
        case Implies(l, r):
            return (not eval_term(l, env, qdomain)) or eval_term(r, env, qdomain)
        case Forall(bound, body) | Exists(bound, body):
            if qdomain is None:
                raise ValueError("quantified term needs an enumeration domain")
            values = list(qdomain)
            existential = isinstance(t, Exists)

            def loop(i: int, e: dict) -> bool:
                if i == len(bound):
                    return bool(eval_term(body, e, values))
                name, srt = bound[i]
                choices = (False, True) if srt == BOOL else values
                for v in choices:
                    e2 = dict(e)
                    e2[name] = v
                    if loop(i + 1, e2) == existential:
                        return existential
                return not existential

            return loop(0, dict(env))
        case _:
            raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# alpha-equivalence and trivial-conjunct pruning


def alpha_normal(t: Term) -> Term:
    """Rename bound variables to canonical positional names."""

    def rec(t: Term, env: dict[str, str], depth: int) -> Term:
        match t:
            case VarRef(name):
                return VarRef(env.get(name, name))
            case Forall(bound, body) | Exists(bound, body):
                env2 = dict(env)
                new_bound = []
                for k, (n, srt) in enumerate(bound):
                    canon = f"!b{depth}.{k}"
                    env2[n] = canon
                    new_bound.append((canon, srt))
                return type(t)(tuple(new_bound), rec(body, env2, depth + 1))
            case BoolConst() | IntConst():
                return t
            case _:
                return _rebuild(t, [rec(c, env, depth) for c in children(t)])

    return rec(t, {}, 0)


def alpha_equivalent(a: Term, b: Term) -> bool:
    return alpha_normal(a) == alpha_normal(b)


def prune_trivial(t: Term) -> Term:
    """Flatten conjunctions, drop true conjuncts and true antecedents.

    Used when comparing generated verification conditions against formulas
    whose trivial parts were elided; this is exactly the and-reassociation
    closure plus removal of the conjunction identity.
    """
    match t:
        case And(args):
            flat: list[Term] = []
            for a in args:
                p = prune_trivial(a)
                if p == TRUE:
                    continue
                if isinstance(p, And):
                    flat.extend(p.args)
                else:
                    flat.append(p)
            if not flat:
                return TRUE
            if len(flat) == 1:
                return flat[0]
            return And(tuple(flat))
        case Implies(l, r):
            lp, rp = prune_trivial(l), prune_trivial(r)
            if lp == TRUE:
                return rp
            return Implies(lp, rp)
        case Forall(bound, body):
            return Forall(bound, prune_trivial(body))
        case Exists(bound, body):
            return Exists(bound, prune_trivial(body))
        case Not(a):
            return Not(prune_trivial(a))
        case Or(args):
            return Or(tuple(prune_trivial(a) for a in args))
        case _:
            return t


# ---------------------------------------------------------------------------
# SMT-LIB2 printing

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")


def smt_symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    if "|" in name or "\\" in name:
        raise ValueError(f"name cannot be an SMT-LIB symbol: {name!r}")
    return f"|{name}|"


def _int_lit(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def to_smtlib(t: Term) -> str:
    match t:
        case BoolConst(v):
            return "true" if v else "false"
        case IntConst(v):
            return _int_lit(v)
        case VarRef(name):
            return smt_symbol(name)
        case Add(args):
            return "(+ " + " ".join(to_smtlib(a) for a in args) + ")"
        case Mul(args):
            return "(* " + " ".join(to_smtlib(a) for a in args) + ")"
        case Sub(l, r):
            return f"(- {to_smtlib(l)} {to_smtlib(r)})"
        case Neg(a):
            return f"(- {to_smtlib(a)})"
        case Div(l, r):
            return f"(div {to_smtlib(l)} {to_smtlib(r)})"
        case Eq(l, r):
            return f"(= {to_smtlib(l)} {to_smtlib(r)})"
        case Lt(l, r):
            return f"(< {to_smtlib(l)} {to_smtlib(r)})"
        case Le(l, r):
            return f"(<= {to_smtlib(l)} {to_smtlib(r)})"
        case Gt(l, r):
            return f"(> {to_smtlib(l)} {to_smtlib(r)})"
        case Ge(l, r):
            return f"(>= {to_smtlib(l)} {to_smtlib(r)})"
        case Not(a):
            return f"(not {to_smtlib(a)})"
        case And(args):
            return "(and " + " ".join(to_smtlib(a) for a in args) + ")"
        case Or(args):
            return "(or " + " ".join(to_smtlib(a) for a in args) + ")"
        case Implies(l, r):
            return f"(=> {to_smtlib(l)} {to_smtlib(r)})"
        case Forall(bound, body) | Exists(bound, body):
            kw = "forall" if isinstance(t, Forall) else "exists"
            binders = " ".join(f"({smt_symbol(n)} {srt})" for n, srt in bound)
            return f"({kw} ({binders}) {to_smtlib(body)})"
        case _:
            raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# SMT-LIB2 parsing

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<comment>;[^\n]*)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<quoted>\|[^|]*\|)
      | (?P<atom>[^\s()|;]+)
    )""",
    re.VERBOSE,
)


def tokenize_sexpr(text: str) -> Iterator[tuple[str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad character {text[pos]!r}", *_linecol(text, pos))
            return
        pos = m.end()
        if m.lastgroup == "comment":
            continue
        yield m.group(m.lastgroup), m.start(m.lastgroup)


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def parse_sexprs(text: str) -> list:
    """Parse a sequence of s-expressions into nested lists of atom strings."""
    stack: list[list] = []
    out: list = []
    for tok, pos in tokenize_sexpr(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise ParseError("unmatched )", *_linecol(text, pos))
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            if tok.startswith("|"):
                tok = tok[1:-1]
            (stack[-1] if stack else out).append(tok)
    if stack:
        raise ParseError("unclosed (", *_linecol(text, len(text) - 1))
    return out


_NUMERAL = re.compile(r"-?[0-9]+$")


def term_from_sexpr(sx) -> Term:
    if isinstance(sx, str):
        if sx == "true":
            return TRUE
        if sx == "false":
            return FALSE
        if _NUMERAL.match(sx):
            return IntConst(int(sx))
        return VarRef(sx)
    if not sx:
        raise ParseError("empty application ()")
    head, *rest = sx
    if head in ("forall", "exists"):
        if len(rest) != 2 or not isinstance(rest[0], list):
            raise ParseError(f"malformed {head}")
        bound = []
        for b in rest[0]:
            if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                raise ParseError(f"malformed binder in {head}")
            name, srt = b
            if srt not in (INT, BOOL):
                raise ParseError(f"unknown sort {srt}")
            bound.append((name, srt))
        body = term_from_sexpr(rest[1])
        cls = Forall if head == "forall" else Exists
        return cls(tuple(bound), body)
    args = [term_from_sexpr(a) for a in rest]
    match head:
        case "+":
            if len(args) < 2:
                return args[0] if args else IntConst(0)
            return Add(tuple(args))
        case "*":
            if len(args) < 2:
                return args[0] if args else IntConst(1)
            return Mul(tuple(args))
        case "-":
            if len(args) == 1:
                if isinstance(args[0], IntConst):
                    return IntConst(-args[0].value)
                return Neg(args[0])
            out = args[0]
            for a in args[1:]:
                out = Sub(out, a)
            return out
        case "div":
            if len(args) < 2:
                raise ParseError("div needs two arguments")
            out = args[0]
            for a in args[1:]:
                out = Div(out, a)
            return out
        case "=" | "<" | "<=" | ">" | ">=":
            if len(args) != 2:
                raise ParseError(f"{head} takes exactly two arguments")
            cls = {"=": Eq, "<": Lt, "<=": Le, ">": Gt, ">=": Ge}[head]
            return cls(args[0], args[1])
        case "not":
            if len(args) != 1:
                raise ParseError("not takes one argument")
            return Not(args[0])
        case "and":
            if len(args) < 2:
                return args[0] if args else TRUE
            return And(tuple(args))
        case "or":
            if len(args) < 2:
                return args[0] if args else FALSE
            return Or(tuple(args))
        case "=>":
            if len(args) < 2:
                raise ParseError("=> needs two arguments")
            out = args[-1]
            for a in reversed(args[:-1]):
                out = Implies(a, out)
            return out
        case _:
            raise ParseError(f"unknown operator {head!r}")


def parse_term(text: str) -> Term:
    sxs = parse_sexprs(text)
    if len(sxs) != 1:
        raise ParseError(f"expected one term, found {len(sxs)}")
    t = term_from_sexpr(sxs[0])
    sort_of(t)
    return t
