"""Parser and printer for the verification input format.

An input file declares program copies on the universal and existential
sides, relational pre/postconditions over namespaced variables
(``name!index!var``), function contracts in both modes, and the program
bodies in a small surface syntax::

    expected: valid;

    forall: run[1];
    exists: run[2];

    pre:  (= run!1!low run!2!low);
    post: (= run!1!low run!2!low);

    aspecs:
      flipCoin() { pre: true; post: (or (= ret! 0) (= ret! 1)); }

    especs:
      flipCoin() { templateVars: n; pre: (or (= n 0) (= n 1)); post: (= ret! n); }

    prog run(high, low):
      if (low < high) then low := 0; else low := 1; end
      flip := call flipCoin();
      if (flip == 0) then low := 1 - low; else skip; end
    endp

Statement forms: ``skip;``, ``x := aexp;``, ``x := call f(args);``,
``havoc x;``, ``if b then ... else ... end`` (else optional), and
``while b do @inv{term} @var{term} ... end`` where the annotations are
written over the program's own (unindexed) variables and the variant is
required only for loops on the existential side.  ``//`` starts a line
comment.  The ``expected:`` annotation is bookkeeping only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ParseError, SortMismatch
from .imp import (
    AAdd,
    AExp,
    AMul,
    ASub,
    Assign,
    BAnd,
    BEq,
    BExp,
    BLt,
    BNot,
    BoolLit,
    Call,
    Havoc,
    If,
    IntLit,
    LoopAnnotation,
    Seq,
    Skip,
    Stmt,
    Var,
    While,
    denormalize,
    normalize,
)
from .specs import ExistentialSpec, SpecContext, UniversalSpec
from .terms import (
    BOOL,
    INT,
    TRUE,
    ExecId,
    Side,
    Term,
    free_vars,
    parse_term,
    sort_of,
    to_smtlib,
)
from .vcgen import ProgramCopy, copy_for

_SECTION_WORDS = {"expected", "forall", "exists", "pre", "post", "aspecs", "especs", "prog"}
_STMT_WORDS = {"skip", "havoc", "if", "then", "else", "end", "while", "do", "call", "endp"}
_RESERVED = _SECTION_WORDS | _STMT_WORDS | {"valid", "invalid", "true", "false", "not", "templateVars"}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[str, ...]
    body: Stmt


@dataclass(frozen=True)
class VerificationProblem:
    universal_copies: tuple[tuple[str, int], ...] = ()
    existential_copies: tuple[tuple[str, int], ...] = ()
    pre: Term = TRUE
    post: Term = TRUE
    aspecs: Mapping[str, UniversalSpec] = field(default_factory=dict)
    especs: Mapping[str, ExistentialSpec] = field(default_factory=dict)
    programs: Mapping[str, Program] = field(default_factory=dict)
    expected: str | None = None  # "valid" | "invalid" | None

    def spec_context(self) -> SpecContext:
        return SpecContext(self.aspecs, self.especs)

    def copies(self) -> tuple[tuple[str, int, Side], ...]:
        return tuple(
            [(n, i, Side.UNIVERSAL) for n, i in self.universal_copies]
            + [(n, i, Side.EXISTENTIAL) for n, i in self.existential_copies]
        )


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _linecol(self, pos: int | None = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def error(self, message: str, pos: int | None = None):
        raise ParseError(message, *self._linecol(pos))

    def skip_ws(self):
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isspace():
                self.pos += 1
            elif self.text.startswith("//", self.pos):
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            else:
                return

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek_word(self) -> str | None:
        self.skip_ws()
        m = _NAME.match(self.text, self.pos)
        return m.group() if m else None

    def try_word(self, word: str) -> bool:
        if self.peek_word() == word:
            self.pos += len(word)
            return True
        return False

    def expect_word(self, word: str):
        if not self.try_word(word):
            self.error(f"expected {word!r}")

    def read_name(self) -> str:
        w = self.peek_word()
        if w is None:
            self.error("expected an identifier")
        if w in _RESERVED:
            self.error(f"{w!r} is a reserved word")
        self.pos += len(w)
        return w

    def try_punct(self, *ops: str) -> str | None:
        self.skip_ws()
        for op in sorted(ops, key=len, reverse=True):
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return op
        return None

    def expect_punct(self, op: str):
        if self.try_punct(op) is None:
            self.error(f"expected {op!r}")

    def read_int(self) -> int:
        self.skip_ws()
        m = re.compile(r"-?[0-9]+").match(self.text, self.pos)
        if not m:
            self.error("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def read_term_text(self) -> str:
        """Raw text up to the ';' terminating the current section, balanced
        over parentheses."""
        self.skip_ws()
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
                if depth < 0:
                    self.error("unmatched )")
            elif c == ";" and depth == 0:
                text = self.text[start : self.pos]
                self.pos += 1
                return text
            self.pos += 1
        self.error("missing ';' after term", start)

    def read_braced(self) -> str:
        self.expect_punct("{")
        start = self.pos
        depth = 1
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    text = self.text[start : self.pos]
                    self.pos += 1
                    return text
            self.pos += 1
        self.error("missing '}'", start)


def _parse_term_at(sc: _Scanner, text: str, start_pos: int, expect_sort: str) -> Term:
    try:
        t = parse_term(text)
        actual = sort_of(t)
    except (ParseError, SortMismatch) as exc:
        sc.error(f"bad term: {exc}", start_pos)
    if actual != expect_sort:
        sc.error(f"term must have sort {expect_sort}", start_pos)
    return t


# ---------------------------------------------------------------------------
# expressions


def _parse_aexp(sc: _Scanner) -> AExp:
    e = _parse_amul(sc)
    while True:
        op = sc.try_punct("+", "-")
        if op is None:
            return e
        rhs = _parse_amul(sc)
        e = AAdd(e, rhs) if op == "+" else ASub(e, rhs)


def _parse_amul(sc: _Scanner) -> AExp:
    e = _parse_aatom(sc)
    while sc.try_punct("*"):
        e = AMul(e, _parse_aatom(sc))
    return e


def _parse_aatom(sc: _Scanner) -> AExp:
    sc.skip_ws()
    if sc.try_punct("("):
        e = _parse_aexp(sc)
        sc.expect_punct(")")
        return e
    if sc.text.startswith("-", sc.pos):
        sc.pos += 1
        inner = _parse_aatom(sc)
        if isinstance(inner, IntLit):
            return IntLit(-inner.value)
        return ASub(IntLit(0), inner)
    m = re.compile(r"[0-9]+").match(sc.text, sc.pos)
    if m:
        sc.pos = m.end()
        return IntLit(int(m.group()))
    return Var(sc.read_name())


_CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


def _parse_bexp(sc: _Scanner) -> BExp:
    e = _parse_band(sc)
    while sc.try_punct("||"):
        rhs = _parse_band(sc)
        e = BNot(BAnd(BNot(e), BNot(rhs)))
    return e


def _parse_band(sc: _Scanner) -> BExp:
    e = _parse_bnot(sc)
    while sc.try_punct("&&"):
        e = BAnd(e, _parse_bnot(sc))
    return e


def _parse_bnot(sc: _Scanner) -> BExp:
    sc.skip_ws()
    if sc.try_word("not"):
        return BNot(_parse_bnot(sc))
    if sc.text.startswith("!", sc.pos) and not sc.text.startswith("!=", sc.pos):
        sc.pos += 1
        return BNot(_parse_bnot(sc))
    return _parse_batom(sc)


def _parse_batom(sc: _Scanner) -> BExp:
    sc.skip_ws()
    if sc.try_word("true"):
        return BoolLit(True)
    if sc.try_word("false"):
        return BoolLit(False)
    saved = sc.pos
    try:
        lhs = _parse_aexp(sc)
        op = sc.try_punct(*_CMP_OPS)
        if op is not None:
            rhs = _parse_aexp(sc)
            return _comparison(op, lhs, rhs)
    except ParseError:
        pass
    sc.pos = saved
    sc.expect_punct("(")
    e = _parse_bexp(sc)
    sc.expect_punct(")")
    return e


def _comparison(op: str, lhs: AExp, rhs: AExp) -> BExp:
    match op:
        case "==":
            return BEq(lhs, rhs)
        case "!=":
            return BNot(BEq(lhs, rhs))
        case "<":
            return BLt(lhs, rhs)
        case "<=":
            return BNot(BLt(rhs, lhs))
        case ">":
            return BLt(rhs, lhs)
        case ">=":
            return BNot(BLt(lhs, rhs))
    raise AssertionError(op)


# ---------------------------------------------------------------------------
# statements


_BLOCK_ENDERS = ("else", "end", "endp")


def _parse_stmts(sc: _Scanner) -> Stmt:
    stmts: list[Stmt] = []
    while True:
        w = sc.peek_word()
        if w is None or w in _BLOCK_ENDERS:
            break
        stmts.append(_parse_stmt(sc))
        if sc.at_end():
            break
    if not stmts:
        sc.error("expected at least one statement")
    return denormalize(stmts)


def _parse_stmt(sc: _Scanner) -> Stmt:
    if sc.try_word("skip"):
        sc.expect_punct(";")
        return Skip()
    if sc.try_word("havoc"):
        target = sc.read_name()
        sc.expect_punct(";")
        return Havoc(target)
    if sc.try_word("if"):
        cond = _parse_bexp(sc)
        sc.expect_word("then")
        then = _parse_stmts(sc)
        orelse: Stmt = Skip()
        if sc.try_word("else"):
            orelse = _parse_stmts(sc)
        sc.expect_word("end")
        return If(cond, then, orelse)
    if sc.try_word("while"):
        cond = _parse_bexp(sc)
        sc.expect_word("do")
        invariant = None
        variant = None
        while sc.try_punct("@"):
            kind = sc.peek_word()
            if kind == "inv":
                sc.pos += len("inv")
                pos0 = sc.pos
                invariant = _parse_term_at(sc, sc.read_braced(), pos0, BOOL)
            elif kind == "var":
                sc.pos += len("var")
                pos0 = sc.pos
                variant = _parse_term_at(sc, sc.read_braced(), pos0, INT)
            else:
                sc.error("expected @inv{...} or @var{...}")
        body = _parse_stmts(sc)
        sc.expect_word("end")
        ann = None
        if invariant is not None or variant is not None:
            ann = LoopAnnotation(invariant if invariant is not None else TRUE, variant)
        return While(cond, body, ann)
    target = sc.read_name()
    sc.expect_punct(":=")
    if sc.try_word("call"):
        fname = sc.read_name()
        sc.expect_punct("(")
        args: list[AExp] = []
        if sc.try_punct(")") is None:
            while True:
                args.append(_parse_aexp(sc))
                if sc.try_punct(",") is None:
                    break
            sc.expect_punct(")")
        sc.expect_punct(";")
        return Call(target, fname, tuple(args))
    value = _parse_aexp(sc)
    sc.expect_punct(";")
    return Assign(target, value)


# ---------------------------------------------------------------------------
# top-level sections


def _parse_params(sc: _Scanner) -> tuple[str, ...]:
    sc.expect_punct("(")
    params: list[str] = []
    if sc.try_punct(")") is not None:
        return ()
    while True:
        params.append(sc.read_name())
        if sc.try_punct(",") is None:
            break
    sc.expect_punct(")")
    return tuple(params)


def _parse_copy_list(sc: _Scanner) -> list[tuple[str, int]]:
    copies: list[tuple[str, int]] = []
    if sc.try_punct(";") is not None:
        return copies
    while True:
        name = sc.read_name()
        sc.expect_punct("[")
        index = sc.read_int()
        if index < 1:
            sc.error("copy indices start at 1")
        sc.expect_punct("]")
        copies.append((name, index))
        if sc.try_punct(",") is None:
            break
    sc.expect_punct(";")
    return copies


def _parse_spec_block(sc: _Scanner, existential: bool):
    fname = sc.read_name()
    params = _parse_params(sc)
    sc.expect_punct("{")
    template_vars: tuple[str, ...] = ()
    if sc.try_word("templateVars"):
        sc.expect_punct(":")
        names = [sc.read_name()]
        while sc.try_punct(",") is not None:
            names.append(sc.read_name())
        sc.expect_punct(";")
        template_vars = tuple(names)
    sc.expect_word("pre")
    sc.expect_punct(":")
    pos0 = sc.pos
    pre = _parse_term_at(sc, sc.read_term_text(), pos0, BOOL)
    sc.expect_word("post")
    sc.expect_punct(":")
    pos0 = sc.pos
    post = _parse_term_at(sc, sc.read_term_text(), pos0, BOOL)
    sc.expect_punct("}")
    try:
        if existential:
            return ExistentialSpec(fname, params, template_vars, pre, post)
        if template_vars:
            sc.error("universal specs have no template variables")
        return UniversalSpec(fname, params, pre, post)
    except ValueError as exc:
        sc.error(str(exc))


def parse_input(text: str) -> VerificationProblem:
    sc = _Scanner(text)
    seen: set[str] = set()
    expected: str | None = None
    universal: list[tuple[str, int]] = []
    existential: list[tuple[str, int]] = []
    pre: Term = TRUE
    post: Term = TRUE
    aspecs: dict[str, UniversalSpec] = {}
    especs: dict[str, ExistentialSpec] = {}
    programs: dict[str, Program] = {}

    def once(section: str):
        if section in seen:
            sc.error(f"duplicate section {section!r}")
        seen.add(section)

    while not sc.at_end():
        w = sc.peek_word()
        if w is None:
            sc.error("expected a section")
        if w == "expected":
            once(w)
            sc.pos += len(w)
            sc.expect_punct(":")
            if sc.try_word("valid"):
                expected = "valid"
            elif sc.try_word("invalid"):
                expected = "invalid"
            else:
                sc.error("expected 'valid' or 'invalid'")
            sc.expect_punct(";")
        elif w in ("forall", "exists"):
            once(w)
            sc.pos += len(w)
            sc.expect_punct(":")
            (universal if w == "forall" else existential).extend(_parse_copy_list(sc))
        elif w in ("pre", "post"):
            once(w)
            sc.pos += len(w)
            sc.expect_punct(":")
            pos0 = sc.pos
            t = _parse_term_at(sc, sc.read_term_text(), pos0, BOOL)
            if w == "pre":
                pre = t
            else:
                post = t
        elif w in ("aspecs", "especs"):
            once(w)
            sc.pos += len(w)
            sc.expect_punct(":")
            store = especs if w == "especs" else aspecs
            while True:
                nxt = sc.peek_word()
                if nxt is None or nxt in _SECTION_WORDS:
                    break
                pos0 = sc.pos
                spec = _parse_spec_block(sc, existential=(w == "especs"))
                if spec.fname in store:
                    sc.error(f"duplicate spec for {spec.fname}", pos0)
                store[spec.fname] = spec
        elif w == "prog":
            sc.pos += len(w)
            pos0 = sc.pos
            name = sc.read_name()
            if name in programs:
                sc.error(f"duplicate program {name!r}", pos0)
            params = _parse_params(sc)
            sc.expect_punct(":")
            body = _parse_stmts(sc)
            sc.expect_word("endp")
            programs[name] = Program(name, params, body)
        else:
            sc.error(f"unknown section {w!r}")

    problem = VerificationProblem(
        universal_copies=tuple(universal),
        existential_copies=tuple(existential),
        pre=pre,
        post=post,
        aspecs=aspecs,
        especs=especs,
        programs=programs,
        expected=expected,
    )
    _validate(problem, sc)
    return problem


def _validate(problem: VerificationProblem, sc: _Scanner):
    declared = list(problem.universal_copies) + list(problem.existential_copies)
    if len(set(declared)) != len(declared):
        sc.error("duplicate program copy declared")
    for name, _ in declared:
        if name not in problem.programs:
            sc.error(f"copy of undefined program {name!r}")
    for prog in problem.programs.values():
        for fname in _called_functions(prog.body):
            if fname not in problem.aspecs and fname not in problem.especs:
                sc.error(f"function {fname!r} has no specification")
    copies = set(declared)
    for label, t in (("pre", problem.pre), ("post", problem.post)):
        for v in free_vars(t):
            parts = v.split("!")
            ok = (
                len(parts) >= 3
                and parts[1].isdigit()
                and (parts[0], int(parts[1])) in copies
            )
            if not ok:
                sc.error(f"{label} mentions {v!r}, not an indexed variable of a declared copy")


def _called_functions(s: Stmt) -> frozenset[str]:
    match s:
        case Call(_, fname, _):
            return frozenset((fname,))
        case Seq(a, b) | If(_, a, b):
            return _called_functions(a) | _called_functions(b)
        case While(_, body):
            return _called_functions(body)
        case _:
            return frozenset()


# ---------------------------------------------------------------------------
# copy instantiation


def instantiate_copies(
    problem: VerificationProblem,
) -> tuple[list[ProgramCopy], list[ProgramCopy]]:
    """Clone each declared copy's program into its own variable namespace and
    normalize the body to a statement list."""
    universals = []
    for name, index in problem.universal_copies:
        eid = ExecId(name, index, Side.UNIVERSAL)
        universals.append(copy_for(eid, problem.programs[name].body))
    existentials = []
    for name, index in problem.existential_copies:
        eid = ExecId(name, index, Side.EXISTENTIAL)
        existentials.append(copy_for(eid, problem.programs[name].body))
    return universals, existentials


# ---------------------------------------------------------------------------
# printing


def _print_aexp(e: AExp) -> str:
    match e:
        case IntLit(v):
            return str(v)
        case Var(name):
            return name
        case AAdd(l, r):
            return f"({_print_aexp(l)} + {_print_aexp(r)})"
        case ASub(l, r):
            return f"({_print_aexp(l)} - {_print_aexp(r)})"
        case AMul(l, r):
            return f"({_print_aexp(l)} * {_print_aexp(r)})"
    raise TypeError(repr(e))


def _print_bexp(b: BExp) -> str:
    match b:
        case BoolLit(v):
            return "true" if v else "false"
        case BEq(l, r):
            return f"({_print_aexp(l)} == {_print_aexp(r)})"
        case BLt(l, r):
            return f"({_print_aexp(l)} < {_print_aexp(r)})"
        case BNot(a):
            return f"!{_print_bexp(a)}"
        case BAnd(l, r):
            return f"({_print_bexp(l)} && {_print_bexp(r)})"
    raise TypeError(repr(b))


def _print_stmt(s: Stmt, indent: str, out: list[str]):
    match s:
        case Skip():
            out.append(f"{indent}skip;")
        case Assign(target, value):
            out.append(f"{indent}{target} := {_print_aexp(value)};")
        case Havoc(target):
            out.append(f"{indent}havoc {target};")
        case Call(target, fname, args):
            rendered = ", ".join(_print_aexp(a) for a in args)
            out.append(f"{indent}{target} := call {fname}({rendered});")
        case Seq():
            for part in normalize(s):
                _print_stmt(part, indent, out)
        case If(cond, then, orelse):
            out.append(f"{indent}if {_print_bexp(cond)} then")
            _print_stmt(then, indent + "  ", out)
            out.append(f"{indent}else")
            _print_stmt(orelse, indent + "  ", out)
            out.append(f"{indent}end")
        case While(cond, body, ann):
            header = f"{indent}while {_print_bexp(cond)} do"
            if ann is not None:
                header += f" @inv{{{to_smtlib(ann.invariant)}}}"
                if ann.variant is not None:
                    header += f" @var{{{to_smtlib(ann.variant)}}}"
            out.append(header)
            _print_stmt(body, indent + "  ", out)
            out.append(f"{indent}end")
        case _:
            raise TypeError(repr(s))


def print_problem(problem: VerificationProblem) -> str:
    out: list[str] = []
    if problem.expected:
        out.append(f"expected: {problem.expected};")
        out.append("")
    for label, copies in (
        ("forall", problem.universal_copies),
        ("exists", problem.existential_copies),
    ):
        if copies:
            rendered = ", ".join(f"{n}[{i}]" for n, i in copies)
            out.append(f"{label}: {rendered};")
    out.append("")
    out.append(f"pre:  {to_smtlib(problem.pre)};")
    out.append(f"post: {to_smtlib(problem.post)};")
    if problem.aspecs:
        out.append("")
        out.append("aspecs:")
        for spec in problem.aspecs.values():
            out.append(f"  {spec.fname}({', '.join(spec.params)}) {{")
            out.append(f"    pre:  {to_smtlib(spec.pre)};")
            out.append(f"    post: {to_smtlib(spec.post)};")
            out.append("  }")
    if problem.especs:
        out.append("")
        out.append("especs:")
        for spec in problem.especs.values():
            out.append(f"  {spec.fname}({', '.join(spec.params)}) {{")
            if spec.choice_vars:
                out.append(f"    templateVars: {', '.join(spec.choice_vars)};")
            out.append(f"    pre:  {to_smtlib(spec.pre)};")
            out.append(f"    post: {to_smtlib(spec.post)};")
            out.append("  }")
    for prog in problem.programs.values():
        out.append("")
        out.append(f"prog {prog.name}({', '.join(prog.params)}):")
        _print_stmt(prog.body, "  ", out)
        out.append("endp")
    return "\n".join(out) + "\n"
