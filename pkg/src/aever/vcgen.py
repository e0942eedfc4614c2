"""Weakest-precondition verification conditions for relational assertions.

The generator walks each program copy backwards, always exhausting the
existential copies before touching a universal one so that the choice-value
quantifiers end up inside the scope of every universal quantifier introduced
afterwards.  Per-statement rules:

* ``skip``          keeps the postcondition;
* assignment        substitutes the assigned expression;
* havoc             quantifies the target (forall on the universal side,
                    exists on the existential side);
* universal call    asserts the contract precondition and requires the
                    postcondition for every admissible return;
* existential call  picks choice values, requires the instantiated
                    postcondition to be inhabited, and requires every
                    admissible return to establish the goal;
* loops             use the annotated invariant, with assigned variables
                    renamed fresh and universally quantified; existential
                    loops additionally thread a strictly-decreasing,
                    bounded-below variant through the body obligation.

When a call contract pins the return to a single term (``ret! = t``), the
quantified return in the goal position is replaced by ``t`` directly; the
bounding quantifier is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import AllEmpty, ArityMismatch, MissingInvariant, MissingVariant
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
    assigned_vars,
    normalize,
    occurring_vars,
)
from .specs import SpecContext
from .terms import (
    FALSE,
    INT,
    RET,
    TRUE,
    And,
    Eq,
    ExecId,
    Exists,
    Forall,
    Implies,
    IntConst,
    Le,
    Lt,
    Add,
    Mul,
    Not,
    Side,
    Sub,
    Term,
    VarRef,
    all_names,
    free_vars,
    fresh,
    index_vars,
    subst,
)

# Execution context of the statement being processed.
ExecTag = Side
UNIVERSAL = Side.UNIVERSAL
EXISTENTIAL = Side.EXISTENTIAL


@dataclass
class ProgramCopy:
    """One indexed program copy with its pending statements, consumed from
    the end during VC generation."""

    id: ExecId
    stmts: list[Stmt] = field(default_factory=list)

    def clone(self) -> "ProgramCopy":
        return ProgramCopy(self.id, list(self.stmts))


def aexp_to_term(e: AExp) -> Term:
    match e:
        case IntLit(v):
            return IntConst(v)
        case Var(name):
            return VarRef(name)
        case AAdd(l, r):
            return Add((aexp_to_term(l), aexp_to_term(r)))
        case ASub(l, r):
            return Sub(aexp_to_term(l), aexp_to_term(r))
        case AMul(l, r):
            return Mul((aexp_to_term(l), aexp_to_term(r)))
        case _:
            raise TypeError(f"not an arithmetic expression: {e!r}")


def bexp_to_term(b: BExp) -> Term:
    match b:
        case BoolLit(v):
            return TRUE if v else FALSE
        case BEq(l, r):
            return Eq(aexp_to_term(l), aexp_to_term(r))
        case BLt(l, r):
            return Lt(aexp_to_term(l), aexp_to_term(r))
        case BNot(a):
            return Not(bexp_to_term(a))
        case BAnd(l, r):
            return And((bexp_to_term(l), bexp_to_term(r)))
        case _:
            raise TypeError(f"not a boolean expression: {b!r}")


def _index_aexp(e: AExp, eid: ExecId) -> AExp:
    match e:
        case IntLit():
            return e
        case Var(name):
            return Var(f"{eid.name}!{eid.index}!{name}")
        case AAdd(l, r):
            return AAdd(_index_aexp(l, eid), _index_aexp(r, eid))
        case ASub(l, r):
            return ASub(_index_aexp(l, eid), _index_aexp(r, eid))
        case AMul(l, r):
            return AMul(_index_aexp(l, eid), _index_aexp(r, eid))
        case _:
            raise TypeError(f"not an arithmetic expression: {e!r}")


def _index_bexp(b: BExp, eid: ExecId) -> BExp:
    match b:
        case BoolLit():
            return b
        case BEq(l, r):
            return BEq(_index_aexp(l, eid), _index_aexp(r, eid))
        case BLt(l, r):
            return BLt(_index_aexp(l, eid), _index_aexp(r, eid))
        case BNot(a):
            return BNot(_index_bexp(a, eid))
        case BAnd(l, r):
            return BAnd(_index_bexp(l, eid), _index_bexp(r, eid))
        case _:
            raise TypeError(f"not a boolean expression: {b!r}")


def index_stmt(s: Stmt, eid: ExecId) -> Stmt:
    """Rewrite program variables (and loop annotations) into the copy's
    namespace.  Annotation terms may already mention other copies' indexed
    variables; those pass through untouched."""
    prefix = f"{eid.name}!{eid.index}!"
    match s:
        case Skip():
            return s
        case Assign(target, value):
            return Assign(prefix + target, _index_aexp(value, eid))
        case Havoc(target):
            return Havoc(prefix + target)
        case Call(target, fname, args):
            return Call(prefix + target, fname, tuple(_index_aexp(a, eid) for a in args))
        case Seq(a, b):
            return Seq(index_stmt(a, eid), index_stmt(b, eid))
        case If(cond, a, b):
            return If(_index_bexp(cond, eid), index_stmt(a, eid), index_stmt(b, eid))
        case While(cond, body, ann):
            new_ann = None
            if ann is not None:
                new_ann = LoopAnnotation(
                    index_vars(ann.invariant, eid, passthrough_indexed=True),
                    None
                    if ann.variant is None
                    else index_vars(ann.variant, eid, passthrough_indexed=True),
                )
            return While(_index_bexp(cond, eid), index_stmt(body, eid), new_ann)
        case _:
            raise TypeError(f"not a statement: {s!r}")


def choose_step(
    universals: list[ProgramCopy], existentials: list[ProgramCopy]
) -> tuple[Stmt, ExecTag, ExecId]:
    """Pick (and remove) the next statement to process: the last statement of
    the lowest-indexed nonempty existential copy, falling back to the
    universal copies only once all existential copies are empty."""
    for copies in (existentials, universals):
        pending = [c for c in copies if c.stmts]
        if pending:
            copy = min(pending, key=lambda c: c.id.index)
            return copy.stmts.pop(), copy.id.side, copy.id
    raise AllEmpty("no pending statements in any program copy")


def _annotation_names(s: Stmt) -> frozenset[str]:
    match s:
        case While(_, body, ann):
            out = _annotation_names(body)
            if ann is not None:
                out |= all_names(ann.invariant)
                if ann.variant is not None:
                    out |= all_names(ann.variant)
            return out
        case Seq(a, b) | If(_, a, b):
            return _annotation_names(a) | _annotation_names(b)
        case _:
            return frozenset()


def _spec_names(specs: SpecContext) -> set[str]:
    names: set[str] = {RET}
    for spec in specs.universal.values():
        names.update(spec.params)
        names |= all_names(spec.pre) | all_names(spec.post)
    for spec in specs.existential.values():
        names.update(spec.params)
        names.update(spec.choice_vars)
        names |= all_names(spec.pre) | all_names(spec.post)
    return names


def _quantify(cls, binders: tuple[tuple[str, str], ...], body: Term) -> Term:
    return body if not binders else cls(binders, body)


def _return_obligation(q_inst: Term, r: str, psi: Term, target: str) -> Term:
    # contract pins the return to one term: plant it directly in the goal
    match q_inst:
        case Eq(VarRef(name), t) if name == r and r not in free_vars(t):
            return subst(psi, {target: t})
        case Eq(t, VarRef(name)) if name == r and r not in free_vars(t):
            return subst(psi, {target: t})
        case _:
            return subst(psi, {target: VarRef(r)})


def _vc(s: Stmt, tag: ExecTag, psi: Term, specs: SpecContext, used: set[str]) -> Term:
    match s:
        case Skip():
            return psi
        case Assign(target, value):
            return subst(psi, {target: aexp_to_term(value)})
        case Havoc(target):
            v = fresh("v", used)
            used.add(v)
            cls = Forall if tag is UNIVERSAL else Exists
            return cls(((v, INT),), subst(psi, {target: VarRef(v)}))
        case Call(target, fname, args):
            if tag is UNIVERSAL:
                spec = specs.lookup_universal(fname)
            else:
                spec = specs.lookup_existential(fname)
            if len(args) != len(spec.params):
                raise ArityMismatch(fname, len(spec.params), len(args))
            amap: dict[str, Term] = dict(zip(spec.params, (aexp_to_term(a) for a in args)))
            r = fresh("r", used)
            used.add(r)
            if tag is UNIVERSAL:
                p_inst = subst(spec.pre, amap)
                q_inst = subst(spec.post, {**amap, RET: VarRef(r)})
                goal = _return_obligation(q_inst, r, psi, target)
                return And((p_inst, Forall(((r, INT),), Implies(q_inst, goal))))
            cmap: dict[str, Term] = {}
            cbinders = []
            for c in spec.choice_vars:
                v = fresh("v", used)
                used.add(v)
                cmap[c] = VarRef(v)
                cbinders.append((v, INT))
            p_inst = subst(spec.pre, {**amap, **cmap})
            q_inst = subst(spec.post, {**amap, **cmap, RET: VarRef(r)})
            goal = _return_obligation(q_inst, r, psi, target)
            core = And(
                (
                    p_inst,
                    Exists(((r, INT),), q_inst),
                    Forall(((r, INT),), Implies(q_inst, goal)),
                )
            )
            return _quantify(Exists, tuple(cbinders), core)
        case Seq(a, b):
            return _vc(a, tag, _vc(b, tag, psi, specs, used), specs, used)
        case If(cond, then, orelse):
            bt = bexp_to_term(cond)
            psi_t = _vc(then, tag, psi, specs, used)
            psi_f = _vc(orelse, tag, psi, specs, used)
            return And((Implies(bt, psi_t), Implies(Not(bt), psi_f)))
        case While(cond, body, ann):
            if ann is None or ann.invariant is None:
                raise MissingInvariant(f"while loop lacks an invariant: {s!r}")
            inv = ann.invariant
            targets = sorted(assigned_vars(body))
            renaming: dict[str, Term] = {}
            binders = []
            for vname in targets:
                p = fresh(vname, used)
                used.add(p)
                renaming[vname] = VarRef(p)
                binders.append((p, INT))
            bt = bexp_to_term(cond)
            if tag is UNIVERSAL:
                body_post: Term = inv
            else:
                if ann.variant is None:
                    raise MissingVariant(
                        f"existential while loop lacks a variant: {s!r}"
                    )
                variant = ann.variant
                var_dec = And(
                    (Le(IntConst(0), variant), Lt(variant, subst(variant, renaming)))
                )
                body_post = And((inv, var_dec))
            psi_body = _vc(body, tag, body_post, specs, used)
            qbinders = tuple(binders)
            psi_loop = _quantify(
                Forall, qbinders, subst(Implies(And((bt, inv)), psi_body), renaming)
            )
            psi_end = _quantify(
                Forall, qbinders, subst(Implies(And((Not(bt), inv)), psi), renaming)
            )
            return And((inv, psi_loop, psi_end))
        case _:
            raise TypeError(f"not a statement: {s!r}")


def statement_vc(s: Stmt, tag: ExecTag, psi: Term, specs: SpecContext) -> Term:
    """Verification condition for one statement against goal ``psi``."""
    used = set(all_names(psi)) | set(occurring_vars(s)) | _spec_names(specs)
    used |= _annotation_names(s)
    return _vc(s, tag, psi, specs, used)


def relational_vc(
    phi: Term,
    universals: Iterable[ProgramCopy],
    existentials: Iterable[ProgramCopy],
    psi: Term,
    specs: SpecContext,
) -> Term:
    """Verification condition for the relational assertion
    ``<phi> universals ~ existentials <psi>``; deterministic in its inputs."""
    unis = [c.clone() for c in universals]
    exis = [c.clone() for c in existentials]
    used = set(all_names(phi)) | set(all_names(psi)) | _spec_names(specs)
    for copy in unis + exis:
        for stmt in copy.stmts:
            used |= occurring_vars(stmt)
            used |= _annotation_names(stmt)
    while any(c.stmts for c in unis) or any(c.stmts for c in exis):
        stmt, tag, _ = choose_step(unis, exis)
        psi = _vc(stmt, tag, psi, specs, used)
    return Implies(phi, psi)


def copy_for(eid: ExecId, body: Stmt) -> ProgramCopy:
    """Index a program body for one copy and normalize it to a statement list."""
    return ProgramCopy(eid, list(normalize(index_stmt(body, eid))))
