"""Random relational verification problems for sweep testing.

Generated problems call into a small fixed library of nondeterministic
functions whose contracts pin each choice to a single return value, so the
bounded semantic oracle enumerates exactly the behaviors the verification
conditions may rely on.  Constants, choice values and seed ranges all stay
inside the oracle's enumeration domain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .frontend import Program, VerificationProblem
from .imp import (
    AAdd,
    ASub,
    Assign,
    BEq,
    BLt,
    BNot,
    Call,
    FunDef,
    Havoc,
    If,
    ImplContext,
    IntLit,
    LoopAnnotation,
    Skip,
    Stmt,
    Var,
    While,
    denormalize,
    read_before_write,
)
from .specs import ExistentialSpec, UniversalSpec
from .terms import (
    RET,
    TRUE,
    And,
    Eq,
    IntConst,
    Le,
    Lt,
    Or,
    Sub,
    Term,
    VarRef,
)

VARS = ("x", "y")


def _flip_defs():
    aspec = UniversalSpec(
        "flip", (), TRUE, Or((Eq(VarRef(RET), IntConst(0)), Eq(VarRef(RET), IntConst(1))))
    )
    espec = ExistentialSpec(
        "flip",
        (),
        ("c",),
        Or((Eq(VarRef("c"), IntConst(0)), Eq(VarRef("c"), IntConst(1)))),
        Eq(VarRef(RET), VarRef("c")),
    )
    impl = FunDef(
        "flip",
        (),
        denormalize(
            [
                Havoc("r"),
                If(BEq(Var("r"), IntLit(0)), Skip(), Assign("r", IntLit(1))),
            ]
        ),
        Var("r"),
    )
    return aspec, espec, impl


def _pick_defs():
    aspec = UniversalSpec(
        "pick",
        ("a", "b"),
        TRUE,
        Or((Eq(VarRef(RET), VarRef("a")), Eq(VarRef(RET), VarRef("b")))),
    )
    espec = ExistentialSpec(
        "pick",
        ("a", "b"),
        ("c",),
        Or((Eq(VarRef("c"), VarRef("a")), Eq(VarRef("c"), VarRef("b")))),
        Eq(VarRef(RET), VarRef("c")),
    )
    impl = FunDef(
        "pick",
        ("a", "b"),
        denormalize(
            [
                Havoc("r"),
                If(BEq(Var("r"), IntLit(0)), Assign("r", Var("a")), Assign("r", Var("b"))),
            ]
        ),
        Var("r"),
    )
    return aspec, espec, impl


FLIP_ASPEC, FLIP_ESPEC, FLIP_IMPL = _flip_defs()
PICK_ASPEC, PICK_ESPEC, PICK_IMPL = _pick_defs()

LIBRARY_ASPECS = {"flip": FLIP_ASPEC, "pick": PICK_ASPEC}
LIBRARY_ESPECS = {"flip": FLIP_ESPEC, "pick": PICK_ESPEC}
LIBRARY_IMPLS = ImplContext({"flip": FLIP_IMPL, "pick": PICK_IMPL})


@dataclass(frozen=True)
class GeneratedProblem:
    problem: VerificationProblem
    impls: ImplContext
    kind: str


def _rand_atom_exp(rng: random.Random):
    if rng.random() < 0.5:
        return Var(rng.choice(VARS))
    return IntLit(rng.randint(-2, 2))


def _rand_simple_stmt(rng: random.Random, allow_havoc: bool) -> Stmt:
    roll = rng.random()
    target = rng.choice(VARS)
    if roll < 0.35:
        src = rng.random()
        if src < 0.4:
            return Assign(target, IntLit(rng.randint(-2, 2)))
        if src < 0.7:
            return Assign(target, Var(rng.choice(VARS)))
        step = IntLit(1)
        base = Var(rng.choice(VARS))
        return Assign(target, AAdd(base, step) if rng.random() < 0.5 else ASub(base, step))
    if roll < 0.65:
        if rng.random() < 0.5:
            return Call(target, "flip", ())
        return Call(target, "pick", (_rand_atom_exp(rng), _rand_atom_exp(rng)))
    if roll < 0.75 and allow_havoc:
        return Havoc(target)
    cond = (
        BLt(Var(rng.choice(VARS)), IntLit(rng.randint(-1, 2)))
        if rng.random() < 0.6
        else BEq(Var(rng.choice(VARS)), IntLit(rng.randint(-1, 1)))
    )
    if rng.random() < 0.3:
        cond = BNot(cond)
    then = Assign(rng.choice(VARS), IntLit(rng.randint(-2, 2)))
    orelse: Stmt = (
        Skip() if rng.random() < 0.4 else Assign(rng.choice(VARS), Var(rng.choice(VARS)))
    )
    return If(cond, then, orelse)


def _rand_program(rng: random.Random, name: str, universal: bool) -> Program:
    count = rng.randint(1, 3)
    stmts = [_rand_simple_stmt(rng, allow_havoc=universal) for _ in range(count)]
    body = denormalize(stmts)
    params = tuple(sorted(read_before_write(body)))
    return Program(name, params, body)


def _cvar(name: str, index: int, var: str) -> Term:
    return VarRef(f"{name}!{index}!{var}")


def _conj(parts: list[Term]) -> Term:
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def _mirror_problem(rng: random.Random) -> GeneratedProblem:
    prog = _rand_program(rng, "p", universal=False)
    seed_vars = sorted(set(prog.params) | set(read_before_write(prog.body)))
    pre = _conj([Eq(_cvar("p", 1, v), _cvar("p", 2, v)) for v in seed_vars])
    post_vars = seed_vars if seed_vars else [VARS[0]]
    picked = rng.sample(post_vars, k=min(len(post_vars), rng.randint(1, 2)))
    post = _conj([Eq(_cvar("p", 1, v), _cvar("p", 2, v)) for v in picked])
    problem = VerificationProblem(
        universal_copies=(("p", 1),),
        existential_copies=(("p", 2),),
        pre=pre,
        post=post,
        aspecs=LIBRARY_ASPECS,
        especs=LIBRARY_ESPECS,
        programs={"p": prog},
    )
    return GeneratedProblem(problem, LIBRARY_IMPLS, "mirror")


def _random_problem(rng: random.Random) -> GeneratedProblem:
    n_univ, n_exis = rng.choice([(1, 1), (1, 1), (2, 1), (1, 2), (0, 1), (1, 0), (0, 2)])
    programs: dict[str, Program] = {}
    ucopies = []
    ecopies = []
    index = 1
    for _ in range(n_univ):
        name = f"u{index}"
        programs[name] = _rand_program(rng, name, universal=True)
        ucopies.append((name, index))
        index += 1
    for _ in range(n_exis):
        name = f"e{index}"
        programs[name] = _rand_program(rng, name, universal=False)
        ecopies.append((name, index))
        index += 1

    def copy_vars(name: str, idx: int) -> list[Term]:
        prog = programs[name]
        pool = sorted(set(prog.params) | set(read_before_write(prog.body)) | {VARS[0]})
        return [_cvar(name, idx, v) for v in pool]

    all_copies = ucopies + ecopies
    pre_parts: list[Term] = []
    for (n1, i1), (n2, i2) in zip(all_copies, all_copies[1:]):
        if rng.random() < 0.8:
            v1 = rng.choice(copy_vars(n1, i1))
            v2 = rng.choice(copy_vars(n2, i2))
            pre_parts.append(Eq(v1, v2))
    if rng.random() < 0.3 and all_copies:
        n1, i1 = rng.choice(all_copies)
        pre_parts.append(Le(IntConst(rng.randint(-2, 0)), rng.choice(copy_vars(n1, i1))))

    post_parts: list[Term] = []
    for _ in range(rng.randint(1, 2)):
        n1, i1 = rng.choice(all_copies)
        lhs = rng.choice(copy_vars(n1, i1))
        if rng.random() < 0.6 and len(all_copies) > 1:
            n2, i2 = rng.choice([c for c in all_copies if c != (n1, i1)])
            rhs = rng.choice(copy_vars(n2, i2))
        else:
            rhs = IntConst(rng.randint(-2, 2))
        cls = rng.choice([Eq, Le, Lt])
        post_parts.append(cls(lhs, rhs))
    if rng.random() < 0.15:
        post_parts = []

    problem = VerificationProblem(
        universal_copies=tuple(ucopies),
        existential_copies=tuple(ecopies),
        pre=_conj(pre_parts),
        post=_conj(post_parts),
        aspecs=LIBRARY_ASPECS,
        especs=LIBRARY_ESPECS,
        programs=programs,
    )
    return GeneratedProblem(problem, LIBRARY_IMPLS, "random")


def _loop_problem(rng: random.Random) -> GeneratedProblem:
    choice = rng.randrange(4)
    if choice == 0:
        # existential counting loop, trivial invariant, decreasing variant
        body = While(
            BLt(Var("x"), IntLit(2)),
            Assign("x", AAdd(Var("x"), IntLit(1))),
            LoopAnnotation(TRUE, Sub(IntConst(2), VarRef("x"))),
        )
        problem = VerificationProblem(
            existential_copies=(("loop", 1),),
            pre=TRUE,
            post=Le(IntConst(2), _cvar("loop", 1, "x")),
            aspecs=LIBRARY_ASPECS,
            especs=LIBRARY_ESPECS,
            programs={"loop": Program("loop", ("x",), body)},
        )
    elif choice == 1:
        # existential loop steered through a binary-choice call
        ann = LoopAnnotation(
            And((Le(IntConst(0), VarRef("x")), Le(VarRef("x"), IntConst(2)))),
            Sub(IntConst(2), VarRef("x")),
        )
        body = While(
            BLt(Var("x"), IntLit(2)),
            Call("x", "pick", (AAdd(Var("x"), IntLit(1)), IntLit(0))),
            ann,
        )
        problem = VerificationProblem(
            existential_copies=(("cnt", 1),),
            pre=Eq(_cvar("cnt", 1, "x"), IntConst(0)),
            post=TRUE,
            aspecs=LIBRARY_ASPECS,
            especs=LIBRARY_ESPECS,
            programs={"cnt": Program("cnt", ("x",), body)},
        )
    elif choice == 2:
        # universal loop with a real invariant
        body = While(
            BLt(Var("x"), IntLit(2)),
            Assign("x", AAdd(Var("x"), IntLit(1))),
            LoopAnnotation(Le(VarRef("x"), IntConst(2)), None),
        )
        problem = VerificationProblem(
            universal_copies=(("acc", 1),),
            pre=Le(_cvar("acc", 1, "x"), IntConst(2)),
            post=Le(_cvar("acc", 1, "x"), IntConst(2)),
            aspecs=LIBRARY_ASPECS,
            especs=LIBRARY_ESPECS,
            programs={"acc": Program("acc", ("x",), body)},
        )
    else:
        # deliberately unprovable postcondition
        body = While(
            BLt(Var("x"), IntLit(2)),
            Assign("x", AAdd(Var("x"), IntLit(1))),
            LoopAnnotation(TRUE, Sub(IntConst(2), VarRef("x"))),
        )
        problem = VerificationProblem(
            existential_copies=(("loop", 1),),
            pre=TRUE,
            post=Eq(_cvar("loop", 1, "x"), IntConst(3)),
            aspecs=LIBRARY_ASPECS,
            especs=LIBRARY_ESPECS,
            programs={"loop": Program("loop", ("x",), body)},
        )
    return GeneratedProblem(problem, LIBRARY_IMPLS, "loop")


def generate_problem(rng: random.Random) -> GeneratedProblem:
    roll = rng.random()
    if roll < 0.4:
        return _mirror_problem(rng)
    if roll < 0.8:
        return _random_problem(rng)
    return _loop_problem(rng)
