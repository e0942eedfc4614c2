from pathlib import Path

import pytest

from aever import imp
from aever import terms as tm
from aever.imp import IntRange
from aever.solver import default_config
from aever.specs import ExistentialSpec, SpecContext, UniversalSpec
from aever.terms import RET, And, Div, Eq, Implies, IntConst, Le, Lt, Or, VarRef

REPO_ROOT = Path(__file__).resolve().parents[1]
BENCH_DIR = REPO_ROOT / "benchmarks"


@pytest.fixture(scope="session")
def solver_config():
    return default_config(timeout_ms=30_000)


# --- bounded random generator: three implementations, one contract pair ----


def make_rand_below_impls() -> dict[str, imp.FunDef]:
    const_zero = imp.FunDef(
        "randBelow", ("x",), imp.Seq(imp.Skip(), imp.Skip()), imp.IntLit(0)
    )
    # repeatedly subtract the bound until the havoc'd value drops below it
    mod_reduce = imp.FunDef(
        "randBelow",
        ("x",),
        imp.Seq(
            imp.Havoc("r"),
            imp.While(
                imp.BNot(imp.BLt(imp.Var("r"), imp.Var("x"))),
                imp.Assign("r", imp.ASub(imp.Var("r"), imp.Var("x"))),
            ),
        ),
        imp.Var("r"),
    )
    unbounded = imp.FunDef("randBelow", ("x",), imp.Havoc("r"), imp.Var("r"))
    return {"const_zero": const_zero, "mod_reduce": mod_reduce, "unbounded": unbounded}


def make_rand_below_specs() -> tuple[UniversalSpec, ExistentialSpec]:
    aspec = UniversalSpec(
        "randBelow",
        ("x",),
        Lt(IntConst(0), VarRef("x")),
        And((Le(IntConst(0), VarRef(RET)), Lt(VarRef(RET), VarRef("x")))),
    )
    espec = ExistentialSpec(
        "randBelow",
        ("x",),
        ("c",),
        And(
            (
                Lt(IntConst(0), VarRef("x")),
                Le(IntConst(0), VarRef("c")),
                Lt(VarRef("c"), VarRef("x")),
            )
        ),
        Eq(VarRef(RET), VarRef("c")),
    )
    return aspec, espec


def make_refinement_specs() -> tuple[UniversalSpec, ExistentialSpec]:
    # simplified contract pair used by the refinement example: no positivity
    # requirement on the bound
    aspec = UniversalSpec(
        "randBelow",
        ("n",),
        tm.TRUE,
        And((Le(IntConst(0), VarRef(RET)), Lt(VarRef(RET), VarRef("n")))),
    )
    espec = ExistentialSpec(
        "randBelow",
        ("n",),
        ("c",),
        And((Le(IntConst(0), VarRef("c")), Lt(VarRef("c"), VarRef("n")))),
        Eq(VarRef(RET), VarRef("c")),
    )
    return aspec, espec


def make_bucket_espec() -> ExistentialSpec:
    x, c, r = VarRef("x"), VarRef("c"), VarRef(RET)
    half = Div(x, IntConst(2))
    return ExistentialSpec(
        "randBucket",
        ("x",),
        ("c",),
        And((Or((Eq(c, IntConst(0)), Eq(c, IntConst(1)))), Lt(IntConst(2), x))),
        And(
            (
                Implies(Eq(c, IntConst(0)), And((Le(IntConst(0), r), Lt(r, half)))),
                Implies(Eq(c, IntConst(1)), And((Le(half, r), Lt(r, x)))),
            )
        ),
    )


@pytest.fixture(scope="session")
def rand_below():
    impls = make_rand_below_impls()
    aspec, espec = make_rand_below_specs()
    return impls, aspec, espec


@pytest.fixture(scope="session")
def bucket_specs():
    return SpecContext({}, {"randBucket": make_bucket_espec()})


# --- golden input texts -----------------------------------------------------


@pytest.fixture(scope="session")
def flipcoin_valid_text():
    return (BENCH_DIR / "gni_flipcoin.ae").read_text()


@pytest.fixture(scope="session")
def flipcoin_invalid_text():
    return (BENCH_DIR / "gni_flipcoin_leak.ae").read_text()


@pytest.fixture(scope="session")
def refinement_text():
    return (BENCH_DIR / "refinement_simple.ae").read_text()


EXISTS_WHILE_TEXT = """
exists: count[1];

pre:  (= count!1!k 0);
post: true;

especs:
  choose(x, y) {
    templateVars: c;
    pre:  (or (= c x) (= c y));
    post: (= ret! c);
  }

prog count(k):
  while (k < 4) do @inv{(and (<= 0 k) (<= k 4))} @var{(- 4 k)}
    k := call choose(k + 1, 0);
  end
endp
"""


@pytest.fixture(scope="session")
def exists_while_text():
    return EXISTS_WHILE_TEXT


# The target shape of the refinement verification condition, trivial
# conjuncts elided.
REFINEMENT_VC_TARGET = (
    "(forall ((r1 Int)) (=> (and (<= 0 r1) (< r1 5))"
    " (exists ((v Int)) (and (and (<= 0 v) (< v 10))"
    " (exists ((r0 Int)) (= r0 v))"
    " (forall ((r0 Int)) (=> (= r0 v) (= r1 v)))))))"
)


def norm(t: tm.Term) -> tm.Term:
    return tm.alpha_normal(tm.prune_trivial(t))


def states_over(names, domain: IntRange):
    return frozenset(imp.enumerate_states(names, domain))
