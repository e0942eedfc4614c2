import pytest

from aever import imp
from aever import terms as tm
from aever.driver import run_verification
from aever.errors import ParseError
from aever.frontend import instantiate_copies, parse_input, print_problem
from aever.terms import RET

from conftest import BENCH_DIR


def test_parse_coin_flip_listing(flipcoin_valid_text):
    p = parse_input(flipcoin_valid_text)
    assert p.expected == "valid"
    assert p.universal_copies == (("run", 1),)
    assert p.existential_copies == (("run", 2),)
    assert p.pre == tm.parse_term("(= run!1!low run!2!low)")
    assert p.post == tm.parse_term("(= run!1!low run!2!low)")
    aspec = p.aspecs["flipCoin"]
    assert aspec.params == ()
    assert aspec.post == tm.parse_term("(or (= ret! 0) (= ret! 1))")
    espec = p.especs["flipCoin"]
    assert espec.choice_vars == ("n",)
    assert espec.pre == tm.parse_term("(or (= n 0) (= n 1))")
    assert espec.post == tm.parse_term(f"(= {RET} n)")
    prog = p.programs["run"]
    assert prog.params == ("high", "low")
    first, *rest = imp.normalize(prog.body)
    assert isinstance(first, imp.If)
    assert isinstance(rest[0], imp.Call) and rest[0].fname == "flipCoin"


def test_parse_surface_statements():
    text = """
    exists: p[1];
    pre: true;
    post: (<= 0 p!1!x);
    prog p(x):
      havoc y;
      if x != 0 then x := -1; end
      if x <= y || x >= 2 then skip; else x := y * 2; end
      while (0 < x) do @inv{(<= 0 x)} @var{x}
        x := x - 1;
      end
    endp
    """
    p = parse_input(text)
    havoc, if1, if2, loop = imp.normalize(p.programs["p"].body)
    assert havoc == imp.Havoc("y")
    assert if1.orelse == imp.Skip()  # missing else becomes skip
    assert isinstance(if1.cond, imp.BNot)
    assert isinstance(loop, imp.While)
    assert loop.annotation.invariant == tm.parse_term("(<= 0 x)")
    assert loop.annotation.variant == tm.parse_term("x")


def test_parse_empty_especs_section():
    text = """
    exists: p[1];
    pre: true;
    post: true;
    especs:
    prog p(x):
      x := 0;
    endp
    """
    assert parse_input(text).especs == {}


def test_zero_copies_degenerates():
    p = parse_input("pre: true;\npost: true;\n")
    assert p.universal_copies == () and p.existential_copies == ()
    assert instantiate_copies(p) == ([], [])
    result = run_verification(p)
    assert result.verdict.is_valid


def test_duplicate_copy_is_rejected():
    text = """
    forall: run[1];
    exists: run[1];
    pre: true;
    post: true;
    prog run(x):
      skip;
    endp
    """
    with pytest.raises(ParseError):
        parse_input(text)


def test_copy_of_undefined_program():
    with pytest.raises(ParseError):
        parse_input("forall: ghost[1];\npre: true;\npost: true;\n")


def test_unspecified_function_call_is_rejected():
    text = """
    exists: p[1];
    pre: true;
    post: true;
    prog p(x):
      x := call mystery(x);
    endp
    """
    with pytest.raises(ParseError) as exc:
        parse_input(text)
    assert "mystery" in str(exc.value)


def test_assertions_must_use_declared_copy_namespaces():
    text = """
    exists: p[1];
    pre: (= p!2!x 0);
    post: true;
    prog p(x):
      skip;
    endp
    """
    with pytest.raises(ParseError):
        parse_input(text)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        parse_input("pre: (= x 0\n;")
    assert exc.value.line is not None

    bad_stmt = """
    exists: p[1];
    pre: true;
    post: true;
    prog p(x):
      xables := ;
    endp
    """
    with pytest.raises(ParseError):
        parse_input(bad_stmt)


def test_instantiate_copies_namespaces_are_disjoint(flipcoin_valid_text):
    p = parse_input(flipcoin_valid_text)
    universals, existentials = instantiate_copies(p)
    (uni,), (exi,) = universals, existentials
    uvars = set().union(*(imp.occurring_vars(s) for s in uni.stmts))
    evars = set().union(*(imp.occurring_vars(s) for s in exi.stmts))
    assert uvars == {"run!1!high", "run!1!low", "run!1!flip"}
    assert evars == {"run!2!high", "run!2!low", "run!2!flip"}
    assert not (uvars & evars)


@pytest.mark.parametrize("path", sorted(BENCH_DIR.glob("*.ae")), ids=lambda p: p.stem)
def test_print_parse_round_trip(path):
    problem = parse_input(path.read_text())
    assert parse_input(print_problem(problem)) == problem


def test_expected_annotation_is_bookkeeping_only(flipcoin_invalid_text, solver_config):
    with_note = parse_input(flipcoin_invalid_text)
    without_note = parse_input(
        flipcoin_invalid_text.replace("expected: invalid;", "")
    )
    assert without_note.expected is None
    a = run_verification(with_note, solver_config)
    b = run_verification(without_note, solver_config)
    assert a.verdict.status == b.verdict.status
    assert a.vc == b.vc
