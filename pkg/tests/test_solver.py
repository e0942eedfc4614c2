import psutil
import pytest

from aever import terms as tm
from aever.errors import ProtocolError, SolverSpawnError, SortMismatch
from aever.imp import IntRange
from aever.solver import (
    SolverConfig,
    default_config,
    model_falsifies,
    parse_model,
    render_script,
    verify,
)


def t(text):
    return tm.parse_term(text)


def test_trivial_implication_is_valid(solver_config):
    assert verify(t("(=> true true)"), solver_config).is_valid


def test_bounded_choice_example_is_invalid(solver_config):
    # for r1 in [0,5) there must be a v in [0,3) that every matching return
    # equals; r1 = 3 and 4 have none
    formula = t(
        "(=> (and (<= 0 r1) (< r1 5))"
        " (exists ((v Int)) (and (and (<= 0 v) (< v 3))"
        " (forall ((r0 Int)) (=> (= r0 v) (= r1 v))))))"
    )
    verdict = verify(formula, solver_config)
    assert verdict.is_invalid
    assert verdict.model["r1"] in (3, 4)


def test_verify_requires_bool_sort(solver_config):
    with pytest.raises(SortMismatch):
        verify(t("(+ x 1)"), solver_config)


def test_unknown_on_nonlinear(solver_config):
    verdict = verify(t("(exists ((a Int) (b Int)) (= (* a b) 7))"), solver_config)
    assert verdict.is_unknown


def test_spawn_error():
    config = SolverConfig(command=("definitely-not-a-solver-binary",))
    with pytest.raises(SolverSpawnError):
        verify(t("true"), config)


def test_render_script_quotes_namespaced_names(solver_config):
    script = render_script(t("(= run!1!low 0)"), solver_config)
    assert "(declare-const |run!1!low| Int)" in script
    assert "(assert (not (= run!1!low 0)))" in script
    assert "(check-sat)" in script and "(get-model)" in script


def test_parse_model_examples():
    assert parse_model("((define-fun x () Int 3))") == {"x": 3}
    assert parse_model("((define-fun x () Int (- 2)))") == {"x": -2}
    assert parse_model("(model (define-fun |run!1!low| () Int 7))") == {"run!1!low": 7}
    with pytest.raises(ProtocolError):
        parse_model("((degine-fun x))")
    with pytest.raises(ProtocolError):
        parse_model("complete nonsense (")


def test_parse_model_skips_non_integer_entries():
    text = "((define-fun b () Bool true) (define-fun x () Int 1))"
    assert parse_model(text) == {"x": 1}


VALIDITY_CORPUS = [
    "(=> (< x 3) (< x 5))",
    "(forall ((a Int)) (exists ((b Int)) (= b (- a 1))))",
    "(= x x)",
    "(exists ((v Int)) (and (<= 0 v) (< v 1) (= x v)))",
    "(or (< x y) (= x y) (< y x))",
    "(=> (= (div x 2) 0) (< x 2))",
]


@pytest.mark.parametrize("text", VALIDITY_CORPUS)
def test_negation_duality(text, solver_config):
    term = t(text)
    verdict = verify(term, solver_config)
    dual = verify(tm.Not(term), solver_config)
    if verdict.is_valid:
        assert not dual.is_valid
    if dual.is_valid:
        assert not verdict.is_valid


@pytest.mark.parametrize("text", VALIDITY_CORPUS)
def test_invalid_models_falsify(text, solver_config):
    term = t(text)
    verdict = verify(term, solver_config)
    if verdict.is_invalid:
        assert set(verdict.model) >= set(tm.free_vars(term))
        assert model_falsifies(term, verdict.model, IntRange(-8, 8))


def test_no_solver_process_outlives_the_query(solver_config):
    me = psutil.Process()
    before = {p.pid for p in me.children(recursive=True)}
    verify(t("(= x x)"), solver_config)
    verify(t("(< x x)"), solver_config)
    after = {p.pid for p in me.children(recursive=True)}
    assert after <= before


def test_default_config_env_override(monkeypatch):
    monkeypatch.setenv("AEVER_SOLVER", "mysolver --flag")
    assert default_config().command == ("mysolver", "--flag")
