import io
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aever import terms as tm
from aever.smtlib_solver import decide, extract_model, run_session

# closed formulas with known truth value over the integers
TRUTHS = [
    ("true", True),
    ("(forall ((x Int)) (exists ((y Int)) (= y (+ x 1))))", True),
    ("(exists ((x Int)) (and (< 0 x) (< x 0)))", False),
    ("(forall ((x Int)) (=> (< 0 x) (<= 1 x)))", True),
    ("(forall ((x Int)) (< x 100))", False),
    ("(exists ((x Int)) (= (* 2 x) 7))", False),
    ("(exists ((x Int)) (= (* 3 x) 12))", True),
    ("(forall ((h Int)) (or (= (- h (* 2 (div h 2))) 0) (= (- h (* 2 (div h 2))) 1)))", True),
    ("(forall ((a Int) (b Int)) (=> (and (< a b) (< b a)) false))", True),
    ("(exists ((x Int)) (forall ((y Int)) (<= x y)))", False),
    ("(forall ((x Int)) (exists ((y Int)) (and (<= y x) (< x (+ y 2)))))", True),
    ("(forall ((n Int)) (=> (<= 0 n) (exists ((q Int)) (or (= n (* 2 q)) (= n (+ (* 2 q) 1))))))", True),
    ("(forall ((x Int)) (exists ((y Int)) (and (<= (* 2 y) x) (< x (+ (* 2 y) 2)))))", True),
    ("(exists ((x Int)) (and (= (* 3 (div (+ x 1) 3)) (+ x 1)) (= (* 4 (div x 4)) x)))", True),
    ("(forall ((x Int)) (=> (= (* 2 x) 6) (= x 3)))", True),
    ("(forall ((x Int) (y Int)) (=> (< (* 3 x) (* 3 y)) (< x y)))", True),
]


@pytest.mark.parametrize("text,truth", TRUTHS)
def test_decide_closed_formulas(text, truth):
    t = tm.parse_term(text)
    assert decide(t, {}, None).status == ("sat" if truth else "unsat")
    assert decide(tm.Not(t), {}, None).status == ("unsat" if truth else "sat")


def test_decide_nonlinear_is_unknown():
    t = tm.parse_term("(exists ((a Int) (b Int)) (= (* a b) 6))")
    assert decide(t, {}, None).status == "unknown"
    t2 = tm.parse_term("(exists ((a Int)) (= (div 6 a) 3))")
    assert decide(t2, {}, None).status == "unknown"


def test_model_extraction_satisfies_formula():
    t = tm.parse_term(
        "(and (< p!1!x y) (< y 3) (< (- 2) p!1!x) (= (- y (* 2 (div y 2))) 0))"
    )
    decision = decide(t, {"p!1!x": "Int", "y": "Int"}, None)
    assert decision.status == "sat"
    model = extract_model(decision, {"p!1!x": "Int", "y": "Int"})
    env = dict(model)
    assert tm.eval_term(tm.parse_term("(and (< p!1!x y) (< y 3) (< (- 2) p!1!x))"), env) is True
    assert env["y"] % 2 == 0


def test_model_covers_all_declared_constants():
    t = tm.parse_term("(= x 3)")
    decision = decide(t, {"x": "Int", "unused": "Int"}, None)
    model = extract_model(decision, {"x": "Int", "unused": "Int"})
    assert model["x"] == 3
    assert "unused" in model


def _session(script: str) -> str:
    out = io.StringIO()
    run_session(script, out)
    return out.getvalue()


def test_session_unsat_then_model_error():
    out = _session(
        """
        (set-logic ALL)
        (set-option :produce-models true)
        (declare-const x Int)
        (assert (and (< x 0) (< 0 x)))
        (check-sat)
        (get-model)
        (exit)
        """
    )
    lines = out.strip().splitlines()
    assert lines[0] == "unsat"
    assert "model is not available" in lines[1]


def test_session_sat_with_quoted_symbols():
    out = _session(
        """
        (declare-const |run!1!low| Int)
        (assert (= run!1!low 4))
        (check-sat)
        (get-model)
        """
    )
    assert out.splitlines()[0] == "sat"
    assert "(define-fun run!1!low () Int 4)" in out


def test_session_reports_unsupported_command():
    out = _session("(frobnicate)\n(check-sat)\n")
    assert "(error" in out
    assert out.strip().splitlines()[-1] == "sat"  # empty assertion set is sat


# --- agreement with brute force on the quantifier-free fragment -------------

_VARS = ("a", "b")


def _lin(depth):
    base = st.one_of(
        st.integers(-4, 4).map(tm.IntConst),
        st.sampled_from(_VARS).map(tm.VarRef),
        st.tuples(st.integers(-3, 3), st.sampled_from(_VARS)).map(
            lambda p: tm.Mul((tm.IntConst(p[0]), tm.VarRef(p[1])))
        ),
    )
    if depth == 0:
        return base
    sub = _lin(depth - 1)
    return st.one_of(
        base,
        st.tuples(sub, sub).map(lambda p: tm.Add((p[0], p[1]))),
        st.tuples(sub, sub).map(lambda p: tm.Sub(p[0], p[1])),
    )


def _qf_formulas(depth):
    atoms = st.one_of(
        st.tuples(_lin(1), _lin(1), st.sampled_from([tm.Eq, tm.Lt, tm.Le, tm.Gt, tm.Ge])).map(
            lambda p: p[2](p[0], p[1])
        ),
        st.booleans().map(tm.BoolConst),
    )
    if depth == 0:
        return atoms
    sub = _qf_formulas(depth - 1)
    return st.one_of(
        atoms,
        sub.map(tm.Not),
        st.tuples(sub, sub).map(lambda p: tm.And((p[0], p[1]))),
        st.tuples(sub, sub).map(lambda p: tm.Or((p[0], p[1]))),
        st.tuples(sub, sub).map(lambda p: tm.Implies(p[0], p[1])),
    )


@given(_qf_formulas(3))
@settings(max_examples=150, deadline=None)
def test_decide_agrees_with_grid_search(formula):
    decision = decide(formula, {v: "Int" for v in _VARS}, None)
    assert decision.status in ("sat", "unsat")
    grid_hit = None
    for vals in itertools.product(range(-4, 5), repeat=len(_VARS)):
        env = dict(zip(_VARS, vals))
        if tm.eval_term(formula, env) is True:
            grid_hit = env
            break
    if grid_hit is not None:
        assert decision.status == "sat"
    if decision.status == "sat":
        model = extract_model(decision, {v: "Int" for v in _VARS})
        assert tm.eval_term(formula, model) is True
    else:
        assert grid_hit is None


def test_session_honors_negative_values():
    out = _session(
        """
        (declare-const a Int)
        (assert (< a (- 5)))
        (check-sat)
        (get-model)
        """
    )
    assert "(- " in out.splitlines()[-2] + out.splitlines()[-3]
