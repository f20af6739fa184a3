import pytest

import liftsat.evaluator as evaluator
from liftsat import corpus
from liftsat.evaluator import (EvalError, brute_force_sat, count_structures,
                               euclid_div, eval_formula, eval_term,
                               verify_model)
from liftsat.lifter import translate
from liftsat.parser import parse_formula_in, parse_problem
from liftsat.structures import ConcreteStructure, LiftedStructure

BASE = """
type A size 2
type B size 2
pred r(A, B)
pred q(A)
func f(A) -> B
func g(A) -> Int
const c -> B
theory {
  !x in A: ?y in B: r(x, y).
}
"""


def prob():
    return parse_problem(BASE)


def struct():
    return ConcreteStructure(
        {"A": ("a1", "a2"), "B": ("b1", "b2")},
        {"r": frozenset({("a1", "b1"), ("a2", "b1"), ("a2", "b2")}),
         "q": frozenset({("a1",)})},
        {"f": {("a1",): "b1", ("a2",): "b2"},
         "g": {("a1",): 3, ("a2",): -5},
         "c": {(): "b1"}})


def ev(src, s=None, asg=None):
    p = prob()
    f = parse_formula_in(p, src)
    return eval_formula(f, s or struct(), asg or {})


def test_euclidean_division():
    assert euclid_div(7, 2) == 3
    assert euclid_div(-7, 2) == -4   # remainder stays in [0, |b|)
    assert euclid_div(7, -2) == -3
    assert euclid_div(-7, -2) == 4
    with pytest.raises(EvalError):
        euclid_div(1, 0)


def test_term_evaluation():
    assert ev("!x in A: g(x) + 2 * 3 >= -1 | q(x)")
    assert ev("?x in A: f(x) = c & g(x) = 3")
    assert ev("?x in A: g(x) / 2 = -3")  # euclidean: -5 div 2 = -3


def test_compare_operators():
    assert ev("?x in A: g(x) ~= 0")
    assert ev("!x in A: g(x) =< 3")
    assert ev("?x in A: g(x) >= 3")
    assert not ev("?x in A: g(x) > 3")
    assert ev("?x in A: g(x) < 0")


def test_connectives_and_iff():
    assert ev("!x in A: q(x) => f(x) = c")
    assert ev("!x in A: q(x) <=> g(x) > 0")
    assert ev("?x in A: ~q(x)")


def test_quantifiers_multi_binder():
    assert ev("?x in A, y in B: r(x, y) & f(x) = y")
    assert not ev("!x in A, y in B: r(x, y)")


def test_cardinality_counts():
    assert ev("#{x in A : q(x)} = 1")
    assert ev("#{x in A, y in B : r(x, y)} = 3")
    assert ev("#{x in A : ~q(x) & f(x) = f(x)} = 1")


def test_sum_bodies():
    assert ev("sum{{x in A : q(x) : g(x)}} = 3")
    assert ev("sum{{x in A : g(x) < 100 : g(x)}} = -2")
    # empty filter sums to zero
    assert ev("sum{{x in A : g(x) > 100 : g(x)}} = 0")


def test_guided_sum_matches_naive(monkeypatch):
    sources = [
        "sum{{x in A : r(x, c) & q(x) : g(x)}}",
        "sum{{x in A, y in B : r(x, y) : g(x)}}",
        "sum{{x in A : f(x) = c : g(x) + 1}}",
        "#{x in A : f(x) = c}",
        "#{x in A : r(x, c)}",
    ]
    p = prob()
    s = struct()
    got = []
    for src in sources:
        f = parse_formula_in(p, f"{src} >= 0")
        got.append(eval_term(f.left, s, {}))
    monkeypatch.setattr(evaluator, "_guided_tuples", lambda *a: None)
    for src, before in zip(sources, got):
        f = parse_formula_in(p, f"{src} >= 0")
        assert eval_term(f.left, s, {}) == before


def test_lifted_mul_and_lcm_terms():
    L = LiftedStructure({"A": ("a1", "a2"), "B": ("b1", "b2")},
                        {"a1": 6, "a2": 1, "b1": 4, "b2": 0},
                        {"q": frozenset({("a1",)}),
                         "r": frozenset({("a1", "b1")})},
                        {"f": {("a1",): "b1", ("a2",): "b2"},
                         "g": {("a1",): 3, ("a2",): -5},
                         "c": {(): "b1"}})
    p = prob()
    f = parse_formula_in(p, "!x in A: q(x) => f(x) = c")
    assert eval_formula(f, L, {})
    # mul/lcm are interpreted symbols on lifted structures
    from liftsat.lifter import mul_term, meta_lcm
    from liftsat.syntax import Var
    x = Var("x", "A")
    assert eval_term(mul_term(x), L, {"x": "a1"}) == 6
    assert eval_term(meta_lcm([x, Var("y", "B")]), L,
                     {"x": "a1", "y": "b1"}) == 12
    assert eval_term(meta_lcm([x, Var("y", "B")]), L,
                     {"x": "a1", "y": "b2"}) == 0


def test_exact_division_semantics():
    from liftsat.syntax import ExactDiv, IntLit
    s = struct()
    assert eval_term(ExactDiv(IntLit(6), IntLit(3)), s, {}) == 2
    assert eval_term(ExactDiv(IntLit(0), IntLit(0)), s, {}) == 0
    with pytest.raises(EvalError, match="inexact"):
        eval_term(ExactDiv(IntLit(7), IntLit(3)), s, {})
    with pytest.raises(EvalError, match="zero"):
        eval_term(ExactDiv(IntLit(7), IntLit(0)), s, {})


def test_divides_semantics():
    from liftsat.syntax import Divides, IntLit
    s = struct()
    assert eval_formula(Divides(IntLit(3), IntLit(6)), s, {})
    assert not eval_formula(Divides(IntLit(4), IntLit(6)), s, {})
    assert eval_formula(Divides(IntLit(0), IntLit(0)), s, {})
    assert not eval_formula(Divides(IntLit(0), IntLit(5)), s, {})


def test_verify_model_valid():
    r = verify_model(prob(), struct())
    assert r.ok and r.kind == "valid"
    assert bool(r)


def test_verify_model_invalid_with_witness():
    s = struct()
    bad = ConcreteStructure(dict(s.types),
                            {"r": frozenset({("a1", "b1")}),
                             "q": s.preds["q"]},
                            dict(s.funcs))
    r = verify_model(prob(), bad)
    assert not r.ok and r.kind == "invalid"
    assert r.sentence_index == 0
    assert r.witness == ("a2",)  # first violating binding


def test_verify_model_cardinality():
    s = struct()
    bad = ConcreteStructure({"A": ("a1",), "B": s.types["B"]},
                            {"r": frozenset({("a1", "b1")}),
                             "q": frozenset()},
                            {"f": {("a1",): "b1"}, "g": {("a1",): 0},
                             "c": {(): "b1"}})
    r = verify_model(prob(), bad)
    assert not r.ok and r.kind == "cardinality"


def test_verify_model_malformed():
    s = struct()
    bad = ConcreteStructure(dict(s.types),
                            {"r": frozenset({("a1", "a1")}),  # ill-typed
                             "q": s.preds["q"]},
                            dict(s.funcs))
    r = verify_model(prob(), bad)
    assert not r.ok and r.kind == "malformed"
    partial = ConcreteStructure(dict(s.types),
                                dict(s.preds),
                                {"f": {("a1",): "b1"},  # not total
                                 "g": s.funcs["g"], "c": s.funcs["c"]})
    r2 = verify_model(prob(), partial)
    assert not r2.ok and r2.kind == "malformed"
    assert "not total" in r2.detail


def test_count_structures():
    p = parse_problem("type A size 2\npred r(A, A)\nfunc f(A) -> A\ntheory {\n  true.\n}\n")
    assert count_structures(p, {"A": 2}) == (2 ** 4) * (2 ** 2)


def test_brute_force_finds_and_refutes():
    sat = parse_problem(corpus.pigeonhole_pred(2, 2, 1))
    m = brute_force_sat(sat, {"Pigeon": 2, "Hole": 2})
    assert m is not None
    assert verify_model(sat, m).ok
    unsat = parse_problem(corpus.pigeonhole_pred(2, 1, 1))
    assert brute_force_sat(unsat, {"Pigeon": 2, "Hole": 1}) is None


def test_brute_force_find_all():
    p = parse_problem("type A size 1\npred q(A)\ntheory {\n  true.\n}\n")
    assert len(brute_force_sat(p, {"A": 1}, find_all=True)) == 2
    p2 = parse_problem("type A size 1\npred q(A)\ntheory {\n  !x in A: q(x).\n}\n")
    assert len(brute_force_sat(p2, {"A": 1}, find_all=True)) == 1


def test_brute_force_budget():
    p = parse_problem("type A size 3\npred r(A, A)\ntheory {\n  true.\n}\n")
    with pytest.raises(EvalError, match="budget"):
        brute_force_sat(p, {"A": 3}, budget=10)


def test_brute_force_rejects_wrong_fixed_size():
    p = parse_problem("type A size 2\npred q(A)\ntheory {\n  true.\n}\n")
    with pytest.raises(EvalError, match="fixed"):
        brute_force_sat(p, {"A": 3})


def test_translated_items_hold_on_intended_lifted_model():
    p = parse_problem(corpus.pigeonhole(10, 5, 2))
    ls = translate(p)
    L = LiftedStructure({"Pigeon": ("p",), "Hole": ("h",)},
                        {"p": 10, "h": 5},
                        {}, {"isIn": {("p",): "h"}})
    for it in ls.items:
        assert eval_formula(it.formula, L, {}), it.label
    # breaking the extent (divisibility preserved) breaks exactly that item
    bad = LiftedStructure(L.types, {"p": 5, "h": 5}, {}, dict(L.funcs))
    failed = [it.label for it in ls.items if not eval_formula(it.formula, bad, {})]
    assert failed == ["ext_Pigeon"]
