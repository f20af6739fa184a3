import pytest
from hypothesis import given, settings, strategies as st

from liftsat import corpus
from liftsat.parser import ParseError, parse_formula_in, parse_problem
from liftsat.syntax import (Arith, Card, Compare, Connective, IntLit, Not,
                            PredApp, Quant, SumAgg, fmt_formula, fmt_problem)

BASE = """
type A size 3
type B size 2
pred r(A, B)
pred q(A)
func f(A) -> B
func g(A, B) -> Int
const c -> B
theory {
  !x in A: q(x) => ?y in B: r(x, y).
}
"""


def prob():
    return parse_problem(BASE)


def fin(src):
    return parse_formula_in(prob(), src)


def test_round_trip_problem():
    p = prob()
    again = parse_problem(fmt_problem(p))
    assert again.vocabulary == p.vocabulary
    assert again.cardinalities == p.cardinalities
    assert again.sentences == p.sentences


def test_comments_and_whitespace():
    p = parse_problem(
        "type A size 1  // one element\n"
        "pred q(A)\n"
        "theory {\n"
        "  // everything is q\n"
        "  !x in A: q(x).  // trailing\n"
        "}\n")
    assert p.cardinalities == {"A": 1}
    assert len(p.sentences) == 1


def test_connective_precedence():
    f = fin("!x in A: q(x) | q(x) & r(x, c) => q(x)")
    assert isinstance(f.body, Connective) and f.body.op == "=>"
    left = f.body.left
    assert left.op == "|"
    assert isinstance(left.left, PredApp)
    assert left.right.op == "&"


def test_implies_right_associative():
    f = fin("!x in A: q(x) => q(x) => q(x)")
    assert f.body.op == "=>"
    assert isinstance(f.body.left, PredApp)
    assert f.body.right.op == "=>"


def test_iff_binds_loosest():
    f = fin("!x in A: q(x) & q(x) <=> q(x)")
    assert f.body.op == "<=>"
    assert f.body.left.op == "&"


def test_negation_binds_tight():
    f = fin("!x in A: ~q(x) & q(x)")
    assert f.body.op == "&"
    assert isinstance(f.body.left, Not)
    assert isinstance(f.body.left.sub, PredApp)


def test_arith_precedence_and_unary_minus():
    f = fin("!x in A: g(x, c) = 1 + 2 * 3")
    rhs = f.body.right
    assert isinstance(rhs, Arith) and rhs.op == "+"
    assert rhs.right.op == "*"
    g = fin("!x in A: g(x, c) = -4")
    assert g.body.right == IntLit(-4, g.body.right.pos)


def test_parenthesized_term_vs_formula():
    # both readings of a leading "(" must come out right
    f = fin("!x in A: (f(x)) = c")
    assert isinstance(f.body, Compare)
    g = fin("!x in A: (q(x) | r(x, c)) & q(x)")
    assert g.body.op == "&"
    assert g.body.left.op == "|"


def test_cardinality_and_sum_syntax():
    f = fin("#{x in A : q(x)} >= 2")
    assert isinstance(f, Compare)
    assert isinstance(f.left, Card)
    s = fin("sum{{x in A : q(x) : g(x, c)}} = 0")
    assert isinstance(s.left, SumAgg)
    assert len(s.left.binders) == 1


def test_grouped_binders():
    f = fin("!x, y in A: r(x, c) | r(y, c)")
    assert [ty for _, ty in f.binders] == ["A", "A"]
    g = fin("!x in A, y in B: r(x, y)")
    assert [ty for _, ty in g.binders] == ["A", "B"]


def test_alpha_renaming_of_reused_binder():
    f = fin("(!x in A: q(x)) & (?x in A: ~q(x))")
    inner = f.right
    assert isinstance(inner, Quant) and inner.kind == "exists"
    name = inner.binders[0][0]
    assert name != "x"
    assert inner.body.sub.args[0].name == name


def test_variable_shadowing_vocabulary_is_error():
    with pytest.raises(ParseError, match="shadows"):
        fin("!q in A: r(q, c)")


def test_reserved_words_rejected():
    with pytest.raises(ParseError, match="reserved"):
        parse_problem("type sum\ntheory {\n}\n")
    with pytest.raises(ParseError, match="reserved"):
        fin("!in in A: q(in)")


def test_duplicate_declaration():
    with pytest.raises(ParseError, match="duplicate"):
        parse_problem("type A\npred A(A)\ntheory {\n}\n")


def test_unknown_type_and_symbol():
    with pytest.raises(ParseError, match="unknown type"):
        parse_problem("pred q(Z)\ntheory {\n}\n")
    with pytest.raises(ParseError, match="unknown symbol"):
        fin("1 = zz")


def test_missing_dot_and_missing_theory():
    with pytest.raises(ParseError, match=r"'\.'"):
        parse_problem("type A size 1\npred q(A)\ntheory {\n  !x in A: q(x)\n}\n")
    with pytest.raises(ParseError, match="theory"):
        parse_problem("type A size 1\n")


def test_error_positions_are_line_col():
    src = "type A size 1\npred q(A)\ntheory {\n  !x in A: q(%).\n}\n"
    with pytest.raises(ParseError, match=r"^4:"):
        parse_problem(src)


def test_quantify_over_int_rejected():
    with pytest.raises(ParseError, match="Int"):
        fin("!x in Int: q(c)")


def test_division_by_zero_literal_rejected():
    with pytest.raises(ParseError, match="division by zero"):
        fin("!x in A: g(x, c) / 0 = 1")


def test_formula_in_rejects_trailing_input():
    with pytest.raises(ParseError, match="trailing"):
        parse_formula_in(prob(), "!x in A: q(x).")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_random_problem_round_trip(seed):
    import random
    text = corpus.random_problem(random.Random(seed))
    p = parse_problem(text)
    printed = fmt_problem(p)
    again = parse_problem(printed)
    assert fmt_problem(again) == printed
    assert again.sentences == p.sentences
