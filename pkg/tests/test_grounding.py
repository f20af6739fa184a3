import pytest

from liftsat import corpus
from liftsat.grounding import (DecodeError, GroundingError, GroundOptions,
                               LiftedDomain, decode_model, ground)
from liftsat.lifter import LiftedItem, LiftedSentence, translate
from liftsat.parser import parse_problem
from liftsat.syntax import Divides, IntLit, Not

PRED = corpus.pigeonhole_pred(3, 2, 1)
FUNC = corpus.pigeonhole(10, 5, 2)


def lifted(src):
    return translate(parse_problem(src))


def gr(src, sizes, **opts):
    return ground(lifted(src), LiftedDomain.of_sizes(sizes), GroundOptions(**opts))


def test_domain_helpers():
    d = LiftedDomain.empty(("A", "B"))
    assert d.sizes() == {"A": 0, "B": 0}
    d2 = d.grown("A", 2)
    assert d2.elements["A"] == ("A_1", "A_2")
    assert d2.grown("A", 3).elements["A"] == ("A_1", "A_2", "A_3")
    assert LiftedDomain.of_sizes({"A": 2}).elements == {"A": ("A_1", "A_2")}


def test_predicate_encoding_golden():
    gp = gr(PRED, {"Pigeon": 1, "Hole": 1})
    assert gp.script == """\
(set-option :produce-models true)
(set-option :produce-unsat-cores true)
(set-logic QF_NIA)
(declare-const m_Pigeon_1 Int)
(declare-const m_Hole_1 Int)
(declare-const q_isIn_Pigeon_1_Hole_1 Bool)
(declare-const lcm0 Int)
(declare-const k0 Int)
(assert (! (and (<= 0 m_Pigeon_1) (<= m_Pigeon_1 3)) :named bd0))
(assert (! (and (<= 0 m_Hole_1) (<= m_Hole_1 2)) :named bd1))
(assert (! (or (not (< 0 m_Pigeon_1)) (and (< 0 m_Hole_1) q_isIn_Pigeon_1_Hole_1)) :named s0))
(assert (! (or (not (< 0 m_Hole_1)) (<= (ite (and (< 0 m_Pigeon_1) q_isIn_Pigeon_1_Hole_1) k0 0) 1)) :named s1))
(assert (! (= m_Pigeon_1 3) :named ext_Pigeon))
(assert (! (= m_Hole_1 2) :named ext_Hole))
(assert (! (or (not q_isIn_Pigeon_1_Hole_1) (= (* m_Pigeon_1 m_Hole_1) lcm0)) :named rc0))
(assert (! (= lcm0 (ite (= m_Pigeon_1 0) 0 (ite (= m_Pigeon_1 1) (ite (= m_Hole_1 0) 0 (ite (= m_Hole_1 1) 1 2)) (ite (= m_Pigeon_1 2) (ite (= m_Hole_1 0) 0 2) (ite (= m_Hole_1 0) 0 (ite (= m_Hole_1 1) 3 6)))))) :named def0))
(assert (! (and (=> (and (< 0 m_Pigeon_1) q_isIn_Pigeon_1_Hole_1) (=> (distinct m_Hole_1 0) (= (* k0 m_Hole_1) lcm0))) (=> (or (not (and (< 0 m_Pigeon_1) q_isIn_Pigeon_1_Hole_1)) (= m_Hole_1 0)) (= k0 0))) :named def1))
(check-sat)
(get-model)
(get-unsat-core)
"""


def test_function_encoding_golden():
    gp = gr(FUNC, {"Pigeon": 1, "Hole": 1})
    lines = gp.script.splitlines()
    assert "(declare-const g_isIn_Pigeon_1 Int)" in lines
    # one-element codomain: selector pinned to code 0
    assert ("(assert (! (and (<= 0 g_isIn_Pigeon_1) (< g_isIn_Pigeon_1 1)) "
            ":named dm0))" in lines)
    # unary Mul=Lcm side condition folds away entirely
    assert "(assert (! true :named f1_isIn))" in lines
    # divisibility with a fresh existential multiplier, positive context
    assert ("(assert (! (and (<= 0 dv0) (= m_Pigeon_1 (* dv0 m_Hole_1))) "
            ":named f2_isIn))" in lines)
    # the cap sentence counts an exact quotient under the filter guard
    assert ("(assert (! (or (not (< 0 m_Hole_1)) (<= (ite (and (< 0 m_Pigeon_1) "
            "(= g_isIn_Pigeon_1 0)) k0 0) 2)) :named s0))" in lines)


def test_grounding_is_deterministic():
    a = gr(PRED, {"Pigeon": 2, "Hole": 2}).script
    b = gr(PRED, {"Pigeon": 2, "Hole": 2}).script
    assert a == b
    c = gr(FUNC, {"Pigeon": 3, "Hole": 2}).script
    d = gr(FUNC, {"Pigeon": 3, "Hole": 2}).script
    assert c == d


def test_concrete_cap_bounds_muls_at_one():
    gp = gr(PRED, {"Pigeon": 2, "Hole": 1}, mul_cap=1)
    assert "(assert (! (and (<= 0 m_Pigeon_1) (<= m_Pigeon_1 1)) :named bd0))" \
        in gp.script.splitlines()


def test_empty_domain_grounds_extents_false():
    gp = gr(PRED, {"Pigeon": 0, "Hole": 0})
    lines = gp.script.splitlines()
    # a universal over an empty domain is vacuously true
    assert "(assert (! true :named s0))" in lines
    # the extent of a fixed type cannot be met: 0 = 3
    assert "(assert (! (= 0 3) :named ext_Pigeon))" in lines


def test_provenance_map():
    gp = gr(PRED, {"Pigeon": 1, "Hole": 1})
    assert gp.name_map["s0"].kind == "theory"
    assert gp.name_map["s0"].rule == "forall"
    assert gp.name_map["ext_Pigeon"].kind == "extent"
    assert gp.name_map["ext_Pigeon"].types == ("Pigeon",)
    assert gp.name_map["rc0"].kind == "rc"
    assert set(gp.name_map["rc0"].types) == {"Pigeon", "Hole"}
    assert gp.name_map["bd0"].kind == "bound"
    assert gp.name_map["def0"].kind == "def"


def test_var_map_layout():
    gp = gr(FUNC, {"Pigeon": 2, "Hole": 1})
    assert gp.var_map["mul"] == {"Pigeon_1": "m_Pigeon_1",
                                 "Pigeon_2": "m_Pigeon_2",
                                 "Hole_1": "m_Hole_1"}
    assert gp.var_map["func"]["isIn"][("Pigeon_1",)] == "g_isIn_Pigeon_1"
    assert gp.var_map["func_res"]["isIn"] == "Hole"


def test_decode_model_round_trip():
    gp = gr(PRED, {"Pigeon": 1, "Hole": 1})
    values = {"m_Pigeon_1": 3, "m_Hole_1": 2, "q_isIn_Pigeon_1_Hole_1": True,
              "lcm0": 6, "k0": 3}
    L = decode_model(gp, values)
    assert L.mul == {"Pigeon_1": 3, "Hole_1": 2}
    assert L.preds["isIn"] == frozenset({("Pigeon_1", "Hole_1")})
    assert L.types == {"Pigeon": ("Pigeon_1",), "Hole": ("Hole_1",)}


def test_decode_function_selectors():
    gp = gr(FUNC, {"Pigeon": 1, "Hole": 2})
    values = {"m_Pigeon_1": 10, "m_Hole_1": 5, "m_Hole_2": 0,
              "g_isIn_Pigeon_1": 0}
    values.update({v: 0 for v in _all_vars(gp) if v not in values})
    L = decode_model(gp, values)
    assert L.funcs["isIn"] == {("Pigeon_1",): "Hole_1"}
    values["g_isIn_Pigeon_1"] = 2  # only codes 0 and 1 exist
    with pytest.raises(DecodeError, match="outside"):
        decode_model(gp, values)


def _all_vars(gp):
    out = list(gp.var_map["mul"].values())
    for tb in gp.var_map["pred"].values():
        out.extend(tb.values())
    for tb in gp.var_map["func"].values():
        out.extend(tb.values())
    return out


def test_decode_missing_variable():
    gp = gr(PRED, {"Pigeon": 1, "Hole": 1})
    with pytest.raises(DecodeError, match="no value"):
        decode_model(gp, {"m_Pigeon_1": 3})


def test_lcm_tables_need_finite_caps():
    src = "type T\npred p(T, T)\ntheory {\n  !x, y in T: p(x, y).\n}\n"
    with pytest.raises(GroundingError, match="lcm bound"):
        gr(src, {"T": 2})
    # capping the multiplicities makes the table finite again
    gp = gr(src, {"T": 2}, max_mul=8)
    assert "lcm0" in gp.script


def test_lcm_table_limit():
    src = "type T\npred p(T, T)\ntheory {\n  !x, y in T: p(x, y).\n}\n"
    with pytest.raises(GroundingError, match="table"):
        gr(src, {"T": 2}, max_mul=60, lcm_bound=64, table_limit=100)


def test_divides_requires_positive_context():
    p = parse_problem("type A size 1\npred q(A)\ntheory {\n  true.\n}\n")
    base = translate(p)
    bad = LiftedSentence(
        base.problem, base.prepared,
        (LiftedItem("s0", Not(Divides(IntLit(2), IntLit(4))), "copy",
                    "sentence 0", ()),),
        0)
    with pytest.raises(GroundingError, match="positive"):
        ground(bad, LiftedDomain.of_sizes({"A": 1}), GroundOptions())


def test_domain_validation():
    ls = lifted("type A size 2\npred q(A)\ntheory {\n  !x in A: q(x).\n}\n")
    with pytest.raises(GroundingError, match="exceeds"):
        ground(ls, LiftedDomain.of_sizes({"A": 3}), GroundOptions())
    with pytest.raises(GroundingError, match="missing type"):
        ground(ls, LiftedDomain.of_sizes({"B": 1}), GroundOptions())
