import json
import random

import pytest

from liftsat import corpus
from liftsat.structures import (ConcreteStructure, CyclePermutation, Irregular,
                                LiftedStructure, Regular, StructureError,
                                check_function_regularity, expand_structure,
                                is_automorphism, is_backbone, is_regular_tuple,
                                lcm_all, lift_along, lift_trivial, mul_product,
                                structure_from_json, transform_structure)


def test_mul_and_lcm_conventions():
    assert mul_product([]) == 1
    assert lcm_all([]) == 1
    assert mul_product([2, 3]) == 6
    assert lcm_all([2, 3]) == 6
    assert lcm_all([2, 4]) == 4
    assert lcm_all([2, 0, 3]) == 0
    assert mul_product([2, 0, 3]) == 0


def test_cycle_permutation_basics():
    pi = CyclePermutation((("a", "a#2"), ("b", "b#2", "b#3")))
    assert pi.apply("a") == "a#2"
    assert pi.apply("a#2") == "a"
    assert pi.apply("zzz") == "zzz"  # off-domain: identity
    assert pi.apply(7) == 7
    assert pi.order() == 6
    assert sorted(pi.domain()) == ["a", "a#2", "b", "b#2", "b#3"]


def test_cycle_permutation_rejects_overlap():
    with pytest.raises(StructureError):
        CyclePermutation((("a", "b"), ("b", "c")))


def test_tuple_expansion_walks_cycles_in_sync():
    # mul(a)=2, mul(b)=4: four synchronized tuples; (a, b#2) is missing
    pi = CyclePermutation((("a", "a#2"), ("b", "b#2", "b#3", "b#4")))
    orbit = pi.orbit(("a", "b"))
    assert orbit == [("a", "b"), ("a#2", "b#2"), ("a", "b#3"), ("a#2", "b#4")]
    assert ("a", "b#2") not in orbit
    assert not is_regular_tuple(("a", "b"), {"a": 2, "b": 4})


def test_tuple_expansion_coprime_covers_cross_product():
    # mul(a)=2, mul(b)=3: all six pairs appear, in orbit order
    pi = CyclePermutation((("a", "a#2"), ("b", "b#2", "b#3")))
    orbit = pi.orbit(("a", "b"))
    assert orbit == [("a", "b"), ("a#2", "b#2"), ("a", "b#3"),
                     ("a#2", "b"), ("a", "b#2"), ("a#2", "b#3")]
    assert len(orbit) == 6
    assert is_regular_tuple(("a", "b"), {"a": 2, "b": 3})


def test_regular_tuple_edge_cases():
    assert is_regular_tuple((), {})
    assert is_regular_tuple(("a",), {"a": 9})          # unary: always
    assert is_regular_tuple(("a", "b"), {"a": 2, "b": 0})  # empty expansion
    assert not is_regular_tuple(("a", "a"), {"a": 2})  # repeat counts twice
    assert is_regular_tuple(("a", 5, "b"), {"a": 2, "b": 3})  # ints ignored


def two_elem(fsig, fmap, mul_a, mul_b):
    return LiftedStructure(
        {"A": ("a",), "B": ("b",)}, {"a": mul_a, "b": mul_b},
        {}, {"f": dict(fmap)})


def test_nontotal_expansion_detected():
    # f: A x A -> B over mul(a)=mul(b)=2 expands to
    # {(a,a)->b, (a#2,a#2)->b#2}: no entry for (a, a#2)
    L = two_elem(("A", "A"), {("a", "a"): "b"}, 2, 2)
    r = check_function_regularity(L, "f", ("A", "A"))
    assert isinstance(r, Irregular)
    assert r.witness == ("a", "a")
    assert "cross product" in r.reason
    with pytest.raises(StructureError, match="not regular"):
        expand_structure(L)


def test_nonfunctional_expansion_detected():
    # f: A -> B with mul(a)=1, mul(b)=2 expands to {a->b, a->b#2}
    L = two_elem(("A",), {("a",): "b"}, 1, 2)
    r = check_function_regularity(L, "f", ("A",))
    assert isinstance(r, Irregular)
    assert r.witness == ("a",)
    assert "two different images" in r.reason
    with pytest.raises(StructureError, match="not regular"):
        expand_structure(L)


def test_regular_function_accepted():
    # image multiplicity divides the tuple multiplicity
    L = two_elem(("A",), {("a",): "b"}, 6, 3)
    assert isinstance(check_function_regularity(L, "f", ("A",)), Regular)
    concrete, pi = expand_structure(L)
    assert concrete.funcs["f"][("a",)] == "b"
    assert concrete.funcs["f"][("a#2",)] == "b#2"
    assert concrete.funcs["f"][("a#4",)] == "b"
    assert len(concrete.funcs["f"]) == 6


def test_regularity_check_detects_missing_domain_tuple():
    L = LiftedStructure({"A": ("a", "a2")}, {"a": 1, "a2": 1},
                        {}, {"f": {("a",): "a"}})
    r = check_function_regularity(L, "f", ("A",))
    assert isinstance(r, Irregular)
    assert r.reason == "not total on the lifted domain"


def test_exact_check_agrees_on_goldens():
    bad = two_elem(("A", "A"), {("a", "a"): "b"}, 2, 2)
    good = two_elem(("A",), {("a",): "b"}, 6, 3)
    assert isinstance(check_function_regularity(bad, "f", ("A", "A"), exact=True),
                      Irregular)
    assert isinstance(check_function_regularity(good, "f", ("A",), exact=True),
                      Regular)


def test_expand_predicates_by_orbit():
    L = LiftedStructure({"A": ("a",), "B": ("b",)}, {"a": 2, "b": 3},
                        {"r": frozenset({("a", "b")})}, {})
    concrete, pi = expand_structure(L)
    assert concrete.types == {"A": ("a", "a#2"), "B": ("b", "b#2", "b#3")}
    assert len(concrete.preds["r"]) == 6
    assert ("a", "b#2") in concrete.preds["r"]
    assert pi.order() == 6


def test_mul_zero_elements_vanish():
    L = LiftedStructure({"A": ("a", "x"), "B": ("b",)},
                        {"a": 2, "x": 0, "b": 1},
                        {"q": frozenset({("a",), ("x",)})},
                        {"f": {("a",): "b", ("x",): "b"}})
    concrete, _ = expand_structure(L)
    assert concrete.types["A"] == ("a", "a#2")
    assert concrete.preds["q"] == frozenset({("a",), ("a#2",)})
    assert set(concrete.funcs["f"]) == {("a",), ("a#2",)}


def test_mul_zero_image_is_irregular():
    L = LiftedStructure({"A": ("a",), "B": ("b",)}, {"a": 1, "b": 0},
                        {}, {"f": {("a",): "b"}})
    with pytest.raises(StructureError, match="multiplicity 0"):
        expand_structure(L)


def test_integer_valued_functions_expand():
    L = LiftedStructure({"A": ("a",)}, {"a": 3}, {}, {"g": {("a",): 42}})
    concrete, _ = expand_structure(L)
    assert concrete.funcs["g"] == {("a",): 42, ("a#2",): 42, ("a#3",): 42}


def test_expansion_is_automorphic_with_lifted_backbone():
    L = LiftedStructure({"A": ("a", "a2"), "B": ("b",)},
                        {"a": 2, "a2": 1, "b": 5},
                        {"q": frozenset({("a",)})}, {})
    concrete, pi = expand_structure(L)
    assert is_automorphism(concrete, pi)
    assert is_backbone(concrete, pi, set(L.elements()))
    # a non-backbone set: two picks from one cycle
    assert not is_backbone(concrete, pi, {"a", "a#2", "a2", "b"})


def test_lift_along_inverts_expansion():
    L = LiftedStructure({"A": ("a", "a2"), "B": ("b",)},
                        {"a": 2, "a2": 1, "b": 5},
                        {"q": frozenset({("a",)}),
                         "r": frozenset({("a", "b"), ("a2", "b")})},
                        {"f": {("a",): "a", ("a2",): "a2"}})
    concrete, pi = expand_structure(L)
    again = lift_along(concrete, pi, set(L.elements()))
    assert again == L


def test_lift_along_rejects_non_backbone():
    L = LiftedStructure({"A": ("a",)}, {"a": 2}, {}, {})
    concrete, pi = expand_structure(L)
    with pytest.raises(StructureError, match="backbone"):
        lift_along(concrete, pi, {"a", "a#2"})


def test_lift_trivial_round_trip():
    c = ConcreteStructure({"A": ("x", "y")},
                          {"q": frozenset({("x",)})},
                          {"f": {("x",): "y", ("y",): "y"}})
    L = lift_trivial(c)
    assert all(m == 1 for m in L.mul.values())
    back, pi = expand_structure(L)
    assert back == c
    assert pi.order() == 1


def test_transform_structure_requires_closure():
    c = ConcreteStructure({"A": ("x", "y")}, {"q": frozenset()}, {})
    pi = CyclePermutation((("x", "z"),))
    with pytest.raises(StructureError, match="unknown element"):
        transform_structure(c, pi)


def test_used_counts():
    L = LiftedStructure({"A": ("a", "a2"), "B": ("b",)},
                        {"a": 4, "a2": 0, "b": 1}, {}, {})
    assert L.used_counts() == {"A": 1, "B": 1, "total": 2}


def test_json_round_trips():
    L = LiftedStructure({"A": ("a",), "B": ("b",)}, {"a": 6, "b": 3},
                        {"r": frozenset({("a", "b")})},
                        {"f": {("a",): "b"}, "g": {("a",): -7}})
    again = structure_from_json(L.to_json())
    assert again == L
    c, _ = expand_structure(L)
    cc = structure_from_json(c.to_json())
    assert cc == c
    # documents are plain JSON
    doc = json.loads(L.to_json())
    assert doc["mul"] == {"a": 6, "b": 3}


def test_from_json_rejects_missing_sections():
    with pytest.raises(StructureError, match="types"):
        structure_from_json('{"preds": {}, "funcs": {}}')
    with pytest.raises(StructureError, match="malformed"):
        structure_from_json('[1, 2, 3]')


def test_from_json_rejects_misshapen_sections():
    bad = '{"types": {"A": ["a"]}, "preds": {"p": 3}, "funcs": {}}'
    with pytest.raises(StructureError, match="malformed"):
        structure_from_json(bad)


def test_expand_requires_multiplicities():
    c = ConcreteStructure({"A": ("a",)}, {}, {})
    with pytest.raises(StructureError, match="lifted"):
        expand_structure(c)


def test_random_regular_structures_round_trip():
    rng = random.Random(20)
    for _ in range(25):
        L = corpus.random_regular_structure(rng)
        concrete, pi = expand_structure(L)
        assert is_automorphism(concrete, pi)
        assert is_backbone(concrete, pi, set(L.elements()))
        assert lift_along(concrete, pi, set(L.elements())) == L
