"""Concrete and lifted structures, cycle permutations, expansion.

A lifted structure is a finite structure whose elements carry a
multiplicity mul(e) >= 0. It denotes, via a cycle permutation pi built
from one cycle per element (the element followed by mul-1 clones), the
concrete structure whose relations/functions are the pi-orbits of the
lifted tuples:

    exp(l1..lk) = { (pi^i(l1)..pi^i(lk)) : i >= 0 }   — Lcm(l) tuples,

where Mul(l) is the product and Lcm(l) the lcm of the multiplicities
(lcm with any 0 is 0). A tuple is *regular* when its expansion is the
full cross product of its elements' expansions, i.e. Lcm = Mul, i.e.
the nonzero multiplicities are pairwise coprime. A function
interpretation expands to a total function iff each domain tuple's
expansion covers the cross product exactly once; the cheap sufficient
test (every domain tuple regular and mul(image) | Mul(tuple)) is tried
first, exact orbit enumeration on demand.

Element ids in an expansion: the base element keeps the lifted id, the
clones are `<id>#2` .. `<id>#<mul>`; the lifted domain is therefore a
backbone (one element per pi-cycle, relations reconstructible from
orbits) of the expansion, and re-lifting along it is the identity.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field


class StructureError(Exception):
    pass


def mul_product(muls) -> int:
    out = 1
    for m in muls:
        out *= m
    return out


def lcm_all(muls) -> int:
    """lcm of a list; 0 if any entry is 0; 1 if empty."""
    out = 1
    for m in muls:
        if m == 0:
            return 0
        out = math.lcm(out, m)
    return out


def is_multiple(a: int, b: int) -> bool:
    """a is a (possibly zero) multiple of b."""
    if b == 0:
        return a == 0
    return a % b == 0


# ---------------------------------------------------------------------------
# permutations

@dataclass(frozen=True)
class CyclePermutation:
    """A permutation given in cycle notation over element ids. Anything
    not mentioned (including integers in mixed tuples) is a fixpoint."""
    cycles: tuple  # ((e1, e2, ...), ...)

    def __post_init__(self):
        seen = set()
        for cyc in self.cycles:
            for e in cyc:
                if e in seen:
                    raise StructureError(f"element {e} appears in two cycles")
                seen.add(e)
        object.__setattr__(self, "_next", {
            cyc[i]: cyc[(i + 1) % len(cyc)]
            for cyc in self.cycles for i in range(len(cyc))
        })

    def apply(self, x):
        return self._next.get(x, x)

    def apply_tuple(self, tup):
        return tuple(self.apply(x) for x in tup)

    def order(self) -> int:
        return lcm_all([len(c) for c in self.cycles]) or 1

    def orbit(self, tup) -> list:
        """The orbit of a tuple under repeated application, starting at
        the tuple itself, in application order."""
        out = [tuple(tup)]
        cur = self.apply_tuple(tup)
        while cur != out[0]:
            out.append(cur)
            cur = self.apply_tuple(cur)
        return out

    def domain(self):
        return set(self._next)


# ---------------------------------------------------------------------------
# structures

@dataclass
class ConcreteStructure:
    types: dict  # type -> (elem, ...)
    preds: dict  # pred -> frozenset of arg tuples
    funcs: dict  # func -> {arg tuple: value (elem or int)}
    _indexes: dict = field(default_factory=dict, compare=False, repr=False)

    def elements(self):
        return [e for t in self.types.values() for e in t]

    def pred_index(self, name, mask):
        """Tuples of preds[name] grouped by their projection onto the
        positions where mask is True. Cached; structures are treated as
        immutable after construction."""
        key = (name, mask)
        idx = self._indexes.get(key)
        if idx is None:
            idx = {}
            for tup in self.preds[name]:
                k = tuple(x for x, m in zip(tup, mask) if m)
                idx.setdefault(k, []).append(tup)
            self._indexes[key] = idx
        return idx

    def func_index(self, name):
        """funcs[name]'s graph grouped by image value. Cached."""
        key = ("func", name)
        idx = self._indexes.get(key)
        if idx is None:
            idx = {}
            for args, v in self.funcs[name].items():
                idx.setdefault(v, []).append(args)
            self._indexes[key] = idx
        return idx

    def to_json(self) -> str:
        return json.dumps(_structure_dict(self), indent=2, sort_keys=True)


@dataclass
class LiftedStructure:
    types: dict  # type -> (elem, ...)
    mul: dict    # elem -> int >= 0
    preds: dict
    funcs: dict
    _indexes: dict = field(default_factory=dict, compare=False, repr=False)

    def elements(self):
        return [e for t in self.types.values() for e in t]

    pred_index = ConcreteStructure.pred_index
    func_index = ConcreteStructure.func_index

    def tuple_mul(self, tup) -> int:
        return mul_product(self.mul[x] for x in tup if not isinstance(x, int))

    def tuple_lcm(self, tup) -> int:
        return lcm_all([self.mul[x] for x in tup if not isinstance(x, int)])

    def used_counts(self) -> dict:
        out = {t: sum(1 for e in es if self.mul[e] > 0) for t, es in self.types.items()}
        out["total"] = sum(out.values())
        return out

    def to_json(self) -> str:
        d = _structure_dict(self)
        d["mul"] = dict(sorted(self.mul.items()))
        return json.dumps(d, indent=2, sort_keys=True)


def _structure_dict(s) -> dict:
    return {
        "types": {t: list(es) for t, es in s.types.items()},
        "preds": {p: sorted([list(t) for t in ts]) for p, ts in s.preds.items()},
        "funcs": {f: sorted([list(a) + [v] for a, v in fn.items()])
                  for f, fn in s.funcs.items()},
    }


def structure_from_json(text: str):
    d = json.loads(text)
    if not isinstance(d, dict) or not {"types", "preds", "funcs"} <= d.keys():
        raise StructureError("malformed structure JSON: expected an object "
                             "with 'types', 'preds' and 'funcs'")
    try:
        types = {t: tuple(es) for t, es in d["types"].items()}
        preds = {p: frozenset(tuple(t) for t in ts)
                 for p, ts in d["preds"].items()}
        funcs = {f: {tuple(row[:-1]): row[-1] for row in rows}
                 for f, rows in d["funcs"].items()}
        if "mul" in d:
            return LiftedStructure(types, dict(d["mul"]), preds, funcs)
    except (AttributeError, IndexError, TypeError) as e:
        raise StructureError(f"malformed structure JSON: {e}") from e
    return ConcreteStructure(types, preds, funcs)


def concrete_used_counts(s: ConcreteStructure) -> dict:
    out = {t: len(es) for t, es in s.types.items()}
    out["total"] = sum(out.values())
    return out


# ---------------------------------------------------------------------------
# expansion

def expand_tuple(tup, pi: CyclePermutation) -> list:
    return pi.orbit(tup)


def is_regular_tuple(tup, mul: dict) -> bool:
    """Expansion equals the cross product of element expansions; holds
    iff some multiplicity is 0 or the multiplicities are pairwise
    coprime (Lcm = Mul)."""
    muls = [mul[x] for x in tup if not isinstance(x, int)]
    if any(m == 0 for m in muls):
        return True
    # a repeated element contributes its multiplicity twice to Mul
    return mul_product(muls) == lcm_all(muls)


@dataclass(frozen=True)
class Regular:
    ok: bool = True


@dataclass(frozen=True)
class Irregular:
    witness: tuple  # the offending domain tuple
    reason: str
    ok: bool = False


def check_function_regularity(struct: LiftedStructure, fname: str,
                              argtypes, exact: bool = False):
    """Does fname's interpretation expand to a total function?

    Default: the sufficient arithmetic test (every domain tuple regular,
    image multiplicity divides tuple multiplicity); on failure — or when
    exact=True — the orbit of each domain entry is enumerated and checked
    to cover its cross product exactly once.
    """
    fn = struct.funcs[fname]
    expected = sorted(itertools.product(*(struct.types[t] for t in argtypes)))
    have = sorted(fn.keys())
    if have != expected:
        missing = next((t for t in expected if t not in fn), None)
        extra = next((t for t in have if t not in set(expected)), None)
        return Irregular(missing if missing is not None else extra,
                         "not total on the lifted domain")

    if not exact:
        bad = None
        for tup in have:
            img = fn[tup]
            imul = 1 if isinstance(img, int) else struct.mul[img]
            if not is_regular_tuple(tup, struct.mul) or not is_multiple(
                    struct.tuple_mul(tup), imul):
                bad = tup
                break
        if bad is None:
            return Regular()
        # the cheap test is only sufficient; fall through to the exact one

    pi = _expansion_permutation(struct)
    for tup in have:
        img = fn[tup]
        orbit = pi.orbit(tuple(tup) + (img,))
        seen = {}
        for row in orbit:
            key, val = row[:-1], row[-1]
            if key in seen and seen[key] != val:
                return Irregular(tup, "two different images for one expanded tuple")
            seen[key] = val
        cross = mul_product(
            (1 if isinstance(x, int) else struct.mul[x]) for x in tup)
        if len(seen) != cross:
            return Irregular(tup, "expansion does not cover the cross product")
    return Regular()


def _clone_names(elem, m):
    return [elem] + [f"{elem}#{j}" for j in range(2, m + 1)]


def _expansion_permutation(struct: LiftedStructure) -> CyclePermutation:
    cycles = []
    for t, es in struct.types.items():
        for e in es:
            m = struct.mul[e]
            if m >= 2:
                cycles.append(tuple(_clone_names(e, m)))
    return CyclePermutation(tuple(cycles))


def expand_structure(struct: LiftedStructure):
    """Expand to a concrete structure; returns (concrete, pi).

    Raises StructureError when some function interpretation is not
    regular (the expansion would not be a total function). Multiplicity-0
    elements simply vanish. The lifted domain is a backbone of pi in the
    result.
    """
    if not isinstance(struct, LiftedStructure):
        raise StructureError("expected a lifted structure (with "
                             "multiplicities); got a concrete one")
    pi = _expansion_permutation(struct)
    types = {}
    for t, es in struct.types.items():
        out = []
        for e in es:
            if struct.mul[e] > 0:
                out.extend(_clone_names(e, struct.mul[e]))
        types[t] = tuple(out)

    funcs = {}
    for f, fn in struct.funcs.items():
        out = {}
        for args, val in sorted(fn.items(), key=str):
            if any(not isinstance(x, int) and struct.mul[x] == 0 for x in args):
                continue
            if not isinstance(val, int) and struct.mul[val] == 0:
                # the domain tuple survives but its image vanishes
                raise StructureError(
                    f"function {f} is not regular at {args}: image has multiplicity 0")
            # expansions of distinct lifted tuples are disjoint (distinct
            # base elements), so only local conflicts/coverage can fail
            local = {}
            for row in pi.orbit(tuple(args) + (val,)):
                key = row[:-1]
                if key in local and local[key] != row[-1]:
                    raise StructureError(
                        f"function {f} is not regular at {args}: conflicting images")
                local[key] = row[-1]
            cross = mul_product(
                (1 if isinstance(x, int) else struct.mul[x]) for x in args)
            if len(local) != cross:
                raise StructureError(
                    f"function {f} is not regular at {args}: "
                    f"expansion misses part of the cross product")
            out.update(local)
        funcs[f] = out

    preds = {}
    for p, tuples in struct.preds.items():
        out = set()
        for tup in sorted(tuples, key=str):
            if any(not isinstance(x, int) and struct.mul[x] == 0 for x in tup):
                continue
            out.update(pi.orbit(tup))
        preds[p] = frozenset(out)

    return ConcreteStructure(types, preds, funcs), pi


def lift_trivial(concrete: ConcreteStructure) -> LiftedStructure:
    """The lifting with all multiplicities 1 (pi = identity)."""
    mul = {e: 1 for e in concrete.elements()}
    return LiftedStructure(dict(concrete.types), mul,
                           dict(concrete.preds), dict(concrete.funcs))


# ---------------------------------------------------------------------------
# automorphisms and backbones

def transform_structure(s: ConcreteStructure, pi: CyclePermutation) -> ConcreteStructure:
    """Apply pi pointwise to every tuple of s (types must be closed
    under pi)."""
    elems = set(s.elements())
    for e in pi.domain():
        if e not in elems:
            raise StructureError(f"permutation moves unknown element {e}")
    for t, es in s.types.items():
        for e in es:
            if pi.apply(e) not in es:
                raise StructureError(f"permutation does not preserve type {t}")
    preds = {p: frozenset(pi.apply_tuple(t) for t in ts) for p, ts in s.preds.items()}
    funcs = {f: {pi.apply_tuple(a): pi.apply(v) for a, v in fn.items()}
             for f, fn in s.funcs.items()}
    return ConcreteStructure(dict(s.types), preds, funcs)


def is_automorphism(s: ConcreteStructure, pi: CyclePermutation) -> bool:
    try:
        t = transform_structure(s, pi)
    except StructureError:
        return False
    return t.preds == s.preds and t.funcs == s.funcs


def _cycles_over(s: ConcreteStructure, pi: CyclePermutation):
    """All cycles of pi restricted to s's domain, fixpoints included."""
    elems = list(s.elements())
    seen = set()
    cycles = []
    for e in elems:
        if e in seen:
            continue
        orb = [r[0] for r in pi.orbit((e,))]
        seen.update(orb)
        cycles.append(orb)
    return cycles


def is_backbone(s: ConcreteStructure, pi: CyclePermutation, backbone) -> bool:
    """backbone (a set of elements) has exactly one element per pi-cycle
    of s's domain, and every relation/function entry of s is recoverable
    as the orbit of its backbone-restricted entries."""
    if not is_automorphism(s, pi):
        return False
    bb = set(backbone)
    for cyc in _cycles_over(s, pi):
        if len([e for e in cyc if e in bb]) != 1:
            return False
    for p, ts in s.preds.items():
        seed = [t for t in ts if all(isinstance(x, int) or x in bb for x in t)]
        got = set()
        for t in seed:
            got.update(pi.orbit(t))
        if got != set(ts):
            return False
    for f, fn in s.funcs.items():
        seed = [(a, v) for a, v in fn.items()
                if all(isinstance(x, int) or x in bb for x in a)
                and (isinstance(v, int) or v in bb)]
        got = {}
        for a, v in seed:
            for row in pi.orbit(tuple(a) + (v,)):
                got[row[:-1]] = row[-1]
        if got != fn:
            return False
    return True


def lift_along(s: ConcreteStructure, pi: CyclePermutation, backbone) -> LiftedStructure:
    """The lifted structure induced by an automorphism pi and a backbone:
    elements are the backbone, multiplicities the cycle lengths, and the
    interpretations the backbone-restricted entries of s."""
    if not is_backbone(s, pi, backbone):
        raise StructureError("not a backbone")
    bb = set(backbone)
    types = {t: tuple(e for e in es if e in bb) for t, es in s.types.items()}
    mul = {}
    for t, es in types.items():
        for e in es:
            mul[e] = len(pi.orbit((e,)))
    preds = {p: frozenset(t for t in ts
                          if all(isinstance(x, int) or x in bb for x in t))
             for p, ts in s.preds.items()}
    funcs = {f: {a: v for a, v in fn.items()
                 if all(isinstance(x, int) or x in bb for x in a)
                 and (isinstance(v, int) or v in bb)}
             for f, fn in s.funcs.items()}
    return LiftedStructure(types, mul, preds, funcs)
