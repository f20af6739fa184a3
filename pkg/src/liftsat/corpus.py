"""Benchmark problem families and random generators.

Problems are produced as source text so every consumer goes through the
parser. The families scale a size parameter while keeping the shape of
the intended lifted model fixed, which is what makes them useful for
measuring size-independence of the search.
"""

from __future__ import annotations

import itertools
import random

from .structures import LiftedStructure


def pigeonhole(pigeons: int = 10, holes: int = 5, cap: int = 2) -> str:
    """Assign pigeons to holes, at most `cap` per hole (function
    encoding: totality comes from the function symbol, so the intended
    lifted model is one pigeon element and one hole element)."""
    return f"""\
type Pigeon size {pigeons}
type Hole size {holes}
func isIn(Pigeon) -> Hole
theory {{
  !h in Hole: #{{p in Pigeon : isIn(p) = h}} =< {cap}.
}}
"""


def pigeonhole_pred(pigeons: int = 10, holes: int = 5, cap: int = 2) -> str:
    """Relation encoding of the same constraint; totality is an explicit
    sentence, which routes the membership atom through the regularity
    side conditions."""
    return f"""\
type Pigeon size {pigeons}
type Hole size {holes}
pred isIn(Pigeon, Hole)
theory {{
  !p in Pigeon: ?h in Hole: isIn(p, h).
  !h in Hole: #{{p in Pigeon : isIn(p, h)}} =< {cap}.
}}
"""


def rack_single(demand: int = 8, slots: int = 4) -> str:
    """`demand` interchangeable items packed onto generative racks with
    `slots` positions each."""
    return f"""\
type Item size {demand}
type Rack
func rackOf(Item) -> Rack
theory {{
  !r in Rack: #{{i in Item : rackOf(i) = r}} =< {slots}.
}}
"""


def rack_quad(demand: int = 4) -> str:
    """Four part kinds in fixed ratios packed onto generative racks:
    per-kind slot caps plus a total capacity of 10 per rack. Scaling the
    demand scales the multiplicities but not the shape of the lifted
    model (one lifted element per kind plus one rack)."""
    if demand % 4 != 0:
        raise ValueError("demand must be a multiple of 4")
    a, b, c, d = demand, 2 * demand, demand // 2, 3 * demand // 2
    return f"""\
type PartA size {a}
type PartB size {b}
type PartC size {c}
type PartD size {d}
type Rack
func rackOfA(PartA) -> Rack
func rackOfB(PartB) -> Rack
func rackOfC(PartC) -> Rack
func rackOfD(PartD) -> Rack
theory {{
  !r in Rack: #{{x in PartA : rackOfA(x) = r}} =< 2.
  !r in Rack: #{{x in PartB : rackOfB(x) = r}} =< 4.
  !r in Rack: #{{x in PartC : rackOfC(x) = r}} =< 1.
  !r in Rack: #{{x in PartD : rackOfD(x) = r}} =< 3.
  !r in Rack: #{{x in PartA : rackOfA(x) = r}} + #{{x in PartB : rackOfB(x) = r}}
            + #{{x in PartC : rackOfC(x) = r}} + #{{x in PartD : rackOfD(x) = r}} =< 10.
}}
"""


def generative_bins(items: int = 12, cap: int = 3) -> str:
    """Items spread over however many bins are needed, `cap` per bin."""
    return f"""\
type Thing size {items}
type Bin
func binOf(Thing) -> Bin
theory {{
  !b in Bin: #{{t in Thing : binOf(t) = b}} =< {cap}.
}}
"""


def capacity_chain(things: int = 16, per_box: int = 4,
                   per_crate: int = 4) -> str:
    """Two-level packing: things into boxes, boxes into crates, with a
    capacity at each level (exercises composed function images)."""
    return f"""\
type Thing size {things}
type Box
type Crate
func boxOf(Thing) -> Box
func crateOf(Box) -> Crate
theory {{
  !b in Box: #{{t in Thing : boxOf(t) = b}} =< {per_box}.
  !c in Crate: #{{b in Box : crateOf(b) = c}} =< {per_crate}.
}}
"""


def bapa_sample() -> str:
    """|A| > 1, A subset of B, |B intersect C| =< 2 — the shape of
    set-cardinality statements (Boolean algebra with arithmetic),
    encoded with unary predicates over one generative type. No
    functions, so the translation carries no regularity sentences."""
    return """\
type Elem
pred inA(Elem)
pred inB(Elem)
pred inC(Elem)
theory {
  #{x in Elem : inA(x)} > 1.
  !x in Elem: inA(x) => inB(x).
  #{x in Elem : inB(x) & inC(x)} =< 2.
}
"""


def region_counts() -> str:
    """Pure set-cardinality constraints over one generative type: three
    unary predicates whose overlap pattern forces at least three
    distinct element kinds (no functions, so no regularity conditions,
    no divisibility side conditions)."""
    return """\
type Elem
pred inA(Elem)
pred inB(Elem)
pred inC(Elem)
theory {
  #{x in Elem : inA(x)} = 2.
  #{x in Elem : inB(x)} = 3.
  #{x in Elem : inA(x) & inB(x)} = 1.
  #{x in Elem : inC(x)} = 0.
  !x in Elem: inA(x) | inB(x) | inC(x).
}
"""


# -- random tiny problems (for cross-checking against brute force)


def _random_atom(rng: random.Random, scope, preds, funcs) -> str:
    by_type = {}
    for name, ty in scope:
        by_type.setdefault(ty, []).append(name)

    options = []
    for p, sig in preds.items():
        if all(t in by_type for t in sig):
            options.append(("pred", p, sig))
    for f, (args, res) in funcs.items():
        if all(t in by_type for t in args) and res in by_type:
            options.append(("funceq", f, (args, res)))
    for ty, names in by_type.items():
        if len(names) >= 1:
            options.append(("vareq", ty, None))
    if not options:
        return "true"

    kind, name, extra = rng.choice(options)
    if kind == "pred":
        args = [rng.choice(by_type[t]) for t in extra]
        return f"{name}({', '.join(args)})"
    if kind == "funceq":
        args_t, res = extra
        args = [rng.choice(by_type[t]) for t in args_t]
        rhs = rng.choice(by_type[res])
        return f"{name}({', '.join(args)}) = {rhs}"
    names = by_type[name]
    a, b = rng.choice(names), rng.choice(names)
    return f"{a} {'=' if rng.random() < 0.5 else '~='} {b}"


def _random_body(rng: random.Random, scope, preds, funcs) -> str:
    a = _random_atom(rng, scope, preds, funcs)
    roll = rng.random()
    if roll < 0.35:
        return a
    if roll < 0.5:
        return f"~{a}"
    b = _random_atom(rng, scope, preds, funcs)
    op = rng.choice(["&", "|", "=>"])
    return f"{a} {op} {b}"


def _random_sentence(rng: random.Random, types, sizes, preds, funcs) -> str:
    roll = rng.random()
    if roll < 0.3:
        ty = rng.choice(types)
        inner = _random_atom(rng, [("y", ty)], preds, funcs)
        op = rng.choice(["=", "=<", ">="])
        k = rng.randint(0, sizes[ty])
        return f"#{{y in {ty} : {inner}}} {op} {k}."
    nvars = rng.choice([1, 1, 2])
    binders = []
    scope = []
    for i in range(nvars):
        ty = rng.choice(types)
        binders.append(f"x{i+1} in {ty}")
        scope.append((f"x{i+1}", ty))
    q = rng.choice(["!", "?"])
    body = _random_body(rng, scope, preds, funcs)
    return f"{q}{', '.join(binders)}: {body}."


def random_problem(rng: random.Random) -> str:
    """A tiny random problem: 1-2 fixed types of size 1-3, at most two
    symbols of arity at most 2, and 1-2 sentences with one quantifier or
    aggregate each. Small enough for exhaustive model search."""
    ntypes = rng.choice([1, 2, 2])
    types = [f"T{i+1}" for i in range(ntypes)]
    sizes = {t: rng.randint(1, 3) for t in types}
    lines = [f"type {t} size {sizes[t]}" for t in types]

    funcs = {}
    if rng.random() < 0.5:
        a, r = rng.choice(types), rng.choice(types)
        funcs["f"] = ((a,), r)

    preds = {}
    for i in range(rng.randint(1, 2 - len(funcs))):
        arity = rng.choice([1, 1, 2])
        sig = tuple(rng.choice(types) for _ in range(arity))
        preds[f"p{i+1}"] = sig

    for p, sig in preds.items():
        lines.append(f"pred {p}({', '.join(sig)})")
    for f, (args, res) in funcs.items():
        lines.append(f"func {f}({', '.join(args)}) -> {res}")

    lines.append("theory {")
    for _ in range(rng.randint(1, 2)):
        lines.append("  " + _random_sentence(rng, types, sizes, preds, funcs))
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- random regular lifted structures (for expansion round-trips)

_COPRIME_POOL = (2, 3, 5)


def random_regular_structure(rng: random.Random) -> LiftedStructure:
    """A random lifted structure whose functions all pass the
    sufficient regularity test: multiplicities are 1 or globally
    distinct small primes (so every tuple is regular) and every image's
    multiplicity divides its argument tuple's."""
    ntypes = rng.choice([1, 2, 2])
    types = {}
    mul = {}
    pool = list(_COPRIME_POOL)
    rng.shuffle(pool)
    for i in range(ntypes):
        t = f"T{i+1}"
        elems = tuple(f"{t.lower()}{j+1}" for j in range(rng.randint(1, 3)))
        types[t] = elems
        for j, e in enumerate(elems):
            if j == 0 or not pool or rng.random() < 0.4:
                mul[e] = 1  # every type keeps a multiplicity-1 element
            else:
                mul[e] = pool.pop()

    tnames = list(types)
    preds = {}
    for i in range(rng.randint(0, 2)):
        arity = rng.choice([1, 2])
        sig = tuple(rng.choice(tnames) for _ in range(arity))
        universe = list(itertools.product(*(types[t] for t in sig)))
        chosen = frozenset(tup for tup in universe if rng.random() < 0.4)
        preds[f"p{i+1}"] = chosen

    funcs = {}
    for i in range(rng.randint(0, 2)):
        # repeated types in one signature would put (e, e) tuples in the
        # domain, and those are irregular whenever mul(e) > 1
        if len(tnames) >= 2 and rng.random() < 0.4:
            sig = tuple(rng.sample(tnames, 2))
        else:
            sig = (rng.choice(tnames),)
        res = rng.choice(tnames)
        graph = {}
        for tup in itertools.product(*(types[t] for t in sig)):
            tm = 1
            for e in tup:
                tm *= mul[e]
            candidates = [e for e in types[res] if tm % mul[e] == 0]
            graph[tup] = rng.choice(candidates)
        funcs[f"f{i+1}"] = graph

    return LiftedStructure(types, mul, preds, funcs)
