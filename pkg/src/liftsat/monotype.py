"""Collapsing a typed problem onto a single element type.

Every declared type becomes a membership predicate over one fresh
generative type; quantifiers and aggregate binders are relativized
through those predicates, and sentences are added for membership
coverage, pairwise disjointness, fixed-type extents, and function
result typing. Models of the collapsed problem convert back to typed
models by reading the membership predicates and restricting predicate
and function interpretations to well-typed tuples.

This is the baseline encoding a typed solver is compared against: it
hides the type structure from the domain-growth loop, which then has a
single domain size to search over.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .structures import ConcreteStructure
from .syntax import (INT, Arith, BoolLit, Card, Compare, Connective, Divides,
                     ExactDiv, Formula, FuncApp, IntLit, Not, PredApp,
                     Problem, Quant, SumAgg, Term, Var, Vocabulary)


@dataclass(frozen=True)
class MonoMeta:
    """How to read a collapsed model back into typed form."""
    obj: str     # the single type's name
    isa: dict    # original type -> membership predicate name


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def monotype(problem: Problem):
    """Collapse `problem` onto one generative type; returns the new
    problem and the conversion metadata."""
    voc = problem.vocabulary
    obj = _fresh("Obj", set(voc.types))
    taken = set(voc.predicates) | set(voc.functions)
    isa = {}
    for t in voc.types:
        name = _fresh(f"isa_{t}", taken)
        taken.add(name)
        isa[t] = name

    preds = {p: tuple(obj for _ in sig) for p, sig in voc.predicates.items()}
    for t in voc.types:
        preds[isa[t]] = (obj,)
    funcs = {f: (tuple(obj for _ in args), INT if res == INT else obj)
             for f, (args, res) in voc.functions.items()}
    new_voc = Vocabulary((obj,), preds, funcs)

    def isa_of(name: str, ty: str) -> Formula:
        return PredApp(isa[ty], (Var(name, obj),))

    def guard_of(binders) -> Formula:
        out = None
        for name, ty in binders:
            g = isa_of(name, ty)
            out = g if out is None else Connective("&", out, g)
        return out if out is not None else BoolLit(True)

    def rel_term(t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name, obj if t.ty != INT else INT, t.pos)
        if isinstance(t, IntLit):
            return t
        if isinstance(t, FuncApp):
            res = INT if t.ty == INT else obj
            return FuncApp(t.name, tuple(rel_term(a) for a in t.args),
                           res, t.pos)
        if isinstance(t, Arith):
            return Arith(t.op, rel_term(t.left), rel_term(t.right), t.pos)
        if isinstance(t, Card):
            bs = tuple((n, obj) for n, _ in t.binders)
            filt = Connective("&", guard_of(t.binders), rel_formula(t.filt))
            return Card(bs, filt, t.pos)
        if isinstance(t, SumAgg):
            bs = tuple((n, obj) for n, _ in t.binders)
            filt = Connective("&", guard_of(t.binders), rel_formula(t.filt))
            return SumAgg(bs, filt, rel_term(t.body), t.pos)
        if isinstance(t, ExactDiv):
            return ExactDiv(rel_term(t.num), rel_term(t.den), t.pos)
        raise TypeError(f"unexpected term {t!r}")

    def rel_formula(f: Formula) -> Formula:
        if isinstance(f, BoolLit):
            return f
        if isinstance(f, PredApp):
            return PredApp(f.name, tuple(rel_term(a) for a in f.args), f.pos)
        if isinstance(f, Compare):
            return Compare(f.op, rel_term(f.left), rel_term(f.right), f.pos)
        if isinstance(f, Connective):
            return Connective(f.op, rel_formula(f.left), rel_formula(f.right),
                              f.pos)
        if isinstance(f, Not):
            return Not(rel_formula(f.sub), f.pos)
        if isinstance(f, Divides):
            return Divides(rel_term(f.divisor), rel_term(f.dividend), f.pos)
        if isinstance(f, Quant):
            bs = tuple((n, obj) for n, _ in f.binders)
            guard = guard_of(f.binders)
            body = rel_formula(f.body)
            joined = Connective("=>" if f.kind == "forall" else "&",
                                guard, body)
            return Quant(f.kind, bs, joined, f.pos)
        raise TypeError(f"unexpected formula {f!r}")

    sentences = [rel_formula(s) for s in problem.sentences]

    x = Var("x", obj)
    cover = None
    for t in voc.types:
        g = PredApp(isa[t], (x,))
        cover = g if cover is None else Connective("|", cover, g)
    if cover is not None:
        sentences.append(Quant("forall", (("x", obj),), cover))
    for t1, t2 in itertools.combinations(voc.types, 2):
        sentences.append(Quant(
            "forall", (("x", obj),),
            Not(Connective("&", PredApp(isa[t1], (x,)),
                           PredApp(isa[t2], (x,))))))
    for t in voc.types:
        n = problem.cardinalities[t]
        if n is not None:
            sentences.append(Compare(
                "=", Card((("x", obj),), PredApp(isa[t], (x,))), IntLit(n)))
    for f, (args, res) in voc.functions.items():
        if res == INT:
            continue
        if not args:
            sentences.append(PredApp(isa[res], (FuncApp(f, (), obj),)))
            continue
        names = [f"x{i+1}" for i in range(len(args))]
        bs = tuple((n, obj) for n in names)
        ante = None
        for n, t in zip(names, args):
            g = PredApp(isa[t], (Var(n, obj),))
            ante = g if ante is None else Connective("&", ante, g)
        app = FuncApp(f, tuple(Var(n, obj) for n in names), obj)
        sentences.append(Quant("forall", bs, Connective(
            "=>", ante, PredApp(isa[res], (app,)))))

    mono = Problem(new_voc, {obj: None}, tuple(sentences))
    return mono, MonoMeta(obj, isa)


def from_monotype(problem: Problem, meta: MonoMeta,
                  mono: ConcreteStructure) -> ConcreteStructure:
    """Read a collapsed model back as a typed structure over `problem`'s
    vocabulary, restricting every interpretation to well-typed tuples."""
    voc = problem.vocabulary
    members = {t: frozenset(e for (e,) in mono.preds[meta.isa[t]])
               for t in voc.types}
    types = {t: tuple(e for e in mono.types[meta.obj] if e in members[t])
             for t in voc.types}

    def well_typed(tup, sig):
        return all(e in members[t] for e, t in zip(tup, sig))

    preds = {p: frozenset(tup for tup in mono.preds[p]
                          if well_typed(tup, sig))
             for p, sig in voc.predicates.items()}
    funcs = {f: {tup: v for tup, v in mono.funcs[f].items()
                 if well_typed(tup, args)}
             for f, (args, _) in voc.functions.items()}
    return ConcreteStructure(types, preds, funcs)
