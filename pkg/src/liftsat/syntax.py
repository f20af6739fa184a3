"""Typed first-order logic with sum and cardinality aggregates.

A problem is a vocabulary (types, predicates, functions with optional
integer result type), per-type cardinality constraints (a fixed size or
open/"generative"), and a list of closed sentences:

    type Pigeon size 10
    type Hole size 5
    pred isIn(Pigeon, Hole)
    theory {
      !h in Hole: #{p in Pigeon : isIn(p, h)} =< 2.
    }

Sentences use `!x in T:` / `?x in T:` for quantifiers, the connectives
`& | => <=> ~`, comparisons `= ~= < > =< >=`, integer arithmetic
`+ - * /` (Euclidean division), cardinality `#{x in T : phi}` and sum
`sum{{x in T : phi : t}}` aggregates.

The module also hosts the two source-to-source passes used before
translation to lifted form: `desugar_cardinality` rewrites `#` into a
sum of ones, and `normalize_for_special_rules` commutes conjunctions
(and applies the negation/quantifier dualities) so that atoms eligible
for the specialized translation rules sit in leading position.

Lifted-only node kinds (`ExactDiv`, `Divides`, the `mul`/`lcm` builtin
function applications) never appear in parsed source; they are produced
by the translation in `lifter.py` and consumed by grounding/evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

INT = "Int"

# reserved in source programs: used by the lifted output language
RESERVED_WORDS = {
    "type", "pred", "func", "const", "theory", "in", "size", "sum",
    "true", "false", "Int", "mul", "lcm", "divides",
}


class ProblemError(Exception):
    """Base error for parsing/typing problems; carries a source position."""

    def __init__(self, msg: str, pos: "Pos | None" = None):
        self.msg = msg
        self.pos = pos
        super().__init__(f"{pos}: {msg}" if pos else msg)


class TypingError(ProblemError):
    pass


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _pos_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# terms

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    ty: str
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class IntLit(Term):
    value: int
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class FuncApp(Term):
    """Application of a declared function/constant, or of the lifted
    builtins `mul` (unary) and `lcm` (binary, integer-valued)."""
    name: str
    args: tuple
    ty: str
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Arith(Term):
    op: str  # + - * /
    left: Term
    right: Term
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Card(Term):
    """#{x in T, ... : phi} — desugars to a sum of ones."""
    binders: tuple  # ((name, type), ...)
    filt: "Formula"
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class SumAgg(Term):
    binders: tuple
    filt: "Formula"
    body: Term
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class ExactDiv(Term):
    """Lifted-only: division known to be exact when evaluated (Table-1
    decompression factors). den=0 with num=0 yields 0."""
    num: Term
    den: Term
    pos: Optional[Pos] = _pos_field()


def term_type(t: Term) -> str:
    if isinstance(t, (Var, FuncApp)):
        return t.ty
    return INT


# ---------------------------------------------------------------------------
# formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class PredApp(Formula):
    name: str
    args: tuple
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Compare(Formula):
    op: str  # = ~= < > =< >=
    left: Term
    right: Term
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Connective(Formula):
    op: str  # & | => <=>
    left: Formula
    right: Formula
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Quant(Formula):
    kind: str  # "forall" | "exists"
    binders: tuple  # ((name, type), ...)
    body: Formula
    pos: Optional[Pos] = _pos_field()


@dataclass(frozen=True)
class Divides(Formula):
    """Lifted-only: divisor | dividend (0 divides only 0)."""
    divisor: Term
    dividend: Term
    pos: Optional[Pos] = _pos_field()


Node = Union[Term, Formula]


# ---------------------------------------------------------------------------
# vocabulary / problem

@dataclass(frozen=True)
class Vocabulary:
    types: tuple  # (name, ...)
    predicates: dict  # name -> (argtype, ...)
    functions: dict  # name -> ((argtype, ...), result type)

    def symbol_names(self):
        return set(self.types) | set(self.predicates) | set(self.functions)


@dataclass(frozen=True)
class Problem:
    vocabulary: Vocabulary
    cardinalities: dict  # type -> int (fixed) | None (generative)
    sentences: tuple  # (Formula, ...)

    def fixed_types(self):
        return [t for t in self.vocabulary.types if self.cardinalities[t] is not None]

    def generative_types(self):
        return [t for t in self.vocabulary.types if self.cardinalities[t] is None]


# ---------------------------------------------------------------------------
# traversal helpers

def children(node: Node) -> Iterator[Node]:
    if isinstance(node, (Var, IntLit, BoolLit)):
        return
    elif isinstance(node, FuncApp):
        yield from node.args
    elif isinstance(node, Arith):
        yield node.left
        yield node.right
    elif isinstance(node, Card):
        yield node.filt
    elif isinstance(node, SumAgg):
        yield node.filt
        yield node.body
    elif isinstance(node, ExactDiv):
        yield node.num
        yield node.den
    elif isinstance(node, PredApp):
        yield from node.args
    elif isinstance(node, Compare):
        yield node.left
        yield node.right
    elif isinstance(node, Connective):
        yield node.left
        yield node.right
    elif isinstance(node, Not):
        yield node.sub
    elif isinstance(node, Quant):
        yield node.body
    elif isinstance(node, Divides):
        yield node.divisor
        yield node.dividend
    else:
        raise TypeError(f"unknown node {node!r}")


def walk(node: Node) -> Iterator[Node]:
    yield node
    for c in children(node):
        yield from walk(c)


def free_vars(node: Node) -> dict:
    """Free variables of a term/formula, name -> type, in first-occurrence
    order (deterministic; insertion-ordered dict)."""
    out: dict = {}

    def go(n: Node, bound: frozenset):
        if isinstance(n, Var):
            if n.name not in bound and n.name not in out:
                out[n.name] = n.ty
        elif isinstance(n, (Card, SumAgg, Quant)):
            inner = bound | {name for name, _ in n.binders}
            for c in children(n):
                go(c, inner)
        else:
            for c in children(n):
                go(c, bound)

    go(node, frozenset())
    return out


def binder_types(node: Node) -> set:
    """All types bound by quantifiers/aggregates anywhere inside."""
    out = set()
    for n in walk(node):
        if isinstance(n, (Quant, Card, SumAgg)):
            out.update(ty for _, ty in n.binders)
    return out


def conjuncts(f: Formula) -> list:
    if isinstance(f, Connective) and f.op == "&":
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def conjoin(fs: list) -> Formula:
    if not fs:
        return BoolLit(True)
    out = fs[0]
    for f in fs[1:]:
        out = Connective("&", out, f)
    return out


# ---------------------------------------------------------------------------
# pretty printing (source surface syntax; inverse of the parser)

_CMP_OPS = {"=", "~=", "<", ">", "=<", ">="}

# formula precedence: <=> 1, => 2, | 3, & 4, ~/quant/atom 5
_FPREC = {"<=>": 1, "=>": 2, "|": 3, "&": 4}
# term precedence: +- 1, */ 2, atom 3
_TPREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def fmt_binders(binders) -> str:
    return ", ".join(f"{n} in {t}" for n, t in binders)


def fmt_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, FuncApp):
        if not t.args:
            return t.name
        return f"{t.name}({', '.join(fmt_term(a) for a in t.args)})"
    if isinstance(t, Arith):
        p = _TPREC[t.op]
        s = f"{fmt_term(t.left, p)} {t.op} {fmt_term(t.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(t, Card):
        return f"#{{{fmt_binders(t.binders)} : {fmt_formula(t.filt)}}}"
    if isinstance(t, SumAgg):
        return (f"sum{{{{{fmt_binders(t.binders)} : {fmt_formula(t.filt)}"
                f" : {fmt_term(t.body)}}}}}")
    if isinstance(t, ExactDiv):
        p = _TPREC["/"]
        s = f"{fmt_term(t.num, p)} / {fmt_term(t.den, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"unknown term {t!r}")


def fmt_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, PredApp):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(fmt_term(a) for a in f.args)})"
    if isinstance(f, Compare):
        return f"{fmt_term(f.left, 1)} {f.op} {fmt_term(f.right, 1)}"
    if isinstance(f, Connective):
        p = _FPREC[f.op]
        # => is right-associative, the rest left-associative
        lp, rp = (p + 1, p) if f.op == "=>" else (p, p + 1)
        s = f"{fmt_formula(f.left, lp)} {f.op} {fmt_formula(f.right, rp)}"
        return f"({s})" if p < prec else s
    if isinstance(f, Not):
        return f"~{fmt_formula(f.sub, 6)}"
    if isinstance(f, Quant):
        mark = "!" if f.kind == "forall" else "?"
        s = f"{mark}{fmt_binders(f.binders)}: {fmt_formula(f.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, Divides):
        return f"divides({fmt_term(f.divisor)}, {fmt_term(f.dividend)})"
    raise TypeError(f"unknown formula {f!r}")


def fmt_problem(p: Problem) -> str:
    lines = []
    for t in p.vocabulary.types:
        n = p.cardinalities[t]
        lines.append(f"type {t}" + (f" size {n}" if n is not None else ""))
    for name, args in p.vocabulary.predicates.items():
        lines.append(f"pred {name}({', '.join(args)})")
    for name, (args, res) in p.vocabulary.functions.items():
        if args:
            lines.append(f"func {name}({', '.join(args)}) -> {res}")
        else:
            lines.append(f"const {name} -> {res}")
    lines.append("theory {")
    for s in p.sentences:
        lines.append(f"  {fmt_formula(s)}.")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# typecheck

def typecheck(problem: Problem) -> None:
    """Validate a parsed problem. Raises TypingError on the first fault.

    Checks: symbol arities and argument types, Int never used as an
    argument or quantified/aggregated range, comparison operand types,
    aggregate bodies integer-typed, sentences closed.
    """
    voc = problem.vocabulary
    declared = set(voc.types)

    for name, args in voc.predicates.items():
        for a in args:
            if a == INT:
                raise TypingError(f"predicate {name}: Int is not allowed as an argument type")
            if a not in declared:
                raise TypingError(f"predicate {name}: unknown type {a}")
    for name, (args, res) in voc.functions.items():
        for a in args:
            if a == INT:
                raise TypingError(f"function {name}: Int is not allowed as an argument type")
            if a not in declared:
                raise TypingError(f"function {name}: unknown type {a}")
        if res != INT and res not in declared:
            raise TypingError(f"function {name}: unknown result type {res}")
    for t, n in problem.cardinalities.items():
        if n is not None and n < 0:
            raise TypingError(f"type {t}: negative cardinality")

    def check_binders(binders, pos):
        for _, ty in binders:
            if ty == INT:
                raise TypingError("cannot quantify or aggregate over Int", pos)
            if ty not in declared:
                raise TypingError(f"unknown type {ty}", pos)

    def term(t: Term, env: dict) -> str:
        if isinstance(t, Var):
            if t.name not in env:
                raise TypingError(f"unbound variable {t.name}", t.pos)
            if env[t.name] != t.ty:
                raise TypingError(f"variable {t.name} annotated {t.ty}, bound as {env[t.name]}", t.pos)
            return t.ty
        if isinstance(t, IntLit):
            return INT
        if isinstance(t, FuncApp):
            if t.name == "mul" or t.name == "lcm":
                # lifted builtins: integer-valued
                for a in t.args:
                    term(a, env)
                return INT
            if t.name not in voc.functions:
                raise TypingError(f"unknown function {t.name}", t.pos)
            sig_args, sig_res = voc.functions[t.name]
            if len(t.args) != len(sig_args):
                raise TypingError(f"function {t.name} expects {len(sig_args)} arguments", t.pos)
            for a, want in zip(t.args, sig_args):
                got = term(a, env)
                if got != want:
                    raise TypingError(f"function {t.name}: argument of type {got}, expected {want}", t.pos)
            if t.ty != sig_res:
                raise TypingError(f"function {t.name} result annotated {t.ty}", t.pos)
            return sig_res
        if isinstance(t, Arith):
            for side in (t.left, t.right):
                if term(side, env) != INT:
                    raise TypingError(f"arithmetic over non-integer operand", t.pos)
            return INT
        if isinstance(t, Card):
            check_binders(t.binders, t.pos)
            inner = dict(env)
            inner.update({n: ty for n, ty in t.binders})
            formula(t.filt, inner)
            return INT
        if isinstance(t, SumAgg):
            check_binders(t.binders, t.pos)
            inner = dict(env)
            inner.update({n: ty for n, ty in t.binders})
            formula(t.filt, inner)
            if term(t.body, inner) != INT:
                raise TypingError("aggregate body is not integer-typed", t.pos)
            return INT
        if isinstance(t, ExactDiv):
            for side in (t.num, t.den):
                if term(side, env) != INT:
                    raise TypingError("exact division over non-integer operand", t.pos)
            return INT
        raise TypingError(f"unexpected term {t!r}")

    def formula(f: Formula, env: dict) -> None:
        if isinstance(f, BoolLit):
            return
        if isinstance(f, PredApp):
            if f.name not in voc.predicates:
                raise TypingError(f"unknown predicate {f.name}", f.pos)
            sig = voc.predicates[f.name]
            if len(f.args) != len(sig):
                raise TypingError(f"predicate {f.name} expects {len(sig)} arguments", f.pos)
            for a, want in zip(f.args, sig):
                got = term(a, env)
                if got != want:
                    raise TypingError(f"predicate {f.name}: argument of type {got}, expected {want}", f.pos)
            return
        if isinstance(f, Compare):
            lt, rt = term(f.left, env), term(f.right, env)
            if lt != rt:
                raise TypingError(f"comparison between {lt} and {rt}", f.pos)
            if f.op not in ("=", "~=") and lt != INT:
                raise TypingError(f"ordered comparison over non-integers", f.pos)
            return
        if isinstance(f, Connective):
            formula(f.left, env)
            formula(f.right, env)
            return
        if isinstance(f, Not):
            formula(f.sub, env)
            return
        if isinstance(f, Quant):
            check_binders(f.binders, f.pos)
            inner = dict(env)
            inner.update({n: ty for n, ty in f.binders})
            formula(f.body, inner)
            return
        if isinstance(f, Divides):
            for side in (f.divisor, f.dividend):
                if term(side, env) != INT:
                    raise TypingError("divides over non-integer operand", f.pos)
            return
        raise TypingError(f"unexpected formula {f!r}")

    for s in problem.sentences:
        fv = free_vars(s)
        if fv:
            raise TypingError(f"sentence has free variables: {', '.join(fv)}")
        formula(s, {})


# ---------------------------------------------------------------------------
# desugaring and normalization

def _map_children(node: Node, fn) -> Node:
    """Rebuild node with fn applied to each child formula/term."""
    if isinstance(node, (Var, IntLit, BoolLit)):
        return node
    if isinstance(node, FuncApp):
        return FuncApp(node.name, tuple(fn(a) for a in node.args), node.ty, node.pos)
    if isinstance(node, Arith):
        return Arith(node.op, fn(node.left), fn(node.right), node.pos)
    if isinstance(node, Card):
        return Card(node.binders, fn(node.filt), node.pos)
    if isinstance(node, SumAgg):
        return SumAgg(node.binders, fn(node.filt), fn(node.body), node.pos)
    if isinstance(node, ExactDiv):
        return ExactDiv(fn(node.num), fn(node.den), node.pos)
    if isinstance(node, PredApp):
        return PredApp(node.name, tuple(fn(a) for a in node.args), node.pos)
    if isinstance(node, Compare):
        return Compare(node.op, fn(node.left), fn(node.right), node.pos)
    if isinstance(node, Connective):
        return Connective(node.op, fn(node.left), fn(node.right), node.pos)
    if isinstance(node, Not):
        return Not(fn(node.sub), node.pos)
    if isinstance(node, Quant):
        return Quant(node.kind, node.binders, fn(node.body), node.pos)
    if isinstance(node, Divides):
        return Divides(fn(node.divisor), fn(node.dividend), node.pos)
    raise TypeError(f"unknown node {node!r}")


def desugar_cardinality(node: Node) -> Node:
    """Rewrite every #{x in T : phi} into sum{{x in T : phi : 1}}."""
    node = _map_children(node, desugar_cardinality)
    if isinstance(node, Card):
        return SumAgg(node.binders, node.filt, IntLit(1), node.pos)
    return node


def eligible_special_atom(f: Formula, bound: set):
    """If f can serve as the leading atom of a specialized Table-1 rule
    with bound variables `bound`, return (tuple_args, last_arg); else None.

    Eligibility: f is p(t1..tk, s) with k >= 1 (or an element equality,
    either orientation) where vars(t1..tk) are all bound and vars(s) are
    all free of `bound`.
    """
    def ok(ts, s):
        tv = set()
        for t in ts:
            tv |= set(free_vars(t))
        return tv <= bound and not (set(free_vars(s)) & bound)

    if isinstance(f, PredApp) and len(f.args) >= 1:
        if ok(f.args[:-1], f.args[-1]):
            return f.args[:-1], f.args[-1]
        return None
    if isinstance(f, Compare) and f.op == "=" and term_type(f.left) != INT:
        if ok((f.left,), f.right):
            return (f.left,), f.right
        if ok((f.right,), f.left):
            return (f.right,), f.left
        return None
    return None


def _front_eligible(fs: list, bound: set) -> list:
    """Stable-move the first special-eligible conjunct to the front."""
    for i, f in enumerate(fs):
        if eligible_special_atom(f, bound) is not None:
            return [fs[i]] + fs[:i] + fs[i + 1:]
    return fs


def normalize_for_special_rules(node: Node) -> Node:
    """Commute conjunctions (in existential bodies, universal-implication
    antecedents and aggregate filters) so that a specialized-rule-eligible
    atom leads, and apply the ~?/~! dualities when doing so exposes a
    match. Only &-commutativity/associativity and the quantifier dualities
    are used, so the result is logically equivalent. Idempotent.
    """
    n = node

    if isinstance(n, Not) and isinstance(n.sub, Quant):
        q = n.sub
        bound = {name for name, _ in q.binders}
        if q.kind == "exists":
            cs = conjuncts(q.body)
            if any(eligible_special_atom(c, bound) for c in cs):
                cs = _front_eligible(cs, bound)
                rest = conjoin(cs[1:]) if len(cs) > 1 else None
                body = Connective("=>", cs[0], Not(rest)) if rest is not None else Not(cs[0])
                return normalize_for_special_rules(Quant("forall", q.binders, body, q.pos))
        elif q.kind == "forall" and isinstance(q.body, Connective) and q.body.op == "=>":
            ante = conjuncts(q.body.left)
            if any(eligible_special_atom(c, bound) for c in ante):
                body = conjoin(ante + [Not(q.body.right)])
                return normalize_for_special_rules(Quant("exists", q.binders, body, q.pos))

    n = _map_children(n, normalize_for_special_rules)

    if isinstance(n, Quant):
        bound = {name for name, _ in n.binders}
        if n.kind == "exists":
            cs = _front_eligible(conjuncts(n.body), bound)
            return Quant(n.kind, n.binders, conjoin(cs), n.pos)
        if isinstance(n.body, Connective) and n.body.op == "=>":
            ante = _front_eligible(conjuncts(n.body.left), bound)
            body = Connective("=>", conjoin(ante), n.body.right, n.body.pos)
            return Quant(n.kind, n.binders, body, n.pos)
        return n
    if isinstance(n, SumAgg):
        bound = {name for name, _ in n.binders}
        cs = _front_eligible(conjuncts(n.filt), bound)
        return SumAgg(n.binders, conjoin(cs), n.body, n.pos)
    return n


def prepare(problem: Problem) -> Problem:
    """Desugar and normalize every sentence (idempotent)."""
    sents = tuple(
        normalize_for_special_rules(desugar_cardinality(s)) for s in problem.sentences
    )
    return Problem(problem.vocabulary, problem.cardinalities, sents)
