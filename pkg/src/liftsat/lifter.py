"""Translation of sentences to equisatisfiable lifted sentences.

Over a lifted structure each element carries a multiplicity, and the
translation chi() rewrites a sentence so that its truth over the lifted
structure coincides with the original's truth over the expansion:

  * quantifiers acquire a 0 < Mul(x..) guard (tuples with a vanished
    element don't exist in the expansion);
  * a sum is decompressed by the factor Mul(x..) — each lifted tuple
    stands for that many concrete tuples;
  * when the filter leads with an atom p(t.., s) whose tuple part uses
    only bound variables and whose last argument is free of them, the
    sum ranges over the atom's orbit instead, giving the finer factor
        Mul(x..) * Lcm(t.., s) / (Lcm(t..) * mul(s))
    and for a leading *equality* t = s the factor collapses to
        Mul(x..) / mul(s)                                   (exact);
  * every other (non-special) predicate or element-equality atom emits
    a regularity condition
        RC: !x..: atom => Mul(x..) = Lcm(x..) | Mul(args) = Lcm(args)
    (trivially-true RCs — at most one non-integer component on both
    sides — are dropped);
  * per function f: f1 (!x..: Mul(x..) = Lcm(x..) over f's argument
    types) and f2 (!x..: mul(f(x..)) divides Mul(x..)) make function
    interpretations expand losslessly;
  * each fixed type contributes an extent sentence sum mul(x) = n.

Divisions produced here are exact by construction (see grounding), and
all multiplicity arithmetic lives in the integer theory.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (INT, Arith, BoolLit, Card, Compare, Connective, Divides,
                     ExactDiv, Formula, FuncApp, IntLit, Not, PredApp,
                     Problem, Quant, SumAgg, Term, Var, binder_types,
                     conjoin, conjuncts, eligible_special_atom, fmt_formula,
                     free_vars, prepare, term_type, walk)


class TranslateError(Exception):
    pass


# ---------------------------------------------------------------------------
# multiplicity metadata builders

def mul_term(t: Term) -> Term:
    """mul of a term's value: 1 for integers."""
    if term_type(t) == INT:
        return IntLit(1)
    return FuncApp("mul", (t,), INT)


def meta_mul(terms) -> Term:
    """Mul(t..): product of the elements' multiplicities."""
    factors = [mul_term(t) for t in terms if term_type(t) != INT]
    if not factors:
        return IntLit(1)
    out = factors[0]
    for f in factors[1:]:
        out = Arith("*", out, f)
    return out


def meta_lcm(terms) -> Term:
    """Lcm(t..): least common multiple of the multiplicities."""
    factors = [mul_term(t) for t in terms if term_type(t) != INT]
    if not factors:
        return IntLit(1)
    out = factors[0]
    for f in factors[1:]:
        out = FuncApp("lcm", (out, f), INT)
    return out


def _binder_vars(binders):
    return [Var(n, ty) for n, ty in binders]


def mul_guard(binders) -> Formula:
    return Compare("<", IntLit(0), meta_mul(_binder_vars(binders)))


def _mult(a: Term, b: Term) -> Term:
    if isinstance(a, IntLit) and a.value == 1:
        return b
    if isinstance(b, IntLit) and b.value == 1:
        return a
    return Arith("*", a, b)


def _product(factors) -> Term:
    factors = [f for f in factors if not (isinstance(f, IntLit) and f.value == 1)]
    if not factors:
        return IntLit(1)
    out = factors[0]
    for f in factors[1:]:
        out = Arith("*", out, f)
    return out


def _cancel(num: list, den: list):
    """Multiset-cancel syntactically identical factors. Sound here: every
    factor is positive whenever the enclosing filter holds (the 0<Mul
    guard plus f1/f2), and the division is only evaluated under it."""
    remaining = list(den)
    out_num = []
    for f in num:
        if f in remaining:
            remaining.remove(f)
        else:
            out_num.append(f)
    return out_num, remaining


def _factored(num: list, den: list) -> Term:
    num, den = _cancel(num, den)
    if not den:
        return _product(num)
    return ExactDiv(_product(num), _product(den))


# ---------------------------------------------------------------------------
# lifted sentences

@dataclass(frozen=True)
class LiftedItem:
    label: str
    formula: Formula
    rule: str      # forall | forall2 | exists | exists2 | sum | sumf2 |
                   # sumeq | extent | rc | f1 | f2
    origin: str    # "sentence <i>" | "type <T>" | "function <f>"
    types: tuple   # types for unsat-core attribution


@dataclass(frozen=True)
class LiftedSentence:
    problem: Problem      # original (as parsed)
    prepared: Problem     # desugared + normalized
    items: tuple          # LiftedItem, in label order
    rc_routed: int        # non-special atom occurrences that produced an RC
                          # (before trivial-RC dropping)

    def by_rule(self, *rules):
        return [it for it in self.items if it.rule in rules]

    def theory_items(self):
        return [it for it in self.items
                if it.rule not in ("extent", "rc", "f1", "f2")]

    def formulas(self):
        return [it.formula for it in self.items]


def _types_used(f: Formula) -> tuple:
    out = set(binder_types(f))
    for n in walk(f):
        if isinstance(n, (Var, FuncApp)) and term_type(n) != INT:
            out.add(term_type(n))
    return tuple(sorted(out))


class _Translator:
    def __init__(self, problem: Problem):
        self.problem = problem
        self.rcs: list = []
        self.rc_routed = 0
        self._rc_seen = set()

    # -- regularity conditions

    def _trivial_eq(self, terms) -> bool:
        """Mul(terms) = Lcm(terms) holds by construction?"""
        nonint = [t for t in terms if term_type(t) != INT]
        return len(nonint) <= 1

    def rc_for_atom(self, atom: Formula, args) -> None:
        """Collect RC(atom): !x..: atom => Mul(x)=Lcm(x) | Mul(args)=Lcm(args)."""
        self.rc_routed += 1
        fv = free_vars(atom)
        var_terms = [Var(n, ty) for n, ty in fv.items()]
        if self._trivial_eq(var_terms) or self._trivial_eq(args):
            return
        d1 = Compare("=", meta_mul(var_terms), meta_lcm(var_terms))
        d2 = Compare("=", meta_mul(args), meta_lcm(args))
        body = d1 if d1 == d2 else Connective("|", d1, d2)
        rc = Connective("=>", atom, body)
        if fv:
            rc = Quant("forall", tuple(fv.items()), rc)
        if rc not in self._rc_seen:
            self._rc_seen.add(rc)
            self.rcs.append(rc)

    # -- terms

    def xt(self, t: Term) -> Term:
        if isinstance(t, (Var, IntLit)):
            return t
        if isinstance(t, FuncApp):
            return FuncApp(t.name, tuple(self.xt(a) for a in t.args), t.ty, t.pos)
        if isinstance(t, Arith):
            return Arith(t.op, self.xt(t.left), self.xt(t.right), t.pos)
        if isinstance(t, SumAgg):
            return self.x_sum(t)
        if isinstance(t, Card):
            raise TranslateError("cardinality not desugared before translation")
        raise TranslateError(f"unexpected term {t!r}")

    def x_sum(self, agg: SumAgg) -> Term:
        bound = {n for n, _ in agg.binders}
        xvars = _binder_vars(agg.binders)
        cs = conjuncts(agg.filt)
        elig = eligible_special_atom(cs[0], bound)
        guard = mul_guard(agg.binders)

        if elig is not None:
            tbar, s = elig
            lead = self.x_lead_atom(cs[0])
            rest = [self.xf(c) for c in cs[1:]]
            filt = conjoin([guard, lead] + rest)
            xt_tbar = [self.xt(t) for t in tbar]
            xs = self.xt(s)
            if isinstance(cs[0], Compare):
                # leading equality: exact per-term factor Mul(x..)/mul(s)
                factor = _factored([mul_term(v) for v in xvars], [mul_term(xs)])
                rule = "sumeq"
            else:
                factor = _factored(
                    [mul_term(v) for v in xvars] + [meta_lcm(xt_tbar + [xs])],
                    [meta_lcm(xt_tbar), mul_term(xs)])
                rule = "sumf2"
            body = _mult(factor, self.xt(agg.body))
            self.last_rule = rule
            return SumAgg(agg.binders, filt, body, agg.pos)

        filt = conjoin([guard, self.xf(agg.filt)])
        body = _mult(meta_mul(xvars), self.xt(agg.body))
        self.last_rule = "sum"
        return SumAgg(agg.binders, filt, body, agg.pos)

    def x_lead_atom(self, atom: Formula) -> Formula:
        """Translate a special-rule leading atom: arguments lifted, no RC."""
        if isinstance(atom, PredApp):
            return PredApp(atom.name, tuple(self.xt(a) for a in atom.args), atom.pos)
        if isinstance(atom, Compare):
            return Compare(atom.op, self.xt(atom.left), self.xt(atom.right), atom.pos)
        raise TranslateError(f"not an atom: {atom!r}")

    # -- formulas

    def xf(self, f: Formula) -> Formula:
        if isinstance(f, BoolLit):
            return f
        if isinstance(f, PredApp):
            out = PredApp(f.name, tuple(self.xt(a) for a in f.args), f.pos)
            self.rc_for_atom(out, list(out.args))
            return out
        if isinstance(f, Compare):
            l, r = self.xt(f.left), self.xt(f.right)
            out = Compare(f.op, l, r, f.pos)
            if f.op in ("=", "~=") and term_type(f.left) != INT:
                # element (in)equality behaves like an atom: RC over both sides
                self.rc_for_atom(Compare("=", l, r, f.pos), [l, r])
            return out
        if isinstance(f, Connective):
            return Connective(f.op, self.xf(f.left), self.xf(f.right), f.pos)
        if isinstance(f, Not):
            return Not(self.xf(f.sub), f.pos)
        if isinstance(f, Quant):
            return self.x_quant(f)
        raise TranslateError(f"unexpected formula {f!r}")

    def x_quant(self, q: Quant) -> Formula:
        bound = {n for n, _ in q.binders}
        guard = mul_guard(q.binders)

        if q.kind == "forall":
            if isinstance(q.body, Connective) and q.body.op == "=>":
                cs = conjuncts(q.body.left)
                if eligible_special_atom(cs[0], bound) is not None:
                    lead = self.x_lead_atom(cs[0])
                    rest = [self.xf(c) for c in cs[1:]]
                    cons = self.xf(q.body.right)
                    body = Connective("=>", conjoin([guard, lead] + rest), cons)
                    self.last_rule = "forall2"
                    return Quant("forall", q.binders, body, q.pos)
            body = self.xf(q.body)
            self.last_rule = "forall"
            return Quant("forall", q.binders,
                         Connective("=>", guard, body), q.pos)

        cs = conjuncts(q.body)
        if eligible_special_atom(cs[0], bound) is not None:
            lead = self.x_lead_atom(cs[0])
            rest = [self.xf(c) for c in cs[1:]]
            self.last_rule = "exists2"
            return Quant("exists", q.binders, conjoin([guard, lead] + rest), q.pos)
        body = self.xf(q.body)
        self.last_rule = "exists"
        return Quant("exists", q.binders, conjoin([guard, body]), q.pos)

    def top_rule(self, f: Formula) -> str:
        """Rule name to report for a whole sentence: the rule of the
        outermost quantifier/aggregate (the last one closed during the
        depth-first translation), or the node kind for flat sentences."""
        if isinstance(f, (Quant, SumAgg)) or any(
                isinstance(n, SumAgg) for n in walk(f)):
            return self.last_rule
        return {
            PredApp: "atom", Compare: "compare", Connective: "connective",
            Not: "not", BoolLit: "copy",
        }.get(type(f), "copy")


def translate(problem: Problem) -> LiftedSentence:
    """Translate a type-checked problem into its lifted sentence.

    The result's items carry labels (s<k> theory, ext_<T> extents,
    rc<k>, f1_<f>, f2_<f>) used verbatim by grounding and unsat-core
    attribution.
    """
    prepared = prepare(problem)
    tr = _Translator(prepared)
    items = []

    for i, s in enumerate(prepared.sentences):
        tr.last_rule = "copy"
        out = tr.xf(s)
        items.append(LiftedItem(f"s{i}", out, tr.top_rule(out), f"sentence {i}",
                                _types_used(out)))

    for t in prepared.vocabulary.types:
        n = prepared.cardinalities[t]
        if n is None:
            continue
        x = Var("x", t)
        ext = Compare("=", SumAgg((("x", t),), BoolLit(True), mul_term(x)),
                      IntLit(n))
        items.append(LiftedItem(f"ext_{t}", ext, "extent", f"type {t}", (t,)))

    for k, rc in enumerate(tr.rcs):
        items.append(LiftedItem(f"rc{k}", rc, "rc", "regularity",
                                _types_used(rc)))

    for fname, (argtypes, res) in prepared.vocabulary.functions.items():
        binders = tuple((f"x{i+1}", t) for i, t in enumerate(argtypes))
        xs = _binder_vars(binders)
        if len(argtypes) >= 1:
            f1 = Quant("forall", binders,
                       Compare("=", meta_mul(xs), meta_lcm(xs)))
            items.append(LiftedItem(f"f1_{fname}", f1, "f1",
                                    f"function {fname}", tuple(sorted(set(argtypes)))))
        if res != INT:
            app = FuncApp(fname, tuple(xs), res)
            f2: Formula = Divides(mul_term(app), meta_mul(xs))
            if binders:
                f2 = Quant("forall", binders, f2)
            items.append(LiftedItem(f"f2_{fname}", f2, "f2",
                                    f"function {fname}",
                                    tuple(sorted(set(argtypes) | {res}))))

    return LiftedSentence(problem, prepared, tuple(items), tr.rc_routed)


def fmt_lifted(ls: LiftedSentence) -> str:
    """Human-readable listing: one sentence per line with its rule."""
    lines = []
    for it in ls.items:
        lines.append(f"// {it.label}  rule: {it.rule}  ({it.origin})")
        lines.append(fmt_formula(it.formula) + ".")
    return "\n".join(lines) + "\n"


def instantiate_trivial(f: Formula) -> Formula:
    """Replace mul(.) by 1 and simplify the lifted operators away; the
    result is the concrete-semantics reading of a lifted formula (test
    helper for the mul==1 equivalence)."""
    def t(n):
        if isinstance(n, FuncApp) and n.name == "mul":
            return IntLit(1)
        if isinstance(n, FuncApp) and n.name == "lcm":
            return IntLit(1)
        if isinstance(n, ExactDiv):
            num, den = t(n.num), t(n.den)
            if isinstance(den, IntLit) and den.value == 1:
                return num
            return ExactDiv(num, den)
        if isinstance(n, Divides):
            return BoolLit(True)
        from .syntax import _map_children
        return _map_children(n, t)
    return t(f)
