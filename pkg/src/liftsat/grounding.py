"""Grounding lifted sentences over a candidate lifted domain into
SMT-LIB 2 (QF_NIA) scripts.

Per candidate domain element e there is an integer variable m_<e>
(its multiplicity, 0 = unused) bounded by the type's cap (the fixed
cardinality, or max_mul for generative types; mul_cap=1 yields the
baseline concrete semantics where m_e degenerates to a used-element
flag). Per predicate and argument tuple there is a Bool; per function
and argument tuple an integer selector coding the codomain element (or
holding the value directly for Int-valued functions).

Quantifiers and sums expand over the finite domain. lcm terms are
grounded through a definitional interpretation table over the operands'
value bounds; exact divisions introduce a fresh quotient variable
pinned under the innermost enclosing sum-filter guard (the division is
exact only where the filter holds — pinning it unconditionally would
constrain dead branches). Every assertion carries a :named label; the
label-to-provenance map drives unsat-core attribution in the search
loop.

Scripts are deterministic: identical inputs produce byte-identical
text.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

from .lifter import LiftedSentence
from .syntax import (INT, Arith, BoolLit, Compare, Connective, Divides,
                     ExactDiv, Formula, FuncApp, IntLit, Not, PredApp, Quant,
                     SumAgg, Term, Var, walk)

MAX_MUL_DEFAULT = 2**31 - 1


class GroundingError(Exception):
    pass


class DecodeError(Exception):
    pass


@dataclass(frozen=True)
class GroundOptions:
    max_mul: int = MAX_MUL_DEFAULT   # multiplicity cap for generative types
    lcm_bound: int = 64              # max type cap when lcm tables are needed
    mul_cap: int | None = None       # extra cap on every mul (1 = concrete)
    table_limit: int = 200_000       # max entries in one lcm table


@dataclass(frozen=True)
class LiftedDomain:
    """Candidate lifted domain: an ordered element tuple per type."""
    elements: dict  # type -> (elem, ...)

    @staticmethod
    def empty(types) -> "LiftedDomain":
        return LiftedDomain({t: () for t in types})

    @staticmethod
    def of_sizes(sizes: dict) -> "LiftedDomain":
        return LiftedDomain({t: tuple(f"{t}_{i}" for i in range(1, n + 1))
                             for t, n in sizes.items()})

    def sizes(self) -> dict:
        return {t: len(es) for t, es in self.elements.items()}

    def grown(self, type_name: str, count: int) -> "LiftedDomain":
        es = self.elements[type_name]
        new = tuple(f"{type_name}_{i}" for i in range(len(es) + 1, count + 1))
        out = dict(self.elements)
        out[type_name] = es + new
        return LiftedDomain(out)


@dataclass(frozen=True)
class Provenance:
    kind: str    # theory | extent | rc | f1 | f2 | bound | domain | def
    rule: str
    origin: str
    types: tuple


@dataclass
class GroundedProblem:
    script: str
    name_map: dict   # assertion label -> Provenance
    var_map: dict    # variable layout, see decode_model
    domain: LiftedDomain
    options: GroundOptions


# -- small SMT builders with constant folding


def _and(args) -> str:
    args = [a for a in args if a != "true"]
    if any(a == "false" for a in args):
        return "false"
    if not args:
        return "true"
    if len(args) == 1:
        return args[0]
    return f"(and {' '.join(args)})"


def _or(args) -> str:
    args = [a for a in args if a != "false"]
    if any(a == "true" for a in args):
        return "true"
    if not args:
        return "false"
    if len(args) == 1:
        return args[0]
    return f"(or {' '.join(args)})"


def _not(a: str) -> str:
    if a == "true":
        return "false"
    if a == "false":
        return "true"
    return f"(not {a})"


def _ite(c: str, a: str, b: str) -> str:
    if c == "true":
        return a
    if c == "false":
        return b
    if a == b:
        return a
    return f"(ite {c} {a} {b})"


def _add(args) -> str:
    args = [a for a in args if a != "0"]
    if not args:
        return "0"
    if len(args) == 1:
        return args[0]
    return f"(+ {' '.join(args)})"


def _int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _san(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", name)


@dataclass
class _GVal:
    """A grounded term: an SMT Int expression tagged with the element
    type when it denotes an element code (`lit` set when the element is
    statically known) and an upper value bound when one is known (used
    to size lcm tables)."""
    expr: str
    ty: str
    lit: object = None
    bound: int | None = None


class _Grounder:
    def __init__(self, ls: LiftedSentence, domain: LiftedDomain,
                 opts: GroundOptions):
        self.ls = ls
        self.domain = domain
        self.opts = opts
        self.voc = ls.prepared.vocabulary
        self.cards = ls.prepared.cardinalities

        self.decls: list = []        # (name, sort) in declaration order
        self.asserts: list = []      # (label, expr)
        self.defs: list = []         # (label, expr) definitional
        self.name_map: dict = {}
        self.counters = {"bd": 0, "dm": 0, "def": 0, "dv": 0}
        self.lcm_cache: dict = {}
        self.div_cache: dict = {}

        self.codes = {t: {e: i for i, e in enumerate(es)}
                      for t, es in domain.elements.items()}
        self.mul_vars: dict = {}
        self.pred_vars: dict = {}
        self.func_vars: dict = {}

    def fresh(self, prefix: str) -> str:
        n = self.counters[prefix]
        self.counters[prefix] += 1
        return f"{prefix}{n}"

    def declare(self, name: str, sort: str):
        self.decls.append((name, sort))

    def side(self, kind: str, label: str, expr: str, types=()):
        (self.defs if kind == "def" else self.asserts).append((label, expr))
        self.name_map[label] = Provenance(kind, kind, kind, tuple(types))

    def type_cap(self, t: str) -> int:
        n = self.cards[t]
        cap = n if n is not None else self.opts.max_mul
        if self.opts.mul_cap is not None:
            cap = min(cap, self.opts.mul_cap)
        return cap

    # -- variable layout

    def setup_vars(self):
        used = set()

        def uniq(base):
            name = base
            k = 2
            while name in used:
                name = f"{base}_{k}"
                k += 1
            used.add(name)
            return name

        for t, es in self.domain.elements.items():
            cap = self.type_cap(t)
            for e in es:
                v = uniq(f"m_{_san(e)}")
                self.mul_vars[e] = v
                self.declare(v, "Int")
                self.side("bound", self.fresh("bd"),
                          _and([f"(<= 0 {v})", f"(<= {v} {_int(cap)})"]),
                          (t,))

        for p, sig in self.voc.predicates.items():
            table = {}
            for tup in itertools.product(
                    *(self.domain.elements[t] for t in sig)):
                v = uniq("q_" + "_".join([_san(p)] + [_san(e) for e in tup]))
                table[tup] = v
                self.declare(v, "Bool")
            self.pred_vars[p] = table

        for f, (argtypes, res) in self.voc.functions.items():
            table = {}
            ncod = len(self.domain.elements[res]) if res != INT else None
            for tup in itertools.product(
                    *(self.domain.elements[t] for t in argtypes)):
                v = uniq("g_" + "_".join([_san(f)] + [_san(e) for e in tup]))
                table[tup] = v
                self.declare(v, "Int")
                if ncod is not None:
                    self.side("domain", self.fresh("dm"),
                              _and([f"(<= 0 {v})", f"(< {v} {ncod})"]),
                              (res,))
            self.func_vars[f] = table

    # -- lookups over possibly-symbolic element arguments

    def _resolve(self, table: dict, argtypes, gargs, miss: str) -> str:
        """Look up `table` (element tuple -> variable) at the given
        arguments, building an ite tree over candidate elements for any
        symbolic positions; `miss` covers empty candidate sets."""
        def go(prefix, rest_args, rest_types):
            if not rest_args:
                return table.get(tuple(prefix), miss)
            g, t = rest_args[0], rest_types[0]
            if g.lit is not None:
                return go(prefix + [g.lit], rest_args[1:], rest_types[1:])
            elems = self.domain.elements[t]
            if not elems:
                return miss
            out = go(prefix + [elems[-1]], rest_args[1:], rest_types[1:])
            for e in reversed(elems[:-1]):
                out = _ite(f"(= {g.expr} {self.codes[t][e]})",
                           go(prefix + [e], rest_args[1:], rest_types[1:]),
                           out)
            return out

        return go([], list(gargs), list(argtypes))

    def mul_of(self, g: _GVal) -> _GVal:
        if g.ty == INT:
            raise GroundingError("mul applied to an integer term")
        cap = self.type_cap(g.ty)
        if g.lit is not None:
            return _GVal(self.mul_vars[g.lit], INT, bound=cap)
        table = {(e,): self.mul_vars[e] for e in self.domain.elements[g.ty]}
        return _GVal(self._resolve(table, (g.ty,), (g,), "0"), INT, bound=cap)

    def encode_lcm(self, a: _GVal, b: _GVal) -> _GVal:
        """lcm through a fresh variable defined by a value table over
        [0..bound_a] x [0..bound_b]; cached per operand pair."""
        for g in (a, b):
            if g.bound is None:
                raise GroundingError(
                    "lcm bound exceeded: operand has no static bound")
        key = (a.expr, b.expr)
        if key in self.lcm_cache:
            return self.lcm_cache[key]
        if (a.bound + 1) * (b.bound + 1) > self.opts.table_limit:
            raise GroundingError(
                f"lcm bound exceeded: table would need "
                f"{(a.bound + 1) * (b.bound + 1)} entries")
        v = f"lcm{len(self.lcm_cache)}"
        self.declare(v, "Int")
        maxval = 0
        out = "0"
        for i in reversed(range(a.bound + 1)):
            row = "0"
            for j in reversed(range(b.bound + 1)):
                val = math.lcm(i, j)
                maxval = max(maxval, val)
                row = (_int(val) if j == b.bound
                       else _ite(f"(= {b.expr} {j})", _int(val), row))
            out = (row if i == a.bound
                   else _ite(f"(= {a.expr} {i})", row, out))
        self.side("def", self.fresh("def"), f"(= {v} {out})")
        res = _GVal(v, INT, bound=maxval)
        self.lcm_cache[key] = res
        return res

    def exact_div(self, num: _GVal, den: _GVal, guard: str) -> _GVal:
        key = (num.expr, den.expr, guard)
        if key in self.div_cache:
            return self.div_cache[key]
        v = f"k{len(self.div_cache)}"
        self.declare(v, "Int")
        pinned = (f"(=> (distinct {den.expr} 0) "
                  f"(= (* {v} {den.expr}) {num.expr}))")
        if guard != "true":
            pinned = f"(=> {guard} {pinned})"
        zero = (f"(=> {_or([_not(guard), f'(= {den.expr} 0)'])} "
                f"(= {v} 0))")
        self.side("def", self.fresh("def"), _and([pinned, zero]))
        res = _GVal(v, INT, bound=num.bound)
        self.div_cache[key] = res
        return res

    # -- terms; `guard` is the innermost enclosing sum-filter condition

    def term(self, t: Term, env: dict, guard: str) -> _GVal:
        if isinstance(t, Var):
            elem, ty = env[t.name]
            return _GVal(str(self.codes[ty][elem]), ty, lit=elem)
        if isinstance(t, IntLit):
            return _GVal(_int(t.value), INT,
                         bound=t.value if t.value >= 0 else None)
        if isinstance(t, FuncApp):
            if t.name == "mul":
                return self.mul_of(self.term(t.args[0], env, guard))
            if t.name == "lcm":
                return self.encode_lcm(self.term(t.args[0], env, guard),
                                       self.term(t.args[1], env, guard))
            argtypes, res = self.voc.functions[t.name]
            gargs = [self.term(a, env, guard) for a in t.args]
            expr = self._resolve(self.func_vars[t.name], argtypes, gargs, "0")
            return _GVal(expr, res)
        if isinstance(t, Arith):
            l = self.term(t.left, env, guard)
            r = self.term(t.right, env, guard)
            if t.op == "/":
                if not isinstance(t.right, IntLit):
                    nz = f"(distinct {r.expr} 0)"
                    self.side("def", self.fresh("def"),
                              nz if guard == "true" else f"(=> {guard} {nz})")
                return _GVal(f"(div {l.expr} {r.expr})", INT)
            bound = None
            if l.bound is not None and r.bound is not None:
                bound = {"+": l.bound + r.bound, "*": l.bound * r.bound,
                         "-": l.bound}[t.op]
            return _GVal(f"({t.op} {l.expr} {r.expr})", INT, bound=bound)
        if isinstance(t, ExactDiv):
            return self.exact_div(self.term(t.num, env, guard),
                                  self.term(t.den, env, guard), guard)
        if isinstance(t, SumAgg):
            return _GVal(self.ground_sum(t, env, guard), INT)
        raise GroundingError(f"cannot ground term {t!r}")

    def ground_sum(self, agg: SumAgg, env: dict, guard: str) -> str:
        parts = []
        for combo in itertools.product(
                *(self.domain.elements[t] for _, t in agg.binders)):
            e2 = dict(env)
            for (n, ty), c in zip(agg.binders, combo):
                e2[n] = (c, ty)
            filt = self.formula(agg.filt, e2, 0)
            if filt == "false":
                continue
            body = self.term(agg.body, e2, _and([guard, filt]))
            parts.append(_ite(filt, body.expr, "0"))
        return _add(parts)

    # -- formulas; polarity +1 positive, -1 negative, 0 both

    def formula(self, f: Formula, env: dict, polarity: int) -> str:
        if isinstance(f, BoolLit):
            return "true" if f.value else "false"
        if isinstance(f, PredApp):
            sig = self.voc.predicates[f.name]
            gargs = [self.term(a, env, "true") for a in f.args]
            return self._resolve(self.pred_vars[f.name], sig, gargs, "false")
        if isinstance(f, Compare):
            l = self.term(f.left, env, "true")
            r = self.term(f.right, env, "true")
            if l.expr == r.expr:
                return "false" if f.op in ("~=", "<", ">") else "true"
            if f.op == "~=":
                return _not(f"(= {l.expr} {r.expr})")
            op = {"=": "=", "<": "<", ">": ">", "=<": "<=", ">=": ">="}[f.op]
            return f"({op} {l.expr} {r.expr})"
        if isinstance(f, Connective):
            if f.op == "&":
                return _and([self.formula(f.left, env, polarity),
                             self.formula(f.right, env, polarity)])
            if f.op == "|":
                return _or([self.formula(f.left, env, polarity),
                            self.formula(f.right, env, polarity)])
            if f.op == "=>":
                return _or([_not(self.formula(f.left, env, -polarity)),
                            self.formula(f.right, env, polarity)])
            l = self.formula(f.left, env, 0)
            r = self.formula(f.right, env, 0)
            if l == r:
                return "true"
            return f"(= {l} {r})"
        if isinstance(f, Not):
            return _not(self.formula(f.sub, env, -polarity))
        if isinstance(f, Quant):
            parts = []
            for combo in itertools.product(
                    *(self.domain.elements[t] for _, t in f.binders)):
                e2 = dict(env)
                for (n, ty), c in zip(f.binders, combo):
                    e2[n] = (c, ty)
                parts.append(self.formula(f.body, e2, polarity))
            return _and(parts) if f.kind == "forall" else _or(parts)
        if isinstance(f, Divides):
            # witness variable: sound only when asserted positively
            if polarity != 1:
                raise GroundingError(
                    "divisibility grounded outside a positive context")
            d = self.term(f.divisor, env, "true")
            n = self.term(f.dividend, env, "true")
            v = self.fresh("dv")
            self.declare(v, "Int")
            return _and([f"(<= 0 {v})", f"(= {n.expr} (* {v} {d.expr}))"])
        raise GroundingError(f"cannot ground formula {f!r}")

    # -- entry

    def run(self) -> GroundedProblem:
        has_lcm = any(
            isinstance(n, FuncApp) and n.name == "lcm"
            for it in self.ls.items for n in walk(it.formula))
        if has_lcm:
            for t in self.domain.elements:
                cap = self.type_cap(t)
                if cap > self.opts.lcm_bound:
                    raise GroundingError(
                        f"lcm bound exceeded: type {t} multiplicities go up "
                        f"to {cap} > lcm bound {self.opts.lcm_bound} (lower "
                        f"max_mul or raise lcm_bound)")

        self.setup_vars()
        for it in self.ls.items:
            expr = self.formula(it.formula, {}, 1)
            self.asserts.append((it.label, expr))
            kind = it.rule if it.rule in ("extent", "rc", "f1", "f2") \
                else "theory"
            self.name_map[it.label] = Provenance(kind, it.rule, it.origin,
                                                 it.types)

        lines = [
            "(set-option :produce-models true)",
            "(set-option :produce-unsat-cores true)",
            "(set-logic QF_NIA)",
        ]
        lines.extend(f"(declare-const {n} {s})" for n, s in self.decls)
        lines.extend(f"(assert (! {e} :named {lbl}))"
                     for lbl, e in self.asserts + self.defs)
        lines.extend(["(check-sat)", "(get-model)", "(get-unsat-core)"])

        var_map = {
            "mul": dict(self.mul_vars),
            "pred": {p: dict(tb) for p, tb in self.pred_vars.items()},
            "func": {f: dict(tb) for f, tb in self.func_vars.items()},
            "func_res": {f: res
                         for f, (_, res) in self.voc.functions.items()},
        }
        return GroundedProblem("\n".join(lines) + "\n", self.name_map,
                               var_map, self.domain, self.opts)


def ground(ls: LiftedSentence, domain: LiftedDomain,
           opts: GroundOptions = GroundOptions()) -> GroundedProblem:
    """Ground a lifted sentence over a candidate domain into a labeled
    SMT-LIB script (see module docstring)."""
    for t in ls.prepared.vocabulary.types:
        if t not in domain.elements:
            raise GroundingError(f"domain missing type {t}")
        n = ls.prepared.cardinalities[t]
        if n is not None and len(domain.elements[t]) > n:
            raise GroundingError(
                f"domain for fixed type {t} exceeds its cardinality {n}")
    return _Grounder(ls, domain, opts).run()


def decode_model(gp: GroundedProblem, values: dict):
    """Rebuild a lifted structure from the solver's variable values."""
    from .structures import LiftedStructure

    def val(v):
        if v not in values:
            raise DecodeError(f"model has no value for {v}")
        return values[v]

    dom = gp.domain
    mul = {e: val(v) for e, v in gp.var_map["mul"].items()}
    preds = {p: frozenset(tup for tup, v in tb.items() if val(v) is True)
             for p, tb in gp.var_map["pred"].items()}
    funcs = {}
    for f, tb in gp.var_map["func"].items():
        res = gp.var_map["func_res"][f]
        out = {}
        for tup, v in tb.items():
            code = val(v)
            if res == INT:
                out[tup] = code
            else:
                cod = dom.elements[res]
                if not (0 <= code < len(cod)):
                    raise DecodeError(
                        f"{f}{tup} selects element {code} outside {res}")
                out[tup] = cod[code]
        funcs[f] = out
    return LiftedStructure({t: tuple(es) for t, es in dom.elements.items()},
                           mul, preds, funcs)
