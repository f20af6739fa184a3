"""Direct evaluation of formulas over structures, model verification,
and brute-force satisfiability — the independent semantic oracle that
every solver/expansion result is checked against.

Evaluation works over both concrete and lifted structures; on lifted
structures the builtins mul/lcm, exact division and divisibility nodes
(produced by translation) are interpreted directly, so a decoded lifted
model can be certified against the lifted sentence before expansion.

Sum aggregates are evaluated with guided enumeration when the filter's
leading conjunct is a predicate atom (or a function-graph equation)
whose bound-variable positions can be read off an index of the
interpretation — this is what keeps verification of large expansions
(10^4+ elements) cheap. The fallback is plain nested iteration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .structures import (ConcreteStructure, LiftedStructure, lcm_all,
                         lift_trivial, mul_product)
from .syntax import (INT, Arith, BoolLit, Card, Compare, Connective, Divides,
                     ExactDiv, Formula, FuncApp, IntLit, Not, PredApp,
                     Problem, Quant, SumAgg, Term, Var, conjuncts, fmt_formula,
                     free_vars, term_type)


class EvalError(Exception):
    pass


def euclid_div(a: int, b: int) -> int:
    """SMT-LIB integer division: remainder in [0, |b|)."""
    if b == 0:
        raise EvalError("division by zero")
    return a // b if b > 0 else -(a // -b)


def _mul_of(struct, v) -> int:
    if isinstance(v, int):
        return 1
    try:
        return struct.mul[v]
    except (AttributeError, KeyError):
        raise EvalError(f"no multiplicity for {v!r} (not a lifted structure?)")


def eval_term(t: Term, struct, asg: dict) -> object:
    if isinstance(t, Var):
        return asg[t.name]
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, FuncApp):
        if t.name == "mul":
            return _mul_of(struct, eval_term(t.args[0], struct, asg))
        if t.name == "lcm":
            return lcm_all([eval_term(a, struct, asg) for a in t.args])
        args = tuple(eval_term(a, struct, asg) for a in t.args)
        try:
            return struct.funcs[t.name][args]
        except KeyError:
            raise EvalError(f"function {t.name} undefined at {args}")
    if isinstance(t, Arith):
        l = eval_term(t.left, struct, asg)
        r = eval_term(t.right, struct, asg)
        if t.op == "+":
            return l + r
        if t.op == "-":
            return l - r
        if t.op == "*":
            return l * r
        return euclid_div(l, r)
    if isinstance(t, ExactDiv):
        num = eval_term(t.num, struct, asg)
        den = eval_term(t.den, struct, asg)
        if den == 0:
            if num == 0:
                return 0
            raise EvalError("exact division by zero")
        if num % den != 0:
            raise EvalError(f"inexact division {num}/{den}")
        return num // den
    if isinstance(t, Card):
        return eval_term(SumAgg(t.binders, t.filt, IntLit(1)), struct, asg)
    if isinstance(t, SumAgg):
        return _eval_sum(t, struct, asg)
    raise EvalError(f"unexpected term {t!r}")


def _bound_positions(atom_args, bound_names):
    """Map each argument to either ('var', name) for a bound variable or
    ('fixed', term); None when some argument mixes bound/free parts."""
    out = []
    for a in atom_args:
        if isinstance(a, Var) and a.name in bound_names:
            out.append(("var", a.name))
        else:
            if set(free_vars(a)) & bound_names:
                return None
            out.append(("fixed", a))
    return out


def _spread(rows, spec, agg, struct, asg):
    """Assignments from index rows: bind var positions from each row,
    enumerate binders the row does not cover."""
    var_positions = [n for k, n in spec if k == "var"]
    covered = set(var_positions)
    rest = [(n, t) for n, t in agg.binders if n not in covered]
    mask = [k == "fixed" for k, _ in spec]
    for row in rows:
        a2 = dict(asg)
        vals = [x for x, m in zip(row, mask) if not m]
        for n, v in zip(var_positions, vals):
            a2[n] = v
        for extra in itertools.product(*(struct.types[t] for _, t in rest)):
            a3 = dict(a2)
            for (n, _), v in zip(rest, extra):
                a3[n] = v
            yield a3


def _guided_tuples(agg: SumAgg, struct, asg):
    """Assignments for agg.binders read off an interpretation index when
    the leading filter conjunct allows; None if not applicable. Each
    candidate is produced at most once (rows are distinct, bound
    positions distinct), and every binding satisfying the full filter is
    among the candidates since it must satisfy the leading conjunct."""
    lead = conjuncts(agg.filt)[0]
    bound_names = {n for n, _ in agg.binders}

    if isinstance(lead, PredApp) and lead.name in struct.preds and lead.args:
        spec = _bound_positions(lead.args, bound_names)
        if spec is None:
            return None
        var_positions = [n for k, n in spec if k == "var"]
        if len(set(var_positions)) != len(var_positions):
            return None  # repeated variable: fall back
        mask = tuple(k == "fixed" for k, _ in spec)
        fixed = tuple(eval_term(a, struct, asg) for k, a in spec if k == "fixed")
        rows = struct.pred_index(lead.name, mask).get(fixed, [])
        return _spread(rows, spec, agg, struct, asg)

    if isinstance(lead, Compare) and lead.op == "=":
        for fapp, other in ((lead.left, lead.right), (lead.right, lead.left)):
            if not (isinstance(fapp, FuncApp) and fapp.name in struct.funcs):
                continue
            if set(free_vars(other)) & bound_names:
                continue
            spec = _bound_positions(fapp.args, bound_names)
            if spec is None:
                continue
            var_positions = [n for k, n in spec if k == "var"]
            if len(set(var_positions)) != len(var_positions):
                continue
            value = eval_term(other, struct, asg)
            rows = struct.func_index(fapp.name).get(value, [])
            fixed = [(i, eval_term(a, struct, asg))
                     for i, (k, a) in enumerate(spec) if k == "fixed"]
            if fixed:
                rows = [r for r in rows if all(r[i] == v for i, v in fixed)]
            return _spread(rows, spec, agg, struct, asg)

    return None


def _eval_sum(agg: SumAgg, struct, asg) -> int:
    total = 0
    guided = _guided_tuples(agg, struct, asg)
    if guided is not None:
        for a2 in guided:
            if eval_formula(agg.filt, struct, a2):
                total += eval_term(agg.body, struct, a2)
        return total
    for combo in itertools.product(*(struct.types[t] for _, t in agg.binders)):
        a2 = dict(asg)
        for (n, _), v in zip(agg.binders, combo):
            a2[n] = v
        if eval_formula(agg.filt, struct, a2):
            total += eval_term(agg.body, struct, a2)
    return total


_CMP = {
    "=": lambda a, b: a == b,
    "~=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "=<": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def eval_formula(f: Formula, struct, asg: dict) -> bool:
    if isinstance(f, BoolLit):
        return f.value
    if isinstance(f, PredApp):
        args = tuple(eval_term(a, struct, asg) for a in f.args)
        return args in struct.preds[f.name]
    if isinstance(f, Compare):
        return _CMP[f.op](eval_term(f.left, struct, asg),
                          eval_term(f.right, struct, asg))
    if isinstance(f, Connective):
        if f.op == "&":
            return eval_formula(f.left, struct, asg) and eval_formula(f.right, struct, asg)
        if f.op == "|":
            return eval_formula(f.left, struct, asg) or eval_formula(f.right, struct, asg)
        if f.op == "=>":
            return (not eval_formula(f.left, struct, asg)) or eval_formula(f.right, struct, asg)
        return eval_formula(f.left, struct, asg) == eval_formula(f.right, struct, asg)
    if isinstance(f, Not):
        return not eval_formula(f.sub, struct, asg)
    if isinstance(f, Quant):
        domains = [struct.types[t] for _, t in f.binders]
        if f.kind == "forall":
            for combo in itertools.product(*domains):
                a2 = dict(asg)
                for (n, _), v in zip(f.binders, combo):
                    a2[n] = v
                if not eval_formula(f.body, struct, a2):
                    return False
            return True
        for combo in itertools.product(*domains):
            a2 = dict(asg)
            for (n, _), v in zip(f.binders, combo):
                a2[n] = v
            if eval_formula(f.body, struct, a2):
                return True
        return False
    if isinstance(f, Divides):
        d = eval_term(f.divisor, struct, asg)
        n = eval_term(f.dividend, struct, asg)
        if d == 0:
            return n == 0
        return n % d == 0
    raise EvalError(f"unexpected formula {f!r}")


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    kind: str  # "valid" | "invalid" | "cardinality" | "malformed"
    detail: str = ""
    sentence_index: int = -1
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def _failing_witness(f: Formula, struct, asg) -> tuple:
    """For a failing universal, the lexicographically first violating
    binding (elements compared as strings)."""
    if not isinstance(f, Quant) or f.kind != "forall":
        return ()
    domains = [sorted(struct.types[t]) for _, t in f.binders]
    for combo in itertools.product(*domains):
        a2 = dict(asg)
        for (n, _), v in zip(f.binders, combo):
            a2[n] = v
        if not eval_formula(f.body, struct, a2):
            return combo
    return ()


def check_well_formed(problem: Problem, struct: ConcreteStructure) -> VerifyResult:
    voc = problem.vocabulary
    for t in voc.types:
        if t not in struct.types:
            return VerifyResult(False, "malformed", f"missing type {t}")
    elems = {t: set(es) for t, es in struct.types.items()}
    for p, sig in voc.predicates.items():
        for tup in struct.preds.get(p, frozenset()):
            if len(tup) != len(sig) or any(
                    x not in elems[ty] for x, ty in zip(tup, sig)):
                return VerifyResult(False, "malformed", f"ill-typed tuple in {p}: {tup}")
    for f, (argtypes, res) in voc.functions.items():
        fn = struct.funcs.get(f, {})
        want = list(itertools.product(*(struct.types[t] for t in argtypes)))
        if sorted(fn.keys()) != sorted(want):
            return VerifyResult(False, "malformed", f"function {f} is not total")
        for args, v in fn.items():
            if res == INT:
                if not isinstance(v, int):
                    return VerifyResult(False, "malformed", f"{f}{args} not an integer")
            elif v not in elems[res]:
                return VerifyResult(False, "malformed", f"{f}{args} outside {res}")
    return VerifyResult(True, "valid")


def verify_model(problem: Problem, struct: ConcreteStructure) -> VerifyResult:
    """Check a concrete structure against a problem: well-formedness,
    fixed cardinalities (reported distinctly), then every sentence by
    direct evaluation, with a witness for failing universals."""
    wf = check_well_formed(problem, struct)
    if not wf.ok:
        return wf
    for t, n in problem.cardinalities.items():
        if n is not None and len(struct.types[t]) != n:
            return VerifyResult(False, "cardinality",
                                f"type {t} has {len(struct.types[t])} elements, declared {n}")
    for i, s in enumerate(problem.sentences):
        if not eval_formula(s, struct, {}):
            return VerifyResult(False, "invalid",
                                f"sentence {i} fails: {fmt_formula(s)}",
                                i, _failing_witness(s, struct, {}))
    return VerifyResult(True, "valid")


# ---------------------------------------------------------------------------
# brute force

def count_structures(problem: Problem, sizes: dict) -> int:
    voc = problem.vocabulary
    total = 1
    for f, (argtypes, res) in voc.functions.items():
        ntuples = mul_product(sizes[t] for t in argtypes)
        if res == INT:
            raise EvalError(
                f"brute force cannot enumerate integer-valued function {f}")
        codomain = sizes[res]
        if ntuples > 0 and codomain == 0:
            return 0
        total *= codomain ** ntuples
    for p, sig in voc.predicates.items():
        total *= 2 ** mul_product(sizes[t] for t in sig)
    return total


def brute_force_sat(problem: Problem, sizes: dict, budget: int = 2_000_000,
                    find_all: bool = False):
    """Enumerate all structures with the given per-type sizes (fixed
    cardinalities must match), in a fixed documented order: functions
    before predicates, symbols in declaration order, interpretations in
    lexicographic element order (empty relation first). Returns the
    first satisfying ConcreteStructure or None; with find_all=True, the
    list of all of them.

    Raises EvalError when the candidate count exceeds `budget`.
    """
    voc = problem.vocabulary
    for t, n in problem.cardinalities.items():
        if n is not None and sizes.get(t) != n:
            raise EvalError(f"size of {t} fixed at {n}, got {sizes.get(t)}")
    n_structs = count_structures(problem, sizes)
    if n_structs > budget:
        raise EvalError(f"{n_structs} candidate structures exceed budget {budget}")

    types = {t: tuple(f"{t}#{i}" for i in range(1, sizes[t] + 1))
             for t in voc.types}

    func_choices = []
    for f, (argtypes, res) in voc.functions.items():
        tuples = list(itertools.product(*(types[t] for t in argtypes)))
        codomain = types[res]
        func_choices.append((f, tuples, codomain))
    pred_choices = []
    for p, sig in voc.predicates.items():
        tuples = list(itertools.product(*(types[t] for t in sig)))
        pred_choices.append((p, tuples))

    results = []
    func_spaces = [itertools.product(cod, repeat=len(tups)) if tups else [()]
                   for _, tups, cod in func_choices]
    # realize as lists for itertools.product over spaces
    for func_combo in itertools.product(*func_spaces):
        funcs = {}
        dead = False
        for (f, tups, cod), images in zip(func_choices, func_combo):
            if tups and not cod:
                dead = True
                break
            funcs[f] = dict(zip(tups, images))
        if dead:
            continue
        for pred_combo in itertools.product(
                *(itertools.product((False, True), repeat=len(tups))
                  for _, tups in pred_choices)):
            preds = {}
            for (p, tups), bits in zip(pred_choices, pred_combo):
                preds[p] = frozenset(t for t, b in zip(tups, bits) if b)
            cand = ConcreteStructure(dict(types), preds, funcs)
            if all(eval_formula(s, cand, {}) for s in problem.sentences):
                if not find_all:
                    return cand
                results.append(ConcreteStructure(
                    dict(types), dict(preds), {f: dict(m) for f, m in funcs.items()}))
    return results if find_all else None
