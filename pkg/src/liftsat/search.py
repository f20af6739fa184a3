"""Iterative model search over growing lifted domains.

A method name picks three switches:

    [l] t|m [1|2]     e.g. lt1, m2, t1
     |   |    |
     |   |    growth per round: 1 = one element, 2 = half again
     |   typed domains (t) or everything collapsed to one type (m)
     lifted multiplicities; without l every multiplicity is capped at 1
                            (the baseline concrete search)

Each round grounds the translated sentence over the candidate domain,
runs the solver, and on unsat grows the types named by the unsat core's
assertion provenance. A sat verdict is never taken on faith: the
decoded structure is evaluated against the lifted sentence, every
function interpretation is checked regular, the expansion is computed,
and the expansion (converted back to typed form under m methods) is
verified against the original problem by direct evaluation. Any failure
in that chain raises — a wrong model must never be returned.

Unsat is definitive only when every type is fixed and at its full
cardinality; otherwise exhausting the iteration budget reports
"exhausted".
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from .evaluator import EvalError, VerifyResult, eval_formula, verify_model
from .grounding import (GroundOptions, LiftedDomain, decode_model, ground)
from .lifter import translate
from .monotype import from_monotype, monotype
from .solver import run_solver
from .structures import (ConcreteStructure, LiftedStructure, StructureError,
                         check_function_regularity, expand_structure)
from .syntax import Problem

METHOD_NAMES = ("m1", "m2", "t1", "t2", "lm1", "lm2", "lt1", "lt2")


class SearchError(Exception):
    """An internal soundness failure: the pipeline produced a structure
    that does not hold up under independent checking."""


@dataclass(frozen=True)
class MethodConfig:
    name: str
    lifted: bool
    mono: bool
    growth: str   # "+1" | "x1.5"

    @staticmethod
    def parse(name: str) -> "MethodConfig":
        if name not in METHOD_NAMES:
            raise ValueError(
                f"unknown method {name!r} (expected one of "
                f"{', '.join(METHOD_NAMES)})")
        return MethodConfig(name, lifted=name.startswith("l"),
                            mono="m" in name,
                            growth="+1" if name.endswith("1") else "x1.5")


@dataclass(frozen=True)
class SearchOptions:
    method: str = "lt1"
    max_iters: int = 200
    solver_cmd: tuple | None = None
    solve_timeout: float | None = None   # seconds per solver call
    max_mul: int | None = None
    lcm_bound: int | None = None
    initial_sizes: dict | None = None    # type -> starting domain size
    dump_dir: str | None = None          # write one .smt2 per round


@dataclass
class SearchResult:
    status: str                          # sat | unsat | exhausted | unknown
    method: str
    model: ConcreteStructure | None = None
    lifted: LiftedStructure | None = None
    verification: VerifyResult | None = None
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "sat"


def _grow_size(old: int, growth: str) -> int:
    if growth == "+1":
        return old + 1
    return max(old + 1, math.ceil(old * 1.5))


def core_types(gp, core) -> list:
    """Domain types implicated by an unsat core, via the labels'
    provenance; deterministic order, duplicates removed."""
    seen = []
    for lbl in core:
        pv = gp.name_map.get(lbl)
        if pv is None:
            continue
        for t in pv.types:
            if t not in seen:
                seen.append(t)
    return seen


def check_and_expand(ls, work_problem: Problem, original: Problem, meta,
                     lifted_struct: LiftedStructure):
    """The mandatory post-sat chain: lifted evaluation, per-function
    regularity, expansion, back-conversion, verification against the
    original problem. Raises SearchError on any failure; returns
    (concrete structure over the original vocabulary, verification)."""
    for item in ls.items:
        try:
            holds = eval_formula(item.formula, lifted_struct, {})
        except EvalError as e:
            raise SearchError(
                f"lifted constraint {item.label} is not evaluable on the "
                f"decoded structure: {e}")
        if not holds:
            raise SearchError(
                f"decoded structure violates lifted constraint {item.label} "
                f"({item.rule}, {item.origin})")
    for fname, (argtypes, _) in work_problem.vocabulary.functions.items():
        reg = check_function_regularity(lifted_struct, fname, argtypes)
        if not reg.ok:
            raise SearchError(
                f"function {fname} is not regular: {reg.reason} "
                f"at {reg.witness}")
    try:
        concrete, _pi = expand_structure(lifted_struct)
    except StructureError as e:
        raise SearchError(f"expansion failed: {e}")
    if meta is not None:
        concrete = from_monotype(original, meta, concrete)
    vr = verify_model(original, concrete)
    if not vr.ok:
        raise SearchError(
            f"expanded structure fails verification ({vr.kind}): {vr.detail}")
    return concrete, vr


def solve_iterative(problem: Problem,
                    options: SearchOptions = SearchOptions()) -> SearchResult:
    """Search for a verified model of `problem` by growing candidate
    domains from the unsat cores (see module docstring)."""
    start = time.monotonic()
    method = MethodConfig.parse(options.method)

    meta = None
    work = problem
    if method.mono:
        work, meta = monotype(problem)

    ls = translate(work)
    gkw = {}
    if options.max_mul is not None:
        gkw["max_mul"] = options.max_mul
    if options.lcm_bound is not None:
        gkw["lcm_bound"] = options.lcm_bound
    if not method.lifted:
        gkw["mul_cap"] = 1
    gopts = GroundOptions(**gkw)

    cards = work.cardinalities

    def clamp(t: str, n: int) -> int:
        cap = cards[t]
        return n if cap is None else min(n, cap)

    if options.initial_sizes is not None:
        sizes = {t: clamp(t, options.initial_sizes.get(t, 0))
                 for t in work.vocabulary.types}
        domain = LiftedDomain.of_sizes(sizes)
    else:
        domain = LiftedDomain.empty(work.vocabulary.types)

    trace = []
    result = SearchResult("exhausted", method.name, trace=trace)
    dump_dir = Path(options.dump_dir) if options.dump_dir else None
    if dump_dir:
        dump_dir.mkdir(parents=True, exist_ok=True)

    for it in range(options.max_iters):
        gp = ground(ls, domain, gopts)
        if dump_dir:
            (dump_dir / f"round{it:03d}.smt2").write_text(gp.script)
        verdict = run_solver(gp.script, cmd=options.solver_cmd,
                             timeout=options.solve_timeout)
        rec = {"iteration": it, "sizes": domain.sizes(),
               "status": verdict.status, "solve_time": verdict.wall_time,
               "core": list(verdict.core), "grow": []}
        trace.append(rec)

        if verdict.status == "sat":
            lifted_struct = decode_model(gp, verdict.model)
            concrete, vr = check_and_expand(ls, work, problem, meta,
                                            lifted_struct)
            result = SearchResult("sat", method.name, model=concrete,
                                  lifted=lifted_struct, verification=vr,
                                  trace=trace)
            break

        if verdict.status == "unknown":
            result = SearchResult("unknown", method.name, trace=trace,
                                  reason=verdict.reason or "solver gave up")
            break

        # unsat: definitive only over the full fixed domain
        growable = [t for t in work.vocabulary.types
                    if cards[t] is None
                    or len(domain.elements[t]) < cards[t]]
        if not growable:
            result = SearchResult("unsat", method.name, trace=trace)
            break
        grow = [t for t in core_types(gp, verdict.core) if t in growable]
        if not grow:
            grow = growable
        for t in grow:
            domain = domain.grown(
                t, clamp(t, _grow_size(len(domain.elements[t]),
                                       method.growth)))
        rec["grow"] = grow

    result.wall_time = time.monotonic() - start
    return result


def _portfolio_runner(src: str, kw: dict, queue):
    from .parser import parse_problem
    try:
        res = solve_iterative(parse_problem(src), SearchOptions(**kw))
        queue.put((kw["method"], res.status, res.wall_time))
    except Exception as e:  # pragma: no cover - transported to parent
        queue.put((kw["method"], f"error: {e}", 0.0))


def solve_portfolio(problem_src: str, methods=("m1", "t1", "lm1", "lt1"),
                    **common_options) -> dict:
    """Race several methods in separate processes on one problem source;
    returns {method: (status, wall_time)} for the first finisher, with
    the rest cancelled."""
    import multiprocessing as mp

    ctx = mp.get_context("spawn")
    queue = ctx.Queue()
    procs = []
    for m in methods:
        kw = dict(common_options, method=m)
        p = ctx.Process(target=_portfolio_runner,
                        args=(problem_src, kw, queue))
        p.start()
        procs.append(p)
    try:
        m, status, wt = queue.get()
    finally:
        for p in procs:
            p.terminate()
            p.join()
    return {m: (status, wt)}
