"""Command-line front end.

    liftsat parse PROBLEM            syntax/type check, echo the problem
    liftsat translate PROBLEM        print the lifted sentence with labels
    liftsat solve PROBLEM            iterative search (see --method)
    liftsat expand LIFTED.json       expand a lifted structure
    liftsat verify PROBLEM MODEL.json  check a concrete model
    liftsat bench                    method x problem timing table

Problem files use the surface syntax (conventionally .lp); structures
travel as JSON. `solve` exits 0 when it reached a definitive answer
(a verified model or a domain-exhausting unsat), 2 when the search gave
up (iteration budget, solver timeout), 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import corpus
from .evaluator import verify_model
from .grounding import GroundingError
from .lifter import TranslateError, fmt_lifted, translate
from .parser import ParseError, parse_problem
from .search import (METHOD_NAMES, SearchOptions, solve_iterative,
                     solve_portfolio)
from .solver import SolverError
from .structures import (StructureError, concrete_used_counts,
                         expand_structure, structure_from_json)
from .syntax import ProblemError, fmt_problem


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _load_structure(path: str):
    return structure_from_json(_read(path))


def cmd_parse(args) -> int:
    prob = parse_problem(_read(args.problem))
    print(fmt_problem(prob), end="")
    return 0


def cmd_translate(args) -> int:
    prob = parse_problem(_read(args.problem))
    print(fmt_lifted(translate(prob)), end="")
    return 0


def _search_options(args) -> SearchOptions:
    return SearchOptions(
        method=args.method,
        max_iters=args.max_iters,
        solver_cmd=tuple(args.solver_cmd.split()) if args.solver_cmd else None,
        solve_timeout=args.timeout,
        max_mul=args.max_mul,
        lcm_bound=args.lcm_bound,
        dump_dir=args.dump_smt,
    )


def cmd_solve(args) -> int:
    src = _read(args.problem)
    prob = parse_problem(src)

    if args.method == "portfolio":
        res = solve_portfolio(src, max_iters=args.max_iters,
                              solve_timeout=args.timeout)
        for m, (status, wt) in res.items():
            print(f"{m}: {status} in {wt:.2f}s")
        return 0 if any(s in ("sat", "unsat") for s, _ in res.values()) else 2

    res = solve_iterative(prob, _search_options(args))
    for rec in res.trace:
        sizes = " ".join(f"{t}={n}" for t, n in rec["sizes"].items())
        print(f"round {rec['iteration']}: {sizes or '(empty)'} -> "
              f"{rec['status']} ({rec['solve_time']:.2f}s)"
              + (f" grow {','.join(rec['grow'])}" if rec["grow"] else ""),
              file=sys.stderr)

    if args.trace_json:
        Path(args.trace_json).write_text(json.dumps(res.trace, indent=2))

    if res.status == "sat":
        print(f"sat: verified model found in {res.wall_time:.2f}s "
              f"({len(res.trace)} rounds)", file=sys.stderr)
        counts = res.lifted.used_counts()
        print(f"lifted elements used: {counts}", file=sys.stderr)
        print(f"concrete size: {concrete_used_counts(res.model)}",
              file=sys.stderr)
        if args.output_dir:
            d = Path(args.output_dir)
            d.mkdir(parents=True, exist_ok=True)
            (d / "lifted.json").write_text(res.lifted.to_json())
            (d / "model.json").write_text(res.model.to_json())
            (d / "trace.json").write_text(json.dumps(res.trace, indent=2))
            print(f"wrote lifted.json, model.json, trace.json to {d}",
                  file=sys.stderr)
        else:
            out = {"status": "sat",
                   "lifted": json.loads(res.lifted.to_json()),
                   "model": json.loads(res.model.to_json())}
            print(json.dumps(out, indent=2))
        return 0
    if res.status == "unsat":
        print("unsat: no model exists (domains exhausted at their "
              "cardinalities)", file=sys.stderr)
        return 0
    print(f"{res.status}: {res.reason or 'no verdict within budget'}",
          file=sys.stderr)
    return 2


def cmd_expand(args) -> int:
    lifted = _load_structure(args.lifted)
    concrete, _pi = expand_structure(lifted)
    print(concrete.to_json())
    return 0


def cmd_verify(args) -> int:
    prob = parse_problem(_read(args.problem))
    struct = _load_structure(args.model)
    vr = verify_model(prob, struct)
    if vr.ok:
        print("valid")
        return 0
    where = f" (sentence {vr.sentence_index})" \
        if vr.sentence_index is not None else ""
    wit = f" witness {vr.witness}" if vr.witness else ""
    print(f"{vr.kind}{where}: {vr.detail}{wit}")
    return 2


_BENCH_PROBLEMS = (
    "pigeonhole:10:5:2",
    "pigeonhole:1000:500:2",
    "rack_quad:8",
    "generative_bins:12:3",
)


def _bench_source(spec: str) -> str:
    name, *params = spec.split(":")
    fn = getattr(corpus, name, None)
    if fn is None or name.startswith("_"):
        raise ValueError(f"unknown problem family {name!r}")
    return fn(*(int(p) for p in params))


def _bench_worker(src: str, method: str, kw: dict, queue) -> None:
    try:
        res = solve_iterative(parse_problem(src), SearchOptions(
            method=method, **kw))
        queue.put((res.status, res.wall_time, len(res.trace)))
    except Exception as e:
        queue.put((f"error: {e}", 0.0, 0))


def _bench_cell(src: str, method: str, budget: float, kw: dict):
    import multiprocessing as mp
    ctx = mp.get_context("spawn")
    q = ctx.Queue()
    p = ctx.Process(target=_bench_worker, args=(src, method, kw, q))
    start = time.monotonic()
    p.start()
    p.join(budget)
    if p.is_alive():
        p.terminate()
        p.join()
        return ("T", budget, 0)
    try:
        return q.get_nowait()
    except Exception:
        return ("error: no result", time.monotonic() - start, 0)


def cmd_bench(args) -> int:
    methods = args.methods.split(",")
    for m in methods:
        if m not in METHOD_NAMES:
            raise ValueError(f"unknown method {m!r}")
    specs = args.problems.split(",") if args.problems else _BENCH_PROBLEMS
    kw = {"max_iters": args.max_iters}
    if args.timeout:
        kw["solve_timeout"] = args.timeout

    rows = []
    width = max(len(s) for s in specs)
    print(f"{'problem':<{width}} " +
          " ".join(f"{m:>10}" for m in methods))
    for spec in specs:
        src = _bench_source(spec)
        cells = []
        for m in methods:
            status, wt, rounds = _bench_cell(src, m, args.budget, kw)
            cells.append((m, status, wt, rounds))
            rows.append({"problem": spec, "method": m, "status": status,
                         "seconds": round(wt, 3), "rounds": rounds})
        print(f"{spec:<{width}} " + " ".join(
            (f"{'T':>10}" if s == "T" else f"{wt:>9.2f}s") if s in ("sat", "unsat", "T")
            else f"{'!':>10}"
            for _, s, wt, _ in cells))
    if args.csv:
        import csv
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["problem", "method", "status",
                                               "seconds", "rounds"])
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {args.csv}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="liftsat",
        description="finite model finding over compressed domains")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="check a problem file and echo it")
    p.add_argument("problem")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("translate",
                       help="print the lifted sentence for a problem")
    p.add_argument("problem")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("solve", help="search for a verified model")
    p.add_argument("problem")
    p.add_argument("--method", default="lt1",
                   choices=list(METHOD_NAMES) + ["portfolio"])
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--timeout", type=float, default=None,
                   help="seconds per solver call")
    p.add_argument("--solver-cmd", default=None,
                   help="external solver command (overrides LIFTSAT_SOLVER)")
    p.add_argument("--max-mul", type=int, default=None,
                   help="multiplicity cap for generative types")
    p.add_argument("--lcm-bound", type=int, default=None,
                   help="max multiplicity bound when lcm tables are needed")
    p.add_argument("--dump-smt", default=None, metavar="DIR",
                   help="write each round's SMT-LIB script here")
    p.add_argument("--trace-json", default=None, metavar="FILE")
    p.add_argument("--output-dir", default=None, metavar="DIR",
                   help="write lifted.json/model.json/trace.json here")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("expand", help="expand a lifted structure (JSON)")
    p.add_argument("lifted")
    p.set_defaults(fn=cmd_expand)

    p = sub.add_parser("verify", help="check a concrete model (JSON)")
    p.add_argument("problem")
    p.add_argument("model")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="timing table over methods x problems")
    p.add_argument("--methods", default="m1,t1,lm1,lt1")
    p.add_argument("--problems", default=None,
                   help="comma-separated family:param:... specs")
    p.add_argument("--budget", type=float, default=60.0,
                   help="wall-clock seconds per cell")
    p.add_argument("--timeout", type=float, default=None,
                   help="seconds per solver call")
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--csv", default=None, metavar="FILE")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ProblemError, TranslateError, GroundingError,
            SolverError, StructureError, ValueError, OSError,
            json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
