"""Driving an external SMT solver over one-shot SMT-LIB scripts.

The solver is any executable that accepts a script path as its last
argument and prints standard SMT-LIB responses. Resolution order:

1. an explicit command (`--solver-cmd` / the LIFTSAT_SOLVER env var,
   parsed with shell quoting),
2. a `z3` binary on PATH,
3. the bundled node shim over the z3 WASM build (requires `node` and a
   vendored `z3-solver` package; see scripts/setup_solver.sh).

Output parsing is tolerant: `(error ...)` responses (e.g. `(get-model)`
after unsat) are skipped, the first sat/unsat/unknown atom decides the
status, a `(model ...)`/define-fun list is decoded into a variable
assignment, and a flat symbol list after unsat is the core.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

_PKG_DIR = Path(__file__).resolve().parent


class SolverError(Exception):
    pass


@dataclass(frozen=True)
class SolverVerdict:
    status: str                 # "sat" | "unsat" | "unknown"
    model: dict | None = None   # variable -> int | bool (when sat)
    core: tuple = ()            # assertion labels (when unsat)
    reason: str = ""
    wall_time: float = 0.0


def vendor_dir() -> Path:
    """The vendored node_modules directory used by the WASM fallback."""
    env = os.environ.get("LIFTSAT_VENDOR")
    if env:
        return Path(env)
    return _PKG_DIR.parent.parent / "vendor" / "node_modules"


def default_solver_cmd() -> list:
    env = os.environ.get("LIFTSAT_SOLVER")
    if env:
        return shlex.split(env)
    z3 = shutil.which("z3")
    if z3:
        return [z3]
    node = shutil.which("node")
    if node and (vendor_dir() / "z3-solver").is_dir():
        return [node, str(_PKG_DIR / "z3shim.js")]
    raise SolverError(
        "no SMT solver found: set LIFTSAT_SOLVER, put z3 on PATH, or vendor "
        "the z3 WASM build (scripts/setup_solver.sh)")


# -- tolerant s-expression reading


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in "() \t\r\n":
            if c in "()":
                yield c
            i += 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            yield text[i:j + 1]
            i = j + 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < n and text[j] not in "() \t\r\n;":
                j += 1
            yield text[i:j]
            i = j
    yield None


def parse_sexps(text: str) -> list:
    """All top-level s-expressions as nested lists/atom strings,
    ignoring unbalanced trailing garbage."""
    out = []
    stack = []
    for tok in _tokenize(text):
        if tok is None:
            break
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                continue
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    return out


def _atom_value(x):
    if x == "true":
        return True
    if x == "false":
        return False
    if isinstance(x, str):
        try:
            return int(x)
        except ValueError:
            return x
    if isinstance(x, list) and len(x) == 2 and x[0] == "-":
        return -_atom_value(x[1])
    return x


def _decode_model(items) -> dict:
    model = {}
    for it in items:
        if (isinstance(it, list) and len(it) >= 4 and it[0] == "define-fun"
                and isinstance(it[1], str)):
            model[it[1]] = _atom_value(it[4] if len(it) > 4 else it[3])
    return model


def parse_solver_output(text: str) -> SolverVerdict:
    status = None
    model = None
    core = ()
    errors = []
    for item in parse_sexps(text):
        if isinstance(item, str):
            if item in ("sat", "unsat", "unknown") and status is None:
                status = item
            continue
        if not item:
            if status == "unsat" and not core:
                core = ()
            continue
        head = item[0]
        if head == "error":
            errors.append(" ".join(str(x) for x in item[1:]))
            continue
        if head == "model" or (isinstance(head, list)
                               and head and head[0] == "define-fun"):
            body = item[1:] if head == "model" else item
            model = _decode_model(body)
            continue
        if all(isinstance(x, str) for x in item):
            core = tuple(item)
    if status is None:
        raise SolverError(
            "solver produced no verdict: " + (errors[0] if errors
                                              else text[:200]))
    return SolverVerdict(status, model if status == "sat" else None,
                         core if status == "unsat" else (),
                         "; ".join(errors) if status == "unknown" else "")


def run_solver(script: str, cmd: list | None = None,
               timeout: float | None = None) -> SolverVerdict:
    """Run one SMT-LIB script through the external solver."""
    argv = list(cmd) if cmd else default_solver_cmd()
    env = dict(os.environ)
    vend = vendor_dir()
    if vend.is_dir():
        env["NODE_PATH"] = str(vend) + (
            os.pathsep + env["NODE_PATH"] if env.get("NODE_PATH") else "")
    start = time.monotonic()
    with tempfile.NamedTemporaryFile(
            "w", suffix=".smt2", prefix="liftsat_", delete=False) as tf:
        tf.write(script)
        path = tf.name
    try:
        try:
            proc = subprocess.run(argv + [path], capture_output=True,
                                  text=True, timeout=timeout, env=env)
        except subprocess.TimeoutExpired:
            return SolverVerdict("unknown", reason="timeout",
                                 wall_time=time.monotonic() - start)
        except OSError as e:
            raise SolverError(f"cannot run solver {argv[0]}: {e}") from e
        elapsed = time.monotonic() - start
        out = proc.stdout
        if not out.strip():
            raise SolverError(
                f"solver produced no output (exit {proc.returncode}): "
                f"{proc.stderr[:300]}")
        v = parse_solver_output(out)
        return SolverVerdict(v.status, v.model, v.core, v.reason, elapsed)
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
