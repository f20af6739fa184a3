"""Shared fixtures: make sure an SMT solver backend is reachable before
the tests that need one run, vendoring the WASM build on first use."""

import shutil
import subprocess
from pathlib import Path

import pytest

from liftsat.solver import SolverError, default_solver_cmd, vendor_dir

REPO = Path(__file__).resolve().parent.parent


def _provision() -> bool:
    try:
        default_solver_cmd()
        return True
    except SolverError:
        pass
    npm = shutil.which("npm")
    if npm is None:
        return False
    target = vendor_dir().parent
    target.mkdir(parents=True, exist_ok=True)
    proc = subprocess.run(
        [npm, "install", "--prefix", str(target), "--no-save", "z3-solver@5"],
        capture_output=True, text=True, timeout=600)
    if proc.returncode != 0:
        return False
    try:
        default_solver_cmd()
        return True
    except SolverError:
        return False


@pytest.fixture(scope="session")
def solver():
    """Skip solver-dependent tests when no backend can be provisioned."""
    if not _provision():
        pytest.skip("no SMT solver backend available")
    return default_solver_cmd()
