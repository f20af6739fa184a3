"""Finite model finding for typed first-order logic over compressed domains.

The pipeline: parse a typed problem with cardinality/sum aggregates,
translate it to an equisatisfiable sentence over lifted domains whose
elements carry multiplicities, ground that to QF_NIA, drive an external
SMT solver, grow the lifted domains along unsat cores, and expand any
lifted model losslessly back to a concrete one -- which is re-verified
against the original theory before being reported.

The most common entry points are :func:`parse_problem`,
:func:`solve_iterative` and :func:`verify_model`; the ``corpus`` module
holds the benchmark families used throughout the test suite.
"""

from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as _dist_version

from .evaluator import (EvalError, VerifyResult, brute_force_sat,
                        count_structures, eval_formula, verify_model)
from .grounding import GroundingError, ground
from .lifter import LiftedSentence, TranslateError, fmt_lifted, translate
from .monotype import MonoMeta, from_monotype, monotype
from .parser import ParseError, parse_problem
from .search import (METHOD_NAMES, SearchError, SearchOptions, SearchResult,
                     check_and_expand, solve_iterative, solve_portfolio)
from .solver import SolverError, default_solver_cmd, run_solver
from .structures import (ConcreteStructure, CyclePermutation, LiftedStructure,
                         StructureError, check_function_regularity,
                         expand_structure, is_automorphism, is_backbone,
                         lift_along, lift_trivial, structure_from_json)
from .syntax import Problem, ProblemError, fmt_problem

try:
    __version__ = _dist_version("liftsat")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.1.0"

__all__ = [
    # language
    "Problem", "ProblemError", "ParseError", "parse_problem", "fmt_problem",
    # lifted translation
    "LiftedSentence", "TranslateError", "translate", "fmt_lifted",
    # grounding and solving
    "GroundingError", "ground", "SolverError", "default_solver_cmd",
    "run_solver",
    # search loop
    "METHOD_NAMES", "SearchError", "SearchOptions", "SearchResult",
    "check_and_expand", "solve_iterative", "solve_portfolio",
    # structures, expansion, lifting
    "ConcreteStructure", "CyclePermutation", "LiftedStructure",
    "StructureError", "check_function_regularity", "expand_structure",
    "is_automorphism", "is_backbone", "lift_along", "lift_trivial",
    "structure_from_json",
    # evaluation and verification
    "EvalError", "VerifyResult", "brute_force_sat", "count_structures",
    "eval_formula", "verify_model",
    # single-type collapse
    "MonoMeta", "monotype", "from_monotype",
    "__version__",
]
