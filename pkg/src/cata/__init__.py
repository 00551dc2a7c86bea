"""Satisfiability of quantifier-free formulas over algebraic data types
abstracted by catamorphisms, decided by incremental unrolling against an
external SMT solver."""

from .backend import SolverConfig
from .engine import EngineConfig, Verdict, decide
from .frontend import parse_script, parse_term, print_term

__version__ = "0.1.0"

__all__ = ["SolverConfig", "EngineConfig", "Verdict", "decide", "parse_script", "parse_term",
           "print_term", "__version__"]
