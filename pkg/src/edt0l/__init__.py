"""Rational-control L-systems and solution languages of equations in groups."""
from .equations import EquationSystem, load_system, oracle_solutions, parse_system, preprocess
from .grammar import (EMPTY, LSystem, Table, apply_table, classify, classify_language,
                      enumerate_language, is_deterministic, parse, serialize)
from .groups import GroupBundle, build_free_bundle, resolve_bundle, surface_bundle
from .nfa import BudgetExceeded, Nfa
from .pipeline import PipelineConfig, Target, solve_covering, solve_full
from .solver import FreeSolverRequest, solve_free

__all__ = [
    "EMPTY", "LSystem", "Table", "Nfa", "BudgetExceeded", "apply_table", "classify",
    "classify_language", "enumerate_language", "is_deterministic", "parse", "serialize",
    "GroupBundle", "build_free_bundle", "resolve_bundle", "surface_bundle",
    "EquationSystem", "load_system", "parse_system", "preprocess", "oracle_solutions",
    "FreeSolverRequest", "solve_free", "PipelineConfig", "Target", "solve_covering", "solve_full",
]
