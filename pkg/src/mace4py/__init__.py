"""Finite model search for first-order clauses with equality."""

from .clausifier import Clause, Literal, clausify, clauses_from_program, term_to_clause
from .frontend import OpTable, ParseError, parse_input, parse_term, print_term
from .grounder import build_state
from .models import Interpretation, evaluate_clause, is_model, isomorphic, parse_portable, print_portable, print_standard
from .options import Options
from .search import Limits, SelectionConfig, search

__version__ = "0.1.0"

__all__ = [
    "Clause",
    "Interpretation",
    "Limits",
    "Literal",
    "OpTable",
    "Options",
    "ParseError",
    "SelectionConfig",
    "build_state",
    "clausify",
    "clauses_from_program",
    "evaluate_clause",
    "is_model",
    "isomorphic",
    "parse_input",
    "parse_portable",
    "parse_term",
    "print_portable",
    "print_standard",
    "print_term",
    "search",
    "term_to_clause",
]
