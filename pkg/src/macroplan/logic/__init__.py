"""Restricted answer-set rule engine: parse, ground, evaluate, optimize."""

from .errors import (
    EngineError,
    ParseError,
    SafetyError,
    StratificationError,
    TooManyChoices,
    Unsatisfiable,
    UniverseError,
)
from .evaluate import evaluate_stratified, match_body
from .ground import Universe, ground, sort_of_variable
from .optimal import MAX_CHOICE_ATOMS, OptimalResult, solve_optimal
from .parser import parse_program
from .stratify import stratify
from .syntax import (
    TIME_VAR,
    Arith,
    Atom,
    ChoiceElement,
    ChoiceRule,
    Cmp,
    Compound,
    Not,
    Program,
    Rule,
    Var,
    WeakConstraint,
    atom_text,
    atom_to_term,
    is_ground_atom,
    literal_text,
    rule_text,
    subst_atom,
    term_text,
    term_to_atom,
)

__all__ = [
    "EngineError",
    "ParseError",
    "SafetyError",
    "StratificationError",
    "TooManyChoices",
    "Unsatisfiable",
    "UniverseError",
    "evaluate_stratified",
    "match_body",
    "Universe",
    "ground",
    "sort_of_variable",
    "MAX_CHOICE_ATOMS",
    "OptimalResult",
    "solve_optimal",
    "parse_program",
    "stratify",
    "TIME_VAR",
    "Arith",
    "Atom",
    "ChoiceElement",
    "ChoiceRule",
    "Cmp",
    "Compound",
    "Not",
    "Program",
    "Rule",
    "Var",
    "WeakConstraint",
    "atom_text",
    "atom_to_term",
    "is_ground_atom",
    "literal_text",
    "rule_text",
    "subst_atom",
    "term_text",
    "term_to_atom",
]
