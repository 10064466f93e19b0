"""Hilbert calculi for distributive lattices with negation.

Compiles equational presentations into finite Hilbert calculi, checks and
searches derivations, and tests rules against enumerated finite algebras.
"""
from .syntax import Formula, Var, Neg, And, Or, BOT, TOP, Equation, parse, to_text
from .calculi import (
    Rule, RuleSet, preset, builtin, rules_from_equations, closure_upto,
    sdm_calculus, ockham_calculus, g_layers,
)
from .algebra import FiniteAlgebra, Matrix, validate, leibniz, leibniz_sdm, star_algebra
from .semantics import (
    Consecution, Mode, FILTER, ASSERTIONAL, Witness, matrix_entails, order_entails,
    assertional_entails, filter_entails, rule_sound,
)
from .search import EnumerationSpec, Exhausted, enumerate_algebras, algebras, find_countermodel
from .engine import (
    Derivation, SearchBudget, check_derivation, prove, parse_script, format_script,
    resolve_ruleset, corpus_replay,
)

__all__ = [
    "Formula", "Var", "Neg", "And", "Or", "BOT", "TOP", "Equation", "parse", "to_text",
    "Rule", "RuleSet", "preset", "builtin", "rules_from_equations", "closure_upto",
    "sdm_calculus", "ockham_calculus", "g_layers",
    "FiniteAlgebra", "Matrix", "validate", "leibniz", "leibniz_sdm", "star_algebra",
    "Consecution", "Mode", "FILTER", "ASSERTIONAL", "Witness", "matrix_entails",
    "order_entails", "assertional_entails", "filter_entails", "rule_sound",
    "EnumerationSpec", "Exhausted", "enumerate_algebras", "algebras", "find_countermodel",
    "Derivation", "SearchBudget", "check_derivation", "prove", "parse_script",
    "format_script", "resolve_ruleset", "corpus_replay",
]

__version__ = "0.1.0"
