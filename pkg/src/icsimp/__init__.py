"""Simplification of integrity constraints for updates in deductive databases.

Typical use::

    from icsimp import parse_schema, parse_update, simp, format_theory

    s = parse_schema("<- b(X,Y), b(X,Z), Y != Z.")
    u = parse_update("add b($i,$t).", s)
    print(format_theory(simp(s, u).theory))
"""

from .analysis import L_S, L_SEXT, NEITHER, build_graph, check_stratified, classify, level
from .kernel import NEE, Atom, Const, Denial, Literal, Param, Var, canonicalize, mgu, standardize
from .oracle import WP, CWP, DatabaseInstance, apply_update, standard_model, verify
from .resolution import DerivationBudget, binary_resolvent, derive_fbr
from .rewrite import (
    eliminate_equality,
    eliminate_nonequality,
    expand,
    extended_subsumes,
    reduce,
    subsumes,
)
from .simplify import SimplificationResult, optimize, simp
from .syntax import (
    ParseError,
    SchemaError,
    format_denial,
    format_theory,
    parse_denial,
    parse_denials,
    parse_facts,
    parse_schema,
    parse_update,
)
from .transform import after, after_lang, unfold_ls, unfold_lsext

__all__ = [
    "L_S", "L_SEXT", "NEITHER", "build_graph", "check_stratified", "classify", "level",
    "NEE", "Atom", "Const", "Denial", "Literal", "Param", "Var", "canonicalize", "mgu", "standardize",
    "WP", "CWP", "DatabaseInstance", "apply_update", "standard_model", "verify",
    "DerivationBudget", "binary_resolvent", "derive_fbr",
    "eliminate_equality", "eliminate_nonequality", "expand", "extended_subsumes", "reduce", "subsumes",
    "SimplificationResult", "optimize", "simp",
    "ParseError", "SchemaError", "format_denial", "format_theory", "parse_denial", "parse_denials",
    "parse_facts", "parse_schema", "parse_update",
    "after", "after_lang", "unfold_ls", "unfold_lsext",
]
