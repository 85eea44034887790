"""After (weakest precondition by substitution) and unfolding of intensional predicates."""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import L_S, L_SEXT, NEITHER, classify
from .formula import FAnd, FExists, FLit, FNot, FOr, atoms_of, from_body, to_denials
from .kernel import NEE, Atom, Denial, Literal
from .syntax import Rule, Schema, SchemaError, Update

PRIME = "'"


@dataclass
class WPResult:
    schema: Schema
    theory: list = field(default_factory=list)
    renaming: dict = field(default_factory=dict)


def rename_preds(e, m: dict):
    """Rename predicate symbols in a formula, denial, NEE or literal."""
    if not m:
        return e
    if isinstance(e, Literal):
        a = e.atom
        return Literal(Atom(m.get(a.pred, a.pred), a.args), e.positive)
    if isinstance(e, NEE):
        return NEE(e.vars, tuple(rename_preds(g, m) for g in e.body))
    if isinstance(e, Denial):
        return Denial(tuple(rename_preds(g, m) for g in e.body))
    if isinstance(e, FLit):
        return FLit(rename_preds(e.lit, m))
    if isinstance(e, FAnd):
        return FAnd(tuple(rename_preds(p, m) for p in e.parts))
    if isinstance(e, FOr):
        return FOr(tuple(rename_preds(p, m) for p in e.parts))
    if isinstance(e, FNot):
        return FNot(rename_preds(e.sub, m))
    if isinstance(e, FExists):
        return FExists(e.vars, rename_preds(e.sub, m))
    raise TypeError(e)


def _dependents(s: Schema, preds: set) -> set:
    """Intensional predicates depending, directly or not, on ``preds``."""
    out = set(preds)
    changed = True
    while changed:
        changed = False
        for r in s.rules:
            if r.head.pred not in out and any(a.pred in out for a, _ in atoms_of(r.body)):
                out.add(r.head.pred)
                changed = True
    return out - set(preds)


def _primed(name: str, taken: set) -> str:
    new = name + PRIME
    while new in taken:
        new += PRIME
    return new


def _relevant_rules(rules: list, constraints: list) -> list:
    need: set = set()
    todo = [g.atom.pred for d in constraints for g in _lits(d.body)]
    by_head: dict = {}
    for r in rules:
        by_head.setdefault(r.head.pred, []).append(r)
    while todo:
        p = todo.pop()
        if p in need:
            continue
        need.add(p)
        for r in by_head.get(p, []):
            todo.extend(a.pred for a, _ in atoms_of(r.body))
    return [r for r in rules if r.head.pred in need]


def _lits(body):
    for g in body:
        if isinstance(g, Literal):
            yield g
        else:
            yield from _lits(g.body)


def after(s: Schema, u: Update) -> WPResult:
    """Replace updated and affected intensional predicates by primed copies.

    The result schema's rules define each primed predicate: an updated
    ``p`` by its update formula over the current state, an affected
    intensional ``q`` by its own rules over primed predicates.
    """
    arities = s.arities()
    for p in u.entries:
        if p not in arities:
            raise SchemaError(f"update names unknown predicate {p}")
    u.validate(s)
    updated = set(u.entries)
    affected = _dependents(s, updated)
    taken = set(arities)
    m: dict = {}
    for p in sorted(updated | affected):
        m[p] = _primed(p, taken)
        taken.add(m[p])
    rules = list(s.rules)
    for r in s.rules:
        if r.head.pred in affected:
            rules.append(Rule(Atom(m[r.head.pred], r.head.args), rename_preds(r.body, m)))
    for p, d in u.entries.items():
        rules.append(Rule(Atom(m[p], d.head), d.formula))
    constraints = [rename_preds(d, m) for d in s.constraints]
    schema = Schema(_relevant_rules(rules, constraints), constraints, [])
    return WPResult(schema, [], m)


def _expander(s: Schema):
    defs = s.definitions()

    def expand(atom: Atom):
        d = defs.get(atom.pred)
        return None if d is None else d.instantiate(atom.args)

    return expand


def unfold(s: Schema, denials: list | None = None) -> list:
    """Unfold every intensional predicate of ``denials`` (default: the
    schema's constraints) into extended denials over extensional predicates."""
    expand = _expander(s)
    out: list = []
    for d in s.constraints if denials is None else denials:
        out.extend(to_denials(from_body(d.body), expand))
    return out


def _require(s: Schema, allowed: tuple, what: str) -> None:
    v = classify(s)
    if v.schema_class not in allowed:
        raise SchemaError(f"{what}: {v.report()}")


def unfold_ls(s: Schema) -> list:
    _require(s, (L_S,), "unfold_ls needs a schema in L_S")
    return unfold(s)


def unfold_lsext(s: Schema) -> list:
    _require(s, (L_S, L_SEXT), "unfold_lsext needs a non-recursive schema")
    return unfold(s)


def unfold_assumptions(s: Schema) -> list:
    return unfold(s, s.assumptions)


def after_lang(s: Schema, u: Update, lang: str | None = None) -> WPResult:
    """After followed by the unfolding for ``lang`` (chosen from the update
    graph when omitted)."""
    v = classify(s, u)
    if lang is None:
        lang = v.update_class
    if v.update_class == NEITHER or (lang == L_S and v.update_class != L_S):
        raise SchemaError(f"update outside {lang}: {v.report()}")
    res = after(s, u)
    res.theory = unfold(res.schema)
    return res
