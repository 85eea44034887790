"""Quantified formulas over literals and their normalization to extended denials.

Rule bodies, update definitions and unfolded constraints are formulas with
``and``/``or``/``not``/``exists``.  :func:`normalize` turns a formula into
a disjunction of conjunctions of general literals; negated subformulas with
local variables become NEEs, everything else is distributed away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .kernel import (
    NEE,
    Atom,
    Denial,
    Literal,
    Var,
    free_vars,
    fresh_var,
    rename,
    standardize,
    subst,
    term_vars,
)


@dataclass(frozen=True)
class FLit:
    lit: Literal


@dataclass(frozen=True)
class FAnd:
    parts: tuple


@dataclass(frozen=True)
class FOr:
    parts: tuple


@dataclass(frozen=True)
class FNot:
    sub: object


@dataclass(frozen=True)
class FExists:
    vars: tuple
    sub: object


TRUE = FAnd(())
FALSE = FOr(())


def conj(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, FAnd) else (p,))
    return flat[0] if len(flat) == 1 else FAnd(tuple(flat))


def disj(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, FOr) else (p,))
    return flat[0] if len(flat) == 1 else FOr(tuple(flat))


def fvars(f) -> set:
    """Free variables of a formula."""
    if isinstance(f, FLit):
        return set(term_vars(f.lit.atom.args))
    if isinstance(f, (FAnd, FOr)):
        out: set = set()
        for p in f.parts:
            out |= fvars(p)
        return out
    if isinstance(f, FNot):
        return fvars(f.sub)
    if isinstance(f, FExists):
        return fvars(f.sub) - set(f.vars)
    raise TypeError(f)


def fsubst(f, s):
    """Substitute free variables; quantified ones are left alone."""
    if isinstance(f, FLit):
        return FLit(subst(f.lit, s))
    if isinstance(f, FAnd):
        return FAnd(tuple(fsubst(p, s) for p in f.parts))
    if isinstance(f, FOr):
        return FOr(tuple(fsubst(p, s) for p in f.parts))
    if isinstance(f, FNot):
        return FNot(fsubst(f.sub, s))
    if isinstance(f, FExists):
        inner = {k: v for k, v in s.items() if k not in f.vars}
        return FExists(f.vars, fsubst(f.sub, inner))
    raise TypeError(f)


def freshen_bound(f):
    """Give every quantified variable of ``f`` a fresh name."""
    if isinstance(f, FLit):
        return f
    if isinstance(f, FAnd):
        return FAnd(tuple(freshen_bound(p) for p in f.parts))
    if isinstance(f, FOr):
        return FOr(tuple(freshen_bound(p) for p in f.parts))
    if isinstance(f, FNot):
        return FNot(freshen_bound(f.sub))
    if isinstance(f, FExists):
        ren = {v: fresh_var(v.name) for v in f.vars}
        return FExists(tuple(ren[v] for v in f.vars), freshen_bound(fsubst(f.sub, ren)))
    raise TypeError(f)


def atoms_of(f, positive: bool = True):
    """Yield ``(atom, positive)`` for every atom occurrence, tracking polarity."""
    if isinstance(f, FLit):
        yield f.lit.atom, f.lit.positive == positive
    elif isinstance(f, (FAnd, FOr)):
        for p in f.parts:
            yield from atoms_of(p, positive)
    elif isinstance(f, FNot):
        yield from atoms_of(f.sub, not positive)
    elif isinstance(f, FExists):
        yield from atoms_of(f.sub, positive)
    else:
        raise TypeError(f)


def map_atoms(f, fn: Callable[[Atom], object]):
    """Replace each atom by ``fn(atom)`` (a formula); polarity is kept."""
    if isinstance(f, FLit):
        r = fn(f.lit.atom)
        return r if f.lit.positive else FNot(r)
    if isinstance(f, FAnd):
        return FAnd(tuple(map_atoms(p, fn) for p in f.parts))
    if isinstance(f, FOr):
        return FOr(tuple(map_atoms(p, fn) for p in f.parts))
    if isinstance(f, FNot):
        return FNot(map_atoms(f.sub, fn))
    if isinstance(f, FExists):
        return FExists(f.vars, map_atoms(f.sub, fn))
    raise TypeError(f)


def from_body(body: tuple):
    """Formula for a conjunction of general literals."""
    parts = []
    for g in body:
        if isinstance(g, Literal):
            parts.append(FLit(g))
        else:
            parts.append(FNot(FExists(g.vars, from_body(g.body))))
    return conj(*parts) if parts else TRUE


Expander = Callable[[Atom], Optional[object]]


def normalize(f, expand: Expander | None = None) -> list:
    """Disjunctive normal form over general literals.

    ``expand`` maps an atom to the formula replacing it (or ``None`` to keep
    it); this is how intensional predicates get unfolded.  A negated
    disjunct keeps its local variables under an NEE; without local
    variables it is distributed instead.
    """
    if isinstance(f, FLit):
        lit = f.lit
        if expand is not None and not lit.is_eq:
            r = expand(lit.atom)
            if r is not None:
                return normalize(r if lit.positive else FNot(r), expand)
        return [(lit,)]
    if isinstance(f, FAnd):
        out = [()]
        for p in f.parts:
            branches = normalize(p, expand)
            out = _dedup(a + b for a in out for b in branches)
            if not out:
                break
        return out
    if isinstance(f, FOr):
        out = []
        for p in f.parts:
            out.extend(normalize(p, expand))
        return _dedup(out)
    if isinstance(f, FExists):
        ren = {v: fresh_var(v.name) for v in f.vars}
        return normalize(fsubst(f.sub, ren), expand)
    if isinstance(f, FNot):
        sub = f.sub
        # push negation inwards first; normalizing the negated formula and
        # negating its DNF multiplies out every branch
        if isinstance(sub, FNot):
            return normalize(sub.sub, expand)
        if isinstance(sub, FAnd):
            return normalize(FOr(tuple(FNot(p) for p in sub.parts)), expand)
        if isinstance(sub, FOr):
            return normalize(FAnd(tuple(FNot(p) for p in sub.parts)), expand)
        if isinstance(sub, FLit):
            return normalize(FLit(sub.lit.negate()), expand)
        outer = fvars(f.sub)
        out = [()]
        for branch in normalize(f.sub, expand):
            local = free_vars(branch) - outer
            if local:
                choices = [(NEE(tuple(sorted(local, key=lambda v: v.name)), branch),)]
            else:
                choices = _dedup(_negate(g) for g in branch)
            out = _dedup(a + b for a in out for b in choices)
            if not out:
                break
        return out
    raise TypeError(f)


def _dedup(branches) -> list:
    # identical disjuncts are redundant; variants are kept
    return list(dict.fromkeys(branches))


def _negate(g) -> tuple:
    if isinstance(g, Literal):
        return (g.negate(),)
    # not not exists(Y)[B] is B with Y existential at this level
    ren = {v: fresh_var(v.name) for v in g.vars}
    return rename(g, ren).body


def to_denials(f, expand: Expander | None = None) -> list:
    """The extended denials equivalent to ``<- f``."""
    return [standardize(Denial(b)) for b in normalize(f, expand)]
