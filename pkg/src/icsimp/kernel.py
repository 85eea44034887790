"""Terms, literals, extended denials, substitutions and unification.

Everything here is immutable.  A substitution is a plain ``dict`` mapping
:class:`Var` to terms; ``subst(e, s)`` applies it to any expression.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

EQ = "="


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Param:
    """A free variable standing for an unknown but fixed constant."""

    name: str

    def __str__(self) -> str:
        return "$" + self.name


Term = Union[Var, Const, Param]

# Parameters manufactured from outer-scope variables while an NEE body is
# handled as if it were a denial.
WRAP_PREFIX = "~"

_TERM_RANK = {Var: 0, Param: 1, Const: 2}


def term_key(t: Term) -> tuple:
    return (_TERM_RANK[type(t)], t.name)


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_eq(self) -> bool:
        return self.pred == EQ

    def __str__(self) -> str:
        if self.is_eq:
            return f"{self.args[0]} = {self.args[1]}"
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(str, self.args))})"


def eq_atom(a: Term, b: Term) -> Atom:
    """Equality atom with arguments in canonical orientation."""
    if term_key(b) < term_key(a):
        a, b = b, a
    return Atom(EQ, (a, b))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    @property
    def is_eq(self) -> bool:
        return self.atom.is_eq

    @property
    def is_database(self) -> bool:
        return not self.atom.is_eq

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        if self.is_eq:
            op = "=" if self.positive else "!="
            return f"{self.atom.args[0]} {op} {self.atom.args[1]}"
        return str(self.atom) if self.positive else f"not {self.atom}"


def eq(a: Term, b: Term) -> Literal:
    return Literal(eq_atom(a, b), True)


def neq(a: Term, b: Term) -> Literal:
    return Literal(eq_atom(a, b), False)


@dataclass(frozen=True)
class NEE:
    """Negated existential expression ``not exists(vars)[body]``."""

    vars: tuple
    body: tuple

    def __str__(self) -> str:
        vs = ",".join(map(str, self.vars))
        return f"not exists({vs})[{', '.join(map(str, self.body))}]"


GeneralLiteral = Union[Literal, NEE]


@dataclass(frozen=True)
class Denial:
    """An extended denial ``<- body``; a plain denial has no NEE."""

    body: tuple

    @property
    def literals(self) -> tuple:
        return tuple(g for g in self.body if isinstance(g, Literal))

    @property
    def nees(self) -> tuple:
        return tuple(g for g in self.body if isinstance(g, NEE))

    def __str__(self) -> str:
        if not self.body:
            return "<- true."
        return "<- " + ", ".join(map(str, self.body)) + "."


# --------------------------------------------------------------------------
# substitution


def subst_term(t: Term, s: Mapping) -> Term:
    return s.get(t, t) if isinstance(t, Var) else t


def subst_atom(a: Atom, s: Mapping) -> Atom:
    args = tuple(subst_term(t, s) for t in a.args)
    if a.is_eq:
        return eq_atom(*args)
    return Atom(a.pred, args)


def subst(e, s: Mapping):
    """Apply ``s`` simultaneously to a term, atom, literal, NEE, denial or body.

    Quantified variables of an NEE are never replaced.
    """
    if not s:
        return e
    if isinstance(e, (Var, Const, Param)):
        return subst_term(e, s)
    if isinstance(e, Atom):
        return subst_atom(e, s)
    if isinstance(e, Literal):
        return Literal(subst_atom(e.atom, s), e.positive)
    if isinstance(e, NEE):
        inner = {k: v for k, v in s.items() if k not in e.vars}
        return NEE(e.vars, tuple(subst(g, inner) for g in e.body))
    if isinstance(e, Denial):
        return Denial(tuple(subst(g, s) for g in e.body))
    if isinstance(e, tuple):
        return tuple(subst(g, s) for g in e)
    raise TypeError(f"cannot substitute into {e!r}")


def compose(s1: Mapping, s2: Mapping) -> dict:
    """Substitution equivalent to applying ``s1`` then ``s2``."""
    out = {v: subst_term(t, s2) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if v != t}


# --------------------------------------------------------------------------
# variables


def term_vars(terms: Iterable[Term]) -> Iterator[Var]:
    return (t for t in terms if isinstance(t, Var))


def all_vars(e) -> list:
    """Every variable occurring in ``e`` (free or quantified), first-occurrence order."""
    seen: dict = {}

    def walk(x):
        if isinstance(x, Var):
            seen.setdefault(x, None)
        elif isinstance(x, Atom):
            for t in x.args:
                walk(t)
        elif isinstance(x, Literal):
            walk(x.atom)
        elif isinstance(x, NEE):
            for v in x.vars:
                seen.setdefault(v, None)
            for g in x.body:
                walk(g)
        elif isinstance(x, Denial):
            for g in x.body:
                walk(g)
        elif isinstance(x, tuple):
            for g in x:
                walk(g)

    walk(e)
    return list(seen)


def vars_of(e) -> set:
    """The bound (non-parameter) variables occurring in ``e``."""
    return set(all_vars(e))


def free_vars(e) -> set:
    """Variables of ``e`` not captured by one of its own NEE quantifiers."""
    if isinstance(e, (Var, Const, Param)):
        return {e} if isinstance(e, Var) else set()
    if isinstance(e, Atom):
        return set(term_vars(e.args))
    if isinstance(e, Literal):
        return free_vars(e.atom)
    if isinstance(e, NEE):
        return free_vars(e.body) - set(e.vars)
    if isinstance(e, Denial):
        return free_vars(e.body)
    if isinstance(e, tuple):
        out: set = set()
        for g in e:
            out |= free_vars(g)
        return out
    raise TypeError(e)


def params_of(e) -> set:
    out: set = set()

    def walk(x):
        if isinstance(x, Param):
            out.add(x)
        elif isinstance(x, Atom):
            for t in x.args:
                walk(t)
        elif isinstance(x, Literal):
            walk(x.atom)
        elif isinstance(x, NEE):
            for g in x.body:
                walk(g)
        elif isinstance(x, Denial):
            for g in x.body:
                walk(g)
        elif isinstance(x, tuple):
            for g in x:
                walk(g)

    walk(e)
    return out


def consts_of(e) -> set:
    out: set = set()

    def walk(x):
        if isinstance(x, Const):
            out.add(x)
        elif isinstance(x, Atom):
            for t in x.args:
                walk(t)
        elif isinstance(x, Literal):
            walk(x.atom)
        elif isinstance(x, NEE):
            for g in x.body:
                walk(g)
        elif isinstance(x, (Denial,)):
            for g in x.body:
                walk(g)
        elif isinstance(x, tuple):
            for g in x:
                walk(g)

    walk(e)
    return out


def preds_of(e) -> set:
    """(name, arity, positive) of every non-equality literal, at any depth."""
    out: set = set()

    def walk(x):
        if isinstance(x, Literal):
            if not x.is_eq:
                out.add((x.atom.pred, x.atom.arity))
        elif isinstance(x, NEE):
            for g in x.body:
                walk(g)
        elif isinstance(x, Denial):
            for g in x.body:
                walk(g)
        elif isinstance(x, tuple):
            for g in x:
                walk(g)

    walk(e)
    return out


_fresh = itertools.count(1)


def fresh_var(hint: str = "G") -> Var:
    base = hint.lstrip("_").rstrip("0123456789") or "G"
    return Var(f"_{base}{next(_fresh)}")


def rename_apart(e, avoid: set | None = None):
    """Variant of ``e`` with every variable (quantified ones included) fresh."""
    ren = {v: fresh_var(v.name) for v in all_vars(e) if avoid is None or v in avoid}
    return rename(e, ren)


def rename(e, ren: Mapping):
    """Apply a renaming that also reaches quantified variables."""
    if not ren:
        return e
    if isinstance(e, NEE):
        return NEE(tuple(ren.get(v, v) for v in e.vars), tuple(rename(g, ren) for g in e.body))
    if isinstance(e, Denial):
        return Denial(tuple(rename(g, ren) for g in e.body))
    if isinstance(e, tuple):
        return tuple(rename(g, ren) for g in e)
    return subst(e, ren)


def standardize_apart(c1, c2):
    """Rename ``c2`` so that it shares no variable with ``c1``."""
    clash = vars_of(c1) & vars_of(c2)
    if not clash:
        return c2
    return rename_apart(c2, clash)


def standardize(d: Denial) -> Denial:
    """Rename NEE quantifiers so that none is reused anywhere else in ``d``."""
    used: set = set()
    for g in d.body:
        if isinstance(g, Literal):
            used |= vars_of(g)
    body = tuple(g if isinstance(g, Literal) else _standardize_nee(g, used) for g in d.body)
    return Denial(body)


def _standardize_nee(n: NEE, used: set) -> NEE:
    ren = {}
    for v in n.vars:
        if v in used:
            ren[v] = fresh_var(v.name)
    n = rename(n, ren) if ren else n
    used |= set(n.vars)
    # free variables of the body are in ``used`` already
    for g in n.body:
        if isinstance(g, Literal):
            used |= vars_of(g)
    body = tuple(g if isinstance(g, Literal) else _standardize_nee(g, used) for g in n.body)
    return NEE(n.vars, body)


def is_standardized(d: Denial) -> bool:
    seen: set = set()
    outer = {v for g in d.body if isinstance(g, Literal) for v in vars_of(g)}

    def walk(n: NEE, visible: set) -> bool:
        for v in n.vars:
            if v in seen or v in visible:
                return False
            seen.add(v)
        inner = visible | set(n.vars)
        return all(walk(g, inner) for g in n.body if isinstance(g, NEE))

    return all(walk(g, outer) for g in d.body if isinstance(g, NEE))


# --------------------------------------------------------------------------
# unification


def _walk(t: Term, s: Mapping) -> Term:
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def unify_terms(pairs: Iterable[tuple], s: Mapping | None = None) -> dict | None:
    """Most general unifier of the term pairs, extending ``s``.

    Constants and parameters are rigid; two distinct rigid terms never unify.
    """
    s = dict(s or {})
    for a, b in pairs:
        a, b = _walk(a, s), _walk(b, s)
        if a == b:
            continue
        if isinstance(a, Var):
            s[a] = b
        elif isinstance(b, Var):
            s[b] = a
        else:
            return None
    return {v: _walk(t, s) for v, t in s.items()}


def mgu(a1: Atom, a2: Atom, s: Mapping | None = None) -> dict | None:
    """Most general unifier of two atoms, or ``None``.

    Equality is symmetric: callers wanting both orientations use
    :func:`unifiers`.
    """
    if a1.pred != a2.pred or a1.arity != a2.arity:
        return None
    return unify_terms(zip(a1.args, a2.args), s)


def unifiers(a1: Atom, a2: Atom, s: Mapping | None = None) -> list:
    """All orientation-distinct mgus; equality atoms are tried both ways."""
    out = []
    u = mgu(a1, a2, s)
    if u is not None:
        out.append(u)
    if a1.is_eq and a2.is_eq:
        flipped = Atom(EQ, (a2.args[1], a2.args[0]))
        u = mgu(a1, flipped, s)
        if u is not None and u not in out:
            out.append(u)
    return out


def unify_general(g1: GeneralLiteral, g2: GeneralLiteral, s: Mapping | None = None) -> dict | None:
    """Unify two general literals.

    An NEE with a single-literal body unifies with a negative literal: its
    quantified variables become instantiable and the quantifier disappears.
    """
    if isinstance(g1, Literal) and isinstance(g2, Literal):
        if g1.positive != g2.positive:
            return None
        return mgu(g1.atom, g2.atom, s)
    if isinstance(g1, NEE) and isinstance(g2, NEE):
        if len(g1.body) != len(g2.body):
            return None
        out = dict(s or {})
        for a, b in zip(g1.body, g2.body):
            out = unify_general(a, b, out)
            if out is None:
                return None
        return out
    nee, lit = (g1, g2) if isinstance(g1, NEE) else (g2, g1)
    if lit.positive or len(nee.body) != 1 or not isinstance(nee.body[0], Literal):
        return None
    return mgu(nee.body[0].atom, lit.atom, s)


# --------------------------------------------------------------------------
# wrapping outer variables as parameters


def wrap(e, variables: Iterable[Var]):
    """Turn the given variables into parameters (``~X``)."""
    return subst(e, {v: Param(WRAP_PREFIX + v.name) for v in variables})


def unwrap(e):
    """Inverse of :func:`wrap`."""
    ps = {p for p in params_of(e) if p.name.startswith(WRAP_PREFIX)}
    if not ps:
        return e
    return _replace_params(e, {p: Var(p.name[len(WRAP_PREFIX):]) for p in ps})


def _replace_params(e, m: Mapping):
    if isinstance(e, Param):
        return m.get(e, e)
    if isinstance(e, (Var, Const)):
        return e
    if isinstance(e, Atom):
        args = tuple(_replace_params(t, m) for t in e.args)
        return eq_atom(*args) if e.is_eq else Atom(e.pred, args)
    if isinstance(e, Literal):
        return Literal(_replace_params(e.atom, m), e.positive)
    if isinstance(e, NEE):
        return NEE(e.vars, tuple(_replace_params(g, m) for g in e.body))
    if isinstance(e, Denial):
        return Denial(tuple(_replace_params(g, m) for g in e.body))
    if isinstance(e, tuple):
        return tuple(_replace_params(g, m) for g in e)
    raise TypeError(e)


def replace_param(e, p: Param, t: Term):
    return _replace_params(e, {p: t})


# --------------------------------------------------------------------------
# canonical form


def _group(g: GeneralLiteral) -> int:
    if isinstance(g, NEE):
        return 2
    return 1 if g.is_eq else 0


def _shape(g, names: Mapping) -> tuple:
    def tk(t):
        if isinstance(t, Var):
            n = names.get(t)
            return (0, "" if n is None else n)
        return term_key(t)

    if isinstance(g, Literal):
        a = g.atom
        args = tuple(tk(t) for t in a.args)
        if a.is_eq:
            args = tuple(sorted(args))  # orientation depends on the old names
        return (_group(g), a.pred, a.arity, not g.positive, args)
    return (2, len(g.body), tuple(_shape(x, names) for x in g.body))


def _sort_body(body: tuple, names: Mapping) -> tuple:
    out = []
    for g in body:
        if isinstance(g, NEE):
            g = NEE(g.vars, _sort_body(g.body, names))
        out.append(g)
    return tuple(sorted(out, key=lambda g: _shape(g, names)))


def _number(body: tuple) -> dict:
    names: dict = {}

    def visit(gs):
        for g in gs:
            if isinstance(g, Literal):
                for v in term_vars(g.atom.args):
                    if v not in names:
                        names[v] = f"{len(names) + 1:04d}"
        for g in gs:
            if isinstance(g, NEE):
                # by first occurrence, so the quantifier order does not matter
                visit(g.body)
                for v in g.vars:
                    if v not in names:
                        names[v] = f"{len(names) + 1:04d}"

    visit(body)
    return names


def canonicalize(d: Denial, prefix: str = "V") -> Denial:
    """Deterministic variant of ``d``: sorted body, variables ``V1, V2, ...``.

    NEE quantifier lists are sorted and deduplicated as well.
    """
    d = standardize(d)
    body = _sort_body(d.body, {})
    names: dict = {}
    for _ in range(4):
        names = _number(body)
        new = _sort_body(body, names)
        if new == body:
            break
        body = new
    names = _number(body)
    ren = {v: Var(f"{prefix}{int(n)}") for v, n in names.items()}
    out = rename(body, ren)
    return Denial(_sort_quantifiers(out))


def _sort_quantifiers(body: tuple) -> tuple:
    out = []
    for g in body:
        if isinstance(g, NEE):
            qs = sorted(set(g.vars), key=lambda v: (len(v.name), v.name))
            g = NEE(tuple(qs), _sort_quantifiers(g.body))
        out.append(g)
    return tuple(out)


def size(e) -> int:
    """General-literal count; an NEE counts one plus the size of its body."""
    if isinstance(e, Literal):
        return 1
    if isinstance(e, NEE):
        return 1 + sum(size(g) for g in e.body)
    if isinstance(e, Denial):
        return sum(size(g) for g in e.body)
    if isinstance(e, tuple):
        return sum(size(g) for g in e)
    raise TypeError(e)


def level_of_denial(d: Denial) -> int:
    def depth(n: NEE) -> int:
        return 1 + max((depth(g) for g in n.body if isinstance(g, NEE)), default=0)

    return max((depth(g) for g in d.body if isinstance(g, NEE)), default=0)
