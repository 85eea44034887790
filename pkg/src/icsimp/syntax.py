"""Text syntax for schemata, updates and fact files.

Schema files (``.sch``)::

    % rules; several rules for one predicate form a disjunctive definition
    married_man(X) :- married_to(X, Y).
    % integrity constraints in (extended) denial form
    <- parent(X), not exists(Y)[child_of(X, Y)].
    % trusted hypotheses, assumed to hold before and after every update
    assume <- a(1, 5).

Update files (``.upd``)::

    add man($a).
    del b($i, $t).
    update b(X, Y) <= b(X, Y), X != 5.

Fact files (``.edb``) hold one ground atom per statement: ``p(a, b).``

Variables start with an uppercase letter or ``_``, parameters with ``$``;
``,`` and ``&`` are conjunction, ``|`` disjunction, ``%`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .formula import (
    FALSE,
    TRUE,
    FAnd,
    FExists,
    FLit,
    FNot,
    FOr,
    atoms_of,
    conj,
    disj,
    freshen_bound,
    fsubst,
    fvars,
    normalize,
    to_denials,
)
from .kernel import (
    EQ,
    NEE,
    Atom,
    Const,
    Denial,
    Literal,
    Param,
    Var,
    eq,
    fresh_var,
    standardize,
    term_vars,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


class SchemaError(ValueError):
    """A well-formed text describing an invalid schema or update."""


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: object  # formula

    def __str__(self) -> str:
        return f"{self.head} :- {format_formula(self.body)}."


@dataclass(frozen=True)
class Definition:
    """The defining formula of a predicate over distinct head variables."""

    pred: str
    head: tuple
    formula: object

    def instantiate(self, args: Iterable) -> object:
        f = freshen_bound(self.formula)
        return fsubst(f, dict(zip(self.head, args)))


def rules_to_definition(pred: str, rules: list) -> Definition:
    arity = rules[0].head.arity
    head = tuple(Var(f"H{i + 1}") for i in range(arity))
    disjuncts = []
    for r in rules:
        ren = {v: fresh_var(v.name) for v in set(term_vars(r.head.args)) | fvars(r.body)}
        hargs = [ren.get(t, t) if isinstance(t, Var) else t for t in r.head.args]
        body = fsubst(r.body, ren)
        eqs = []
        s = {}
        for h, t in zip(head, hargs):
            if isinstance(t, Var) and t not in s:
                s[t] = h
            else:
                eqs.append(FLit(eq(h, s.get(t, t))))
        body = fsubst(body, s)
        local = tuple(sorted(fvars(body) - set(head), key=lambda v: v.name))
        inner = conj(body, *eqs) if eqs else body
        disjuncts.append(FExists(local, inner) if local else inner)
    return Definition(pred, head, disj(*disjuncts) if disjuncts else FALSE)


@dataclass
class Schema:
    rules: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)

    @property
    def idb_preds(self) -> set:
        return {r.head.pred for r in self.rules}

    def definitions(self) -> dict:
        by_pred: dict = {}
        for r in self.rules:
            by_pred.setdefault(r.head.pred, []).append(r)
        return {p: rules_to_definition(p, rs) for p, rs in by_pred.items()}

    def arities(self) -> dict:
        out: dict = {}
        for a, _ in self._atoms():
            out.setdefault(a.pred, a.arity)
        return out

    def edb_preds(self) -> set:
        idb = self.idb_preds
        return {p for p in self.arities() if p not in idb and p != EQ}

    def _atoms(self):
        for r in self.rules:
            yield r.head, True
            yield from atoms_of(r.body)
        for d in self.constraints + self.assumptions:
            yield from _denial_atoms(d)

    def validate(self) -> None:
        ar: dict = {}
        for a, _ in self._atoms():
            if a.pred == EQ:
                if a.arity != 2:
                    raise SchemaError("equality is binary")
                continue
            if ar.setdefault(a.pred, a.arity) != a.arity:
                raise SchemaError(f"predicate {a.pred} used with arities {ar[a.pred]} and {a.arity}")
        for r in self.rules:
            if r.head.pred == EQ:
                raise SchemaError("equality cannot be defined by a rule")
            for branch in normalize(r.body):
                bound = safe_vars(branch, set())
                if bound is None or not set(term_vars(r.head.args)) <= bound:
                    raise SchemaError(f"rule is not range restricted: {r}")
        for d in self.constraints + self.assumptions:
            if safe_vars(d.body, set()) is None:
                raise SchemaError(f"constraint is not safe: {format_denial(d)}")

    def __str__(self) -> str:
        return format_schema(self)


def _denial_atoms(d):
    for g in d.body if isinstance(d, Denial) else d:
        if isinstance(g, Literal):
            yield g.atom, g.positive
        else:
            yield from _denial_atoms(g.body)


def safe_vars(body: tuple, outer: set) -> set | None:
    """Variables bound by ``body`` (plus ``outer``), or ``None`` if unsafe.

    A variable is bound when it occurs in a positive database literal or is
    equated to a bound term; each NEE must bind its own variables.
    """
    bound = set(outer)
    lits = [g for g in body if isinstance(g, Literal)]
    for g in lits:
        if g.positive and not g.is_eq:
            bound |= set(term_vars(g.atom.args))
    changed = True
    while changed:
        changed = False
        for g in lits:
            if g.positive and g.is_eq:
                a, b = g.atom.args
                ok_a = not isinstance(a, Var) or a in bound
                ok_b = not isinstance(b, Var) or b in bound
                if ok_a != ok_b:
                    bound |= {t for t in (a, b) if isinstance(t, Var)}
                    changed = True
    for g in lits:
        if not set(term_vars(g.atom.args)) <= bound:
            return None
    for g in body:
        if isinstance(g, NEE):
            inner = safe_vars(g.body, bound)
            if inner is None or not set(g.vars) <= inner:
                return None
    return bound


@dataclass
class Update:
    """Predicate updates ``p(X) <= p'(X)``, keyed by the updated predicate."""

    entries: dict = field(default_factory=dict)

    def validate(self, schema: Schema | None = None) -> None:
        for p, d in self.entries.items():
            for branch in normalize(d.formula):
                bound = safe_vars(branch, set())
                if bound is None or not set(d.head) <= bound:
                    raise SchemaError(f"update of {p} is not range restricted")
            if schema is not None:
                if p in schema.idb_preds:
                    raise SchemaError(f"cannot update intensional predicate {p}")
                ar = schema.arities()
                if p in ar and ar[p] != len(d.head):
                    raise SchemaError(f"update of {p} has the wrong arity")

    def __str__(self) -> str:
        return format_update(self)


def add_update(atom: Atom) -> Definition:
    head = tuple(Var(f"X{i + 1}") for i in range(atom.arity))
    eqs = [FLit(eq(h, t)) for h, t in zip(head, atom.args)]
    f = disj(FLit(Literal(Atom(atom.pred, head))), conj(*eqs) if eqs else TRUE)
    return Definition(atom.pred, head, f)


def del_update(atom: Atom) -> Definition:
    head = tuple(Var(f"X{i + 1}") for i in range(atom.arity))
    eqs = [FLit(eq(h, t)) for h, t in zip(head, atom.args)]
    f = conj(FLit(Literal(Atom(atom.pred, head))), FNot(conj(*eqs) if eqs else TRUE))
    return Definition(atom.pred, head, f)


# --------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<op>:-|<-|<=|!=|=|\(|\)|\[|\]|,|&|\||\.)
  | (?P<param>\$[A-Za-z0-9_']+)
  | (?P<num>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<str>"[^"\n]*")
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    toks = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Tok(kind, m.group(), line, pos - lstart + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            lstart = pos + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - lstart + 1))
    return toks


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def take(self, text: str | None = None) -> Tok:
        t = self.tok
        if text is not None and t.text != text:
            self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def end_statement(self) -> None:
        if self.at("."):
            self.take()
        elif self.tok.kind != "eof":
            self.error(f"expected '.', found {self.tok.text!r}")

    # terms and atoms

    def term(self):
        t = self.take()
        if t.kind == "param":
            return Param(t.text[1:])
        if t.kind == "num":
            return Const(t.text)
        if t.kind == "str":
            return Const(t.text)
        if t.kind == "ident":
            return Var(t.text) if t.text[0].isupper() or t.text[0] == "_" else Const(t.text)
        self.i -= 1
        self.error(f"expected a term, found {t.text!r}")

    def var_list(self) -> tuple:
        self.take("(")
        out = []
        while not self.at(")"):
            t = self.term()
            if not isinstance(t, Var):
                self.error("expected a variable")
            out.append(t)
            if not self.at(")"):
                self.take(",")
        self.take(")")
        return tuple(out)

    def atom(self) -> Atom:
        t = self.take()
        if t.kind != "ident" or t.text[0].isupper() or t.text[0] == "_":
            self.i -= 1
            self.error(f"expected a predicate, found {t.text!r}")
        args = []
        if self.at("("):
            self.take("(")
            while not self.at(")"):
                args.append(self.term())
                if not self.at(")"):
                    self.take(",")
            self.take(")")
        return Atom(t.text, tuple(args))

    # formulas

    def formula(self):
        parts = [self.conjunction()]
        while self.at("|"):
            self.take()
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self):
        parts = [self.unit()]
        while self.at(",") or self.at("&"):
            self.take()
            parts.append(self.unit())
        return conj(*parts)

    def unit(self):
        if self.at("not"):
            self.take()
            if self.at("exists"):
                return FNot(self.exists())
            if self.at("("):
                self.take()
                f = self.formula()
                self.take(")")
                return FNot(f)
            return FNot(self.unit())
        if self.at("exists") and self.peek().text == "(":
            return self.exists()
        if self.at("("):
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if self.at("true") and self.peek().text not in ("(", "=", "!="):
            self.take()
            return TRUE
        if self.at("false") and self.peek().text not in ("(", "=", "!="):
            self.take()
            return FALSE
        t, nxt = self.tok, self.peek()
        is_pred = t.kind == "ident" and not (t.text[0].isupper() or t.text[0] == "_")
        if is_pred and nxt.text not in ("=", "!="):
            return FLit(Literal(self.atom()))
        left = self.term()
        if self.at("="):
            self.take()
            return FLit(eq(left, self.term()))
        if self.at("!="):
            self.take()
            return FLit(eq(left, self.term()).negate())
        self.error("expected '=' or '!='")

    def exists(self):
        self.take("exists")
        vs = self.var_list()
        self.take("[")
        f = self.formula() if not self.at("]") else TRUE
        self.take("]")
        return FExists(vs, f)


def formula_to_body(f) -> tuple | None:
    """Direct reading of a formula as an extended-denial body, if it is one."""
    parts = f.parts if isinstance(f, FAnd) else (f,)
    out = []
    for p in parts:
        if isinstance(p, FLit):
            out.append(p.lit)
        elif isinstance(p, FNot) and isinstance(p.sub, FExists):
            body = formula_to_body(p.sub.sub)
            if body is None:
                return None
            out.append(NEE(p.sub.vars, body))
        elif isinstance(p, FNot) and isinstance(p.sub, FLit):
            out.append(p.sub.lit.negate())
        else:
            return None
    return tuple(out)


def constraint_from_formula(f) -> list:
    body = formula_to_body(f)
    if body is not None:
        return [standardize(Denial(body))]
    return to_denials(f)


# --------------------------------------------------------------------------
# entry points


def parse_schema(text: str) -> Schema:
    """Parse and validate a schema."""
    p = Parser(text)
    s = Schema()
    while p.tok.kind != "eof":
        if p.at("<-"):
            p.take()
            s.constraints.extend(constraint_from_formula(p.formula()))
        elif p.at("assume"):
            p.take()
            p.take("<-")
            s.assumptions.extend(constraint_from_formula(p.formula()))
        else:
            head = p.atom()
            p.take(":-")
            s.rules.append(Rule(head, p.formula()))
        p.end_statement()
    s.validate()
    return s


def parse_denials(text: str) -> list:
    """Parse a theory: a sequence of ``<- body.`` statements (``true.`` is empty)."""
    p = Parser(text)
    out = []
    while p.tok.kind != "eof":
        if p.at("true"):
            p.take()
        else:
            p.take("<-")
            out.extend(constraint_from_formula(p.formula()))
        p.end_statement()
    return out


def parse_denial(text: str) -> Denial:
    ds = parse_denials(text if text.strip().endswith(".") else text + ".")
    if len(ds) != 1:
        raise ParseError(f"expected one denial, got {len(ds)}")
    return ds[0]


def parse_update(text: str, schema: Schema | None = None) -> Update:
    p = Parser(text)
    u = Update()
    while p.tok.kind != "eof":
        if p.at("add") or p.at("del"):
            kind = p.take().text
            a = p.atom()
            d = add_update(a) if kind == "add" else del_update(a)
        else:
            p.take("update")
            a = p.atom()
            p.take("<=")
            f = p.formula()
            d = _update_definition(a, f)
        if d.pred in u.entries:
            raise SchemaError(f"predicate {d.pred} updated twice")
        u.entries[d.pred] = d
        p.end_statement()
    u.validate(schema)
    return u


def _update_definition(head: Atom, f) -> Definition:
    d = rules_to_definition(head.pred, [Rule(head, f)])
    return d


def parse_facts(text: str) -> set:
    p = Parser(text)
    facts = set()
    while p.tok.kind != "eof":
        a = p.atom()
        if any(isinstance(t, (Var, Param)) for t in a.args):
            p.error(f"fact {a} is not ground")
        facts.add(a)
        p.end_statement()
    return facts


# --------------------------------------------------------------------------
# printing


def format_body(body: tuple) -> str:
    return ", ".join(map(str, body)) if body else "true"


def format_denial(d: Denial) -> str:
    return str(d)


def format_theory(ds: Iterable[Denial]) -> str:
    ds = list(ds)
    if not ds:
        return "true."
    return "\n".join(format_denial(d) for d in ds)


def format_formula(f, top: bool = True) -> str:
    if isinstance(f, FLit):
        return str(f.lit)
    if isinstance(f, FAnd):
        if not f.parts:
            return "true"
        s = ", ".join(format_formula(p, False) for p in f.parts)
        return s if top else f"({s})" if len(f.parts) > 1 else s
    if isinstance(f, FOr):
        if not f.parts:
            return "false"
        s = " | ".join(format_formula(p, True) for p in f.parts)
        return s if top else f"({s})"
    if isinstance(f, FNot):
        if isinstance(f.sub, FExists):
            vs = ",".join(map(str, f.sub.vars))
            return f"not exists({vs})[{format_formula(f.sub.sub)}]"
        if isinstance(f.sub, FLit) and f.sub.lit.positive and not f.sub.lit.is_eq:
            return f"not {f.sub.lit}"
        return f"not ({format_formula(f.sub)})"
    if isinstance(f, FExists):
        vs = ",".join(map(str, f.vars))
        return f"exists({vs})[{format_formula(f.sub)}]"
    raise TypeError(f)


def format_schema(s: Schema) -> str:
    lines = [str(r) for r in s.rules]
    lines += [format_denial(d) for d in s.constraints]
    lines += ["assume " + format_denial(d) for d in s.assumptions]
    return "\n".join(lines)


def format_update(u: Update) -> str:
    lines = []
    for p, d in u.entries.items():
        head = Atom(p, d.head)
        lines.append(f"update {head} <= {format_formula(d.formula)}.")
    return "\n".join(lines)


def format_substitution(s: dict) -> str:
    items = sorted(s.items(), key=lambda kv: kv[0].name)
    return "{" + ", ".join(f"{v}/{t}" for v, t in items) + "}"


def format_value(v) -> str:
    """Pretty-print any value produced by this package."""
    if isinstance(v, Schema):
        return format_schema(v)
    if isinstance(v, Update):
        return format_update(v)
    if isinstance(v, Denial):
        return format_denial(v)
    if isinstance(v, dict):
        return format_substitution(v)
    if isinstance(v, (list, tuple)):
        return format_theory(v)
    return str(v)
