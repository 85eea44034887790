"""Equivalence-preserving rewriting of single extended denials.

Subsumption and extended subsumption are one-way matchings: only the
variables in ``bindable`` may be instantiated, every other term (free
variables of an NEE included) is rigid.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .kernel import (
    NEE,
    Atom,
    Const,
    Denial,
    Literal,
    Param,
    Var,
    all_vars,
    canonicalize,
    eq,
    fresh_var,
    rename_apart,
    replace_param,
    standardize,
    subst,
    term_vars,
    vars_of,
)

# --------------------------------------------------------------------------
# matching


def _match_args(src: tuple, tgt: tuple, bindable, sigma: dict) -> dict | None:
    out = sigma
    for s, t in zip(src, tgt):
        if isinstance(s, Var) and s in bindable:
            bound = out.get(s)
            if bound is None:
                if out is sigma:
                    out = dict(sigma)
                out[s] = t
            elif bound != t:
                return None
        elif s != t:
            return None
    return out


def match_literal(src: Literal, tgt: Literal, bindable, sigma: dict) -> Iterator[dict]:
    if src.positive != tgt.positive or src.atom.pred != tgt.atom.pred:
        return
    if src.atom.arity != tgt.atom.arity:
        return
    m = _match_args(src.atom.args, tgt.atom.args, bindable, sigma)
    if m is not None:
        yield m
    if src.is_eq:
        m2 = _match_args(src.atom.args, tgt.atom.args[::-1], bindable, sigma)
        if m2 is not None and m2 != m:
            yield m2


def match_body(src: tuple, tgt: tuple, bindable, sigma: dict | None = None) -> Iterator[dict]:
    """Substitutions ``s`` over ``bindable`` with ``<- src`` extended-subsuming
    ``<- tgt`` via ``s``."""
    sigma = {} if sigma is None else sigma
    lits = [g for g in src if isinstance(g, Literal)]
    nees = [g for g in src if isinstance(g, NEE)]
    tlits = [g for g in tgt if isinstance(g, Literal)]
    tnees = [g for g in tgt if isinstance(g, NEE)]
    cands = []
    for lit in lits:
        c = [t for t in tlits if t.positive == lit.positive and t.atom.pred == lit.atom.pred
             and t.atom.arity == lit.atom.arity]
        if not c:
            return
        cands.append((lit, c))
    cands.sort(key=lambda lc: len(lc[1]))

    def nees_ok(s: dict) -> bool:
        for n in nees:
            inst = subst(n.body, s)
            if not any(_exists_match(m.body, inst, set(m.vars)) for m in tnees):
                return False
        return True

    def search(k: int, s: dict):
        if k == len(cands):
            if nees_ok(s):
                yield s
            return
        lit, c = cands[k]
        for t in c:
            for s2 in match_literal(lit, t, bindable, s):
                yield from search(k + 1, s2)

    yield from search(0, sigma)


def _exists_match(src: tuple, tgt: tuple, bindable) -> bool:
    return next(match_body(src, tgt, bindable), None) is not None


def subsumes(d1: Denial, d2: Denial) -> dict | None:
    """Substitution under which every literal of ``d1`` occurs in ``d2``.

    NEEs are handled by extended subsumption; for NEE-free denials this is
    plain subsumption.
    """
    d1r = rename_apart(d1) if vars_of(d1) & vars_of(d2) else d1
    back = {}
    if d1r is not d1:
        back = dict(zip(all_vars(d1r), all_vars(d1)))
    bindable = _level0_vars(d1r)
    s = next(match_body(d1r.body, d2.body, bindable), None)
    if s is None:
        return None
    out = {back.get(v, v): t for v, t in s.items()}
    return {v: t for v, t in out.items() if v != t}


def _level0_vars(d: Denial) -> set:
    return {v for g in d.body if isinstance(g, Literal) for v in term_vars(g.atom.args)}


def extended_subsumes(phi: Denial, psi: Denial) -> bool:
    return subsumes(phi, psi) is not None


def is_variant(d1: Denial, d2: Denial) -> bool:
    return canonicalize(d1) == canonicalize(d2) or (
        len(d1.body) == len(d2.body)
        and subsumes(d1, d2) is not None
        and subsumes(d2, d1) is not None
    )


def strictly_subsumes(d1: Denial, d2: Denial) -> bool:
    return subsumes(d1, d2) is not None and not is_variant(d1, d2)


# --------------------------------------------------------------------------
# expansion


def expand(d: Denial) -> Denial:
    """Move constants, parameters and repeated variables out of database atoms."""
    seen: set = set()
    body: list = []
    eqs: list = []
    for g in d.body:
        if isinstance(g, Literal) and g.is_database:
            args = []
            for t in g.atom.args:
                if isinstance(t, Var) and t not in seen:
                    seen.add(t)
                    args.append(t)
                else:
                    v = fresh_var("E")
                    eqs.append(eq(v, t))
                    args.append(v)
            body.append(Literal(Atom(g.atom.pred, tuple(args)), g.positive))
        else:
            body.append(g)
    return Denial(tuple(body + eqs))


# --------------------------------------------------------------------------
# reduction


@dataclass
class RewriteTrace:
    steps: list = field(default_factory=list)

    def add(self, rule: str, before, after) -> None:
        self.steps.append((rule, before, after))

    def __str__(self) -> str:
        lines = []
        for rule, before, after in self.steps:
            lines.append(f"[{rule}] {_show(before)}  ~>  {_show(after)}")
        return "\n".join(lines)


def _show(x) -> str:
    if isinstance(x, (list, tuple)):
        return "{" + "; ".join(map(str, x)) + "}" if x else "true"
    return str(x)


def _is_const(t) -> bool:
    return isinstance(t, Const)


def _trivial(lit: Literal):
    """``True`` drop the literal, ``False`` the conjunction is false, ``None`` keep."""
    a, b = lit.atom.args
    if a == b:
        return lit.positive
    if _is_const(a) and _is_const(b):
        return not lit.positive
    return None


def _simplify_body(body: tuple, local: set, param_rule: bool = True) -> tuple | None:
    """Fixpoint of the reduction rules on one conjunction.

    ``local`` are the variables quantified at this level; any other
    variable is treated as a parameter.  Returns ``None`` when the
    conjunction is unsatisfiable.
    """
    return _simplify_cached(body, frozenset(local), param_rule)


@functools.lru_cache(maxsize=100000)
def _simplify_cached(body: tuple, local: frozenset, param_rule: bool) -> tuple | None:
    local = set(local)
    while True:
        new = _simplify_once(body, local, param_rule)
        if new is None:
            return None
        if new == body:
            return body
        body = new


def _simplify_once(body: tuple, local: set, param_rule: bool) -> tuple | None:
    # trivial (non-)equalities and duplicates
    out: list = []
    for g in body:
        if isinstance(g, Literal) and g.is_eq:
            t = _trivial(g)
            if t is True:
                continue
            if t is False:
                return None
        if g not in out:
            out.append(g)
    body = tuple(out)

    # inline X = t for local X, all such equalities in one pass
    sigma: dict = {}
    keep: list = []
    for g in body:
        if isinstance(g, Literal) and g.is_eq and g.positive:
            a, b = (sigma.get(t, t) for t in g.atom.args)
            x, t = (a, b) if isinstance(a, Var) and a in local else (b, a)
            if a == b or (isinstance(x, Var) and x in local):
                if a != b:
                    sigma = {k: (t if v == x else v) for k, v in sigma.items()}
                    sigma[x] = t
                    local.discard(x)
                continue
        keep.append(g)
    if sigma:
        return subst(tuple(keep), sigma)

    # parameter rule: keep $a = c, replace $a by c elsewhere
    for i, g in enumerate(body if param_rule else ()):
        if isinstance(g, Literal) and g.is_eq and g.positive:
            a, b = g.atom.args
            if isinstance(b, Const) and (isinstance(a, Param) or (isinstance(a, Var) and a not in local)):
                rest = body[:i] + body[i + 1:]
                new_rest = _replace_rigid(rest, a, b)
                if new_rest != rest:
                    return (g,) + new_rest

    # complementary pair
    lits = {g for g in body if isinstance(g, Literal)}
    for g in lits:
        if g.negate() in lits:
            return None

    # NEEs
    out = []
    for g in body:
        if isinstance(g, Literal):
            out.append(g)
            continue
        nb = _simplify_body(g.body, set(g.vars), param_rule)
        if nb is None:
            continue  # the NEE is true
        if not nb:
            return None  # the NEE is false
        occurring = vars_of(nb)
        qs = tuple(v for v in g.vars if v in occurring)
        if not qs and len(nb) == 1 and isinstance(nb[0], Literal):
            out.append(nb[0].negate())
        elif not qs and len(nb) == 1:
            inner = nb[0]
            local |= set(inner.vars)
            out.extend(inner.body)
        else:
            out.append(NEE(qs, nb))
    body = tuple(out)

    return _factor(body, local)


def _replace_rigid(body: tuple, rigid, const) -> tuple:
    if isinstance(rigid, Param):
        return replace_param(body, rigid, const)
    return subst(body, {rigid: const})


def _factor(body: tuple, local: set) -> tuple:
    """Subsumption factoring: drop C from C & D when <- C subsumes <- D by a
    substitution that leaves the variables of D alone."""
    n = len(body)
    if n < 2:
        return body
    gvars = [vars_of(g) for g in body]
    # a literal without local variables only matches an identical copy,
    # and duplicates are gone by now
    movable = [i for i, g in enumerate(body)
               if (isinstance(g, NEE) or gvars[i] & local) and _may_match_other(g, body, i)]
    for k in range(1, len(movable) + 1):
        for chosen in itertools.combinations(movable, k):
            rest = [i for i in range(n) if i not in chosen]
            if not rest:
                continue
            d = tuple(body[i] for i in rest)
            if not all(_may_match_other(body[i], d, -1) for i in chosen):
                continue
            c = tuple(body[i] for i in chosen)
            dvars = set().union(*(gvars[i] for i in rest))
            bindable = set().union(*(gvars[i] for i in chosen)) & local - dvars
            if not bindable and any(isinstance(g, Literal) for g in c):
                continue
            if next(match_body(c, d, bindable), None) is not None:
                return d
    return body


def _may_match_other(g, body: tuple, i: int) -> bool:
    if isinstance(g, NEE):
        return any(isinstance(h, NEE) for j, h in enumerate(body) if j != i)
    return any(
        isinstance(h, Literal) and h.positive == g.positive and h.atom.pred == g.atom.pred
        for j, h in enumerate(body) if j != i
    )


# --------------------------------------------------------------------------
# equality and non-equality elimination


def _outer_eq_sites(body: tuple, path: tuple = ()):
    """Paths ``(path_to_nee, literal_index)`` of (non-)equalities inside an
    NEE that mention none of that NEE's quantified variables, deepest first."""
    sites = []
    for i, g in enumerate(body):
        if isinstance(g, NEE):
            p = path + (i,)
            sites.extend(_outer_eq_sites(g.body, p))
            own = set(g.vars)
            for j, h in enumerate(g.body):
                if isinstance(h, Literal) and h.is_eq and not (vars_of(h) & own):
                    sites.append((p, j))
    sites.sort(key=lambda s: -len(s[0]))
    return sites


def _get(body: tuple, path: tuple):
    g = None
    for i in path:
        g = body[i]
        body = g.body
    return g


def _replace_at(body: tuple, path: tuple, new: tuple) -> tuple:
    """Replace the general literal at ``path`` by the general literals ``new``."""
    i = path[0]
    if len(path) == 1:
        return body[:i] + new + body[i + 1:]
    g = body[i]
    inner = _replace_at(g.body, path[1:], new)
    return body[:i] + (NEE(g.vars, inner),) + body[i + 1:]


def eliminate_at(d: Denial, nee_path: tuple, lit_index: int) -> list:
    """One (non-)equality elimination step.

    ``nee_path`` addresses the NEE holding the (non-)equality ``E`` at
    ``lit_index``; ``E`` must not mention that NEE's variables.  For an
    NEE directly in the denial body the denial splits into
    ``<- A & E & not exists X[C]`` and ``<- A & not E``; deeper down the
    parent NEE splits the same way.
    """
    nee = _get(d.body, nee_path)
    if not isinstance(nee, NEE) or lit_index >= len(nee.body):
        raise ValueError("invalid elimination site")
    e = nee.body[lit_index]
    if not (isinstance(e, Literal) and e.is_eq):
        raise ValueError(f"{e} is not a (non-)equality")
    if vars_of(e) & set(nee.vars):
        raise ValueError(f"{e} mentions a variable quantified by its own NEE")
    inner = NEE(nee.vars, nee.body[:lit_index] + nee.body[lit_index + 1:])
    if len(nee_path) == 1:
        i = nee_path[0]
        rest = d.body[:i] + d.body[i + 1:]
        first_body = d.body[:i] + (e, inner) + d.body[i + 1:]
        if e.positive:
            # level-1 shortcut: substitute a level-0 variable away directly
            a, b = e.atom.args
            w, c = (a, b) if isinstance(a, Var) else (b, a)
            if isinstance(w, Var):
                first_body = subst(rest + (inner,), {w: c})
        first = standardize(Denial(first_body))
        second = standardize(Denial(rest + (e.negate(),)))
        return [first, second]
    parent_path, i = nee_path[:-1], nee_path[-1]
    parent = _get(d.body, parent_path)
    b = parent.body[:i] + parent.body[i + 1:]
    n1 = NEE(parent.vars, parent.body[:i] + (e, inner) + parent.body[i + 1:])
    n2 = rename_apart(NEE(parent.vars, b + (e.negate(),)), set(parent.vars))
    return [standardize(Denial(_replace_at(d.body, parent_path, (n1, n2))))]


def _site(d: Denial, nee_path: tuple, lit_index: int) -> Literal:
    try:
        nee = _get(d.body, nee_path)
        e = nee.body[lit_index]
    except (AttributeError, IndexError, TypeError):
        raise ValueError("invalid elimination site") from None
    if not (isinstance(nee, NEE) and isinstance(e, Literal) and e.is_eq):
        raise ValueError("invalid elimination site")
    return e


def eliminate_equality(d: Denial, nee_path: tuple, lit_index: int) -> list:
    e = _site(d, nee_path, lit_index)
    if not e.positive:
        raise ValueError(f"{e} is not an equality")
    return eliminate_at(d, nee_path, lit_index)


def eliminate_nonequality(d: Denial, nee_path: tuple, lit_index: int) -> list:
    e = _site(d, nee_path, lit_index)
    if e.positive:
        raise ValueError(f"{e} is not a non-equality")
    return eliminate_at(d, nee_path, lit_index)


# --------------------------------------------------------------------------
# reduction driver


def reduce_once(d: Denial, param_rule: bool = True) -> list:
    """Simplify ``d`` as a single conjunction, then perform at most one
    elimination step.  ``[]`` means the denial is ``true``."""
    body = _simplify_body(d.body, _level0_vars(d), param_rule)
    if body is None:
        return []
    d2 = standardize(Denial(body))
    sites = _outer_eq_sites(d2.body)
    if sites:
        path, j = sites[0]
        return eliminate_at(d2, path, j)
    for i, g in enumerate(d2.body):
        if isinstance(g, NEE) and not g.vars:
            # <- A & not (B1 & ... & Bn) splits into <- A & not Bi
            rest = d2.body[:i] + d2.body[i + 1:]
            return [standardize(Denial(rest + _negated(b))) for b in g.body]
    return [d2]


def _negated(g) -> tuple:
    if isinstance(g, Literal):
        return (g.negate(),)
    return rename_apart(g, set(g.vars)).body


@functools.lru_cache(maxsize=50000)
def _reduce_cached(d: Denial, param_rule: bool) -> tuple:
    out: list = []
    work = [d]
    steps = 0
    while work:
        cur = work.pop()
        nxt = reduce_once(cur, param_rule)
        steps += 1
        if steps > 10000:
            raise RuntimeError(f"reduction does not converge on {d}")
        if len(nxt) == 1 and nxt[0] == cur:
            out.append(cur)
        else:
            work.extend(reversed(nxt))
    result: list = []
    seen = set()
    for r in out:
        c = canonicalize(r)
        if c not in seen:
            seen.add(c)
            result.append(c)
    return tuple(result)


def reduce(d: Denial, param_rule: bool = True) -> list:
    """The reduction of ``d`` as a list of canonical extended denials.

    Usually one denial; ``[]`` when ``d`` reduces to ``true``; several when
    an equality elimination at the outermost NEE splits the denial.
    """
    return list(_reduce_cached(canonicalize(d), param_rule))


def reduce_traced(d: Denial, trace: RewriteTrace) -> list:
    out = reduce(d)
    if out != [canonicalize(d)]:
        trace.add("reduce", d, out)
    return out


def is_true(d: Denial) -> bool:
    return reduce(d) == []
