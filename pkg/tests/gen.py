"""Random inputs for the property and acceptance suites.

Everything is driven by a ``random.Random`` so that a seed reproduces a
case exactly; the hypothesis strategies at the bottom just draw seeds.
"""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from icsimp.analysis import L_S, L_SEXT, classify
from icsimp.kernel import NEE, Atom, Const, Denial, Literal, Param, Var, eq, neq
from icsimp.syntax import SchemaError, parse_schema, parse_update

CONSTS = (Const("a"), Const("b"))
DOMAIN = ("a", "b", "c")
PARAM = Param("x")
EDB = {"p": 1, "q": 1, "r": 2}


class _Names:
    def __init__(self):
        self.n = 0

    def new(self) -> Var:
        self.n += 1
        return Var(f"X{self.n}")


def _term(rng, visible: list, names: _Names, fresh: list, new_ok: bool):
    roll = rng.random()
    if roll < 0.12:
        return rng.choice(CONSTS)
    if roll < 0.2:
        return PARAM
    if visible and (roll < 0.65 or not new_ok):
        return rng.choice(visible)
    if not new_ok:
        return rng.choice(CONSTS)
    v = names.new()
    fresh.append(v)
    visible.append(v)
    return v


def _positive(rng, visible, names, fresh, preds) -> Literal:
    pred = rng.choice(preds)
    args = tuple(_term(rng, visible, names, fresh, True) for _ in range(EDB[pred]))
    return Literal(Atom(pred, args))


def _body(rng, outer: list, depth: int, names: _Names, preds, max_depth: int):
    """A safe conjunction: its new variables all occur in a positive atom."""
    fresh: list = []
    visible = list(outer)
    body: list = [_positive(rng, visible, names, fresh, preds)
                  for _ in range(rng.randint(1, 2))]
    for _ in range(rng.randint(0, 3)):
        roll = rng.random()
        if roll < 0.3:
            pred = rng.choice(preds)
            args = tuple(_term(rng, visible, names, [], False) for _ in range(EDB[pred]))
            body.append(Literal(Atom(pred, args), False))
        elif roll < 0.6 and visible:
            a = rng.choice(visible)
            b = _term(rng, visible, names, [], False)
            if a != b:
                body.append(eq(a, b) if rng.random() < 0.4 else neq(a, b))
        elif depth < max_depth:
            inner, inner_vars = _body(rng, visible, depth + 1, names, preds, max_depth)
            body.append(NEE(tuple(inner_vars), tuple(inner)))
    rng.shuffle(body)
    return body, fresh


def random_denial(rng: random.Random, max_depth: int = 2, preds=("p", "q", "r")) -> Denial:
    body, _ = _body(rng, [], 0, _Names(), list(preds), max_depth)
    return Denial(tuple(body))


def fact_space(preds=("p", "q", "r"), domain=DOMAIN) -> list:
    return [Atom(p, tuple(Const(c) for c in t))
            for p in preds for t in itertools.product(domain, repeat=EDB[p])]


def random_db(rng: random.Random, preds=("p", "q", "r"), domain=DOMAIN, density=None) -> set:
    dens = rng.choice((0.2, 0.4, 0.6)) if density is None else density
    return {f for f in fact_space(preds, domain) if rng.random() < dens}


def param_assignments(d, domain=DOMAIN) -> list:
    from icsimp.kernel import params_of

    ps = sorted(params_of(d), key=lambda p: p.name)
    return [dict(zip(ps, map(Const, combo))) for combo in itertools.product(domain, repeat=len(ps))]


def theory_holds(theory, facts, pa=None, domain=DOMAIN) -> bool:
    from icsimp.oracle import eval_denial

    return all(eval_denial(facts, d, pa, domain) for d in theory)


def disagreement(old, new, dbs, domain=DOMAIN):
    """First (facts, parameters) on which two theories evaluate differently."""
    from icsimp.kernel import Denial

    probe = Denial(tuple(g for d in list(old) + list(new) for g in d.body))
    for facts in dbs:
        for pa in param_assignments(probe, domain):
            if theory_holds(old, facts, pa, domain) != theory_holds(new, facts, pa, domain):
                return facts, pa
    return None


# --------------------------------------------------------------------------
# schemata and updates; EDB space at most 12 facts over 3 constants

_RULES = [
    "s(X) :- p(X), q(X).",
    "s(X) :- p(X), not q(X).",
    "s(X) :- r(X,Y), p(Y).",
    "s(X) :- r(X,X).",
    "s(X) :- p(X), not r(X,a).",
    "t(X) :- s(X), not q(X).",
    "t(X) :- q(X), not s(X).",
    "t(X) :- r(X,Y), not s(Y).",
    "t(X) :- p(X), X != a.",
]

_CONSTRAINTS = [
    "<- p(X), not s(X).",
    "<- s(X), q(X).",
    "<- t(X), p(X).",
    "<- q(X), not t(X).",
    "<- p(X), q(X).",
    "<- r(X,Y), not p(Y).",
    "<- r(X,Y), r(X,Z), Y != Z.",
    "<- q(X), not exists(Y)[r(X,Y)].",
    "<- s(a).",
    "<- p(X), not exists(Y)[r(Y,X), not q(Y)].",
]

_LS_UPDATES = [
    "add p($x).",
    "add q($x).",
    "del p($x).",
    "del q(a).",
    "add r($x,a).",
    "del r(a,$x).",
    "update p(X) <= q(X).",
    "update q(X) <= q(X), X != a.",
    "update p(X) <= p(X) | q(X).",
    "update q(X) <= p(X), not q(X).",
]

_EXT_UPDATES = [
    "update p(X) <= r(X,Y).",
    "update q(X) <= r(Y,X), p(Y).",
    "update p(X) <= p(X) | r(X,Y).",
    "update q(X) <= q(X), not r(X,X) | r(X,Y), p(Y).",
]


def _edb_facts(text: str) -> int:
    return sum(3 ** EDB[p] for p in EDB if f"{p}(" in text)


def random_case(rng: random.Random, want: str):
    """A (schema text, update text) pair whose update lies in ``want``.

    Returns ``None`` when the draw missed; callers just draw again.
    """
    rules = rng.sample(_RULES, rng.randint(0, 3))
    # t/1 needs s/1 when a t-rule mentions s
    if any(r.startswith("t(") and "s(" in r for r in rules) and not any(
            r.startswith("s(") for r in rules):
        rules.append(rng.choice(_RULES[:5]))
    heads = {r.split("(")[0] for r in rules}
    pool = [c for c in _CONSTRAINTS
            if not ("s(" in c and "s" not in heads) and not ("t(" in c and "t" not in heads)]
    cons = rng.sample(pool, min(len(pool), rng.randint(1, 2)))
    ups = _LS_UPDATES if want == L_S else _EXT_UPDATES
    upd = rng.choice(ups)
    text = "\n".join(rules + cons)
    if _edb_facts(text + upd) > 12:
        return None
    try:
        s = parse_schema(text)
        u = parse_update(upd, s)
    except SchemaError:
        return None
    if not set(u.entries) <= set(s.arities()):
        return None
    if classify(s, u).update_class != want:
        return None
    return text, upd


def cases(seed: int, want: str, n: int) -> list:
    rng = random.Random(seed)
    out: list = []
    seen: set = set()
    while len(out) < n:
        c = random_case(rng, want)
        if c is None:
            continue
        key = (frozenset(c[0].splitlines()), c[1])
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def random_schema_text(rng: random.Random) -> str:
    """A non-recursive schema without the EDB-size restriction."""
    rules = rng.sample(_RULES, rng.randint(1, 4))
    if any(r.startswith("t(") for r in rules) and not any(r.startswith("s(") for r in rules):
        rules.append(rng.choice(_RULES[:5]))
    heads = {r.split("(")[0] for r in rules}
    pool = [c for c in _CONSTRAINTS
            if not ("s(" in c and "s" not in heads) and not ("t(" in c and "t" not in heads)]
    return "\n".join(rules + rng.sample(pool, rng.randint(1, 3)))


# --------------------------------------------------------------------------
# hypothesis strategies

seeds = st.integers(min_value=0, max_value=2 ** 31)
denials = seeds.map(lambda n: random_denial(random.Random(n)))
flat_denials = seeds.map(lambda n: random_denial(random.Random(n), max_depth=0))
databases = seeds.map(lambda n: random_db(random.Random(n)))
schema_texts = seeds.map(lambda n: random_schema_text(random.Random(n)))

__all__ = [
    "L_S", "L_SEXT", "DOMAIN", "PARAM", "random_denial", "random_db", "fact_space",
    "param_assignments", "theory_holds", "disagreement", "random_case", "cases", "random_schema_text",
    "seeds", "denials", "flat_denials", "databases", "schema_texts",
]
