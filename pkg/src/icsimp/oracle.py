"""Ground-truth evaluation over explicit finite domains.

Models are dictionaries from predicate names to sets of tuples of
:class:`Const`.  Quantifiers range over the instance's domain (active
domain semantics), and parameters are fixed by an assignment before
evaluation.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .analysis import check_stratified
from .formula import normalize
from .kernel import NEE, Atom, Const, Denial, Literal, Param, Var, consts_of, params_of
from .syntax import Schema, SchemaError, Update

Model = dict


class VerificationBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class DatabaseInstance:
    edb: frozenset
    domain: tuple

    @classmethod
    def of(cls, facts: Iterable[Atom], domain: Iterable = ()) -> "DatabaseInstance":
        facts = frozenset(facts)
        dom = {c if isinstance(c, Const) else Const(str(c)) for c in domain}
        for f in facts:
            for t in f.args:
                if not isinstance(t, Const):
                    raise ValueError(f"fact {f} is not ground")
                dom.add(t)
        return cls(facts, tuple(sorted(dom, key=lambda c: c.name)))

    def model(self) -> Model:
        m: Model = {}
        for f in self.edb:
            m.setdefault(f.pred, set()).add(f.args)
        return m

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(map(str, self.edb))) + "}"


# --------------------------------------------------------------------------
# conjunction solving


def _accessor(t):
    if isinstance(t, Const):
        return lambda env: t
    return lambda env: env[t]


def _gvars(g) -> set:
    if isinstance(g, NEE):
        out: set = set()
        for h in g.body:
            out |= _gvars(h)
        return out - set(g.vars)
    return {t for t in g.atom.args if isinstance(t, (Var, Param))}


def _test(g, bound: set):
    if isinstance(g, NEE):
        inner = _plan(g.body, frozenset(bound))
        # a copy: an abandoned generator never undoes its bindings
        return lambda env, model, domain: next(_run(inner, 0, dict(env), model, domain), False) is False
    get = [_accessor(t) for t in g.atom.args]
    pos = g.positive
    if g.is_eq:
        a, b = get
        return lambda env, model, domain: (a(env) == b(env)) == pos
    pred = g.atom.pred
    empty: frozenset = frozenset()
    return lambda env, model, domain: (tuple(f(env) for f in get) in model.get(pred, empty)) == pos


@functools.lru_cache(maxsize=4096)
def _plan(body: tuple, bound: frozenset) -> tuple:
    """A static evaluation order for ``body`` given the bound variables."""
    bound = set(bound)
    pending = list(body)
    steps: list = []
    while pending:
        rest = []
        for g in pending:
            is_gen = isinstance(g, Literal) and g.positive and not g.is_eq
            if not is_gen and _gvars(g) <= bound:
                steps.append(("test", _test(g, bound)))
            else:
                rest.append(g)
        pending = rest
        if not pending:
            break
        gens = [g for g in pending if isinstance(g, Literal) and g.positive and not g.is_eq]
        if gens:
            g = max(gens, key=lambda x: sum(1 for t in x.atom.args if not isinstance(t, Var) or t in bound))
            pending.remove(g)
            spec = []
            local: set = set()
            for t in g.atom.args:
                if isinstance(t, Var) and t not in bound and t not in local:
                    spec.append((True, t))
                    local.add(t)
                else:
                    spec.append((False, _accessor(t)))
            steps.append(("scan", (g.atom.pred, tuple(spec))))
            bound |= local
            continue
        for g in pending:
            if isinstance(g, Literal) and g.is_eq and g.positive:
                a, b = g.atom.args
                fa = not isinstance(a, (Var, Param)) or a in bound
                fb = not isinstance(b, (Var, Param)) or b in bound
                if fa != fb:
                    var, src = (b, a) if fa else (a, b)
                    pending.remove(g)
                    steps.append(("assign", (var, _accessor(src))))
                    bound.add(var)
                    break
        else:
            free = sorted(set().union(*(_gvars(g) for g in pending)) - bound, key=str)
            steps.append(("enum", free[0]))
            bound.add(free[0])
    return tuple(steps)


def _run(plan: tuple, k: int, env: dict, model: Model, domain: tuple):
    if k == len(plan):
        yield env
        return
    kind, data = plan[k]
    if kind == "test":
        if data(env, model, domain):
            yield from _run(plan, k + 1, env, model, domain)
    elif kind == "scan":
        pred, spec = data
        for tup in model.get(pred, ()):
            assigned = []
            ok = True
            for (fresh, x), c in zip(spec, tup):
                if fresh:
                    if x in env:
                        if env[x] != c:
                            ok = False
                            break
                    else:
                        env[x] = c
                        assigned.append(x)
                elif x(env) != c:
                    ok = False
                    break
            if ok:
                yield from _run(plan, k + 1, env, model, domain)
            for x in assigned:
                del env[x]
    elif kind == "assign":
        var, src = data
        env[var] = src(env)
        yield from _run(plan, k + 1, env, model, domain)
        del env[var]
    else:
        for c in domain:
            env[data] = c
            yield from _run(plan, k + 1, env, model, domain)
        del env[data]


def solve(body: tuple, env: dict, model: Model, domain: tuple) -> Iterator[dict]:
    """All extensions of ``env`` making the conjunction ``body`` true."""
    env = dict(env)
    for e in _run(_plan(tuple(body), frozenset(env)), 0, env, model, domain):
        yield dict(e)


def _exists(body: tuple, env: dict, model: Model, domain: tuple) -> bool:
    env = dict(env)
    return next(_run(_plan(tuple(body), frozenset(env)), 0, env, model, domain), False) is not False


# --------------------------------------------------------------------------
# standard model


def _branches(definition) -> list:
    return normalize(definition.formula)


def _extension(head: tuple, branches: list, model: Model, domain: tuple, env0: dict) -> set:
    out = set()
    for b in branches:
        env1 = dict(env0)
        for env in _run(_plan(b, frozenset(env1)), 0, env1, model, domain):
            vals = []
            for h in head:
                v = env.get(h)
                vals.append(v)
            if any(v is None for v in vals):
                # head variable unconstrained by the branch
                idx = [i for i, v in enumerate(vals) if v is None]
                for combo in itertools.product(domain, repeat=len(idx)):
                    vs = list(vals)
                    for i, c in zip(idx, combo):
                        vs[i] = c
                    out.add(tuple(vs))
            else:
                out.add(tuple(vals))
    return out


class Evaluator:
    """Schema-bound evaluator; caches the normalized rule definitions."""

    def __init__(self, s: Schema):
        ok, strata = check_stratified(s)
        if not ok:
            raise SchemaError("schema is not stratified")
        self.schema = s
        defs = s.definitions()
        self.layers: list = []
        for level in sorted(set(strata[p] for p in defs)) if defs else []:
            self.layers.append([(p, defs[p].head, _branches(defs[p])) for p in sorted(defs) if strata[p] == level])

    def model(self, edb: Model, domain: tuple) -> Model:
        m = {p: set(ts) for p, ts in edb.items()}
        for layer in self.layers:
            changed = True
            while changed:
                changed = False
                for p, head, branches in layer:
                    ext = _extension(head, branches, m, domain, {})
                    if ext - m.get(p, set()):
                        m.setdefault(p, set()).update(ext)
                        changed = True
        return m


def standard_model(s: Schema, db: DatabaseInstance) -> set:
    """The standard model of ``s`` over ``db`` as a set of ground atoms."""
    m = Evaluator(s).model(db.model(), db.domain)
    return {Atom(p, t) for p, ts in m.items() for t in ts}


def holds(d: Denial, model: Model, domain: tuple, pa: dict | None = None) -> bool:
    """``True`` iff the extended denial ``d`` is satisfied."""
    return not _exists(d.body, pa or {}, model, domain)


def eval_denial(facts, d: Denial, pa: dict | None = None, domain: Iterable = ()) -> bool:
    """Evaluate ``d`` on a fact set (already a model) over its domain."""
    db = facts if isinstance(facts, DatabaseInstance) else DatabaseInstance.of(facts, domain)
    return holds(d, db.model(), db.domain, _param_env(pa))


def _param_env(pa: dict | None) -> dict:
    env = {}
    for k, v in (pa or {}).items():
        k = k if isinstance(k, Param) else Param(str(k).lstrip("$"))
        env[k] = v if isinstance(v, Const) else Const(str(v))
    return env


def satisfies(theory: Iterable[Denial], model: Model, domain: tuple, pa: dict | None = None) -> bool:
    return all(holds(d, model, domain, pa) for d in theory)


# --------------------------------------------------------------------------
# updates


class CompiledUpdate:
    def __init__(self, u: Update):
        self.entries = [(p, d.head, normalize(d.formula)) for p, d in sorted(u.entries.items())]

    def apply(self, model: Model, edb: Model, domain: tuple, pa: dict) -> Model:
        out = {p: set(ts) for p, ts in edb.items()}
        for p, head, branches in self.entries:
            out[p] = _extension(head, branches, model, domain, pa)
        return out


def apply_update(db: DatabaseInstance, s: Schema, u: Update, pa: dict | None = None) -> DatabaseInstance:
    """The database after ``u``; update formulas read the pre-update model.

    Constants named by the update or by ``pa`` join the domain.
    """
    consts: set = set()
    for d in u.entries.values():
        _formula_terms(d.formula, consts, set())
    env = _param_env(pa)
    dom = tuple(sorted(set(db.domain) | consts | set(env.values()), key=lambda c: c.name))
    model = Evaluator(s).model(db.model(), dom)
    new = CompiledUpdate(u).apply(model, db.model(), dom, env)
    facts = {Atom(p, t) for p, ts in new.items() for t in ts}
    for f in facts:
        assert all(c in dom for c in f.args), f
    return DatabaseInstance(frozenset(facts), dom)


# --------------------------------------------------------------------------
# verification

WP = "WP"
CWP = "CWP"


@dataclass
class VerifyReport:
    mode: str
    passed: bool
    checked: int
    space: int
    sampled: bool
    domain: tuple
    counterexamples: list = field(default_factory=list)

    def summary(self) -> str:
        how = "sampled" if self.sampled else "exhaustive"
        dom = ",".join(c.name for c in self.domain)
        head = "PASS" if self.passed else "FAIL"
        lines = [f"{head} {self.mode}: {self.checked} (database, parameter) pairs checked "
                 f"({how}, {self.space} databases, domain {{{dom}}})"]
        for facts, pa, cand, post in self.counterexamples:
            ps = ", ".join(f"{k}={v}" for k, v in sorted((str(k), str(v)) for k, v in pa.items()))
            db = "{" + ", ".join(sorted(map(str, facts))) + "}"
            lines.append(f"  counterexample D = {db}" + (f" with {ps}" if ps else "")
                         + f": candidate {'holds' if cand else 'fails'}, "
                           f"updated state {'consistent' if post else 'inconsistent'}")
        return "\n".join(lines)


def _collect(items) -> tuple:
    consts: set = set()
    params: set = set()
    for x in items:
        consts |= consts_of(x)
        params |= params_of(x)
    return consts, params


def _formula_terms(f, out_c: set, out_p: set) -> None:
    from .formula import atoms_of

    for a, _ in atoms_of(f):
        for t in a.args:
            if isinstance(t, Const):
                out_c.add(t)
            elif isinstance(t, Param):
                out_p.add(t)


def verify(
    s: Schema,
    u: Update,
    candidate: list,
    mode: str = CWP,
    domain: Iterable = ("a", "b", "c"),
    *,
    params: dict | None = None,
    max_databases: int = 2 ** 20,
    sample: int | None = None,
    seed: int = 0,
    max_counterexamples: int = 5,
) -> VerifyReport:
    """Brute-force check that ``candidate`` is a WP (or CWP) of ``s`` for ``u``.

    Every EDB over the domain is enumerated; with ``sample`` set, spaces
    larger than ``max_databases`` are randomly subsampled instead of
    rejected.  In CWP mode only databases satisfying the constraints and
    the assumptions are considered.
    """
    consts, ps = _collect(list(s.constraints) + list(s.assumptions) + list(candidate))
    for r in s.rules:
        _formula_terms(r.body, consts, ps)
    for d in u.entries.values():
        _formula_terms(d.formula, consts, ps)
    dom = {c if isinstance(c, Const) else Const(str(c)) for c in domain} | consts
    dom_t = tuple(sorted(dom, key=lambda c: c.name))

    arities = dict(s.arities())
    for p, d in u.entries.items():
        arities.setdefault(p, len(d.head))
    for d in candidate:
        from .syntax import _denial_atoms

        for a, _ in _denial_atoms(d):
            arities.setdefault(a.pred, a.arity)
    edb_preds = sorted(p for p in arities if p not in s.idb_preds and p != "=")
    space = [(p, t) for p in edb_preds for t in itertools.product(dom_t, repeat=arities[p])]
    total = 2 ** len(space)
    sampled = False
    if total > max_databases:
        if sample is None:
            raise VerificationBudgetError(
                f"{total} databases exceed the budget of {max_databases}; pass sample= to subsample")
        sampled = True
        rng = random.Random(seed)
        masks: Iterable = (rng.getrandbits(len(space)) for _ in range(sample))
    else:
        masks = range(total)

    if params:
        pa_list = [_param_env(params)]
    else:
        plist = sorted(ps, key=lambda p: p.name)
        pa_list = [dict(zip(plist, combo)) for combo in itertools.product(dom_t, repeat=len(plist))]

    ev = Evaluator(s)
    cu = CompiledUpdate(u)
    gamma = list(s.constraints)
    pre_conds = gamma + list(s.assumptions)
    report = VerifyReport(mode, True, 0, total, sampled, dom_t)
    consistent: dict = {}

    def gamma_ok(edb: Model, pa: dict) -> bool:
        # Gamma rarely mentions parameters; when it does the key includes them
        key = (frozenset((p, t) for p, ts in edb.items() for t in ts),
               tuple(sorted(pa.items(), key=str)) if gamma_params else ())
        hit = consistent.get(key)
        if hit is None:
            hit = consistent[key] = satisfies(gamma, ev.model(edb, dom_t), dom_t, pa)
        return hit

    gamma_params = any(params_of(d) for d in gamma)
    for mask in masks:
        edb: Model = {p: set() for p in edb_preds}
        for k, (p, t) in enumerate(space):
            if mask >> k & 1:
                edb[p].add(t)
        model = ev.model(edb, dom_t)
        if mode == CWP and not satisfies(pre_conds, model, dom_t):
            continue
        for pa in pa_list:
            report.checked += 1
            post_edb = cu.apply(model, edb, dom_t, pa)
            post_ok = gamma_ok(post_edb, pa)
            cand_ok = satisfies(candidate, model, dom_t, pa)
            if cand_ok != post_ok:
                report.passed = False
                if len(report.counterexamples) < max_counterexamples:
                    facts = {Atom(p, t) for p, ts in edb.items() for t in ts}
                    report.counterexamples.append((facts, pa, cand_ok, post_ok))
    return report


def _edb_space(theories: list, domain: tuple) -> list:
    from .syntax import _denial_atoms

    arities: dict = {}
    for d in (d for th in theories for d in th):
        for a, _ in _denial_atoms(d):
            if a.pred != "=":
                arities.setdefault(a.pred, a.arity)
    return [(p, t) for p in sorted(arities) for t in itertools.product(domain, repeat=arities[p])]


def equivalent_under(
    delta: list,
    old: list,
    new: list,
    domain: Iterable = ("a", "b", "c"),
    *,
    max_databases: int = 2 ** 16,
    sample: int = 4096,
    seed: int = 0,
):
    """A database (with parameter values) satisfying ``delta`` on which the
    EDB-level theories ``old`` and ``new`` disagree, or ``None``."""
    consts, ps = _collect(list(delta) + list(old) + list(new))
    dom = tuple(sorted({c if isinstance(c, Const) else Const(str(c)) for c in domain} | consts,
                       key=lambda c: c.name))
    space = _edb_space([delta, old, new], dom)
    n = len(space)
    if 2 ** n <= max_databases:
        masks: Iterable = range(2 ** n)
    else:
        rng = random.Random(seed)
        masks = (rng.getrandbits(n) for _ in range(sample))
    plist = sorted(ps, key=lambda p: p.name)
    pas = [dict(zip(plist, combo)) for combo in itertools.product(dom, repeat=len(plist))]
    for mask in masks:
        model: Model = {}
        for k, (p, t) in enumerate(space):
            if mask >> k & 1:
                model.setdefault(p, set()).add(t)
        for pa in pas:
            if not satisfies(delta, model, dom, pa):
                continue
            if satisfies(old, model, dom, pa) != satisfies(new, model, dom, pa):
                return {Atom(p, t) for p, ts in model.items() for t in ts}, pa
    return None
