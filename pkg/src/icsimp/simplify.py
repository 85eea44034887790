"""Optimization of a constraint theory under trusted hypotheses, and the
end-to-end simplification pipeline."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .analysis import L_S, L_SEXT, NEITHER, classify
from .kernel import NEE, Denial, Var, canonicalize, free_vars, rename_apart, size, unwrap, vars_of, wrap
from .resolution import DerivationBudget, DerivationStats, derive_fbr
from .rewrite import RewriteTrace, reduce, strictly_subsumes
from .syntax import Schema, SchemaError, Update
from .transform import after_lang, unfold

DEFAULT_MAX_FIRINGS = 10_000


class OptimizationError(RuntimeError):
    """Raised when the optimizer exceeds its firing cap."""


@dataclass
class OptimizerStats:
    firings: Counter = field(default_factory=Counter)
    rounds: int = 0
    derivations: DerivationStats = field(default_factory=DerivationStats)

    @property
    def total(self) -> int:
        return sum(self.firings.values())

    def report(self) -> str:
        rules = ", ".join(f"{k}={v}" for k, v in sorted(self.firings.items())) or "none"
        d = self.derivations
        return (
            f"rounds={self.rounds} firings: {rules}; derivations={d.calls} "
            f"resolvents={d.generated} cap_hits={d.cap_hits}"
        )


@dataclass
class SimplificationResult:
    theory: list
    trace: RewriteTrace
    stats: OptimizerStats
    lang: str
    delta: list = field(default_factory=list)
    after: list = field(default_factory=list)


Checker = Callable[[str, list, list], None]


def _key(d: Denial) -> str:
    return str(canonicalize(d))


def _nee_paths(body: tuple, prefix: tuple = ()):
    for i, g in enumerate(body):
        if isinstance(g, NEE):
            yield prefix + (i,), g
            yield from _nee_paths(g.body, prefix + (i,))


def _replace(body: tuple, path: tuple, new) -> tuple:
    """Replace the NEE at ``path`` by ``new`` (``None`` removes it)."""
    i = path[0]
    if len(path) == 1:
        return body[:i] + (() if new is None else (new,)) + body[i + 1:]
    g = body[i]
    return body[:i] + (NEE(g.vars, _replace(g.body, path[1:], new)),) + body[i + 1:]


class Optimizer:
    def __init__(
        self,
        delta: list,
        lang: str = L_SEXT,
        *,
        max_firings: int = DEFAULT_MAX_FIRINGS,
        budget: DerivationBudget | None = None,
        trace: RewriteTrace | None = None,
        stats: OptimizerStats | None = None,
        check: Checker | None = None,
    ):
        self.delta = list(delta)
        self.lang = lang
        self.max_firings = max_firings
        self.budget = budget or DerivationBudget()
        self.trace = trace if trace is not None else RewriteTrace()
        self.stats = stats if stats is not None else OptimizerStats()
        self.check = check

    def _fire(self, rule: str, before, after, old: list, new: list) -> None:
        self.stats.firings[rule] += 1
        if self.stats.total > self.max_firings:
            raise OptimizationError(f"more than {self.max_firings} rule firings")
        self.trace.add(rule, before, after)
        if self.check is not None:
            self.check(rule, old, new)

    def _derive(self, hyps, goal, **kw):
        return derive_fbr(hyps, goal, self.budget, stats=self.stats.derivations, **kw)

    def run(self, gamma: list) -> list:
        work = [canonicalize(d) for d in gamma]
        while True:
            self.stats.rounds += 1
            work, c1 = self._reduce_all(work)
            work, c2 = self._discharge(work)
            c3 = False
            if self.lang != L_S:
                work, c3 = self._nee_rules(work)
            c4 = False
            if not c3:
                work, c4 = self._strengthen(work)
            if not (c1 or c2 or c3 or c4):
                return sorted(work, key=_key)

    # R1 / R3
    def _reduce_all(self, work: list) -> tuple:
        out: list = []
        seen: set = set()
        changed = False
        ordered = sorted(work, key=_key)
        for i, phi in enumerate(ordered):
            rs = reduce(phi)
            if rs != [phi]:
                before = out + ordered[i:]
                self._fire("R1" if not rs else "R3", phi, rs, before, out + rs + ordered[i + 1:])
                changed = True
            for r in rs:
                k = _key(r)
                if k not in seen:
                    seen.add(k)
                    out.append(r)
        return out, changed

    # R2
    def _discharge(self, work: list) -> tuple:
        changed = False
        for phi in sorted(work, key=_key):
            others = [x for x in work if x is not phi]
            if self._derive(others + self.delta, phi):
                self._fire("R2", phi, [], work, others)
                work = others
                changed = True
        return work, changed

    # R4
    def _strengthen(self, work: list) -> tuple:
        changed = False
        for phi in sorted(work, key=_key):
            others = [x for x in work if x is not phi]
            n = size(phi)

            def accept(r, phi=phi, n=n):
                return size(r) < n and strictly_subsumes(r, phi)

            d = self._derive(others + self.delta, phi, support=[phi], accept=accept)
            if d:
                new = others + [d.witness]
                self._fire("R4", phi, [d.witness], work, new)
                work = new
                changed = True
        return work, changed

    # R2 and R4 applied to NEE bodies
    def _nee_rules(self, work: list) -> tuple:
        for phi in sorted(work, key=_key):
            others = [x for x in work if x is not phi]
            for path, nee in _nee_paths(phi.body):
                outer = sorted(free_vars(nee), key=lambda v: v.name)
                body = Denial(wrap(nee.body, outer))
                hyps = others + self.delta + [phi]
                if self._derive(hyps, body):
                    new_phi = Denial(_replace(phi.body, path, None))
                    new = others + [new_phi]
                    self._fire("R2-NEE", phi, [new_phi], work, new)
                    return new, True
                n = size(body)

                def accept(r, body=body, n=n):
                    return size(r) < n and strictly_subsumes(r, body)

                d = self._derive(hyps, body, support=[body], accept=accept)
                if d:
                    new_nee = _unwrap_nee(d.witness, set(outer))
                    new_phi = Denial(_replace(phi.body, path, new_nee))
                    new = others + [new_phi]
                    self._fire("R4-NEE", phi, [new_phi], work, new)
                    return new, True
        return work, False


def _unwrap_nee(d: Denial, outer: set) -> NEE:
    body = unwrap(rename_apart(d).body)
    qs = tuple(sorted((v for v in vars_of(body) - outer if isinstance(v, Var)), key=lambda v: v.name))
    # variables quantified by nested NEEs stay there
    nested = vars_of(body) - free_vars(Denial(body))
    return NEE(tuple(v for v in qs if v not in nested), body)


def optimize(
    delta: list,
    gamma: list,
    lang: str = L_SEXT,
    *,
    max_firings: int = DEFAULT_MAX_FIRINGS,
    budget: DerivationBudget | None = None,
    trace: RewriteTrace | None = None,
    stats: OptimizerStats | None = None,
    check: Checker | None = None,
) -> list:
    """Rewrite ``gamma`` to fixpoint under the trusted hypotheses ``delta``.

    Raises :class:`OptimizationError` past ``max_firings`` rule firings.
    """
    opt = Optimizer(delta, lang, max_firings=max_firings, budget=budget,
                    trace=trace, stats=stats, check=check)
    return opt.run(gamma)


def delta_of(s: Schema) -> list:
    """The unfolded constraints together with the unfolded assumptions."""
    return unfold(s) + unfold(s, s.assumptions)


def simp(
    s: Schema,
    u: Update,
    lang: str | None = None,
    *,
    max_firings: int = DEFAULT_MAX_FIRINGS,
    budget: DerivationBudget | None = None,
    check: Checker | None = None,
) -> SimplificationResult:
    v = classify(s, u)
    if v.update_class == NEITHER:
        raise SchemaError(v.report())
    lang = lang or v.update_class
    wp = after_lang(s, u, lang)
    delta = delta_of(s)
    trace = RewriteTrace()
    stats = OptimizerStats()
    theory = optimize(delta, wp.theory, lang, max_firings=max_firings, budget=budget,
                      trace=trace, stats=stats, check=check)
    return SimplificationResult(theory, trace, stats, lang, delta, wp.theory)
