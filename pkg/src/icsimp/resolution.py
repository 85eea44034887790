"""Binary resolution over extended denials and bounded derivability.

Only ordinary literals (equalities included) are resolved upon; NEEs ride
along in the resolvent untouched.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .kernel import Denial, Literal, canonicalize, standardize, standardize_apart, subst, size, unifiers
from .rewrite import expand, extended_subsumes, reduce, subsumes


@dataclass
class DerivationBudget:
    max_literals: int | None = None  # None: size of the largest expanded hypothesis
    max_clauses: int = 4000


@dataclass
class DerivationStats:
    calls: int = 0
    generated: int = 0
    kept: int = 0
    cap_hits: int = 0

    def merge(self, other: "DerivationStats") -> None:
        self.calls += other.calls
        self.generated += other.generated
        self.kept += other.kept
        self.cap_hits += other.cap_hits


@dataclass
class Derivation:
    found: bool
    witness: Denial | None = None
    proof: list = field(default_factory=list)
    cap_hit: bool = False
    kept: int = 0

    def __bool__(self) -> bool:
        return self.found

    def render(self) -> str:
        return "\n".join(f"{c}   from {p1} and {p2}" for c, p1, p2 in self.proof)


def _complementary(a: Literal, b: Literal) -> bool:
    return a.positive != b.positive and a.atom.pred == b.atom.pred and a.atom.arity == b.atom.arity


def resolvents(phi1: Denial, phi2: Denial) -> Iterator[Denial]:
    """Every binary resolvent of two extended denials."""
    phi2 = standardize_apart(phi1, phi2)
    for i, g1 in enumerate(phi1.body):
        if not isinstance(g1, Literal):
            continue
        for j, g2 in enumerate(phi2.body):
            if isinstance(g2, Literal) and _complementary(g1, g2):
                for theta in unifiers(g1.atom, g2.atom):
                    yield _merge(phi1, phi2, i, j, theta)


def _merge(phi1: Denial, phi2: Denial, i: int, j: int, theta: dict) -> Denial:
    body = phi1.body[:i] + phi1.body[i + 1:] + phi2.body[:j] + phi2.body[j + 1:]
    return standardize(Denial(subst(body, theta)))


def binary_resolvent(phi1: Denial, phi2: Denial, i: int, j: int) -> Denial | None:
    """Resolve ``phi1`` and ``phi2`` on the literals at positions ``i``, ``j``.

    ``None`` when the two are not complementary and unifiable, or when
    either position holds an NEE.
    """
    phi2 = standardize_apart(phi1, phi2)
    g1, g2 = phi1.body[i], phi2.body[j]
    if not (isinstance(g1, Literal) and isinstance(g2, Literal) and _complementary(g1, g2)):
        return None
    us = unifiers(g1.atom, g2.atom)
    if not us:
        return None
    return _merge(phi1, phi2, i, j, us[0])


def _normal(d: Denial) -> list:
    """Reduced forms of ``d`` paired with their expansions."""
    return [(r, expand(r)) for r in reduce(d)]


def derive_fbr(
    hypotheses: Iterable[Denial],
    goal: Denial,
    budget: DerivationBudget | None = None,
    *,
    support: Iterable[Denial] = (),
    accept: Callable[[Denial], bool] | None = None,
    stats: DerivationStats | None = None,
    trace: bool = False,
) -> Derivation:
    """Bounded saturation deciding whether ``goal`` follows from ``hypotheses``.

    Breadth-first: clauses in ``support`` (all hypotheses if empty) are
    given clauses, resolved against everything seen so far.  Resolvents are
    reduced, then expanded, and dropped when larger than the budget.
    ``accept`` tests each reduced clause; the default asks whether it
    extended-subsumes ``goal``.
    """
    budget = budget or DerivationBudget()
    if accept is None:
        def accept(r: Denial) -> bool:
            return extended_subsumes(r, goal)
    local = DerivationStats(calls=1)
    hyps = list(hypotheses)
    sos = list(support)
    kept: list = []  # expanded clauses
    seen: set = set()
    queue: deque = deque()
    parents: dict = {}

    def done(res: Derivation) -> Derivation:
        local.kept = len(kept)
        res.kept = len(kept)
        if stats is not None:
            stats.merge(local)
        return res

    def proof_of(c) -> list:
        out, todo = [], [c]
        while todo:
            x = todo.pop()
            if x in parents:
                p1, p2 = parents[x]
                out.append((x, p1, p2))
                todo.extend([p1, p2])
        return out[::-1]

    initial = []
    for h in hyps + sos:
        for r, e in _normal(h):
            if accept(r):
                return done(Derivation(True, r))
            initial.append((e, h in sos or not sos))
    limit = budget.max_literals
    if limit is None:
        limit = max((size(e) for e, _ in initial), default=0)
    for e, given in initial:
        key = canonicalize(e)
        if key in seen:
            continue
        seen.add(key)
        kept.append(e)
        if given:
            queue.append(e)
    usable = [e for e in kept if e not in queue]
    processed = list(usable)

    while queue:
        g = queue.popleft()
        processed.append(g)
        for other in list(processed):
            for res in resolvents(g, other):
                local.generated += 1
                for r, e in _normal(res):
                    if size(e) > limit:
                        continue
                    key = canonicalize(e)
                    if key in seen:
                        continue
                    seen.add(key)
                    if trace:
                        parents[r] = parents[e] = (g, other)
                    if accept(r):
                        return done(Derivation(True, r, proof_of(r) if trace else []))
                    if any(subsumes(k, e) is not None for k in kept if size(k) <= size(e)):
                        continue
                    kept.append(e)
                    queue.append(e)
                    if len(kept) > budget.max_clauses:
                        local.cap_hits += 1
                        return done(Derivation(False, cap_hit=True))
    return done(Derivation(False))
