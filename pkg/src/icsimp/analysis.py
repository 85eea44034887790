"""Starred dependency graph, language membership, stratification and levels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .formula import FExists, FOr, atoms_of
from .kernel import EQ, NEE, Denial, Literal, Var, standardize  # noqa: F401  (re-export)
from .syntax import Schema, Update

BOTTOM = "⊥"

L_S = "L_S"
L_SEXT = "L_Sext"
NEITHER = "neither"


@dataclass
class StarredGraph:
    nodes: set = field(default_factory=set)
    starred: set = field(default_factory=set)
    arcs: list = field(default_factory=list)  # (src, dst, negative)

    def add_arc(self, src: str, dst: str, negative: bool) -> None:
        self.nodes |= {src, dst}
        self.arcs.append((src, dst, negative))

    def digraph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.nodes)
        for s, d, neg in self.arcs:
            g.add_edge(s, d, negative=neg)
        return g

    def label(self, node: str) -> str:
        return node + "*" if node in self.starred else node

    def __str__(self) -> str:
        lines = [f"nodes: {' '.join(sorted(self.label(n) for n in self.nodes))}"]
        for s, d, neg in sorted(self.arcs):
            lines.append(f"  {self.label(s)} -{'-' if neg else '+'}-> {self.label(d)}")
        return "\n".join(lines)


def _has_locals(formula) -> bool:
    parts = formula.parts if isinstance(formula, FOr) else (formula,)
    return any(isinstance(p, FExists) and p.vars for p in parts)


def _denial_occurrences(body, depth: int = 0):
    for g in body:
        if isinstance(g, Literal):
            if not g.is_eq:
                yield g.atom.pred, (depth + (0 if g.positive else 1)) % 2 == 1
        else:
            yield from _denial_occurrences(g.body, depth + 1)


def build_graph(s: Schema, u: Update | None = None) -> StarredGraph:
    g = StarredGraph(nodes={BOTTOM})
    g.nodes |= {p for p in s.arities() if p != EQ}
    for p, d in s.definitions().items():
        if _has_locals(d.formula):
            g.starred.add(p)
    for r in s.rules:
        for atom, positive in atoms_of(r.body):
            if atom.pred != EQ:
                g.add_arc(atom.pred, r.head.pred, not positive)
    for d in s.constraints + s.assumptions:
        for pred, negative in _denial_occurrences(d.body):
            g.add_arc(pred, BOTTOM, negative)
    if u is not None:
        for p, d in u.entries.items():
            q = p + "^U"
            g.nodes.add(q)
            if _has_locals(d.formula):
                g.starred.add(q)
            g.add_arc(q, p, False)
    return g


@dataclass
class LanguageVerdict:
    schema_class: str
    update_class: str | None = None
    witness: list | None = None
    update_witness: list | None = None

    def report(self) -> str:
        lines = [_describe("schema", self.schema_class, self.witness)]
        if self.update_class is not None:
            lines.append(_describe("update", self.update_class, self.update_witness))
        return "\n".join(lines)


def _describe(what: str, cls: str, witness) -> str:
    path = " -> ".join(witness) if witness else ""
    if cls == L_S:
        return f"{what}: in L_S; in L_Sext"
    if cls == L_SEXT:
        return f"{what}: not in L_S (odd-parity star path {path}); in L_Sext"
    return f"{what}: not in L_S; not in L_Sext (cycle {path})"


def find_cycle(g: StarredGraph) -> list | None:
    try:
        cyc = nx.find_cycle(g.digraph())
    except nx.NetworkXNoCycle:
        return None
    return [e[0] for e in cyc] + [cyc[-1][1]]


def odd_star_path(g: StarredGraph) -> list | None:
    """A path from a starred node to the bottom node with an odd number of
    negative arcs, searched over (node, parity) states."""
    succ: dict = {}
    for s, d, neg in g.arcs:
        succ.setdefault(s, []).append((d, neg))
    start = [(n, 0) for n in sorted(g.starred)]
    parent: dict = {st: None for st in start}
    queue = deque(start)
    while queue:
        node, par = queue.popleft()
        if node == BOTTOM and par == 1:
            path, st = [], (node, par)
            while st is not None:
                path.append(g.label(st[0]))
                st = parent[st]
            return path[::-1]
        for d, neg in sorted(succ.get(node, [])):
            nxt = (d, par ^ int(neg))
            if nxt not in parent:
                parent[nxt] = (node, par)
                queue.append(nxt)
    return None


def _verdict(g: StarredGraph) -> tuple:
    cyc = find_cycle(g)
    if cyc is not None:
        return NEITHER, [g.label(n) for n in cyc]
    odd = odd_star_path(g)
    if odd is not None:
        return L_SEXT, odd
    return L_S, None


def classify(s: Schema, u: Update | None = None) -> LanguageVerdict:
    cls, witness = _verdict(build_graph(s))
    v = LanguageVerdict(cls, witness=witness)
    if u is not None:
        v.update_class, v.update_witness = _verdict(build_graph(s, u))
    return v


def check_stratified(s: Schema) -> tuple:
    """``(True, strata)`` if no predicate depends negatively on itself."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(p for p in s.arities() if p != EQ)
    for r in s.rules:
        for atom, positive in atoms_of(r.body):
            if atom.pred != EQ:
                g.add_edge(atom.pred, r.head.pred, negative=not positive)
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    for a, b, data in g.edges(data=True):
        if data["negative"] and members[a] == members[b]:
            return False, {}
    comp_stratum: dict = {}
    for c in nx.topological_sort(cond):
        level = 0
        for pred in cond.predecessors(c):
            level = max(level, comp_stratum[pred])
        # negative arcs entering this component raise the stratum
        for n in cond.nodes[c]["members"]:
            for a, _, data in g.in_edges(n, data=True):
                if members[a] != c:
                    level = max(level, comp_stratum[members[a]] + int(data["negative"]))
        comp_stratum[c] = level
    return True, {p: comp_stratum[members[p]] for p in g.nodes}


def level(d: Denial, target) -> int:
    """Level of an NEE or a variable within a standardized extended denial."""

    def search(body, depth):
        for g in body:
            if isinstance(g, NEE):
                if g == target:
                    return depth + 1
                if isinstance(target, Var) and target in g.vars:
                    return depth + 1
                found = search(g.body, depth + 1)
                if found is not None:
                    return found
        return None

    if isinstance(target, Denial):
        from .kernel import level_of_denial

        return level_of_denial(target)
    found = search(d.body, 0)
    if found is not None:
        return found
    if isinstance(target, Var) and any(
        isinstance(g, Literal) and target in g.atom.args for g in d.body
    ):
        return 0
    raise ValueError(f"{target} does not occur in {d}")
