"""
Static analyses over a machine net: nullability, initial sets, candidate
closure and left recursion.

A candidate pairs a machine state with a look-ahead set. Candidates are kept
grouped by state, so a set of candidates is a mapping ``State -> frozenset``.
All fixpoints iterate in net order (axiom machine first, states ascending),
which keeps every output reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

from .grammar_frontend import END, MachineNet, State

Lookahead = frozenset


class Candidate(NamedTuple):
    state: State
    lookahead: frozenset

    def __str__(self) -> str:
        return f"<{self.state}, {fmt_set(self.lookahead)}>"


def sort_terminals(ts: Iterable[str]) -> list[str]:
    """Terminals in lexicographic order with the end-marker last."""
    return sorted(ts, key=lambda t: (t == END, t))


def fmt_set(ts: Iterable[str]) -> str:
    return "{" + " ".join(sort_terminals(ts)) + "}"


@dataclass(frozen=True)
class AnalysisTables:
    nullable_nonterminals: frozenset[str]
    nullable_states: Mapping[State, bool]
    ini: Mapping[State, frozenset[str]]

    def nullable(self, q: State) -> bool:
        return self.nullable_states[q]

    def ini_after(self, r: State, a: Iterable[str]) -> frozenset[str]:
        """Ini(L(r)·a): the initials of r, plus ``a`` when r is nullable."""
        return self.ini[r] | frozenset(a) if self.nullable_states[r] else self.ini[r]


def compute_nullable(net: MachineNet) -> tuple[frozenset[str], dict[State, bool]]:
    nullable = {q: net.is_final(q) for q in net.states}
    changed = True
    while changed:
        changed = False
        for q in net.states:
            if nullable[q]:
                continue
            for x, r in net.edges(q):
                if net.is_nonterminal(x) and nullable[net.initial(x)] and nullable[r]:
                    nullable[q] = changed = True
                    break
    nts = frozenset(a for a in net.nonterminals if nullable[net.initial(a)])
    return nts, nullable


def compute_ini(net: MachineNet) -> AnalysisTables:
    """Nullability and Ini sets, both as least fixpoints."""
    nts, null = compute_nullable(net)
    ini: dict[State, set[str]] = {q: set() for q in net.states}
    changed = True
    while changed:
        changed = False
        for q in net.states:
            acc = ini[q]
            before = len(acc)
            for x, r in net.edges(q):
                if not net.is_nonterminal(x):
                    acc.add(x)
                else:
                    acc |= ini[net.initial(x)]
                    if null[net.initial(x)]:
                        acc |= ini[r]
            changed |= len(acc) != before
    return AnalysisTables(nts, null, {q: frozenset(s) for q, s in ini.items()})


def analyze(net: MachineNet) -> AnalysisTables:
    return compute_ini(net)


def closure(
    candidates: Mapping[State, Iterable[str]] | Iterable[Candidate],
    net: MachineNet,
    tables: AnalysisTables,
) -> dict[State, frozenset[str]]:
    """Least set containing ``candidates`` and closed under call sites.

    For a candidate <q, a> and an edge q -B-> r, <0_B, b> is added for every
    b in Ini(L(r)·a). Candidates with equal states are merged.
    """
    if isinstance(candidates, Mapping):
        items = list(candidates.items())
    else:
        items = [(c.state, c.lookahead) for c in candidates]
    result: dict[State, set[str]] = {}
    work: list[State] = []
    for q, la in items:
        if q not in result:
            result[q] = set()
        result[q] |= set(la)
        work.append(q)
    while work:
        q = work.pop()
        la = result[q]
        for x, r in net.edges(q):
            if not net.is_nonterminal(x):
                continue
            target = net.initial(x)
            add = tables.ini_after(r, la)
            cur = result.setdefault(target, set())
            if not add <= cur:
                cur |= add
                work.append(target)
    return {q: frozenset(la) for q, la in result.items()}


def left_recursion_graph(net: MachineNet, tables: AnalysisTables) -> dict[State, list[State]]:
    """Edges 0_A -> 0_B when M_A reaches a B-edge over nullable nonterminals only."""
    graph: dict[State, list[State]] = {}
    for a in net.nonterminals:
        start = net.initial(a)
        seen = {start}
        work = [start]
        targets: list[State] = []
        while work:
            q = work.pop(0)
            for x, r in net.edges(q):
                if not net.is_nonterminal(x):
                    continue
                b = net.initial(x)
                if b not in targets:
                    targets.append(b)
                if x in tables.nullable_nonterminals and r not in seen:
                    seen.add(r)
                    work.append(r)
        graph[start] = sorted(targets, key=net.state_key)
    return graph


def detect_left_recursion(net: MachineNet, tables: AnalysisTables) -> list[State] | None:
    """A cycle of initial states ``[0_A, ..., 0_A]`` if the net is left-recursive."""
    graph = left_recursion_graph(net, tables)
    color: dict[State, int] = {}
    path: list[State] = []

    def visit(u: State) -> list[State] | None:
        color[u] = 1
        path.append(u)
        for v in graph[u]:
            if color.get(v) == 1:
                return path[path.index(v):] + [v]
            if v not in color:
                found = visit(v)
                if found:
                    return found
        color[u] = 2
        path.pop()
        return None

    for u in graph:
        if u not in color:
            found = visit(u)
            if found:
                return found
    return None


def epsilon_only_nonterminals(net: MachineNet, tables: AnalysisTables) -> list[str]:
    """Nonterminals whose language is exactly {ε}."""
    return [a for a in net.nonterminals
            if a in tables.nullable_nonterminals and not tables.ini[net.initial(a)]]
