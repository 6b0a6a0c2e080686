"""
Textbook canonical LR(1) construction for BNF grammars.

Used as a reference: an ELR(1) net should be conflict free exactly when the
LR(1) automaton of its right-linearized grammar is. The item sets are built
without an augmented start rule, so the initial m-state holds the axiom's
rules with look-ahead ``-|`` plus their closure.

When the grammar is right-linearized, every m-state is one of: the initial
m-state; an intermediate m-state, whose base items look like ``p -> Y • q``;
or a sink-reduction m-state, whose base items look like ``p -> Y q •``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, NamedTuple

from .grammar_frontend import END, EPSILON, BnfGrammar


class Item(NamedTuple):
    rule: int
    dot: int
    lookahead: str


@dataclass(frozen=True, eq=False)
class Lr1MState:
    id: int
    base: frozenset[Item]
    items: frozenset[Item]

    @property
    def closure(self) -> frozenset[Item]:
        return self.items - self.base


@dataclass(frozen=True, eq=False)
class Lr1Automaton:
    grammar: BnfGrammar
    mstates: tuple[Lr1MState, ...]
    goto: dict[tuple[int, Hashable], int]

    def rule(self, i: int) -> tuple[Hashable, tuple]:
        return self.grammar.rules[i]

    def show_item(self, it: Item) -> str:
        lhs, rhs = self.rule(it.rule)
        syms = [str(s) for s in rhs]
        syms.insert(it.dot, "•")
        return f"{lhs} -> {' '.join(syms)}, {it.lookahead}"

    def classify(self, m: Lr1MState) -> str:
        if m.id == 0:
            return "initial"
        if all(it.dot == len(self.rule(it.rule)[1]) and it.dot > 0 for it in m.base) and \
                all(len(self.rule(it.rule)[1]) == 2 for it in m.base):
            return "sink"
        if all(it.dot == 1 and len(self.rule(it.rule)[1]) == 2 for it in m.base):
            return "intermediate"
        return "other"


def _first_sets(g: BnfGrammar) -> tuple[dict, set]:
    nts = set(g.nonterminals)
    first: dict[Hashable, set[str]] = {a: set() for a in nts}
    nullable: set = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.rules:
            before = (len(first[lhs]), lhs in nullable)
            all_null = True
            for s in rhs:
                if s in nts:
                    first[lhs] |= first[s]
                    if s not in nullable:
                        all_null = False
                        break
                else:
                    first[lhs].add(s)
                    all_null = False
                    break
            if all_null:
                nullable.add(lhs)
            changed |= before != (len(first[lhs]), lhs in nullable)
    return first, nullable


def build_lr1_pilot(g: BnfGrammar) -> Lr1Automaton:
    nts = set(g.nonterminals)
    first, nullable = _first_sets(g)
    by_lhs: dict[Hashable, list[int]] = {}
    for i, (lhs, _) in enumerate(g.rules):
        by_lhs.setdefault(lhs, []).append(i)

    def first_of(seq: tuple, la: str) -> set[str]:
        out: set[str] = set()
        for s in seq:
            if s in nts:
                out |= first[s]
                if s not in nullable:
                    return out
            else:
                out.add(s)
                return out
        out.add(la)
        return out

    def close(items: frozenset[Item]) -> frozenset[Item]:
        result = set(items)
        work = list(items)
        while work:
            it = work.pop()
            rhs = g.rules[it.rule][1]
            if it.dot < len(rhs) and rhs[it.dot] in nts:
                for b in first_of(rhs[it.dot + 1:], it.lookahead):
                    for r in by_lhs.get(rhs[it.dot], ()):
                        new = Item(r, 0, b)
                        if new not in result:
                            result.add(new)
                            work.append(new)
        return frozenset(result)

    def sym_key(x: Hashable) -> tuple:
        return (x in nts, str(x))

    start_base = frozenset(Item(r, 0, END) for r in by_lhs.get(g.axiom, ()))
    states = [Lr1MState(0, start_base, close(start_base))]
    index = {start_base: 0}
    goto: dict[tuple[int, Hashable], int] = {}
    queue = deque([0])
    while queue:
        mid = queue.popleft()
        m = states[mid]
        moves: dict[Hashable, set[Item]] = {}
        for it in m.items:
            rhs = g.rules[it.rule][1]
            if it.dot < len(rhs):
                moves.setdefault(rhs[it.dot], set()).add(Item(it.rule, it.dot + 1, it.lookahead))
        for x in sorted(moves, key=sym_key):
            base = frozenset(moves[x])
            tid = index.get(base)
            if tid is None:
                tid = len(states)
                index[base] = tid
                states.append(Lr1MState(tid, base, close(base)))
                queue.append(tid)
            goto[mid, x] = tid
    return Lr1Automaton(g, tuple(states), goto)


class Lr1Conflict(NamedTuple):
    kind: str  # "shift-reduce", "reduce-reduce" or "accept-reduce"
    mstate: int
    items: tuple[Item, ...]
    terminal: str


@dataclass
class Lr1Report:
    shift_reduce: list[Lr1Conflict] = field(default_factory=list)
    reduce_reduce: list[Lr1Conflict] = field(default_factory=list)
    accept_reduce: list[Lr1Conflict] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.shift_reduce or self.reduce_reduce or self.accept_reduce)

    @property
    def conflicts(self) -> list[Lr1Conflict]:
        return self.shift_reduce + self.reduce_reduce + self.accept_reduce


def check_lr1(aut: Lr1Automaton) -> Lr1Report:
    g = aut.grammar
    nts = set(g.nonterminals)
    report = Lr1Report()
    for m in aut.mstates:
        complete = sorted((it for it in m.items if it.dot == len(g.rules[it.rule][1])),
                          key=lambda it: (it.rule, it.lookahead))
        for it in complete:
            if it.lookahead != END and it.lookahead not in nts and (m.id, it.lookahead) in aut.goto:
                report.shift_reduce.append(Lr1Conflict("shift-reduce", m.id, (it,), it.lookahead))
        for a, b in combinations(complete, 2):
            if a.lookahead == b.lookahead and a.rule != b.rule:
                report.reduce_reduce.append(Lr1Conflict("reduce-reduce", m.id, (a, b), a.lookahead))
    # what an augmented rule S' -> S would catch: reducing on the end marker after S
    after_axiom = aut.goto.get((0, g.axiom))
    if after_axiom is not None:
        for it in aut.mstates[after_axiom].items:
            if it.dot == len(g.rules[it.rule][1]) and it.lookahead == END:
                report.accept_reduce.append(Lr1Conflict("accept-reduce", after_axiom, (it,), END))
    return report


def describe_conflict(aut: Lr1Automaton, c: Lr1Conflict) -> str:
    items = " / ".join(aut.show_item(it) for it in c.items)
    return f"{c.kind} conflict in Î_{c.mstate} on {c.terminal}: {items}"


def bnf_rule_text(g: BnfGrammar, i: int) -> str:
    lhs, rhs = g.rules[i]
    return f"{lhs} -> {' '.join(map(str, rhs)) or EPSILON}"
