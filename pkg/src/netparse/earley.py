"""
Earley recognition directly on a machine net, and tree extraction.

The vector ``E[0..n]`` holds pairs ``<state, origin>``. Completion closes an
element under calls (adding ``<0_X, i>`` for every X-edge) and nonterminal
shifts (a final pair ``<f, j>`` of machine X advances every X-edge waiting in
``E[j]``), repeating until nothing is added. Terminal shift carries pairs of
``E[i-1]`` across ``x_i``. No look-ahead is used.

``build_tree`` walks a recognized machine path backwards, recovering each
step as a terminal shift or as a nonterminal shift with a recursive subtree.
On an unambiguous grammar exactly one explanation exists at every step; more
than one raises AmbiguityError.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import AmbiguityError, InternalInconsistencyError
from .grammar_frontend import MachineNet, State
from .trees import SyntaxTree


class EarleyPair(NamedTuple):
    state: State
    origin: int

    def __str__(self) -> str:
        return f"<{self.state}, {self.origin}>"


@dataclass
class EarleyVector:
    tokens: tuple[str, ...]
    elements: list[dict[EarleyPair, None]] = field(default_factory=list)  # insertion-ordered sets

    def __getitem__(self, i: int) -> dict[EarleyPair, None]:
        return self.elements[i]

    def __len__(self) -> int:
        return len(self.elements)

    def pairs(self, i: int) -> list[EarleyPair]:
        return list(self.elements[i])

    def render(self) -> str:
        cols = [[f"{p.state} {p.origin}" for p in e] for e in self.elements]
        width = max([len(s) for c in cols for s in c] + [4])
        head = [f"E_{i}".ljust(width) for i in range(len(cols))]
        toks = [" ".ljust(width)] + [t.ljust(width) for t in self.tokens]
        lines = [" | ".join(toks), " | ".join(head)]
        for r in range(max((len(c) for c in cols), default=0)):
            lines.append(" | ".join((c[r] if r < len(c) else "").ljust(width) for c in cols))
        return "\n".join(line.rstrip() for line in lines)


def completion(E: EarleyVector, i: int, net: MachineNet) -> None:
    elem = E[i]
    added = True
    while added:
        added = False
        for p in list(elem):
            for x, _ in net.edges(p.state):
                if net.is_nonterminal(x):
                    new = EarleyPair(net.initial(x), i)
                    if new not in elem:
                        elem[new] = None
                        added = True
        for f in list(elem):
            if not net.is_final(f.state):
                continue
            x = f.state.machine
            for p in list(E[f.origin]):
                q = net.delta(p.state, x)
                if q is not None:
                    new = EarleyPair(q, p.origin)
                    if new not in elem:
                        elem[new] = None
                        added = True


def terminal_shift(E: EarleyVector, i: int, net: MachineNet) -> None:
    x = E.tokens[i - 1]
    for p in E[i - 1]:
        if net.is_nonterminal(x):
            continue
        q = net.delta(p.state, x)
        if q is not None:
            E[i].setdefault(EarleyPair(q, p.origin))


def earley_recognize(net: MachineNet, tokens: Sequence[str]) -> tuple[bool, EarleyVector]:
    toks = tuple(tokens)
    n = len(toks)
    E = EarleyVector(toks, [dict() for _ in range(n + 1)])
    E[0][EarleyPair(net.initial(net.axiom), 0)] = None
    completion(E, 0, net)
    i = 1
    while i <= n and E[i - 1]:
        terminal_shift(E, i, net)
        completion(E, i, net)
        i += 1
    accepted = any(p.origin == 0 and p.state.machine == net.axiom and net.is_final(p.state)
                   for p in E[n])
    return accepted, E


def accepting_pairs(net: MachineNet, E: EarleyVector) -> list[EarleyPair]:
    n = len(E) - 1
    return [p for p in E[n] if p.origin == 0 and p.state.machine == net.axiom and net.is_final(p.state)]


def build_tree(X: str, f: State, j: int, i: int, E: EarleyVector, net: MachineNet) -> SyntaxTree:
    """Tree of ``X =>+ x_{j+1} .. x_i`` ending in final state ``f`` of M_X."""
    children: list = []
    q, k = f, i
    start = net.initial(X)
    while q != start:
        options: list[tuple] = []
        # (a) terminal shift p -x_k-> q with <p, j> in E[k-1]
        if k > j:
            xk = E.tokens[k - 1]
            for p in net.states:
                if p.machine == X and net.delta(p, xk) == q and EarleyPair(p, j) in E[k - 1]:
                    options.append(("t", p, k - 1, xk))
        # (b) nonterminal shift p -Y-> q, <e, h> in E[k], e final in M_Y, <p, j> in E[h]
        for p in net.states:
            if p.machine != X:
                continue
            for y, r in net.edges(p):
                if r != q or not net.is_nonterminal(y):
                    continue
                for e in net.finals(y):
                    for h in range(j, k + 1):
                        if EarleyPair(e, h) in E[k] and EarleyPair(p, j) in E[h]:
                            options.append(("n", p, h, (y, e, k)))
        if not options:
            raise InternalInconsistencyError(f"no step explains {q} at position {k} (origin {j})")
        if len(options) > 1:
            raise AmbiguityError(
                f"{len(options)} ways to reach {q} at position {k} from origin {j}: the grammar is ambiguous"
            )
        kind, p, h, info = options[0]
        if kind == "t":
            children.insert(0, info)
        else:
            y, e, kk = info
            children.insert(0, build_tree(y, e, h, kk, E, net))
        q, k = p, h
    return SyntaxTree(X, tuple(children))


def earley_parse(net: MachineNet, tokens: Sequence[str]) -> tuple[bool, SyntaxTree | None, EarleyVector]:
    ok, E = earley_recognize(net, tokens)
    if not ok:
        return False, None, E
    finals = accepting_pairs(net, E)
    if len(finals) > 1:
        raise AmbiguityError("several final states accept the input: the grammar is ambiguous")
    f = finals[0]
    return True, build_tree(net.axiom, f.state, 0, len(tokens), E, net), E
