"""
Shift-reduce engines driven by an ELR(1) pilot.

Both engines keep the grammar symbols on the stack, interleaved with stack
m-states. A stack m-state lists stack candidates: a machine state, its
look-ahead, and a link telling where the current machine activation started.

* ``parse_elr_cid``: the link of a base candidate is the 1-based position of
  its source candidate in the element below; closure candidates carry no link
  (shown as ⊥). A reduction walks this chain down to the initial state.
* ``parse_elr_vector``: the link is the index of the stack element holding the
  activation's initial state, so a reduction knows its extent immediately.

Candidate order inside an element: base candidates in the order of their
sources, then closure candidates in net order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Union

from .errors import NetparseError
from .grammar_frontend import END, State
from .net_analysis import fmt_set
from .pilot import Pilot, check_elr1
from .trees import ParseErrorInfo, ParseOutcome, Reduction, SyntaxTree, TraceStep

BOTTOM = "⊥"


class StackCandidate(NamedTuple):
    state: State
    lookahead: frozenset
    link: int | None  # cid (1-based) or element index; None is ⊥

    def render(self) -> str:
        link = BOTTOM if self.link is None else f"#{self.link}"
        return f"{self.state} {fmt_set(self.lookahead)} {link}"


class VStackCandidate(NamedTuple):
    state: State
    lookahead: frozenset
    elem_id: int

    def render(self) -> str:
        return f"{self.state} {fmt_set(self.lookahead)} {self.elem_id}"


Node = Union[str, SyntaxTree]


@dataclass
class _Element:
    mstate: int
    cands: list
    symbol: str | None = None
    node: Node | None = None


@lru_cache(maxsize=64)
def _conflicts(pilot: Pilot) -> tuple[str, ...]:
    return tuple(check_elr1(pilot).messages())


def require_elr1(pilot: Pilot) -> None:
    problems = _conflicts(pilot)
    if problems:
        raise NetparseError("the net is not ELR(1): " + "; ".join(problems))


def expected_terminals(pilot: Pilot, mid: int, cands: Iterable) -> frozenset[str]:
    net = pilot.net
    exp = {x for (m, x) in pilot.theta if m == mid and not net.is_nonterminal(x)}
    for c in cands:
        if net.is_final(c.state):
            exp |= c.lookahead
    return frozenset(exp)


def render_stack(stack: list[_Element], prefix: str = "I") -> str:
    parts = []
    for e in stack:
        if e.symbol is not None:
            parts.append(e.symbol)
        body = "; ".join(c.render() for c in e.cands)
        parts.append(f"{prefix}_{e.mstate}[{body}]")
    return " ".join(parts)


def _run(pilot: Pilot, tokens: Iterable[str], vector: bool, trace: bool) -> ParseOutcome:
    require_elr1(pilot)
    net = pilot.net
    toks = list(tokens) + [END]
    pos = 0
    cand_type = VStackCandidate if vector else StackCandidate
    start = pilot.mstates[pilot.initial]
    stack = [_Element(start.id, [cand_type(c.state, c.lookahead, 0 if vector else None)
                                 for c in start.candidates])]
    out = ParseOutcome(False)

    def log(move: str, detail: str, **data) -> None:
        if trace:
            out.trace.append(TraceStep(move, detail, render_stack(stack), data))

    def push(x: str, node: Node) -> None:
        src = stack[-1]
        target = pilot.theta[src.mstate, x]
        k = len(stack)
        cands = []
        for i, c in enumerate(src.cands, 1):
            r = net.delta(c.state, x)
            if r is not None:
                cands.append(cand_type(r, c.lookahead, c[2] if vector else i))
        for c in pilot.mstates[target].closure:
            cands.append(cand_type(c.state, c.lookahead, k if vector else None))
        stack.append(_Element(target, cands, x, node))
        log("shift", f"I_{src.mstate} -{x}-> I_{target}", source=src.mstate, symbol=x,
            target=target, convergent=(src.mstate, x) in pilot.convergent_edges)

    log("init", f"I_{start.id}")
    while True:
        top = stack[-1]
        a = toks[pos]
        ready = [c for c in top.cands if net.is_final(c.state) and a in c.lookahead]
        target = pilot.theta.get((top.mstate, a)) if a != END else None
        if ready:
            t = ready[0]
            nt = t.state.machine
            k = len(stack) - 1
            if net.is_initial(t.state):
                h = k
            elif vector:
                h = t.elem_id
            else:
                h, c = k, t
                while c.link is not None:
                    h -= 1
                    c = stack[h].cands[c.link - 1]
                if c.state != net.initial(nt):
                    raise NetparseError(f"link chain ended at {c.state}, expected {net.initial(nt)}")
            popped = stack[h + 1:]
            del stack[h + 1:]
            red = Reduction(tuple(e.symbol for e in popped), nt)  # type: ignore[misc]
            out.reductions.append(red)
            node = SyntaxTree(nt, tuple(e.node for e in popped))  # type: ignore[misc]
            log("reduce", str(red), reduction=red, extent=h)
            if h == 0 and nt == net.axiom and a == END:
                out.accepted = True
                out.tree = node
                log("accept", f"I_{stack[0].mstate} -{nt}->")
                return out
            push(nt, node)
        elif target is not None:
            push(a, a)
            pos += 1
        else:
            out.error = ParseErrorInfo(pos, a, expected_terminals(pilot, top.mstate, top.cands))
            log("error", str(out.error))
            return out


def parse_elr_cid(pilot: Pilot, tokens: Iterable[str], trace: bool = False) -> ParseOutcome:
    """Parse with the candidate-identifier stack."""
    return _run(pilot, tokens, vector=False, trace=trace)


def parse_elr_vector(pilot: Pilot, tokens: Iterable[str], trace: bool = False) -> ParseOutcome:
    """Parse with the vector stack (element indices instead of chains)."""
    return _run(pilot, tokens, vector=True, trace=trace)
