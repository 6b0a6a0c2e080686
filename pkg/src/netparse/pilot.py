"""
The ELR(1) pilot: a DFA whose states (m-states) are sets of candidates.

``build_pilot`` starts from the closure of ``<0_S, -|>`` and adds, for every
m-state I and symbol X, the m-state ``closure(shift(I, X))``. Two m-states
are the same exactly when their candidate sets (states and look-aheads) are
equal. An edge is convergent when two distinct candidates of its source move
to the same machine state; it is a convergence conflict when their
look-aheads overlap.

``compact_pilot`` merges m-states with the same kernel (set of states),
uniting look-aheads. It is only sound under the single transition property.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple

from .errors import StpViolationError
from .grammar_frontend import END, MachineNet, State
from .net_analysis import AnalysisTables, Candidate, analyze, closure, fmt_set


@dataclass(frozen=True, eq=False)
class MState:
    id: int
    candidates: tuple[Candidate, ...]  # base first, then closure; each part in net order
    base_size: int
    members: tuple[int, ...] = ()  # pilot m-states merged into this one (compact pilots)

    @property
    def base(self) -> tuple[Candidate, ...]:
        return self.candidates[: self.base_size]

    @property
    def closure(self) -> tuple[Candidate, ...]:
        return self.candidates[self.base_size:]

    @property
    def kernel(self) -> frozenset[State]:
        return frozenset(c.state for c in self.candidates)

    @property
    def key(self) -> frozenset[Candidate]:
        return frozenset(self.candidates)

    def lookahead(self, q: State) -> frozenset[str]:
        for c in self.candidates:
            if c.state == q:
                return c.lookahead
        return frozenset()

    def states(self) -> list[State]:
        return [c.state for c in self.candidates]

    def __contains__(self, q: object) -> bool:
        return any(c.state == q for c in self.candidates)

    def __str__(self) -> str:
        base = ", ".join(map(str, self.base))
        clos = ", ".join(map(str, self.closure))
        return f"I_{self.id} [{base} | {clos}]"


class ConvergentPair(NamedTuple):
    target: State
    first: Candidate
    second: Candidate

    @property
    def overlap(self) -> frozenset[str]:
        return self.first.lookahead & self.second.lookahead


@dataclass(frozen=True, eq=False)
class Pilot:
    net: MachineNet
    tables: AnalysisTables
    mstates: tuple[MState, ...]
    theta: Mapping[tuple[int, str], int]
    convergent_edges: Mapping[tuple[int, str], tuple[ConvergentPair, ...]]
    compact: bool = False
    initial: int = 0

    def successor(self, mid: int, x: str) -> int | None:
        return self.theta.get((mid, x))

    def out_edges(self, mid: int) -> list[tuple[str, int]]:
        syms = sorted((x for (m, x) in self.theta if m == mid), key=self.net.symbol_key)
        return [(x, self.theta[mid, x]) for x in syms]

    def find(self, candidates: Mapping[State, Iterable[str]] | Iterable[tuple]) -> MState | None:
        """The m-state with exactly these candidates (states with look-aheads)."""
        items = candidates.items() if isinstance(candidates, Mapping) else candidates
        want = frozenset(Candidate(q, frozenset(la)) for q, la in items)
        for m in self.mstates:
            if m.key == want:
                return m
        return None

    def find_kernel(self, states: Iterable[State]) -> list[MState]:
        want = frozenset(states)
        return [m for m in self.mstates if m.kernel == want]


def _make_mstate(mid: int, cands: Mapping[State, frozenset], net: MachineNet,
                 members: tuple[int, ...] = ()) -> MState:
    base = sorted((q for q in cands if not net.is_initial(q)), key=net.state_key)
    clos = sorted((q for q in cands if net.is_initial(q)), key=net.state_key)
    ordered = tuple(Candidate(q, frozenset(cands[q])) for q in base + clos)
    return MState(mid, ordered, len(base), members)


def shift_candidates(
    mstate: MState | Mapping[State, Iterable[str]], x: str, net: MachineNet
) -> tuple[dict[State, frozenset[str]], list[ConvergentPair]]:
    """Shift every candidate of ``mstate`` under ``x``.

    Returns the merged shifted candidates and, for every target state reached
    from two or more source candidates, the pairs of those sources.
    """
    if isinstance(mstate, MState):
        items = [(c.state, c.lookahead) for c in mstate.candidates]
    else:
        items = [(q, frozenset(la)) for q, la in mstate.items()]
    shifted: dict[State, set[str]] = {}
    sources: dict[State, list[Candidate]] = {}
    for q, la in items:
        r = net.delta(q, x)
        if r is None:
            continue
        shifted.setdefault(r, set()).update(la)
        sources.setdefault(r, []).append(Candidate(q, frozenset(la)))
    pairs = [ConvergentPair(r, a, b) for r, srcs in sources.items() for a, b in combinations(srcs, 2)]
    return {r: frozenset(la) for r, la in shifted.items()}, pairs


def _symbols(mstate: MState, net: MachineNet) -> list[str]:
    syms = {x for c in mstate.candidates for x, _ in net.edges(c.state)}
    return sorted(syms, key=net.symbol_key)


def build_pilot(net: MachineNet, tables: AnalysisTables | None = None) -> Pilot:
    tables = tables or analyze(net)
    start = closure({net.initial(net.axiom): frozenset({END})}, net, tables)
    mstates = [_make_mstate(0, start, net)]
    index = {mstates[0].key: 0}
    theta: dict[tuple[int, str], int] = {}
    convergent: dict[tuple[int, str], tuple[ConvergentPair, ...]] = {}
    queue = deque([0])
    while queue:
        mid = queue.popleft()
        src = mstates[mid]
        for x in _symbols(src, net):
            shifted, pairs = shift_candidates(src, x, net)
            target = _make_mstate(len(mstates), closure(shifted, net, tables), net)
            tid = index.get(target.key)
            if tid is None:
                tid = target.id
                index[target.key] = tid
                mstates.append(target)
                queue.append(tid)
            theta[mid, x] = tid
            if pairs:
                convergent[mid, x] = tuple(pairs)
    return Pilot(net, tables, tuple(mstates), theta, convergent)


# ---------------------------------------------------------------------------
# Conditions


class ShiftReduceConflict(NamedTuple):
    mstate: int
    candidate: Candidate
    terminal: str

    def __str__(self) -> str:
        return f"shift-reduce conflict in I_{self.mstate}: reduce {self.candidate.state} or shift on {self.terminal}"


class ReduceReduceConflict(NamedTuple):
    mstate: int
    first: Candidate
    second: Candidate
    overlap: frozenset[str]

    def __str__(self) -> str:
        return (f"reduce-reduce conflict in I_{self.mstate}: {self.first.state} and "
                f"{self.second.state} on {fmt_set(self.overlap)}")


class ConvergenceConflict(NamedTuple):
    mstate: int
    symbol: str
    first: Candidate
    second: Candidate
    overlap: frozenset[str]

    def __str__(self) -> str:
        return (f"convergence conflict on edge I_{self.mstate} -{self.symbol}->: "
                f"{self.first} and {self.second} overlap on {fmt_set(self.overlap)}")


class AcceptReduceConflict(NamedTuple):
    """The axiom can be reduced at the stack bottom on the end marker while the
    m-state entered on the axiom also reduces on it: a circular derivation S =>+ S."""
    mstate: int
    candidate: Candidate

    def __str__(self) -> str:
        return f"accept-reduce conflict in I_{self.mstate}: accept or reduce {self.candidate.state} on {END}"


@dataclass
class ConflictReport:
    shift_reduce: list[ShiftReduceConflict] = field(default_factory=list)
    reduce_reduce: list[ReduceReduceConflict] = field(default_factory=list)
    convergence: list[ConvergenceConflict] = field(default_factory=list)
    accept_reduce: list[AcceptReduceConflict] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.shift_reduce or self.reduce_reduce or self.convergence or self.accept_reduce)

    def __bool__(self) -> bool:
        return not self.clean

    def messages(self) -> list[str]:
        return [str(c) for c in (*self.shift_reduce, *self.reduce_reduce, *self.convergence, *self.accept_reduce)]


def check_elr1(pilot: Pilot) -> ConflictReport:
    """Every shift-reduce, reduce-reduce, convergence and accept-reduce conflict of the pilot."""
    net = pilot.net
    report = ConflictReport()
    for m in pilot.mstates:
        finals = [c for c in m.candidates if net.is_final(c.state)]
        for c in finals:
            for t in sorted(c.lookahead):
                if t != END and (m.id, t) in pilot.theta:
                    report.shift_reduce.append(ShiftReduceConflict(m.id, c, t))
        for a, b in combinations(finals, 2):
            if a.lookahead & b.lookahead:
                report.reduce_reduce.append(ReduceReduceConflict(m.id, a, b, a.lookahead & b.lookahead))
    for (mid, x), pairs in sorted(pilot.convergent_edges.items()):
        for p in pairs:
            if p.overlap:
                report.convergence.append(ConvergenceConflict(mid, x, p.first, p.second, p.overlap))
    # there is no augmented start rule, so acceptance is checked separately
    after_axiom = pilot.theta.get((0, net.axiom))
    if after_axiom is not None:
        for c in pilot.mstates[after_axiom].candidates:
            if net.is_final(c.state) and END in c.lookahead:
                report.accept_reduce.append(AcceptReduceConflict(after_axiom, c))
    return report


class StpViolation(NamedTuple):
    mstate: int
    symbol: str
    first: Candidate
    second: Candidate

    def __str__(self) -> str:
        return (f"multiple transitions in I_{self.mstate}: {self.first.state} and "
                f"{self.second.state} both move on {self.symbol}")


def stp_violations(pilot: Pilot) -> list[StpViolation]:
    net = pilot.net
    found = []
    for m in pilot.mstates:
        for x in _symbols(m, net):
            movers = [c for c in m.candidates if net.delta(c.state, x) is not None]
            for a, b in combinations(movers, 2):
                found.append(StpViolation(m.id, x, a, b))
    return found


def check_stp(pilot: Pilot) -> StpViolation | None:
    """The first m-state with two candidates moving on one symbol, if any."""
    found = stp_violations(pilot)
    return found[0] if found else None


def base_multiplicity(pilot: Pilot) -> list[MState]:
    """m-states whose base holds more than one candidate."""
    return [m for m in pilot.mstates if m.base_size > 1]


def compact_pilot(pilot: Pilot) -> Pilot:
    """Merge kernel-identical m-states. Requires the single transition property."""
    violation = check_stp(pilot)
    if violation is not None:
        raise StpViolationError(f"cannot compact the pilot: {violation}")
    net = pilot.net
    groups: dict[frozenset[State], list[int]] = {}
    for m in pilot.mstates:
        groups.setdefault(m.kernel, []).append(m.id)
    new_id: dict[int, int] = {}
    mstates = []
    for k, ids in enumerate(groups.values()):
        la: dict[State, set[str]] = {}
        members: list[int] = []
        for i in ids:
            new_id[i] = k
            old = pilot.mstates[i]
            members.extend(old.members or (old.id,))
            for c in old.candidates:
                la.setdefault(c.state, set()).update(c.lookahead)
        mstates.append(_make_mstate(k, {q: frozenset(s) for q, s in la.items()}, net, tuple(members)))
    theta = {(new_id[m], x): new_id[t] for (m, x), t in pilot.theta.items()}
    return Pilot(net, pilot.tables, tuple(mstates), theta, {}, compact=True)


def kernel_equivalence_holds(pilot: Pilot) -> bool:
    """Kernel-equal m-states have the same outgoing symbols and kernel-equal targets."""
    by_kernel: dict[frozenset[State], list[MState]] = {}
    for m in pilot.mstates:
        by_kernel.setdefault(m.kernel, []).append(m)
    for group in by_kernel.values():
        ref = group[0]
        for other in group[1:]:
            a = dict(pilot.out_edges(ref.id))
            b = dict(pilot.out_edges(other.id))
            if a.keys() != b.keys():
                return False
            if any(pilot.mstates[a[x]].kernel != pilot.mstates[b[x]].kernel for x in a):
                return False
    return True


# ---------------------------------------------------------------------------
# DOT export


def _rec(text: str) -> str:
    out = text
    for ch in "\\{}|<>\"":
        out = out.replace(ch, "\\" + ch)
    return out


def pilot_to_dot(pilot: Pilot) -> str:
    net = pilot.net
    name = "compact_pilot" if pilot.compact else "pilot"
    prefix = "K" if pilot.compact else "I"
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=record, fontname=monospace];"]

    def rows(cands: Iterable[Candidate]) -> str:
        parts = []
        for c in cands:
            st = f"({c.state})" if net.is_final(c.state) else str(c.state)
            parts.append(_rec(f"{st}  {' '.join(sorted(c.lookahead, key=lambda t: (t == END, t)))}") + "\\l")
        return "".join(parts) or " "

    for m in pilot.mstates:
        title = f"{prefix}_{m.id}"
        if m.members and pilot.compact:
            title += " = " + ", ".join(f"I_{i}" for i in m.members)
        label = f"{{{_rec(title)}|{rows(m.base)}|{rows(m.closure)}}}"
        lines.append(f'  m{m.id} [label="{label}"];')
    for (mid, x), t in sorted(pilot.theta.items(), key=lambda e: (e[0][0], net.symbol_key(e[0][1]))):
        style = ', color="black:white:black"' if (mid, x) in pilot.convergent_edges else ""
        lab = x.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  m{mid} -> m{t} [label="{lab}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
