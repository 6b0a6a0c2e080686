"""
Top-down parsing of machine nets.

The parser control-flow graph (PCFG) is the net plus, for every nonterminal
edge ``q -B-> r``, a call edge ``q ⇢ 0_B`` labelled by a guide set, and a
prospect set on every final state. Both are computed here by direct fixpoint
iteration over the net, with no pilot involved:

* prospect: ``π(0_S)`` starts as ``{-|}``; a non-initial state collects the
  prospects of its predecessors; an initial state ``0_A`` collects, for each
  call site ``q -A-> r``, ``Ini(r)`` plus ``π(q)`` when r is nullable.
* guide of ``q ⇢ 0_A``: ``Ini(0_A)``; plus ``Ini(r)`` if A is nullable; plus
  ``π(r)`` if A and r are both nullable; plus the guides of the call edges
  leaving ``0_A``.

The net is ELL(1) exactly when, at every state, the guides of its terminal
shifts ({a}), call edges and final dart (the prospect) are pairwise disjoint.
``check_ell1`` also evaluates the three-clause definition (no left
recursion, ELR(1), single transition property) and insists the two verdicts
agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import InternalInconsistencyError, NetparseError, NotEll1Error
from .grammar_frontend import END, EPSILON, MachineNet, State
from .net_analysis import (
    AnalysisTables,
    analyze,
    detect_left_recursion,
    epsilon_only_nonterminals,
    fmt_set,
    sort_terminals,
)
from .pilot import ConflictReport, Pilot, StpViolation, build_pilot, check_elr1, stp_violations
from .elr_runtime import _Element, expected_terminals, render_stack, require_elr1
from .trees import ParseErrorInfo, ParseOutcome, Reduction, SyntaxTree, TraceStep


class CallEdge(NamedTuple):
    source: State
    nonterminal: str
    target: State  # initial state of the called machine
    ret: State  # state reached in the caller after the call

    def __str__(self) -> str:
        return f"{self.source} ⇢ {self.target}"


@dataclass(frozen=True)
class FixpointResult:
    prospect: Mapping[State, frozenset[str]]  # every state (finals are the ones that matter)
    guides: Mapping[CallEdge, frozenset[str]]
    iterations: int  # rows of the iteration table, the initial row included
    history: tuple[tuple[Mapping[State, frozenset[str]], Mapping[CallEdge, frozenset[str]]], ...]


def call_edges(net: MachineNet) -> list[CallEdge]:
    edges = []
    for q in net.states:
        for x, r in net.edges(q):
            if net.is_nonterminal(x):
                edges.append(CallEdge(q, x, net.initial(x), r))
    return edges


def fixpoint_prospect_guide(net: MachineNet, tables: AnalysisTables | None = None) -> FixpointResult:
    """Least solution of the prospect and guide equations.

    Sweeps update sets in place (net order for states, then call edges in
    source order) until a sweep changes nothing.
    """
    tables = tables or analyze(net)
    calls = call_edges(net)
    preds: dict[State, list[State]] = {q: [] for q in net.states}
    sites: dict[State, list[CallEdge]] = {q: [] for q in net.states}
    for p in net.states:
        for x, q in net.edges(p):
            preds[q].append(p)
    for c in calls:
        sites[c.target].append(c)
    leaving: dict[State, list[CallEdge]] = {}
    for c in calls:
        leaving.setdefault(c.source, []).append(c)

    axiom0 = net.initial(net.axiom)
    prospect: dict[State, frozenset[str]] = {q: frozenset() for q in net.states}
    prospect[axiom0] = frozenset({END})
    guides: dict[CallEdge, frozenset[str]] = {c: frozenset() for c in calls}
    history = [(dict(prospect), dict(guides))]
    while True:
        changed = False
        for q in net.states:
            if net.is_initial(q):
                new = set(prospect[q])
                for c in sites[q]:
                    new |= tables.ini[c.ret]
                    if tables.nullable(c.ret):
                        new |= prospect[c.source]
            else:
                new = set()
                for p in preds[q]:
                    new |= prospect[p]
            if new != prospect[q]:
                prospect[q] = frozenset(new)
                changed = True
        for c in calls:
            new = set(tables.ini[c.target])
            if c.nonterminal in tables.nullable_nonterminals:
                new |= tables.ini[c.ret]
                if tables.nullable(c.ret):
                    new |= prospect[c.ret]
            for d in leaving.get(c.target, ()):
                new |= guides[d]
            if new != guides[c]:
                guides[c] = frozenset(new)
                changed = True
        history.append((dict(prospect), dict(guides)))
        if not changed:
            break
    return FixpointResult(prospect, guides, len(history), tuple(history))


class GuideOverlap(NamedTuple):
    node: State
    first: str
    second: str
    overlap: frozenset[str]

    def __str__(self) -> str:
        return f"guide sets overlap at {self.node}: {self.first} and {self.second} share {fmt_set(self.overlap)}"


@dataclass(frozen=True, eq=False)
class Pcfg:
    net: MachineNet
    tables: AnalysisTables
    prospect: Mapping[State, frozenset[str]]  # final states only
    calls: tuple[CallEdge, ...]
    guides: Mapping[CallEdge, frozenset[str]]
    iterations: int

    def calls_from(self, q: State) -> list[CallEdge]:
        return [c for c in self.calls if c.source == q]

    def guide(self, source: State, target: State) -> frozenset[str]:
        for c in self.calls:
            if c.source == source and c.target == target:
                return self.guides[c]
        raise KeyError((source, target))

    def choices(self, q: State) -> list[tuple[str, frozenset[str]]]:
        """Every way out of ``q`` with its guide set, in a fixed order."""
        out: list[tuple[str, frozenset[str]]] = []
        for x, r in self.net.edges(q):
            if not self.net.is_nonterminal(x):
                out.append((f"shift {x} -> {r}", frozenset({x})))
        for c in self.calls_from(q):
            out.append((f"call {c.source} ⇢ {c.target}", self.guides[c]))
        if q in self.prospect:
            out.append((f"return from {q}", self.prospect[q]))
        return out

    def overlaps(self) -> list[GuideOverlap]:
        found = []
        for q in self.net.states:
            for (n1, g1), (n2, g2) in combinations(self.choices(q), 2):
                if g1 & g2:
                    found.append(GuideOverlap(q, n1, n2, g1 & g2))
        return found


def build_pcfg(net: MachineNet, tables: AnalysisTables | None = None) -> Pcfg:
    tables = tables or analyze(net)
    fx = fixpoint_prospect_guide(net, tables)
    prospect = {q: fx.prospect[q] for q in net.states if net.is_final(q)}
    calls = tuple(call_edges(net))
    return Pcfg(net, tables, prospect, calls, {c: fx.guides[c] for c in calls}, fx.iterations)


def prospect_from_pilot(pilot: Pilot) -> dict[State, frozenset[str]]:
    """Prospect of each final state as the union of its look-aheads over the pilot."""
    out: dict[State, set[str]] = {}
    for m in pilot.mstates:
        for c in m.candidates:
            if pilot.net.is_final(c.state):
                out.setdefault(c.state, set()).update(c.lookahead)
    return {q: frozenset(s) for q, s in out.items()}


# ---------------------------------------------------------------------------
# The ELL(1) condition


@dataclass
class Ell1Report:
    left_recursion: list[State] | None
    stp_violation: StpViolation | None
    elr1_conflicts: ConflictReport
    guide_overlaps: list[GuideOverlap]
    stp_violations: list[StpViolation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.guide_overlaps

    @property
    def definition_clean(self) -> bool:
        return (self.left_recursion is None and self.stp_violation is None
                and self.elr1_conflicts.clean)

    def messages(self) -> list[str]:
        msgs = []
        if self.left_recursion:
            msgs.append("left recursion: " + " -> ".join(map(str, self.left_recursion)))
        msgs.extend(str(v) for v in self.stp_violations)
        msgs.extend(self.elr1_conflicts.messages())
        msgs.extend(str(o) for o in self.guide_overlaps)
        return msgs


def check_ell1(net: MachineNet, tables: AnalysisTables | None = None,
               pilot: Pilot | None = None, pcfg: Pcfg | None = None) -> Ell1Report:
    tables = tables or analyze(net)
    pilot = pilot or build_pilot(net, tables)
    pcfg = pcfg or build_pcfg(net, tables)
    stp = stp_violations(pilot)
    report = Ell1Report(
        detect_left_recursion(net, tables),
        stp[0] if stp else None,
        check_elr1(pilot),
        pcfg.overlaps(),
        stp,
    )
    trivial = epsilon_only_nonterminals(net, tables)
    if trivial:
        report.warnings.append(
            "nonterminals deriving only the empty string: " + ", ".join(trivial)
            + "; inlining them avoids spurious multiple-transition findings"
        )
    if report.clean != report.definition_clean and not trivial:
        raise InternalInconsistencyError(
            "guide-set check and the ELL(1) definition disagree: " + "; ".join(report.messages())
        )
    return report


# ---------------------------------------------------------------------------
# Pointerless parser


def parse_pointerless(compact: Pilot, tokens: Iterable[str], trace: bool = False) -> ParseOutcome:
    """Shift-reduce parsing on the compact pilot without stack links.

    A shift from a non-initial candidate prunes the element to its base; a
    reduction to A pops down to the topmost element still holding 0_A.
    """
    if not compact.compact:
        raise NetparseError("the pointerless parser needs a compact pilot")
    require_elr1(compact)
    net = compact.net
    toks = list(tokens) + [END]
    pos = 0
    start = compact.mstates[compact.initial]
    stack = [_Element(start.id, list(start.candidates))]
    out = ParseOutcome(False)

    def log(move: str, detail: str, **data) -> None:
        if trace:
            out.trace.append(TraceStep(move, detail, _render(stack), data))

    def push(x: str, node) -> None:
        src = stack[-1]
        movers = [c for c in src.cands if net.delta(c.state, x) is not None]
        if len(movers) != 1:
            raise NetparseError(f"expected one candidate moving on {x}, found {len(movers)}")
        pruned = not net.is_initial(movers[0].state)
        if pruned:
            src.cands = list(compact.mstates[src.mstate].base)
        target = compact.theta[src.mstate, x]
        stack.append(_Element(target, list(compact.mstates[target].candidates), x, node))
        log("shift", f"K_{src.mstate} -{x}-> K_{target}", pruned=pruned)

    log("init", f"K_{start.id}")
    while True:
        top = stack[-1]
        a = toks[pos]
        ready = [c for c in top.cands if net.is_final(c.state) and a in c.lookahead]
        target = compact.theta.get((top.mstate, a)) if a != END else None
        if ready:
            q = ready[0].state
            nt = q.machine
            k = len(stack) - 1
            h = k
            if not net.is_initial(q):
                init = net.initial(nt)
                h = next(i for i in range(k - 1, -1, -1) if any(c.state == init for c in stack[i].cands))
            popped = stack[h + 1:]
            del stack[h + 1:]
            red = Reduction(tuple(e.symbol for e in popped), nt)  # type: ignore[misc]
            out.reductions.append(red)
            node = SyntaxTree(nt, tuple(e.node for e in popped))  # type: ignore[misc]
            log("reduce", str(red), reduction=red, extent=h)
            if h == 0 and nt == net.axiom and a == END:
                out.accepted, out.tree = True, node
                log("accept", f"K_{stack[0].mstate} -{nt}->")
                return out
            if (stack[-1].mstate, nt) in compact.theta:
                push(nt, node)
                continue
            # merged look-aheads can delay detection until the nonterminal shift
            out.error = ParseErrorInfo(pos, a, frozenset())
            log("error", str(out.error))
            return out
        elif target is not None:
            push(a, a)
            pos += 1
        else:
            out.error = ParseErrorInfo(pos, a, expected_terminals(compact, top.mstate, top.cands))
            log("error", str(out.error))
            return out


def _render(stack: list[_Element]) -> str:
    parts = []
    for e in stack:
        if e.symbol is not None:
            parts.append(e.symbol)
        parts.append(f"K_{e.mstate}[" + "; ".join(f"{c.state} {fmt_set(c.lookahead)}" for c in e.cands) + "]")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Predictive parser


class DerivationStep(NamedTuple):
    """One right-linearized production ``lhs => rhs`` (rhs empty for ε)."""

    lhs: State
    rhs: tuple

    def __str__(self) -> str:
        body = " ".join(map(str, self.rhs)) or EPSILON
        return f"{self.lhs} ⇒ {body}"


def _sentential(done: Sequence[str], eps: bool, pending: Sequence[State]) -> str:
    parts = list(done) + ([EPSILON] if eps else []) + [str(q) for q in reversed(pending)]
    return " ".join(parts) or EPSILON


def require_ell1(pcfg: Pcfg) -> None:
    overlaps = pcfg.overlaps()
    if overlaps:
        raise NotEll1Error("the net is not ELL(1): " + "; ".join(map(str, overlaps)))


def parse_predictive(pcfg: Pcfg, tokens: Iterable[str], trace: bool = False) -> ParseOutcome:
    """Table-free predictive parsing driven by guide and prospect sets.

    The outcome's ``derivation`` is the leftmost derivation in the
    right-linearized grammar; each trace step carries the sentential form.
    """
    require_ell1(pcfg)
    net = pcfg.net
    toks = list(tokens) + [END]
    pos = 0
    stack: list[State] = [net.initial(net.axiom)]
    nodes: list[tuple[str, list]] = [(net.axiom, [])]
    steps: list[DerivationStep] = []
    done: list[str] = []
    out = ParseOutcome(False, derivation=steps)

    def log(move: str, detail: str, before: list[State], eps: bool) -> None:
        if trace:
            form = _sentential(done, eps, stack)
            arrow = "⇒" if len(steps) == 1 else "⇒+"
            out.trace.append(TraceStep(
                move, detail, " ".join(f"<{q}>" for q in before),
                {"derivation": f"{net.initial(net.axiom)} {arrow} {form}", "form": form,
                 "remaining": " ".join(toks[pos:])},
            ))

    while True:
        q = stack[-1]
        cc = toks[pos]
        before = list(stack)
        r = net.delta(q, cc) if cc != END and not net.is_nonterminal(cc) else None
        call = next((c for c in pcfg.calls_from(q) if cc in pcfg.guides[c]), None)
        if r is not None:
            steps.append(DerivationStep(q, (cc, r)))
            stack[-1] = r
            nodes[-1][1].append(cc)
            done.append(cc)
            pos += 1
            log("scan", f"scan {cc}", before, False)
        elif call is not None:
            steps.append(DerivationStep(q, (call.target, call.ret)))
            stack[-1] = call.ret
            stack.append(call.target)
            nodes.append((call.nonterminal, []))
            log("call", f"{cc} in guide {fmt_set(pcfg.guides[call])}", before, False)
        elif net.is_final(q) and len(stack) == 1 and cc == END:
            steps.append(DerivationStep(q, ()))
            stack.pop()
            out.accepted = True
            out.tree = SyntaxTree(nodes[0][0], tuple(nodes[0][1]))
            log("accept", f"{cc} in prospect {fmt_set(pcfg.prospect[q])}, accept", before, True)
            return out
        elif net.is_final(q) and len(stack) > 1 and cc in pcfg.prospect[q]:
            steps.append(DerivationStep(q, ()))
            stack.pop()
            label, kids = nodes.pop()
            nodes[-1][1].append(SyntaxTree(label, tuple(kids)))
            log("return", f"{cc} in prospect {fmt_set(pcfg.prospect[q])}", before, True)
        else:
            expected = {x for x, _ in net.edges(q) if not net.is_nonterminal(x)}
            for c in pcfg.calls_from(q):
                expected |= pcfg.guides[c]
            if net.is_final(q):
                expected |= pcfg.prospect[q] if len(stack) > 1 else {END}
            out.error = ParseErrorInfo(pos, cc, frozenset(expected))
            if trace:
                out.trace.append(TraceStep("error", str(out.error), " ".join(f"<{s}>" for s in stack)))
            return out


def replay_derivation(net: MachineNet, steps: Sequence[DerivationStep]) -> list[str]:
    """Apply the steps leftmost from 0_S; returns the terminal string derived."""
    form: list = [net.initial(net.axiom)]
    for st in steps:
        i = next((k for k, s in enumerate(form) if isinstance(s, State)), None)
        if i is None or form[i] != st.lhs:
            raise NetparseError(f"step {st} does not rewrite the leftmost state")
        form[i:i + 1] = list(st.rhs)
    if any(isinstance(s, State) for s in form):
        raise NetparseError("derivation is incomplete")
    return form


# ---------------------------------------------------------------------------
# Recursive-descent emission


def _guard(ts: Iterable[str]) -> str:
    return "{ " + " ".join(sort_terminals(ts)) + " }"


def emit_recursive_descent(pcfg: Pcfg) -> str:
    """Pseudo-code with one procedure per machine.

    Each machine state becomes a labelled block of guarded alternatives:
    ``next`` scans the current token, ``call`` runs another procedure,
    ``goto`` moves to a state of the same procedure, ``return`` leaves it.
    """
    require_ell1(pcfg)
    net = pcfg.net
    lines: list[str] = []
    for a in net.nonterminals:
        lines.append(f"procedure {a}")
        for q in net.states:
            if q.machine != a:
                continue
            lines.append(f"  state {q}")
            branches = []
            for x, r in net.edges(q):
                if not net.is_nonterminal(x):
                    branches.append(f"cc in {_guard([x])} then next goto {r}")
            for c in pcfg.calls_from(q):
                branches.append(f"cc in {_guard(pcfg.guides[c])} then call {c.nonterminal} goto {c.ret}")
            if net.is_final(q):
                branches.append(f"cc in {_guard(pcfg.prospect[q])} then return")
            for i, b in enumerate(branches):
                lines.append(f"    {'if' if i == 0 else 'elif'} {b}")
            lines.append("    else error" if branches else "    error")
        lines.append("end")
        lines.append("")
    lines.append("main")
    lines.append("  cc := next")
    lines.append(f"  call {net.axiom}")
    lines.append(f"  if cc in {_guard([END])} then accept else reject")
    lines.append("end")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT export


def pcfg_to_dot(pcfg: Pcfg) -> str:
    net = pcfg.net

    def q(s: object) -> str:
        return '"' + str(s).replace('"', '\\"') + '"'

    lines = ["digraph pcfg {", "  rankdir=LR;", "  node [shape=circle];"]
    for st in net.states:
        shape = "doublecircle" if net.is_final(st) else "circle"
        lines.append(f"  {q(st)} [shape={shape}];")
        if st in pcfg.prospect:
            lines.append(f"  {q(str(st) + '_dart')} [shape=none, label={q(fmt_set(pcfg.prospect[st]))}];")
            lines.append(f"  {q(st)} -> {q(str(st) + '_dart')} [arrowhead=normal];")
    for st in net.states:
        for x, r in net.edges(st):
            lines.append(f"  {q(st)} -> {q(r)} [label={q(x)}];")
    for c in pcfg.calls:
        lines.append(f"  {q(c.source)} -> {q(c.target)} [style=dashed, label={q(fmt_set(pcfg.guides[c]))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
