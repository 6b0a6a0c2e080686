"""
Grammar frontend: from EBNF text to a network of deterministic machines.

The grammar file format is a small yacc-like notation::

    # comment
    E : T* ;
    T : '(' E ')' | 'a' ;

Quoted tokens are terminals, bare identifiers are nonterminals, and the
operators ``|``, ``*``, ``+``, ``?`` and parentheses have their usual meaning.
``%empty`` (or an empty alternative) denotes the empty string. The first rule
names the axiom.

Each right part is compiled to a DFA whose states are sets of follower
positions of the linearized expression (the Berry-Sethi construction), so the
machines come out deterministic and usually small without any minimization.
Machines are then normalized so that no edge re-enters the initial state, and
states are numbered depth-first from the initial state, exploring symbols in
the order of their first occurrence in the rule. That numbering gives the
familiar ``0_E, 1_E, ...`` names used throughout the toolkit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

from .errors import GrammarError

END = "-|"
"""The end-marker token. Reserved: grammars cannot mention it."""

EPSILON = "ε"


# ---------------------------------------------------------------------------
# Regular expression trees


@dataclass(frozen=True)
class Epsilon:
    kind = "epsilon"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind = "symbol"


@dataclass(frozen=True)
class Alt:
    children: tuple["RegexAst", ...]
    kind = "union"


@dataclass(frozen=True)
class Concat:
    children: tuple["RegexAst", ...]
    kind = "concat"


@dataclass(frozen=True)
class Star:
    child: "RegexAst"
    kind = "star"


RegexAst = Union[Epsilon, Symbol, Alt, Concat, Star]


def union(*parts: RegexAst) -> RegexAst:
    flat: list[RegexAst] = []
    for p in parts:
        flat.extend(p.children if isinstance(p, Alt) else (p,))
    return flat[0] if len(flat) == 1 else Alt(tuple(flat))


def concat(*parts: RegexAst) -> RegexAst:
    flat: list[RegexAst] = []
    for p in parts:
        if isinstance(p, Epsilon):
            continue
        flat.extend(p.children if isinstance(p, Concat) else (p,))
    if not flat:
        return Epsilon()
    return flat[0] if len(flat) == 1 else Concat(tuple(flat))


def star(child: RegexAst) -> RegexAst:
    if isinstance(child, (Epsilon, Star)):
        return child
    return Star(child)


def ast_symbols(ast: RegexAst) -> list[str]:
    """Symbols of ``ast`` in order of first occurrence."""
    seen: dict[str, None] = {}

    def walk(node: RegexAst) -> None:
        if isinstance(node, Symbol):
            seen.setdefault(node.name)
        elif isinstance(node, (Alt, Concat)):
            for c in node.children:
                walk(c)
        elif isinstance(node, Star):
            walk(node.child)

    walk(ast)
    return list(seen)


def ast_to_text(ast: RegexAst, terminals: Iterable[str] = ()) -> str:
    terms = set(terminals)

    def show(node: RegexAst, prec: int) -> str:
        if isinstance(node, Epsilon):
            return "%empty"
        if isinstance(node, Symbol):
            return f"'{node.name}'" if node.name in terms else node.name
        if isinstance(node, Star):
            return show(node.child, 3) + "*"
        if isinstance(node, Concat):
            s = " ".join(show(c, 2) for c in node.children)
            return f"( {s} )" if prec > 2 else s
        s = " | ".join(show(c, 1) for c in node.children)
        return f"( {s} )" if prec > 1 else s

    return show(ast, 0)


# ---------------------------------------------------------------------------
# Grammar text


@dataclass(frozen=True)
class Grammar:
    terminals: frozenset[str]
    nonterminals: tuple[str, ...]  # declaration order, axiom first
    axiom: str
    rules: Mapping[str, RegexAst]

    def __str__(self) -> str:
        return "\n".join(
            f"{a} : {ast_to_text(self.rules[a], self.terminals)} ;" for a in self.nonterminals
        )


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*|//[^\n]*)
  | (?P<empty>%empty\b)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<op>[:;|*+?()])
    """,
    re.VERBOSE,
)


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise GrammarError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        assert kind is not None
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "quoted":
            body = re.sub(r"\\(.)", r"\1", m.group()[1:-1])
            if not body:
                raise GrammarError("empty quoted terminal", line, col)
            if body == END:
                raise GrammarError(f"'{END}' is the reserved end-marker", line, col)
            toks.append(_Tok("term", body, line, col))
        elif kind in ("ident", "op", "empty"):
            toks.append(_Tok(kind if kind != "op" else m.group(), m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.uses: dict[str, _Tok] = {}
        self.terminals: dict[str, _Tok] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def expect(self, kind: str, what: str) -> _Tok:
        t = self.tok
        if t.kind != kind:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise GrammarError(f"expected {what}, found {found}", t.line, t.col)
        self.i += 1
        return t

    def grammar(self) -> Grammar:
        rules: dict[str, RegexAst] = {}
        where: dict[str, _Tok] = {}
        while self.tok.kind != "eof":
            name = self.expect("ident", "a rule name")
            self.expect(":", "':'")
            body = self.alternatives()
            self.expect(";", "';' or an operator")
            if name.text in rules:
                first = where[name.text]
                raise GrammarError(
                    f"duplicate rule for {name.text} (first defined at {first.line}:{first.col});"
                    " write its alternatives in one rule separated by '|'",
                    name.line,
                    name.col,
                )
            rules[name.text] = body
            where[name.text] = name
        if not rules:
            raise GrammarError("grammar has no rules", 1, 1)
        for sym, t in self.uses.items():
            if sym not in rules:
                raise GrammarError(f"undefined nonterminal {sym}", t.line, t.col)
        for sym, t in self.terminals.items():
            if sym in rules:
                raise GrammarError(f"terminal '{sym}' has the same name as a nonterminal", t.line, t.col)
        names = tuple(rules)
        return Grammar(frozenset(self.terminals), names, names[0], rules)

    def alternatives(self) -> RegexAst:
        alts = [self.sequence()]
        while self.tok.kind == "|":
            self.i += 1
            alts.append(self.sequence())
        return union(*alts)

    def sequence(self) -> RegexAst:
        items: list[RegexAst] = []
        while self.tok.kind in ("ident", "term", "empty", "("):
            items.append(self.item())
        return concat(*items)

    def item(self) -> RegexAst:
        node = self.atom()
        while self.tok.kind in ("*", "+", "?"):
            op = self.tok.kind
            self.i += 1
            if op == "*":
                node = star(node)
            elif op == "+":
                node = concat(node, star(node))
            else:
                node = node if isinstance(node, (Epsilon, Star)) else union(node, Epsilon())
        return node

    def atom(self) -> RegexAst:
        t = self.tok
        self.i += 1
        if t.kind == "ident":
            self.uses.setdefault(t.text, t)
            return Symbol(t.text)
        if t.kind == "term":
            self.terminals.setdefault(t.text, t)
            return Symbol(t.text)
        if t.kind == "empty":
            return Epsilon()
        body = self.alternatives()
        self.expect(")", "')'")
        return body


def parse_ebnf(text: str) -> Grammar:
    """Parse grammar source text. Raises GrammarError with line:col on failure."""
    return _Parser(text).grammar()


# ---------------------------------------------------------------------------
# Machines


class State(NamedTuple):
    """A machine state, printed the usual way as ``<num>_<machine>``."""

    machine: str
    num: int

    def __str__(self) -> str:
        return f"{self.num}_{self.machine}"


@dataclass(frozen=True, eq=False)
class Machine:
    """A DFA over terminals and nonterminals. States are small integers."""

    owner: str
    states: tuple[int, ...]
    initial: int
    finals: frozenset[int]
    delta: Mapping[tuple[int, str], int]
    alphabet: tuple[str, ...] = ()  # preferred symbol order for numbering/printing

    def __post_init__(self) -> None:
        if not self.alphabet:
            syms = sorted({x for _, x in self.delta})
            object.__setattr__(self, "alphabet", tuple(syms))

    def edges(self, q: int) -> list[tuple[str, int]]:
        return [(x, self.delta[q, x]) for x in self.alphabet if (q, x) in self.delta]

    def accepts(self, word: Sequence[str]) -> bool:
        q = self.initial
        for x in word:
            if (q, x) not in self.delta:
                return False
            q = self.delta[q, x]
        return q in self.finals

    def signature(self) -> tuple:
        return (self.owner, self.states, self.initial, tuple(sorted(self.finals)),
                tuple(sorted(self.delta.items())))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Machine) and self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())


def _positions(ast: RegexAst):
    """Linearize ``ast``: returns (symbols, nullable, first, last, follow)."""
    syms: list[str] = []
    follow: list[set[int]] = []

    def walk(node: RegexAst) -> tuple[bool, set[int], set[int]]:
        if isinstance(node, Epsilon):
            return True, set(), set()
        if isinstance(node, Symbol):
            syms.append(node.name)
            follow.append(set())
            p = len(syms) - 1
            return False, {p}, {p}
        if isinstance(node, Star):
            _, first, last = walk(node.child)
            for p in last:
                follow[p] |= first
            return True, first, last
        parts = [walk(c) for c in node.children]
        if isinstance(node, Alt):
            return (
                any(n for n, _, _ in parts),
                set().union(*(f for _, f, _ in parts)),
                set().union(*(l for _, _, l in parts)),
            )
        nullable, first, last = True, set(), set()
        for n, f, l in parts:
            for p in last:
                follow[p] |= f
            if nullable:
                first |= f
            last = (last | l) if n else set(l)
            nullable = nullable and n
        return nullable, first, last

    nullable, first, last = walk(ast)
    return syms, nullable, first, last, follow


def _renumber(owner: str, initial, finals, delta: Mapping, alphabet: Sequence[str]) -> Machine:
    """Depth-first preorder numbering from ``initial`` with symbols in ``alphabet`` order."""
    rank = {x: i for i, x in enumerate(alphabet)}
    out: dict = {}
    for (s, x), t in delta.items():
        out.setdefault(s, []).append((rank.get(x, len(rank)), x, t))
    number: dict = {initial: 0}
    stack: list[Iterator] = [iter(sorted(out.get(initial, ()), key=lambda e: (e[0], e[1])))]
    while stack:
        for _, _, t in stack[-1]:
            if t not in number:
                number[t] = len(number)
                stack.append(iter(sorted(out.get(t, ()), key=lambda e: (e[0], e[1]))))
                break
        else:
            stack.pop()
    new_delta = {(number[s], x): number[t] for (s, x), t in delta.items() if s in number}
    used = sorted({x for _, x in new_delta}, key=lambda x: (rank.get(x, len(rank)), x))
    return Machine(
        owner,
        tuple(range(len(number))),
        0,
        frozenset(number[f] for f in finals if f in number),
        new_delta,
        tuple(used) or tuple(alphabet),
    )


def regex_to_machine(owner: str, ast: RegexAst) -> Machine:
    """Compile ``ast`` to a deterministic, reduced machine (not yet normalized)."""
    syms, nullable, first, last, follow = _positions(ast)
    end = -1
    fol = [frozenset(follow[p] | ({end} if p in last else set())) for p in range(len(syms))]
    start = frozenset(first | ({end} if nullable else set()))
    delta: dict[tuple[frozenset, str], frozenset] = {}
    seen = {start}
    work = [start]
    while work:
        s = work.pop()
        by_sym: dict[str, set[int]] = {}
        for p in s:
            if p != end:
                by_sym.setdefault(syms[p], set()).update(fol[p])
        for x, t in by_sym.items():
            tf = frozenset(t)
            delta[s, x] = tf
            if tf not in seen:
                seen.add(tf)
                work.append(tf)
    finals = {s for s in seen if end in s}
    return _renumber(owner, start, finals, delta, ast_symbols(ast))


def normalize_machine(m: Machine) -> Machine:
    """Add a fresh initial state if some edge re-enters the initial one."""
    if m.initial not in m.delta.values():
        return m
    fresh = ("fresh",)
    delta: dict = dict(m.delta)
    for x, t in m.edges(m.initial):
        delta[fresh, x] = t
    finals = set(m.finals) | ({fresh} if m.initial in m.finals else set())
    return _renumber(m.owner, fresh, finals, delta, m.alphabet)


def trim_machine(m: Machine) -> Machine:
    """Drop states that are unreachable or cannot reach a final state."""
    reach = {m.initial}
    work = [m.initial]
    while work:
        q = work.pop()
        for _, t in m.edges(q):
            if t not in reach:
                reach.add(t)
                work.append(t)
    coreach = set(m.finals)
    changed = True
    while changed:
        changed = False
        for (s, _), t in m.delta.items():
            if t in coreach and s not in coreach:
                coreach.add(s)
                changed = True
    keep = reach & coreach
    if m.initial not in keep:
        keep.add(m.initial)
    delta = {(s, x): t for (s, x), t in m.delta.items() if s in keep and t in keep}
    return _renumber(m.owner, m.initial, m.finals & keep, delta, m.alphabet)


def minimize_machine(m: Machine) -> Machine:
    """Minimal equivalent machine by partition refinement, then normalized."""
    dead = -1
    states = list(m.states) + [dead]
    alphabet = list(m.alphabet)

    def step(q: int, x: str) -> int:
        return m.delta.get((q, x), dead) if q != dead else dead

    block = {q: int(q in m.finals) for q in states}
    while True:
        sig = {q: (block[q],) + tuple(block[step(q, x)] for x in alphabet) for q in states}
        ids: dict[tuple, int] = {}
        new_block = {q: ids.setdefault(sig[q], len(ids)) for q in states}
        if len(ids) == len(set(block.values())):
            break
        block = new_block
    block = new_block
    delta = {}
    for (s, x), t in m.delta.items():
        if block[t] != block[dead]:
            delta[block[s], x] = block[t]
    finals = {block[f] for f in m.finals}
    merged = _renumber(m.owner, block[m.initial], finals, delta, m.alphabet)
    return normalize_machine(merged)


# ---------------------------------------------------------------------------
# Machine nets


@dataclass(frozen=True, eq=False)
class MachineNet:
    """One normalized machine per nonterminal; ``machines`` is ordered axiom first."""

    machines: Mapping[str, Machine]
    axiom: str
    _index: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        order = {a: i for i, a in enumerate(self.machines)}
        delta: dict[tuple[State, str], State] = {}
        edges: dict[State, list[tuple[str, State]]] = {}
        states: list[State] = []
        terminals: set[str] = set()
        for a, m in self.machines.items():
            for q in m.states:
                s = State(a, q)
                states.append(s)
                edges[s] = [(x, State(a, t)) for x, t in m.edges(q)]
                for x, t in edges[s]:
                    delta[s, x] = t
                    if x not in self.machines:
                        terminals.add(x)
        object.__setattr__(
            self,
            "_index",
            {"order": order, "delta": delta, "edges": edges, "states": tuple(states),
             "terminals": frozenset(terminals)},
        )

    @property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(self.machines)

    @property
    def terminals(self) -> frozenset[str]:
        return self._index["terminals"]

    @property
    def states(self) -> tuple[State, ...]:
        return self._index["states"]

    def is_nonterminal(self, x: object) -> bool:
        return isinstance(x, str) and x in self.machines

    def initial(self, a: str) -> State:
        return State(a, self.machines[a].initial)

    def is_initial(self, s: State) -> bool:
        return self.machines[s.machine].initial == s.num

    def is_final(self, s: State) -> bool:
        return s.num in self.machines[s.machine].finals

    def finals(self, a: str) -> list[State]:
        return [State(a, f) for f in sorted(self.machines[a].finals)]

    def delta(self, s: State, x: str) -> State | None:
        return self._index["delta"].get((s, x))

    def edges(self, s: State) -> list[tuple[str, State]]:
        return self._index["edges"][s]

    def state_key(self, s: State) -> tuple[int, int]:
        return (self._index["order"][s.machine], s.num)

    def symbol_key(self, x: str) -> tuple[int, int, str]:
        """Sort key: terminals (lexicographic) before nonterminals (net order)."""
        if x in self.machines:
            return (1, self._index["order"][x], x)
        return (0, 0, x)

    def accepts_path(self, a: str, word: Sequence[str]) -> bool:
        return self.machines[a].accepts(word)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, MachineNet) and self.axiom == other.axiom
                and list(self.machines.items()) == list(other.machines.items()))

    def __hash__(self) -> int:
        return hash((self.axiom, tuple(self.machines.values())))


def make_net(machines: Iterable[Machine], axiom: str | None = None) -> MachineNet:
    ms = list(machines)
    axiom = axiom or ms[0].owner
    ordered = {m.owner: m for m in ms}
    if axiom not in ordered:
        raise GrammarError(f"axiom {axiom} has no machine")
    ordered = {axiom: ordered[axiom], **{k: v for k, v in ordered.items() if k != axiom}}
    return MachineNet(ordered, axiom)


def build_net(g: Grammar, minimize: bool = False) -> MachineNet:
    """One normalized machine per nonterminal of ``g``."""
    machines = []
    for a in g.nonterminals:
        m = regex_to_machine(a, g.rules[a])
        m = minimize_machine(m) if minimize else normalize_machine(m)
        machines.append(m)
    return make_net(machines, g.axiom)


def load_net(text: str, minimize: bool = False) -> MachineNet:
    return build_net(parse_ebnf(text), minimize=minimize)


# ---------------------------------------------------------------------------
# BNF grammars and the right-linearized grammar of a net


@dataclass(frozen=True)
class BnfGrammar:
    """A context-free grammar with plain productions; symbols are any hashables."""

    nonterminals: tuple
    terminals: frozenset
    axiom: object
    rules: tuple[tuple[object, tuple], ...]

    def alternatives(self, lhs: object) -> list[tuple]:
        return [rhs for l, rhs in self.rules if l == lhs]

    def __str__(self) -> str:
        lines = []
        for a in self.nonterminals:
            alts = [" ".join(map(str, rhs)) or EPSILON for rhs in self.alternatives(a)]
            lines.append(f"{a} -> {' | '.join(alts)}")
        return "\n".join(lines)


class RightLinearizedGrammar(BnfGrammar):
    """Grammar over net states: ``p -> X r`` per edge, ``p -> ε`` per final state."""


def right_linearize(net: MachineNet) -> RightLinearizedGrammar:
    rules: list[tuple[State, tuple]] = []
    for p in net.states:
        for x, r in net.edges(p):
            rules.append((p, (net.initial(x) if net.is_nonterminal(x) else x, r)))
        if net.is_final(p):
            rules.append((p, ()))
    return RightLinearizedGrammar(
        net.states, net.terminals, net.initial(net.axiom), tuple(rules)
    )


def grammar_to_bnf(g: Grammar) -> BnfGrammar:
    """Expand a grammar whose rules are unions of plain sequences into BNF."""
    rules = []
    for a in g.nonterminals:
        ast = g.rules[a]
        for alt in ast.children if isinstance(ast, Alt) else (ast,):
            if isinstance(alt, Epsilon):
                rules.append((a, ()))
            elif isinstance(alt, Symbol):
                rules.append((a, (alt.name,)))
            elif isinstance(alt, Concat) and all(isinstance(c, Symbol) for c in alt.children):
                rules.append((a, tuple(c.name for c in alt.children)))
            else:
                raise GrammarError(f"rule {a} is not in BNF form")
    return BnfGrammar(g.nonterminals, g.terminals, g.axiom, tuple(rules))


def bnf_to_net(g: BnfGrammar) -> MachineNet:
    """Tree-shaped machines: one leg per alternative, shared prefixes merged."""
    machines = []
    for a in g.nonterminals:
        delta: dict[tuple[int, str], int] = {}
        finals: set[int] = set()
        alphabet: dict[str, None] = {}
        count = 1
        for rhs in g.alternatives(a):
            q = 0
            for x in rhs:
                alphabet.setdefault(str(x))
                if (q, str(x)) not in delta:
                    delta[q, str(x)] = count
                    count += 1
                q = delta[q, str(x)]
            finals.add(q)
        machines.append(_renumber(str(a), 0, finals, delta, list(alphabet)))
    return make_net(machines, str(g.axiom))


# ---------------------------------------------------------------------------
# DOT export


def _dot_id(s: object) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def net_to_dot(net: MachineNet) -> str:
    lines = ["digraph net {", "  rankdir=LR;", "  node [shape=circle];"]
    for a, m in net.machines.items():
        lines.append(f"  subgraph {_dot_id('cluster_' + a)} {{")
        lines.append(f"    label={_dot_id('M_' + a)};")
        for q in m.states:
            s = State(a, q)
            shape = "doublecircle" if q in m.finals else "circle"
            lines.append(f"    {_dot_id(s)} [shape={shape}];")
        lines.append("  }")
        lines.append(f"  {_dot_id('start_' + a)} [shape=point];")
        lines.append(f"  {_dot_id('start_' + a)} -> {_dot_id(State(a, m.initial))};")
        for q in m.states:
            for x, t in m.edges(q):
                lines.append(f"  {_dot_id(State(a, q))} -> {_dot_id(State(a, t))} [label={_dot_id(x)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
