"""Syntax trees, reductions and parse outcomes shared by all engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence, Union

from .grammar_frontend import EPSILON


@dataclass(frozen=True)
class SyntaxTree:
    """An EBNF-shaped tree: a nonterminal with a list of terminal leaves and subtrees."""

    label: str
    children: tuple[Union[str, "SyntaxTree"], ...] = ()

    def __str__(self) -> str:
        inner = " ".join(str(c) for c in self.children) or EPSILON
        return f"( {inner} )_{self.label}"

    def frontier(self) -> list[str]:
        out: list[str] = []
        for c in self.children:
            out.extend(c.frontier() if isinstance(c, SyntaxTree) else [c])
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "nonterminal": self.label,
            "children": [c.to_json() if isinstance(c, SyntaxTree) else {"terminal": c}
                         for c in self.children],
        }

    def leftmost_derivation(self) -> list[tuple[str, ...]]:
        """Sentential forms of the leftmost derivation encoded by the tree."""
        form: list[Union[str, SyntaxTree]] = [self]
        forms = [(self.label,)]
        while True:
            i = next((k for k, s in enumerate(form) if isinstance(s, SyntaxTree)), None)
            if i is None:
                return forms
            node = form[i]
            assert isinstance(node, SyntaxTree)
            form[i:i + 1] = list(node.children)
            forms.append(tuple(s.label if isinstance(s, SyntaxTree) else s for s in form))


def format_derivation(forms: Sequence[Sequence[str]]) -> str:
    def show(f: Sequence[str]) -> str:
        if not f:
            return EPSILON
        sep = "" if all(len(s) == 1 for s in f) else " "
        return sep.join(f)

    return " ⇒ ".join(show(f) for f in forms)


class Reduction(NamedTuple):
    handle: tuple[str, ...]
    nonterminal: str

    def __str__(self) -> str:
        if not self.handle:
            body = EPSILON
        elif all(len(s) == 1 for s in self.handle):
            body = "".join(self.handle)
        else:
            body = " ".join(self.handle)
        return f"{body}⤳{self.nonterminal}"


class ParseErrorInfo(NamedTuple):
    position: int  # index of the offending token; len(tokens) for the end-marker
    token: str
    expected: frozenset[str]

    def __str__(self) -> str:
        if not self.expected:
            return f"syntax error at token {self.position} ({self.token!r})"
        exp = " ".join(sorted(self.expected, key=lambda t: (t == "-|", t)))
        return f"syntax error at token {self.position} ({self.token!r}); expected one of: {exp}"


@dataclass
class TraceStep:
    move: str  # shift | reduce | accept | error | call | scan | return
    detail: str
    stack: str = ""
    data: dict[str, Any] = field(default_factory=dict)


@dataclass
class ParseOutcome:
    accepted: bool
    tree: SyntaxTree | None = None
    reductions: list[Reduction] = field(default_factory=list)
    error: ParseErrorInfo | None = None
    trace: list[TraceStep] = field(default_factory=list)
    derivation: list[Any] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "accepted": self.accepted,
            "tree": str(self.tree) if self.tree else None,
            "tree_json": self.tree.to_json() if self.tree else None,
            "reductions": [str(r) for r in self.reductions],
            "error": None if self.error is None else {
                "position": self.error.position,
                "token": self.error.token,
                "expected": sorted(self.error.expected),
                "message": str(self.error),
            },
        }
        if self.trace:
            out["trace"] = [{"move": s.move, "detail": s.detail, "stack": s.stack} for s in self.trace]
        if self.derivation is not None:
            out["derivation"] = [str(d) for d in self.derivation]
        return out
