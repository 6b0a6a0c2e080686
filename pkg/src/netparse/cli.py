"""
Command-line entry point.

Exit codes: 0 success or acceptance, 1 rejection or failed condition,
2 usage or grammar errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence, TextIO

from .earley import earley_parse
from .elr_runtime import parse_elr_cid, parse_elr_vector
from .ell import (
    build_pcfg,
    check_ell1,
    emit_recursive_descent,
    fixpoint_prospect_guide,
    parse_pointerless,
    parse_predictive,
    pcfg_to_dot,
)
from .errors import GrammarError, NetparseError
from .grammar_frontend import (
    MachineNet,
    bnf_to_net,
    build_net,
    grammar_to_bnf,
    net_to_dot,
    parse_ebnf,
    right_linearize,
)
from .lr1_oracle import build_lr1_pilot, check_lr1, describe_conflict
from .net_analysis import analyze, detect_left_recursion, fmt_set
from .pilot import build_pilot, check_elr1, check_stp, compact_pilot, pilot_to_dot
from .trees import format_derivation

SCHEMA_VERSION = 1
ALGOS = ("elr", "elr-vector", "pointerless", "predictive", "earley")


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def _load(args: argparse.Namespace) -> MachineNet:
    try:
        with open(args.grammar, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"netparse: cannot read {args.grammar}: {e.strerror}", file=sys.stderr)
        raise _Exit(2)
    try:
        g = parse_ebnf(text)
        if getattr(args, "bnf", False):
            return bnf_to_net(grammar_to_bnf(g))
        return build_net(g, minimize=args.minimize)
    except GrammarError as e:
        loc = f"{e.line}:{e.col}:" if e.line else ""
        print(f"{args.grammar}:{loc} error: {e.message}", file=sys.stderr)
        raise _Exit(2)


def _emit(out: TextIO, args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    if args.format == "json":
        json.dump({"schema_version": SCHEMA_VERSION, "command": args.command, **payload}, out, indent=2, ensure_ascii=False)
        out.write("\n")
    else:
        out.write(text if text.endswith("\n") else text + "\n")


def cmd_check(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    tables = analyze(net)
    pilot = build_pilot(net, tables)
    want_elr = args.elr1 or not (args.ell1 or args.stp)
    lines: list[str] = []
    payload: dict[str, Any] = {"pilot_mstates": len(pilot.mstates)}
    ok = True
    if want_elr:
        rep = check_elr1(pilot)
        ok &= rep.clean
        lines.append(f"ELR(1): {'OK' if rep.clean else 'FAIL'}, pilot m-states: {len(pilot.mstates)}")
        lines.extend("  " + m for m in rep.messages())
        payload["elr1"] = {
            "ok": rep.clean,
            "convergent_edges": [{"mstate": m, "symbol": x} for (m, x) in sorted(pilot.convergent_edges)],
            "conflicts": rep.messages(),
        }
    if args.stp:
        v = check_stp(pilot)
        ok &= v is None
        lines.append(f"STP: {'OK' if v is None else 'FAIL'}")
        if v is not None:
            lines.append("  " + str(v))
        payload["stp"] = {"ok": v is None, "violation": None if v is None else str(v)}
    if args.ell1:
        rep1 = check_ell1(net, tables, pilot)
        ok &= rep1.clean
        lines.append(f"ELL(1): {'OK' if rep1.clean else 'FAIL'}")
        lines.extend("  " + m for m in rep1.messages())
        lines.extend("  warning: " + w for w in rep1.warnings)
        payload["ell1"] = {
            "ok": rep1.clean,
            "left_recursion": None if rep1.left_recursion is None else [str(s) for s in rep1.left_recursion],
            "stp_violations": [str(v) for v in rep1.stp_violations],
            "elr1_conflicts": rep1.elr1_conflicts.messages(),
            "guide_overlaps": [str(o) for o in rep1.guide_overlaps],
            "warnings": rep1.warnings,
        }
    payload["ok"] = ok
    _emit(out, args, payload, "\n".join(lines))
    return 0 if ok else 1


def cmd_analyze(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    tables = analyze(net)
    fx = fixpoint_prospect_guide(net, tables)
    rows = []
    for q in net.states:
        rows.append((str(q), "yes" if net.is_final(q) else "", "yes" if tables.nullable(q) else "",
                     fmt_set(tables.ini[q]), fmt_set(fx.prospect[q]) if net.is_final(q) else ""))
    head = ("state", "final", "nullable", "Ini", "prospect")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(5)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(head, widths)).rstrip()]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.append("")
    lines.append("nullable nonterminals: " + (" ".join(sorted(tables.nullable_nonterminals)) or "none"))
    lr = detect_left_recursion(net, tables)
    lines.append("left recursion: " + (" -> ".join(map(str, lr)) if lr else "none"))
    for c, g in fx.guides.items():
        lines.append(f"guide {c}: {fmt_set(g)}")
    payload = {
        "states": [{"state": r[0], "final": bool(r[1]), "nullable": bool(r[2]),
                    "ini": sorted(tables.ini[q]),
                    "prospect": sorted(fx.prospect[q]) if net.is_final(q) else None}
                   for r, q in zip(rows, net.states)],
        "nullable_nonterminals": sorted(tables.nullable_nonterminals),
        "left_recursion": [str(s) for s in lr] if lr else None,
        "guides": [{"edge": str(c), "guide": sorted(g)} for c, g in fx.guides.items()],
        "fixpoint_iterations": fx.iterations,
    }
    _emit(out, args, payload, "\n".join(lines))
    return 0


def cmd_graph(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    if args.what == "net":
        dot = net_to_dot(net)
    elif args.what == "pcfg":
        dot = pcfg_to_dot(build_pcfg(net))
    else:
        pilot = build_pilot(net)
        if args.what == "compact":
            try:
                pilot = compact_pilot(pilot)
            except NetparseError as e:
                print(f"netparse: {e}", file=sys.stderr)
                return 1
        dot = pilot_to_dot(pilot)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dot)
    else:
        out.write(dot)
    return 0


def _tokens(args: argparse.Namespace) -> list[str]:
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    elif args.input is not None:
        text = args.input
    else:
        text = sys.stdin.read()
    if args.chars:
        return [c for c in text if not c.isspace()]
    return text.split()


def cmd_parse(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    toks = _tokens(args)
    payload: dict[str, Any] = {"algo": args.algo, "tokens": toks}
    lines: list[str] = []
    try:
        if args.algo == "earley":
            ok, tree, E = earley_parse(net, toks)
            if args.trace:
                lines.append(E.render())
                payload["earley"] = [[str(p) for p in E.pairs(i)] for i in range(len(E))]
            payload.update(accepted=ok, tree=str(tree) if tree else None,
                           tree_json=tree.to_json() if tree else None)
            lines.append(("accepted: " + str(tree)) if ok else "rejected")
            _emit(out, args, payload, "\n".join(lines))
            return 0 if ok else 1
        tables = analyze(net)
        if args.algo in ("elr", "elr-vector"):
            pilot = build_pilot(net, tables)
            run = parse_elr_cid if args.algo == "elr" else parse_elr_vector
            outcome = run(pilot, toks, trace=args.trace)
        elif args.algo == "pointerless":
            outcome = parse_pointerless(compact_pilot(build_pilot(net, tables)), toks, trace=args.trace)
        else:
            outcome = parse_predictive(build_pcfg(net, tables), toks, trace=args.trace)
    except NetparseError as e:
        print(f"netparse: {e}", file=sys.stderr)
        payload.update(accepted=False, error=str(e))
        if args.format == "json":
            _emit(out, args, payload, "")
        return 1
    payload.update(outcome.to_json())
    if args.trace:
        for i, s in enumerate(outcome.trace):
            extra = s.data.get("derivation", "") if args.algo == "predictive" else ""
            lines.append(f"{i:>3}  {s.move:<7} {s.detail:<28} {s.stack}  {extra}".rstrip())
    if outcome.accepted:
        lines.append(f"accepted: {outcome.tree}")
        if outcome.reductions:
            lines.append("reductions: " + ", ".join(map(str, outcome.reductions)))
        if outcome.derivation is not None and outcome.tree is not None:
            lines.append("derivation: " + format_derivation(outcome.tree.leftmost_derivation()))
    else:
        lines.append(f"rejected: {outcome.error}")
    _emit(out, args, payload, "\n".join(lines))
    return 0 if outcome.accepted else 1


def cmd_emit_rd(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    try:
        code = emit_recursive_descent(build_pcfg(net))
    except NetparseError as e:
        print(f"netparse: {e}", file=sys.stderr)
        return 1
    _emit(out, args, {"code": code}, code)
    return 0


def cmd_oracle(args: argparse.Namespace, out: TextIO) -> int:
    net = _load(args)
    elr = check_elr1(build_pilot(net))
    aut = build_lr1_pilot(right_linearize(net))
    lr1 = check_lr1(aut)
    lr1_msgs = [describe_conflict(aut, c) for c in lr1.conflicts]
    agree = elr.clean == lr1.clean
    lines = [
        f"ELR(1) on the net:                  {'clean' if elr.clean else 'conflicts'}",
        f"LR(1) on the right-linearized grammar: {'clean' if lr1.clean else 'conflicts'}"
        f" ({len(aut.mstates)} m-states)",
        f"verdicts {'agree' if agree else 'DISAGREE'}",
    ]
    if args.compare:
        lines += ["--- ELR(1)"] + ["  " + m for m in elr.messages()]
        lines += ["+++ LR(1)"] + ["  " + m for m in lr1_msgs]
    payload = {"elr1_clean": elr.clean, "lr1_clean": lr1.clean, "agree": agree,
               "elr1_conflicts": elr.messages(), "lr1_conflicts": lr1_msgs,
               "lr1_mstates": len(aut.mstates)}
    _emit(out, args, payload, "\n".join(lines))
    return 0 if agree else 1


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netparse", description="ELR(1)/ELL(1)/Earley toolkit for EBNF machine nets")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, formats: Sequence[str] = ("text", "json")) -> None:
        sp.add_argument("grammar", help="grammar file")
        sp.add_argument("--format", choices=formats, default="text")
        sp.add_argument("--minimize", action="store_true", help="use minimal machines")
        sp.add_argument("--bnf", action="store_true",
                        help="read a BNF grammar as tree-shaped machines (one leg per alternative)")

    sp = sub.add_parser("check", help="check ELR(1), STP and ELL(1) conditions")
    common(sp)
    sp.add_argument("--elr1", action="store_true")
    sp.add_argument("--ell1", action="store_true")
    sp.add_argument("--stp", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("analyze", help="print nullable, Ini, prospect and guide tables")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("graph", help="export DOT graphs")
    common(sp, ("dot",))
    sp.add_argument("--what", choices=("net", "pilot", "compact", "pcfg"), default="net")
    sp.add_argument("--out", help="write to this file instead of stdout")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("parse", help="parse a token string")
    common(sp)
    sp.add_argument("input", nargs="?", help="whitespace-separated tokens (default: stdin)")
    sp.add_argument("--file", help="read the input from a file")
    sp.add_argument("--algo", choices=ALGOS, default="elr")
    sp.add_argument("--chars", action="store_true", help="every non-blank character is a token")
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("emit-rd", help="emit recursive-descent pseudo-code")
    common(sp)
    sp.set_defaults(func=cmd_emit_rd)

    sp = sub.add_parser("oracle", help="compare ELR(1) with LR(1) on the right-linearized grammar")
    common(sp)
    sp.add_argument("--compare", action="store_true", help="list both conflict reports")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args, out)
    except _Exit as e:
        return e.code


if __name__ == "__main__":
    sys.exit(main())
