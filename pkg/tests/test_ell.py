from __future__ import annotations

import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SAMPLE_NETS, sample_net
from netparse.errors import NetparseError, NotEll1Error
from netparse.ell import (
    build_pcfg,
    call_edges,
    check_ell1,
    emit_recursive_descent,
    fixpoint_prospect_guide,
    parse_pointerless,
    parse_predictive,
    pcfg_to_dot,
    prospect_from_pilot,
    replay_derivation,
)
from netparse.elr_runtime import parse_elr_cid
from netparse.grammar_frontend import END, State, load_net
from netparse.pilot import build_pilot, check_elr1, check_stp, compact_pilot
from netparse.trees import format_derivation
from oracle import all_strings, random_nets, suffix_languages


def S(text):
    num, machine = text.split("_")
    return State(machine, int(num))


# ---------------------------------------------------------------------------
# prospect and guide sets


def test_running_fixpoint(running):
    fx = fixpoint_prospect_guide(running)
    full = {"(", ")", "a", END}
    assert fx.prospect[S("0_E")] == {")", END}
    assert fx.prospect[S("1_E")] == {")", END}
    for q in ("0_T", "1_T", "2_T", "3_T"):
        assert fx.prospect[S(q)] == full
    guides = {str(c): g for c, g in fx.guides.items()}
    assert guides == {
        "0_E ⇢ 0_T": {"a", "("},
        "1_E ⇢ 0_T": {"a", "("},
        "1_T ⇢ 0_E": {"a", "(", ")"},
    }
    assert fx.iterations == 3
    # the last two rows of the iteration table coincide
    assert fx.history[-1] == fx.history[-2]


def test_trivial_fixpoint():
    net = load_net("S : 'a' ;")
    pcfg = build_pcfg(net)
    assert pcfg.prospect == {S("1_S"): {END}}
    assert pcfg.calls == ()


def test_guide_overlaps(guide_overlap):
    pcfg = build_pcfg(guide_overlap)
    found = {(str(o.node), o.overlap) for o in pcfg.overlaps()}
    assert found == {("0_S", frozenset({"a"})), ("1_S", frozenset({"a"}))}
    assert pcfg.guide(S("0_S"), S("0_N")) & {"a"} == {"a"}


def test_pcfg_structure(running):
    pcfg = build_pcfg(running)
    assert [str(c) for c in pcfg.calls] == ["0_E ⇢ 0_T", "1_E ⇢ 0_T", "1_T ⇢ 0_E"]
    assert set(pcfg.prospect) == {q for q in running.states if running.is_final(q)}
    dot = pcfg_to_dot(pcfg)
    assert '"1_T" -> "0_E" [style=dashed, label="{( ) a}"]' in dot


@pytest.mark.parametrize("name", ["running", "left_recursive"])
def test_prospect_agrees_with_pilot(name):
    net = sample_net(name)
    pilot = build_pilot(net)
    assert check_stp(pilot) is None
    via_pilot = prospect_from_pilot(compact_pilot(pilot))
    pcfg = build_pcfg(net)
    for q, la in via_pilot.items():
        assert pcfg.prospect[q] == la, q


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_prospect_agrees_with_pilot_on_random_nets(seed):
    [(text, net)] = random_nets(seed, 1)
    pilot = build_pilot(net)
    if check_stp(pilot) is not None:
        return
    via_pilot = prospect_from_pilot(compact_pilot(pilot))
    pcfg = build_pcfg(net)
    for q, la in via_pilot.items():
        assert pcfg.prospect[q] == la, (text, q)


def test_guide_chain_inclusion(running):
    pcfg = build_pcfg(running)
    for c in pcfg.calls:
        for d in pcfg.calls_from(c.target):
            assert pcfg.guides[c] >= pcfg.guides[d]


# ---------------------------------------------------------------------------
# the ELL(1) condition


def test_running_is_ell1(running):
    rep = check_ell1(running)
    assert rep.clean and rep.definition_clean
    assert rep.messages() == []


def test_guide_overlap_report(guide_overlap):
    rep = check_ell1(guide_overlap)
    assert not rep.clean
    assert rep.elr1_conflicts.clean
    assert rep.stp_violation is not None
    assert {o.overlap for o in rep.guide_overlaps} == {frozenset({"a"})}


def test_left_recursion_detected():
    net = sample_net("left_recursive")
    rep = check_ell1(net)
    assert [str(s) for s in rep.left_recursion] == ["0_E", "0_E"]
    assert rep.elr1_conflicts.clean and rep.stp_violation is None
    assert not rep.clean


def test_epsilon_only_nonterminal_warns():
    # A derives only ε: the guides are disjoint but the pilot has multiple transitions on A
    net = load_net("S : A 'a' S | 'b' ; A : %empty ;")
    rep = check_ell1(net)
    assert rep.warnings and "A" in rep.warnings[0]


@pytest.mark.parametrize("name", list(SAMPLE_NETS))
def test_dual_route_agreement(name):
    rep = check_ell1(sample_net(name))
    assert rep.clean == rep.definition_clean


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_dual_route_on_random_nets(seed):
    [(_, net)] = random_nets(seed, 1)
    rep = check_ell1(net)
    if not rep.warnings:
        assert rep.clean == rep.definition_clean
    pcfg = build_pcfg(net)
    for c in pcfg.calls:
        for d in pcfg.calls_from(c.target):
            assert pcfg.guides[c] >= pcfg.guides[d]


# ---------------------------------------------------------------------------
# pointerless parser


def test_pointerless_running(running):
    compact = compact_pilot(build_pilot(running))
    out = parse_pointerless(compact, "( ( ) a )".split(), trace=True)
    assert out.accepted
    assert [str(r) for r in out.reductions] == ["ε⤳E", "(E)⤳T", "a⤳T", "TT⤳E", "(E)⤳T", "T⤳E"]
    assert out.tree == parse_elr_cid(build_pilot(running), "( ( ) a )".split()).tree
    pruned = [s.detail for s in out.trace if s.move == "shift" and s.data["pruned"]]
    assert pruned  # shifts from base candidates drop the closure


def test_pointerless_empty_and_errors(running):
    compact = compact_pilot(build_pilot(running))
    assert [str(r) for r in parse_pointerless(compact, []).reductions] == ["ε⤳E"]
    bad = parse_pointerless(compact, "a )".split())
    assert not bad.accepted and bad.error.position == 1


def test_pointerless_needs_compact_pilot(running):
    with pytest.raises(NetparseError):
        parse_pointerless(build_pilot(running), ["a"])


@pytest.mark.parametrize("name", ["running", "left_recursive"])
def test_pointerless_matches_cid(name):
    net = sample_net(name)
    pilot = build_pilot(net)
    compact = compact_pilot(pilot)
    rng = random.Random(7)
    alpha = sorted(net.terminals)
    words = [tuple(rng.choice(alpha) for _ in range(rng.randint(0, 8))) for _ in range(200)]
    words += sorted(w for w in suffix_languages(net, 8)[net.initial(net.axiom)])[:100]
    for w in words:
        a, b = parse_pointerless(compact, w), parse_elr_cid(pilot, w)
        assert a.accepted == b.accepted, w
        if a.accepted:
            assert a.reductions == b.reductions and a.tree == b.tree, w
        else:
            # merged look-aheads may add reductions before the error, never a shift
            assert a.error.position == b.error.position, w


# ---------------------------------------------------------------------------
# predictive parser


def test_predictive_trace(running):
    out = parse_predictive(build_pcfg(running), "( a )".split(), trace=True)
    assert out.accepted
    assert len(out.trace) == 10
    assert [s.move for s in out.trace] == [
        "call", "scan", "call", "call", "scan", "return", "return", "scan", "return", "accept"]
    assert out.trace[-1].data["derivation"] == "0_E ⇒+ ( a ) ε"
    assert out.trace[0].data["derivation"] == "0_E ⇒ 0_T 1_E"
    assert out.trace[1].stack == "<1_E> <0_T>"
    assert replay_derivation(running, out.derivation) == ["(", "a", ")"]


def test_predictive_grammar_derivation(running):
    out = parse_predictive(build_pcfg(running), "( a )".split())
    assert format_derivation(out.tree.leftmost_derivation()) == "E ⇒ T ⇒ (E) ⇒ (T) ⇒ (a)"


def test_predictive_empty_and_errors(running):
    pcfg = build_pcfg(running)
    out = parse_predictive(pcfg, [])
    assert out.accepted and str(out.tree) == "( ε )_E"
    bad = parse_predictive(pcfg, "( a".split())
    assert not bad.accepted
    # the inner E returns on -| (its prospect holds -|), so the error shows at 2_T
    assert bad.error.position == 2 and bad.error.token == END
    assert set(bad.error.expected) == {")"}


def test_predictive_refuses_non_ell1(guide_overlap):
    with pytest.raises(NotEll1Error):
        parse_predictive(build_pcfg(guide_overlap), ["a"])


@pytest.mark.parametrize("name", ["running"])
def test_predictive_matches_bottom_up(name):
    net = sample_net(name)
    pcfg, pilot = build_pcfg(net), build_pilot(net)
    lang = suffix_languages(net, 6)[net.initial(net.axiom)]
    for w in all_strings(net.terminals, 6):
        a, b = parse_predictive(pcfg, w), parse_elr_cid(pilot, w)
        assert a.accepted == b.accepted == (w in lang), w
        assert a.tree == b.tree
        if a.accepted:
            assert replay_derivation(net, a.derivation) == list(w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_predictive_on_random_ell1_nets(seed):
    [(text, net)] = random_nets(seed, 1)
    pcfg = build_pcfg(net)
    if pcfg.overlaps():
        return
    pilot = build_pilot(net)
    assert check_elr1(pilot).clean, text
    lang = suffix_languages(net, 4)[net.initial(net.axiom)]
    for w in all_strings(net.terminals, 4):
        a, b = parse_predictive(pcfg, w), parse_elr_cid(pilot, w)
        assert a.accepted == b.accepted == (w in lang), (text, w)
        assert a.tree == b.tree
        if a.accepted:
            assert replay_derivation(net, a.derivation) == list(w)


def test_replay_rejects_bad_steps(running):
    out = parse_predictive(build_pcfg(running), ["a"])
    with pytest.raises(NetparseError):
        replay_derivation(running, out.derivation[1:])
    with pytest.raises(NetparseError):
        replay_derivation(running, out.derivation[:-1])


# ---------------------------------------------------------------------------
# recursive-descent emission, checked by interpreting the pseudo-code


GUARD = re.compile(r"^(?:if|elif) cc in \{ (.*) \} then (.*)$")


def load_program(text):
    procs, state, proc = {}, None, None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("procedure "):
            proc = procs.setdefault(line.split()[1], {"start": None, "states": {}})
        elif line.startswith("state "):
            state = line.split()[1]
            proc["states"][state] = []
            proc["start"] = proc["start"] or state
        elif line.startswith(("if ", "elif ")):
            m = GUARD.match(line)
            proc["states"][state].append((set(m.group(1).split()), m.group(2).split()))
    return procs


class Reject(Exception):
    pass


def run_program(procs, axiom, tokens):
    toks = list(tokens) + [END]
    pos = 0

    def call(name):
        nonlocal pos
        proc = procs[name]
        state = proc["start"]
        while True:
            for guard, action in proc["states"][state]:
                if toks[pos] in guard:
                    break
            else:
                raise Reject(pos)
            if action[0] == "return":
                return
            if action[0] == "next":
                pos += 1
            else:
                call(action[1])
            state = action[-1]

    try:
        call(axiom)
    except Reject:
        return False
    return toks[pos] == END


def test_emitted_code_shape(running):
    code = emit_recursive_descent(build_pcfg(running))
    assert "procedure E" in code and "procedure T" in code
    assert "    if cc in { ( a } then call T goto 1_E" in code
    assert "    elif cc in { ) -| } then return" in code
    assert "    if cc in { ( } then next goto 1_T" in code
    assert code.rstrip().endswith("if cc in { -| } then accept else reject\nend")


def test_emitted_code_single_machine():
    code = emit_recursive_descent(build_pcfg(load_net("S : 'a' ;")))
    assert code.count("procedure") == 1
    assert "if cc in { a } then next goto 1_S" in code


def test_emitted_code_runs(running):
    procs = load_program(emit_recursive_descent(build_pcfg(running)))
    assert run_program(procs, "E", "( ( ) a )".split())
    assert not run_program(procs, "E", list("()("))
    pcfg = build_pcfg(running)
    for w in all_strings(running.terminals, 5):
        assert run_program(procs, "E", w) == parse_predictive(pcfg, w).accepted, w


def test_emit_refuses_non_ell1(guide_overlap):
    with pytest.raises(NotEll1Error):
        emit_recursive_descent(build_pcfg(guide_overlap))


def test_call_edges(running):
    edges = call_edges(running)
    assert [(str(c.source), c.nonterminal, str(c.ret)) for c in edges] == [
        ("0_E", "T", "1_E"), ("1_E", "T", "1_E"), ("1_T", "E", "2_T")]
