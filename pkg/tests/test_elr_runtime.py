from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sample_net
from netparse.errors import NetparseError
from netparse.elr_runtime import parse_elr_cid, parse_elr_vector
from netparse.grammar_frontend import END
from netparse.pilot import build_pilot, check_elr1
from netparse.trees import SyntaxTree
from oracle import all_strings, random_nets, suffix_languages

ENGINES = [parse_elr_cid, parse_elr_vector]


@pytest.mark.parametrize("parse", ENGINES)
def test_running_reductions(running, parse):
    out = parse(build_pilot(running), "( ( ) a )".split())
    assert out.accepted
    assert [str(r) for r in out.reductions] == ["ε⤳E", "(E)⤳T", "a⤳T", "TT⤳E", "(E)⤳T", "T⤳E"]
    assert out.tree.frontier() == ["(", "(", ")", "a", ")"]


def test_engines_build_identical_trees(running):
    p = build_pilot(running)
    a = parse_elr_cid(p, "( ( ) a )".split())
    b = parse_elr_vector(p, "( ( ) a )".split())
    assert a.tree == b.tree
    assert str(a.tree) == "( ( ( ( ( ( ( ε )_E ) )_T ( a )_T )_E ) )_T )_E"


@pytest.mark.parametrize("parse", ENGINES)
def test_convergent_shift(convergent_edge, parse):
    out = parse(build_pilot(convergent_edge), "a b e d".split(), trace=True)
    assert out.accepted
    assert [str(r) for r in out.reductions] == ["be⤳A", "aAd⤳S"]
    shifts = [s for s in out.trace if s.move == "shift"]
    flagged = [s.data["symbol"] for s in shifts if s.data["convergent"]]
    assert flagged == ["e"]
    assert out.trace[0].move == "init" and out.trace[-1].move == "accept"


def test_vector_links(convergent_edge):
    out = parse_elr_vector(build_pilot(convergent_edge), "a b e d".split(), trace=True)
    after_e = next(s for s in out.trace if s.move == "shift" and s.data["symbol"] == "e")
    # after shifting e both 2_A candidates are present: one started at element 1, one at element 2
    assert "2_A {d} 1" in after_e.stack and "2_A {-|} 2" in after_e.stack


def test_cid_links(convergent_edge):
    out = parse_elr_cid(build_pilot(convergent_edge), "a b e".split(), trace=True)
    after_b = next(s for s in out.trace if s.move == "shift" and s.data["symbol"] == "b")
    # base candidates point at their source; closure candidates carry ⊥
    assert "4_S {-|} #1" in after_b.stack and "1_A {d} #2" in after_b.stack
    assert "0_A {-|} ⊥" in after_b.stack


@pytest.mark.parametrize(
    "text, position, token, expected",
    [
        ("( a", 2, END, {"(", ")", "a"}),
        ("a )", 1, ")", {"(", "a", END}),
        (") a", 0, ")", {"(", "a", END}),
        ("( ( a ) ) )", 5, ")", {"(", "a", END}),
    ],
)
@pytest.mark.parametrize("parse", ENGINES)
def test_errors(running, parse, text, position, token, expected):
    out = parse(build_pilot(running), text.split())
    assert not out.accepted and out.tree is None
    assert (out.error.position, out.error.token, set(out.error.expected)) == (position, token, expected)


def test_empty_input(running):
    out = parse_elr_cid(build_pilot(running), [])
    assert out.accepted and str(out.tree) == "( ε )_E"
    assert [str(r) for r in out.reductions] == ["ε⤳E"]


def test_requires_elr1(convergence_conflict):
    with pytest.raises(NetparseError, match="not ELR"):
        parse_elr_cid(build_pilot(convergence_conflict), ["a"])


# ---------------------------------------------------------------------------
# properties against brute-force enumeration


def tree_is_valid(net, tree) -> bool:
    if not isinstance(tree, SyntaxTree):
        return True
    labels = [c.label if isinstance(c, SyntaxTree) else c for c in tree.children]
    return net.machines[tree.label].accepts(labels) and all(tree_is_valid(net, c) for c in tree.children)


def viable_prefix_length(lang, word):
    n = 0
    while n < len(word) and any(w[: n + 1] == tuple(word[: n + 1]) for w in lang):
        n += 1
    return n


@pytest.mark.parametrize("name", ["running", "convergent_edge", "left_recursive", "base_multiplicity", "guide_overlap"])
def test_exhaustive_membership_and_error_position(name):
    net = sample_net(name)
    pilot = build_pilot(net)
    lang = suffix_languages(net, 10)[net.initial(net.axiom)]
    for w in all_strings(net.terminals, 5):
        a = parse_elr_cid(pilot, w)
        b = parse_elr_vector(pilot, w)
        assert a.accepted == b.accepted == (w in lang), w
        assert a.reductions == b.reductions and a.tree == b.tree
        if a.accepted:
            assert a.tree.frontier() == list(w) and tree_is_valid(net, a.tree)
        else:
            # canonical LR(1) detects the error at the first token that leaves the viable prefixes
            assert a.error.position == viable_prefix_length(lang, w), w


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_nets(seed):
    [(text, net)] = random_nets(seed, 1)
    pilot = build_pilot(net)
    if not check_elr1(pilot).clean:
        return
    lang = suffix_languages(net, 5)[net.initial(net.axiom)]
    for w in all_strings(net.terminals, 4):
        a = parse_elr_cid(pilot, w)
        b = parse_elr_vector(pilot, w)
        assert a.accepted == b.accepted == (w in lang), (text, w)
        assert a.tree == b.tree
        if a.accepted:
            assert tree_is_valid(net, a.tree)
    rng = random.Random(seed)
    for w in rng.sample(sorted(lang), min(5, len(lang))):
        assert parse_elr_cid(pilot, w).tree.frontier() == list(w)
