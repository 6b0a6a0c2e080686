from __future__ import annotations

import sys
from pathlib import Path

import pytest

from netparse.grammar_frontend import bnf_to_net, grammar_to_bnf, load_net, parse_ebnf

HERE = Path(__file__).parent
GRAMMARS = HERE / "grammars"
sys.path.insert(0, str(HERE))

# name -> (file, read as BNF trie)
SAMPLE_NETS = {
    "running": ("running.g", False),
    "bnf_trie": ("bnf_trie.g", True),
    "convergence_conflict": ("convergence_conflict.g", False),
    "convergent_edge": ("convergent_edge.g", False),
    "guide_overlap": ("guide_overlap.g", False),
    "earley_sample": ("earley_sample.g", False),
    "ambiguous_plus": ("ambiguous_plus.g", False),
    "base_multiplicity": ("base_multiplicity.g", False),
    "left_recursive": ("left_recursive.g", False),
}


def sample_net(name: str):
    fname, bnf = SAMPLE_NETS[name]
    text = (GRAMMARS / fname).read_text()
    if bnf:
        return bnf_to_net(grammar_to_bnf(parse_ebnf(text)))
    return load_net(text)


@pytest.fixture
def running():
    return sample_net("running")


@pytest.fixture
def convergence_conflict():
    return sample_net("convergence_conflict")


@pytest.fixture
def convergent_edge():
    return sample_net("convergent_edge")


@pytest.fixture
def guide_overlap():
    return sample_net("guide_overlap")


@pytest.fixture
def earley_sample():
    return sample_net("earley_sample")


# ---------------------------------------------------------------------------
# one PASS/FAIL line per acceptance criterion

_CRITERIA: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        num = int(report.nodeid.split("test_criterion_")[1][:2])
        _CRITERIA[num] = _CRITERIA.get(num, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if _CRITERIA[num] else 'FAIL'}")
