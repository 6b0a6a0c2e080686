"""Parsing toolkit for EBNF grammars represented as machine nets.

Builds the net of finite automata for a grammar, the ELR(1) pilot, the
ELL(1) parser control-flow graph, and runs shift-reduce, predictive and
Earley parsers directly on the net.
"""

from .earley import earley_parse, earley_recognize
from .ell import build_pcfg, check_ell1, emit_recursive_descent, parse_pointerless, parse_predictive
from .elr_runtime import parse_elr_cid, parse_elr_vector
from .errors import (
    AmbiguityError,
    GrammarError,
    InternalInconsistencyError,
    NetparseError,
    NotEll1Error,
    StpViolationError,
)
from .grammar_frontend import MachineNet, build_net, load_net, parse_ebnf, right_linearize
from .lr1_oracle import build_lr1_pilot, check_lr1
from .net_analysis import analyze
from .pilot import build_pilot, check_elr1, compact_pilot

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "GrammarError",
    "InternalInconsistencyError",
    "MachineNet",
    "NetparseError",
    "NotEll1Error",
    "StpViolationError",
    "analyze",
    "build_lr1_pilot",
    "build_net",
    "build_pcfg",
    "build_pilot",
    "check_elr1",
    "check_ell1",
    "check_lr1",
    "compact_pilot",
    "earley_parse",
    "earley_recognize",
    "emit_recursive_descent",
    "load_net",
    "parse_ebnf",
    "parse_elr_cid",
    "parse_elr_vector",
    "parse_pointerless",
    "parse_predictive",
    "right_linearize",
]
