"""Exception hierarchy shared by every module."""

from __future__ import annotations


class NetparseError(Exception):
    """Base class for all errors raised by netparse."""


class GrammarError(NetparseError):
    """A grammar source could not be turned into a valid grammar.

    ``line`` and ``col`` are 1-based and point at the offending token.
    """

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class StpViolationError(NetparseError):
    """An operation that needs the single transition property got a pilot without it."""


class NotEll1Error(NetparseError):
    """An operation that needs an ELL(1) net got one that fails the condition."""


class AmbiguityError(NetparseError):
    """Tree extraction found more than one way to explain a substring."""


class InternalInconsistencyError(NetparseError):
    """Two independent computations that must agree did not."""
