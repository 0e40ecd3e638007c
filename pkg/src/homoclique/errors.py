"""Shared exception types."""

from __future__ import annotations


class GraphFormatError(ValueError):
    """Raised when a graph file / JSON object cannot be parsed."""


class SpecFormatError(ValueError):
    """Raised when a class-spec file / JSON object cannot be parsed."""


class PreconditionError(ValueError):
    """Raised when a documented precondition of an operation is violated."""


class SearchBudgetExceeded(RuntimeError):
    """Raised when an exhaustive search would exceed its node budget."""


class InternalInvariantError(AssertionError):
    """An internal invariant that should be unreachable was violated.

    The CLI maps this to exit code 3.
    """


class UnclassifiableAtLevel(Exception):
    """Classification could not be decided from the available finite data.

    Carries a human-readable reason plus the evidence gathered so far.
    The CLI maps this to exit code 2.
    """

    def __init__(self, reason: str, evidence: dict | None = None):
        super().__init__(reason)
        self.reason = reason
        self.evidence = evidence or {}
