"""Domain errors raised by the engine.

Every error carries a stable name (used on the wire by the HTTP service and
in CLI messages) that is independent of the Python class name.
"""

from __future__ import annotations


class CptError(Exception):
    """Base class for all engine errors."""


def error_name(err: Exception) -> str:
    """Stable identifier for an error, e.g. ``OutcomeLocked``."""
    return getattr(err, "ERROR_NAME", type(err).__name__)


# --- network structure ------------------------------------------------------

class UnknownNode(CptError):
    pass


class DuplicateNode(CptError):
    pass


class EmptyOutcomes(CptError):
    pass


class DuplicateOutcome(CptError):
    pass


class DuplicateEdge(CptError):
    pass


class CycleDetected(CptError):
    pass


# --- CPT indexing and content -----------------------------------------------

class ArityMismatch(CptError):
    pass


class OutcomeOutOfRange(CptError):
    pass


class IndexOutOfRange(CptError):
    pass


class InvalidDistribution(CptError):
    pass


# --- views and selection ------------------------------------------------------

class InvalidContext(CptError):
    pass


class EmptySelection(CptError):
    pass


class InvalidPermutation(CptError):
    pass


# --- elicitation --------------------------------------------------------------

class OutcomeLocked(CptError):
    pass


# --- persistence ----------------------------------------------------------------

class StoreError(CptError):
    """Base class for document load failures."""


class DocumentSyntaxError(StoreError):
    """The bytes are not well-formed JSON."""

    ERROR_NAME = "SyntaxError"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class SchemaError(StoreError):
    """Well-formed JSON that does not match the document schema."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class InvariantViolation(StoreError):
    """A structurally valid document that violates a network invariant."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason
