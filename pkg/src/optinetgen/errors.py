"""Exception types shared across the toolkit.

Every error carries a short machine-readable ``code`` so that callers
(CLI, HTTP service) can map failures without parsing messages.
"""

from __future__ import annotations


class TopologyError(Exception):
    """Base class for all toolkit errors."""

    code = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InvalidParamsError(TopologyError):
    """Parameters failed validation before any generation work started."""

    code = "invalid-params"


class GenerationError(TopologyError):
    """A randomized construction did not produce an acceptable result.

    ``attempts`` records how many retries were spent before giving up.
    """

    code = "generation-failed"

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class UnknownNodeError(TopologyError):
    code = "unknown-node"


class UnknownLinkError(TopologyError):
    code = "unknown-link"


class DuplicateLinkError(TopologyError):
    code = "duplicate-link"


class SelfLoopError(TopologyError):
    code = "self-loop"


class InvalidLengthError(TopologyError):
    code = "invalid-length"


class EmptyTopologyError(TopologyError):
    code = "empty-topology"


class DisjointHistogramsError(TopologyError):
    """The two histograms being compared share no support at all."""

    code = "disjoint-histograms"


class WorkbookError(TopologyError):
    code = "workbook-error"


class MissingTableError(WorkbookError):
    code = "missing-table"


class DanglingReferenceError(WorkbookError):
    """A table row references a node name that does not exist."""

    code = "dangling-reference"

    def __init__(self, message: str, offenders: list[str] | None = None):
        super().__init__(message)
        self.offenders = offenders or []


class VersionMismatchError(WorkbookError):
    code = "version-mismatch"
