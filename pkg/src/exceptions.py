"""Error types raised by the evolving-graph engine."""

from typing import Optional


class EvolvingGraphError(ValueError):
    """Base class for all engine errors."""


class GraphFormatError(EvolvingGraphError):
    """Malformed edge-list, delta or manifest input."""

    def __init__(self, message: str, line_number: Optional[int] = None, source: Optional[str] = None):
        self.line_number = line_number
        self.source = source
        location = ""
        if source:
            location += f"{source}"
        if line_number is not None:
            location += f"{':' if source else 'line '}{line_number}"
        super().__init__(f"{location}: {message}" if location else message)


class DomainError(EvolvingGraphError):
    """A weight or value lies outside the algorithm's domain."""


class SnapshotRangeError(EvolvingGraphError):
    """Snapshot or vertex index out of range."""


class CapacityError(EvolvingGraphError):
    """Snapshot count exceeds the configured version-mask capacity."""


class ConsistencyError(EvolvingGraphError):
    """A delta batch does not apply cleanly to the snapshot before it."""

    def __init__(self, message: str, batch_index: int, triple=None):
        self.batch_index = batch_index
        self.triple = triple
        super().__init__(f"delta batch {batch_index}: {message}")


class ConfigurationError(EvolvingGraphError):
    """Unknown algorithm/mode, infeasible parameters or mismatched counts."""


class PreconditionError(EvolvingGraphError):
    """An operation was called with inputs violating its precondition."""
