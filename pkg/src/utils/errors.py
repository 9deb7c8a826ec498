"""
Exception taxonomy for the aggregation engine.

Every error carries the exit code the CLI returns for it:
1 for parse problems, 2 for validation failures, 3 for numeric failures.
"""
from typing import Any, Optional


class AggregationError(Exception):
    """Base class for all engine errors."""
    exit_code: int = 1

    def __init__(self, message: str, index: Optional[Any] = None):
        self.index = index
        if index is not None:
            message = f"{message} (at cell {index})"
        super().__init__(message)


# Parse errors (exit 1)

class ConfigError(AggregationError):
    """Configuration document is missing, malformed or fails schema validation."""
    exit_code = 1


class InputFormatError(AggregationError):
    """A series, image or matrix file could not be parsed."""
    exit_code = 1


class UsageError(AggregationError):
    """Command line arguments could not be parsed."""
    exit_code = 1


# Validation errors (exit 2)

class ValidationError(AggregationError):
    exit_code = 2


class DimensionMismatch(ValidationError):
    def __init__(self, expected: Any, got: Any, index: Optional[Any] = None):
        self.expected = expected
        self.got = got
        super().__init__(f"dimension mismatch: expected {expected}, got {got}", index)


class NonSquare(ValidationError):
    def __init__(self, shape: Any):
        super().__init__(f"matrix must be square, got shape {shape}")


class EndpointMismatch(ValidationError):
    """Consecutive cells of an interval assignment do not share an object."""

    def __init__(self, index: int, detail: str = ""):
        message = "endpoint mismatch"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message, index)


class BoundaryMismatch(ValidationError):
    """Two 2-cells do not share the edge they are composed along, or a face
    violates the boundary law."""

    def __init__(self, detail: str, index: Optional[Any] = None):
        super().__init__(f"boundary mismatch: {detail}", index)


class OutOfRange(ValidationError):
    def __init__(self, detail: str):
        super().__init__(f"out of range: {detail}")


class AlphabetMismatch(ValidationError):
    def __init__(self, left: Any, right: Any):
        super().__init__(f"tensor elements live in different algebras: {left} vs {right}")


# Numeric errors (exit 3)

class NumericError(AggregationError):
    exit_code = 3


class Singular(NumericError):
    def __init__(self, pivot: float, threshold: float, index: Optional[Any] = None):
        self.pivot = pivot
        super().__init__(
            f"matrix is singular: pivot {pivot:.3e} below threshold {threshold:.3e}", index
        )


class NonFinite(NumericError):
    def __init__(self, what: str = "matrix", index: Optional[Any] = None):
        super().__init__(f"{what} has non-finite entries", index)


class NotInFeedbackImage(NumericError):
    """The boundary product around a face has no preimage under the feedback."""

    def __init__(self, cell: Any, deviation: float):
        self.deviation = deviation
        super().__init__(
            f"boundary product is not in the image of the feedback "
            f"(S/D blocks deviate from identity by {deviation:.3e})",
            cell,
        )
