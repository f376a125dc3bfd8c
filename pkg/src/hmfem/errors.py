"""Exception types shared across the package."""


class InvalidPartitionError(ValueError):
    """Partition-point count too small to form a periodic mesh."""


class InvalidDomainError(ValueError):
    """Nonpositive domain side length."""


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class SingularMatrixError(RuntimeError):
    """Factorization broke down; carries the offending pivot magnitude."""

    def __init__(self, message, pivot=0.0):
        super().__init__(message)
        self.pivot = pivot


class NotSpdError(ValueError):
    """Quadratic form came out negative beyond round-off."""


class EvaluationError(ValueError):
    """A user-supplied field returned a non-finite value; carries the location."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConfigurationError(ValueError):
    """Mismatched problem/grid configuration."""


class OracleSizeError(ValueError):
    """Dense oracle refused: grid too large for brute-force assembly."""
