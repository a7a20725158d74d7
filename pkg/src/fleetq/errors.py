"""Exception types shared across the library."""


class UnstableSystemError(ValueError):
    """Raised when a steady-state formula is evaluated at utilization >= 1."""


class InsufficientDataError(ValueError):
    """Raised when an estimator needs more samples than were provided."""


class DegenerateDataError(ValueError):
    """Raised when data is formally valid but statistically unusable (e.g. zero mean)."""


class ScenarioError(ValueError):
    """Raised for scenario files that fail to parse or validate."""


class TraceFormatError(ValueError):
    """Raised for trace files with unparseable or invalid records."""
