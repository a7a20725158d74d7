"""fleetq: capacity planning, cost optimization, and simulation for CI/CD runner fleets."""

from . import analytic, costs, des, forecast
from .errors import (
    DegenerateDataError,
    InsufficientDataError,
    ScenarioError,
    TraceFormatError,
    UnstableSystemError,
)

__version__ = "0.1.0"

__all__ = [
    "analytic",
    "costs",
    "des",
    "forecast",
    "DegenerateDataError",
    "InsufficientDataError",
    "ScenarioError",
    "TraceFormatError",
    "UnstableSystemError",
    "__version__",
]
