"""Streaming arrival-rate estimators for predictive scaling and reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DegenerateDataError, InsufficientDataError

__all__ = [
    "RateSeries",
    "SmootherState",
    "RateEstimate",
    "sma_forecast",
    "exp_smoothing_step",
    "estimate_rate_and_cv2",
]


@dataclass(frozen=True)
class RateSeries:
    """Observed arrival rates keyed by minute index.

    Minute indices must be strictly increasing; the series never imputes
    missing minutes. Callers that want zero-observation minutes must insert
    them explicitly.
    """

    samples: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        prev = None
        for minute, rate in self.samples:
            if int(minute) != minute:
                raise ValueError(f"minute index {minute!r} is not an integer")
            if prev is not None and minute <= prev:
                raise ValueError("minute indices must be strictly increasing")
            if rate < 0:
                raise ValueError(f"observed rate {rate!r} is negative")
            prev = minute

    @classmethod
    def from_rates(cls, rates: Sequence[float], start: int = 0) -> "RateSeries":
        return cls(tuple((start + i, float(r)) for i, r in enumerate(rates)))

    def rates(self) -> tuple[float, ...]:
        return tuple(r for _, r in self.samples)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SmootherState:
    """Exponential-smoothing state: parameter alpha and the current estimate."""

    alpha: float
    estimate: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {self.alpha!r}")
        if self.estimate < 0:
            raise ValueError("rate estimate cannot be negative")


class RateEstimate(NamedTuple):
    """First element is a rate (timestamps mode) or a mean duration (durations mode)."""

    value: float
    cv2: float


def sma_forecast(series: RateSeries, window: int) -> float:
    """Mean of the last ``window`` observations of the series.

    Raises:
        InsufficientDataError: if the series holds fewer than ``window`` samples.
    """
    if window < 1 or int(window) != window:
        raise ValueError("window length must be a positive integer")
    if len(series) < window:
        raise InsufficientDataError(
            f"need at least {window} observations, have {len(series)}"
        )
    tail = series.rates()[-window:]
    return math.fsum(tail) / window


def exp_smoothing_step(state: SmootherState, observed_rate: float) -> SmootherState:
    """One exponential-smoothing update: est = alpha*observed + (1-alpha)*previous.

    Evaluated in the algebraically identical incremental form
    est + alpha*(observed - est) so an observation equal to the current
    estimate leaves it bit-for-bit unchanged.
    """
    if observed_rate < 0:
        raise ValueError("observed rate cannot be negative")
    new = state.estimate + state.alpha * (observed_rate - state.estimate)
    return SmootherState(alpha=state.alpha, estimate=new)


def _mean_and_cv2(values: Sequence[float], what: str) -> tuple[float, float]:
    n = len(values)
    if n < 2:
        raise InsufficientDataError(
            f"need at least 2 {what} for the unbiased variance estimator, have {n}"
        )
    mean = math.fsum(values) / n
    if mean == 0:
        raise DegenerateDataError(f"mean of the {what} is zero; Cv^2 is undefined")
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var / (mean * mean)


def estimate_rate_and_cv2(samples: Sequence[float], kind: str) -> RateEstimate:
    """Estimate a rate (or mean duration) and the squared coefficient of variation.

    kind="timestamps": ``samples`` are event times in minutes; the estimator
    works on the inter-arrival gaps and returns (1/mean_gap, Cv^2 of gaps).
    Needs at least three timestamps so that two gaps exist.

    kind="durations": ``samples`` are durations in minutes; returns
    (mean duration, Cv^2 of durations). Needs at least two samples.

    The variance estimator is the unbiased one (n - 1 denominator).
    """
    if kind == "timestamps":
        if len(samples) < 2:
            raise InsufficientDataError("need at least 2 timestamps to form a gap")
        gaps = []
        for i in range(1, len(samples)):
            gap = samples[i] - samples[i - 1]
            if gap < 0:
                raise ValueError("timestamps must be non-decreasing")
            gaps.append(gap)
        mean_gap, cv2 = _mean_and_cv2(gaps, "inter-arrival gaps")
        return RateEstimate(value=1.0 / mean_gap, cv2=cv2)
    if kind == "durations":
        for v in samples:
            if v < 0:
                raise ValueError("durations cannot be negative")
        mean, cv2 = _mean_and_cv2(samples, "durations")
        return RateEstimate(value=mean, cv2=cv2)
    raise ValueError(f"kind must be 'timestamps' or 'durations', got {kind!r}")
