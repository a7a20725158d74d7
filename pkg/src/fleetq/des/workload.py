"""Workload generators: arrival processes, service distributions, job attributes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np

__all__ = [
    "PoissonArrivals",
    "BatchPoissonArrivals",
    "TraceArrivals",
    "ArrivalProcess",
    "ExponentialService",
    "DeterministicService",
    "LognormalService",
    "EmpiricalService",
    "ServiceDistribution",
    "JobMix",
    "JobOverride",
    "PRIORITY_CRITICAL",
    "PRIORITY_NORMAL",
]

PRIORITY_CRITICAL = "critical"
PRIORITY_NORMAL = "normal"
_PRIORITIES = (PRIORITY_CRITICAL, PRIORITY_NORMAL)


@dataclass(frozen=True)
class JobOverride:
    """Per-job attributes carried by a trace; None fields fall back to defaults."""

    demand: Optional[float] = None
    priority: Optional[str] = None
    deadline: Optional[float] = None
    size_estimate: Optional[float] = None


@dataclass(frozen=True)
class PoissonArrivals:
    """Poisson arrivals at ``rate`` jobs per minute."""

    rate: float

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("arrival rate must be strictly positive")

    def stream(
        self, rng: np.random.Generator, horizon: float
    ) -> Iterator[tuple[float, Optional[JobOverride]]]:
        scale = 1.0 / self.rate
        t = 0.0
        while True:
            t += rng.exponential(scale)
            if t > horizon:
                return
            yield t, None


@dataclass(frozen=True)
class BatchPoissonArrivals:
    """Batches arrive as a Poisson process; each batch carries several jobs.

    ``rate`` is the batch arrival rate per minute; batch sizes are drawn from
    ``batch_sizes`` with the given weights (uniform when omitted). The job
    arrival rate is therefore rate * mean batch size.
    """

    rate: float
    batch_sizes: tuple[int, ...]
    batch_weights: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("batch arrival rate must be strictly positive")
        if not self.batch_sizes:
            raise ValueError("at least one batch size is required")
        for b in self.batch_sizes:
            if int(b) != b or b < 1:
                raise ValueError(f"batch sizes must be positive integers, got {b!r}")
        if self.batch_weights is not None:
            if len(self.batch_weights) != len(self.batch_sizes):
                raise ValueError("batch_weights must match batch_sizes in length")
            if any(w < 0 for w in self.batch_weights) or sum(self.batch_weights) <= 0:
                raise ValueError("batch weights must be non-negative and sum > 0")

    @property
    def mean_batch_size(self) -> float:
        if self.batch_weights is None:
            return sum(self.batch_sizes) / len(self.batch_sizes)
        total = sum(self.batch_weights)
        return sum(s * w for s, w in zip(self.batch_sizes, self.batch_weights)) / total

    @property
    def job_rate(self) -> float:
        return self.rate * self.mean_batch_size

    def stream(
        self, rng: np.random.Generator, horizon: float
    ) -> Iterator[tuple[float, Optional[JobOverride]]]:
        sizes = list(self.batch_sizes)
        if self.batch_weights is None:
            probs = None
        else:
            total = sum(self.batch_weights)
            probs = [w / total for w in self.batch_weights]
        scale = 1.0 / self.rate
        t = 0.0
        while True:
            t += rng.exponential(scale)
            if t > horizon:
                return
            if probs is None:
                b = sizes[rng.integers(0, len(sizes))]
            else:
                b = int(rng.choice(sizes, p=probs))
            for _ in range(b):
                yield t, None


@dataclass(frozen=True)
class TraceArrivals:
    """Replay of recorded arrivals, optionally with per-job attributes.

    When ``demands`` is present the simulation uses the recorded duration for
    each job instead of sampling the stage's service distribution (only valid
    for single-stage pipelines without fork-join).
    """

    timestamps: tuple[float, ...]
    demands: Optional[tuple[float, ...]] = None
    priorities: Optional[tuple[str, ...]] = None
    deadlines: Optional[tuple[Optional[float], ...]] = None
    size_estimates: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        prev = None
        for ts in self.timestamps:
            if ts < 0:
                raise ValueError("trace timestamps must be non-negative")
            if prev is not None and ts < prev:
                raise ValueError("trace timestamps must be non-decreasing")
            prev = ts
        n = len(self.timestamps)
        for name, attr in (
            ("demands", self.demands),
            ("priorities", self.priorities),
            ("deadlines", self.deadlines),
            ("size_estimates", self.size_estimates),
        ):
            if attr is not None and len(attr) != n:
                raise ValueError(f"{name} must match timestamps in length")
        if self.demands is not None and any(d <= 0 for d in self.demands):
            raise ValueError("trace demands must be strictly positive")
        if self.priorities is not None:
            for p in self.priorities:
                if p not in _PRIORITIES:
                    raise ValueError(f"unknown priority label {p!r}")

    def stream(
        self, rng: np.random.Generator, horizon: float
    ) -> Iterator[tuple[float, Optional[JobOverride]]]:
        for i, ts in enumerate(self.timestamps):
            if ts > horizon:
                return
            yield ts, JobOverride(
                demand=self.demands[i] if self.demands else None,
                priority=self.priorities[i] if self.priorities else None,
                deadline=self.deadlines[i] if self.deadlines else None,
                size_estimate=self.size_estimates[i] if self.size_estimates else None,
            )


ArrivalProcess = Union[PoissonArrivals, BatchPoissonArrivals, TraceArrivals]


@dataclass(frozen=True)
class ExponentialService:
    """Exponential service times with rate ``rate`` jobs per minute."""

    rate: float

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("service rate must be strictly positive")

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def cv2(self) -> float:
        return 1.0

    def sample(self, rng: np.random.Generator) -> float:
        return rng.exponential(self.mean)

    def sample_n(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.exponential(self.mean, size=size)


@dataclass(frozen=True)
class DeterministicService:
    """Constant service time in minutes."""

    minutes: float

    def __post_init__(self) -> None:
        if self.minutes <= 0:
            raise ValueError("service time must be strictly positive")

    @property
    def mean(self) -> float:
        return self.minutes

    @property
    def cv2(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator) -> float:
        return self.minutes

    def sample_n(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.full(size, self.minutes)


@dataclass(frozen=True)
class LognormalService:
    """Lognormal service times parameterized by mean (minutes) and Cv^2."""

    mean: float
    cv2: float

    def __post_init__(self) -> None:
        if self.mean <= 0:
            raise ValueError("mean service time must be strictly positive")
        if self.cv2 < 0:
            raise ValueError("cv2 must be non-negative")

    @property
    def _sigma(self) -> float:
        return math.sqrt(math.log1p(self.cv2))

    @property
    def _mu_log(self) -> float:
        return math.log(self.mean) - math.log1p(self.cv2) / 2

    def sample(self, rng: np.random.Generator) -> float:
        return rng.lognormal(self._mu_log, self._sigma)

    def sample_n(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.lognormal(self._mu_log, self._sigma, size=size)


@dataclass(frozen=True)
class EmpiricalService:
    """Resampling (with replacement) from observed durations."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("empirical distribution needs at least one sample")
        if any(s <= 0 for s in self.samples):
            raise ValueError("empirical samples must be strictly positive")

    @property
    def mean(self) -> float:
        return math.fsum(self.samples) / len(self.samples)

    @property
    def cv2(self) -> float:
        n = len(self.samples)
        if n < 2:
            return 0.0
        m = self.mean
        var = math.fsum((s - m) ** 2 for s in self.samples) / (n - 1)
        return var / (m * m)

    def sample(self, rng: np.random.Generator) -> float:
        return self.samples[rng.integers(0, len(self.samples))]

    def sample_n(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = rng.integers(0, len(self.samples), size=size)
        return np.asarray(self.samples)[idx]


ServiceDistribution = Union[
    ExponentialService, DeterministicService, LognormalService, EmpiricalService
]


@dataclass(frozen=True)
class JobMix:
    """Synthetic job attributes layered on top of an arrival process.

    critical_fraction: probability that a job belongs to the critical class.
    deadline_slack:    (low, high) minutes added to the arrival time to form a
                       deadline, drawn uniformly; None leaves jobs deadline-free.
    estimate_noise_cv: coefficient of variation of the multiplicative lognormal
                       noise applied to size estimates; 0 makes estimates exact,
                       which the scheduling oracles rely on.
    """

    critical_fraction: float = 0.0
    deadline_slack: Optional[tuple[float, float]] = None
    estimate_noise_cv: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.critical_fraction <= 1:
            raise ValueError("critical_fraction must lie in [0, 1]")
        if self.deadline_slack is not None:
            low, high = self.deadline_slack
            if low < 0 or high < low:
                raise ValueError("deadline_slack must satisfy 0 <= low <= high")
        if self.estimate_noise_cv < 0:
            raise ValueError("estimate_noise_cv must be non-negative")

    @property
    def inert(self) -> bool:
        return (
            self.critical_fraction == 0
            and self.deadline_slack is None
            and self.estimate_noise_cv == 0
        )
