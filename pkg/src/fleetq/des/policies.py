"""Scheduling disciplines, dispatch rules, and autoscaling controllers.

Everything here is a pure function over explicit state so the policies can be
unit-tested without running a simulation; the engine calls the same functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import median
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from ..forecast import SmootherState, exp_smoothing_step
from .workload import PRIORITY_CRITICAL

__all__ = [
    "FCFS",
    "SPT",
    "EDF",
    "PRIORITY_FCFS",
    "DISCIPLINES",
    "DISPATCH_RANDOM",
    "DISPATCH_JSQ",
    "DISPATCH_SIZE_BASED",
    "DISPATCH_POLICIES",
    "ThresholdScaling",
    "PredictiveScaling",
    "ScalingPolicy",
    "select_next",
    "dispatch",
    "threshold_autoscale",
    "predictive_autoscale",
    "desired_server_count",
]

FCFS = "fcfs"
SPT = "spt"
EDF = "edf"
PRIORITY_FCFS = "priority_fcfs"
DISCIPLINES = (FCFS, SPT, EDF, PRIORITY_FCFS)

DISPATCH_RANDOM = "random"
DISPATCH_JSQ = "jsq"
DISPATCH_SIZE_BASED = "size_based"
DISPATCH_POLICIES = (DISPATCH_RANDOM, DISPATCH_JSQ, DISPATCH_SIZE_BASED)

# Recent-job window used by size-based dispatch to estimate the median size.
SIZE_WINDOW = 100

_NO_DEADLINE = math.inf


class QueuedTask(Protocol):
    """What a discipline needs to know about a queued unit of work."""

    arrival_time: float
    size_estimate: float
    deadline: Optional[float]
    priority_class: str
    job_id: int
    subtask_index: int


class PoolView(Protocol):
    """What a dispatch rule needs to know about a runner pool."""

    rate: float

    @property
    def idle_count(self) -> int: ...

    @property
    def total_tasks(self) -> int: ...


def _tiebreak(task: QueuedTask) -> tuple:
    return (task.arrival_time, task.job_id, task.subtask_index)


def select_next(queue: Sequence[QueuedTask], discipline: str, now: float):
    """Pick the next task to serve under the given discipline.

    FCFS: earliest arrival. SPT: smallest size estimate. EDF: nearest deadline,
    deadline-free tasks last. priority_fcfs: critical class first, FCFS within
    a class. All ties fall back to arrival time, then job id.
    """
    if not queue:
        raise ValueError("cannot select from an empty queue")
    if discipline == FCFS:
        key = _tiebreak
    elif discipline == SPT:
        key = lambda t: (t.size_estimate, *_tiebreak(t))
    elif discipline == EDF:
        key = lambda t: (
            t.deadline if t.deadline is not None else _NO_DEADLINE,
            *_tiebreak(t),
        )
    elif discipline == PRIORITY_FCFS:
        key = lambda t: (0 if t.priority_class == PRIORITY_CRITICAL else 1, *_tiebreak(t))
    else:
        raise ValueError(f"unknown discipline {discipline!r}")
    return min(queue, key=key)


def _jsq_index(pools: Sequence[PoolView], candidates: Sequence[int]) -> int:
    best = candidates[0]
    for i in candidates[1:]:
        if pools[i].total_tasks < pools[best].total_tasks:
            best = i
    return best


def dispatch(
    task: QueuedTask,
    pools: Sequence[PoolView],
    policy: str,
    rng: np.random.Generator,
    recent_sizes: Sequence[float] = (),
) -> int:
    """Choose the pool a task joins.

    random:     uniform over pools with an idle runner, else uniform over all.
    jsq:        fewest queued + in-service tasks, ties to the lowest index.
    size_based: tasks whose size estimate exceeds the median of recently seen
                sizes go to the fastest pool (ties to the lowest index); the
                rest join the shortest queue among the remaining pools. Falls
                back to jsq until any size history exists.
    """
    if not pools:
        raise ValueError("at least one pool is required")
    if len(pools) == 1:
        return 0
    if policy == DISPATCH_RANDOM:
        idle = [i for i, p in enumerate(pools) if p.idle_count > 0]
        candidates = idle if idle else list(range(len(pools)))
        return candidates[int(rng.integers(0, len(candidates)))]
    if policy == DISPATCH_JSQ:
        return _jsq_index(pools, range(len(pools)))
    if policy == DISPATCH_SIZE_BASED:
        if not recent_sizes:
            return _jsq_index(pools, range(len(pools)))
        fastest = 0
        for i, p in enumerate(pools):
            if p.rate > pools[fastest].rate:
                fastest = i
        if task.size_estimate > median(recent_sizes):
            return fastest
        rest = [i for i in range(len(pools)) if i != fastest]
        return _jsq_index(pools, rest)
    raise ValueError(f"unknown dispatch policy {policy!r}")


@dataclass(frozen=True)
class ThresholdScaling:
    """Hysteresis controller on the number of jobs in the stage.

    Above ``l_high`` add ``step`` runners, below ``l_low`` remove ``step``
    (never dropping below one runner); inside the band do nothing, which is
    what damps oscillation on transient spikes.
    """

    l_high: float
    l_low: float
    step: int = 1
    review_period: float = 1.0

    def __post_init__(self) -> None:
        if self.l_low < 0 or self.l_high <= self.l_low:
            raise ValueError("thresholds must satisfy l_high > l_low >= 0")
        if self.step < 1 or int(self.step) != self.step:
            raise ValueError("step must be a positive integer")
        if self.review_period <= 0:
            raise ValueError("review period must be strictly positive")


@dataclass(frozen=True)
class PredictiveScaling:
    """Forecast-driven controller sizing the pool for a target utilization."""

    target_rho: float
    alpha: float = 0.3
    review_period: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.target_rho < 1:
            raise ValueError("target_rho must lie strictly between 0 and 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.review_period <= 0:
            raise ValueError("review period must be strictly positive")


ScalingPolicy = Union[ThresholdScaling, PredictiveScaling]


def threshold_autoscale(
    current_runners: int, current_load: float, policy: ThresholdScaling
) -> int:
    """Runner delta for a threshold review: +step, -step (floored at one), or 0."""
    if current_load > policy.l_high:
        return policy.step
    if current_load < policy.l_low:
        return -min(policy.step, current_runners - 1)
    return 0


def desired_server_count(rate_estimate: float, service_rate: float, target_rho: float) -> int:
    """ceil(rate / (target_rho * mu)), floored at one runner.

    A 1e-9 slack absorbs float noise so an exactly integral quotient is not
    rounded up an extra server.
    """
    if service_rate <= 0:
        raise ValueError("service rate must be strictly positive")
    if not 0 < target_rho < 1:
        raise ValueError("target_rho must lie strictly between 0 and 1")
    raw = rate_estimate / (target_rho * service_rate)
    return max(1, math.ceil(raw - 1e-9))


def predictive_autoscale(
    state: SmootherState,
    observed_rate: float,
    service_rate: float,
    target_rho: float,
) -> tuple[int, SmootherState]:
    """One predictive review: smooth the observed rate, then size the pool.

    Returns (desired runner count, updated smoother state).
    """
    new_state = exp_smoothing_step(state, observed_rate)
    return desired_server_count(new_state.estimate, service_rate, target_rho), new_state
