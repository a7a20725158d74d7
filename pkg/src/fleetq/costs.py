"""Cost evaluation and SLA-constrained runner-count optimization.

Cost is a weighted sum of an infrastructure term (runner-minutes) and a
waiting term (job-waiting-minutes), both evaluated over a planning horizon:

    C(c) = w1 * c * horizon * runner_rate
         + w2 * (lambda * horizon) * W_q(c) * wait_rate

with W_q(c) the M/M/c mean queueing delay. Because c is a small integer the
optimizer scans candidate counts directly instead of using a continuous
solver; an exhaustive scan doubles as the correctness oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .analytic import mmc_wq

__all__ = [
    "CostModel",
    "SlaConstraint",
    "CostBreakdown",
    "OptimizeResult",
    "SweepRow",
    "total_cost",
    "stability_min_servers",
    "min_runners_for_sla",
    "optimal_runner_count",
    "developer_scaling_sweep",
]

# Hard ceiling on the number of candidate counts examined past the feasible
# minimum; W_q is strictly decreasing in c, so real optima sit far below this.
_SCAN_LIMIT = 10_000


@dataclass(frozen=True)
class CostModel:
    """Pricing and weighting for the two cost terms.

    runner_rate: currency per runner-minute.
    wait_rate:   currency per waiting-job-minute.
    w1, w2:      dimensionless sensitivity weights applied outside the
                 currency terms (both default to 1).
    horizon:     planning horizon in minutes.
    """

    runner_rate: float
    wait_rate: float
    w1: float = 1.0
    w2: float = 1.0
    horizon: float = 60.0

    def __post_init__(self) -> None:
        if self.runner_rate < 0 or self.wait_rate < 0:
            raise ValueError("cost rates must be non-negative")
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("weights must be non-negative")
        if self.horizon <= 0:
            raise ValueError("horizon must be strictly positive")


@dataclass(frozen=True)
class SlaConstraint:
    """Upper bound on the mean queueing delay, in minutes."""

    max_wait: float

    def __post_init__(self) -> None:
        if self.max_wait <= 0:
            raise ValueError("SLA wait bound must be strictly positive")


@dataclass(frozen=True)
class CostBreakdown:
    runner_cost: float
    waiting_cost: float
    total: float
    wq: float


@dataclass(frozen=True)
class OptimizeResult:
    best_count: int
    best_cost: float
    curve: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class SweepRow:
    developers: float
    arrival_rate: float
    best_count: int
    total_cost: float


def total_cost(
    servers: int,
    arrival_rate: float,
    service_rate: float,
    model: CostModel,
    wq: Optional[float] = None,
) -> CostBreakdown:
    """Evaluate the weighted cost of running ``servers`` runners over the horizon.

    W_q defaults to the M/M/c value; pass ``wq`` to inject an externally
    supplied delay (e.g. a simulated or quoted figure) into the same expression.

    Raises:
        UnstableSystemError: if wq is not supplied and rho >= 1.
    """
    if wq is None:
        wq = mmc_wq(arrival_rate, service_rate, servers)
    elif wq < 0:
        raise ValueError("wq must be non-negative")
    runner_cost = model.w1 * servers * model.horizon * model.runner_rate
    jobs_per_horizon = arrival_rate * model.horizon
    waiting_cost = model.w2 * jobs_per_horizon * wq * model.wait_rate
    return CostBreakdown(
        runner_cost=runner_cost,
        waiting_cost=waiting_cost,
        total=runner_cost + waiting_cost,
        wq=wq,
    )


def stability_min_servers(arrival_rate: float, service_rate: float) -> int:
    """Smallest server count with rho < 1: floor(lambda/mu) + 1."""
    if arrival_rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if service_rate <= 0:
        raise ValueError("service rate must be strictly positive")
    return int(math.floor(arrival_rate / service_rate)) + 1


def min_runners_for_sla(
    arrival_rate: float, service_rate: float, sla: SlaConstraint
) -> int:
    """Least server count whose M/M/c mean wait meets the SLA.

    Starts at the stability minimum and searches upward; termination is
    guaranteed because W_q -> 0 as c grows.
    """
    c = stability_min_servers(arrival_rate, service_rate)
    while mmc_wq(arrival_rate, service_rate, c) > sla.max_wait:
        c += 1
        if c > _SCAN_LIMIT + stability_min_servers(arrival_rate, service_rate):
            raise RuntimeError("SLA search exceeded the scan limit")  # unreachable
    return c


def optimal_runner_count(
    arrival_rate: float,
    service_rate: float,
    model: CostModel,
    sla: Optional[SlaConstraint] = None,
) -> OptimizeResult:
    """Scan server counts upward from the feasible minimum for the cheapest one.

    The scan starts at the SLA minimum (or the bare stability minimum) and
    stops once the cost has increased for three consecutive counts, relying on
    the characteristic fall-then-rise shape of the curve; ties go to the
    smaller count. The visited (count, cost) curve is returned for inspection.
    """
    c_min = stability_min_servers(arrival_rate, service_rate)
    if sla is not None:
        c_min = max(c_min, min_runners_for_sla(arrival_rate, service_rate, sla))
    curve: list[tuple[int, float]] = []
    best_c = c_min
    best_cost = None
    prev_cost = None
    consecutive_increases = 0
    for c in range(c_min, c_min + _SCAN_LIMIT + 1):
        cost = total_cost(c, arrival_rate, service_rate, model).total
        curve.append((c, cost))
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_c = c
        if prev_cost is not None and cost > prev_cost:
            consecutive_increases += 1
            if consecutive_increases >= 3:
                break
        else:
            consecutive_increases = 0
        prev_cost = cost
    assert best_cost is not None
    return OptimizeResult(best_count=best_c, best_cost=best_cost, curve=tuple(curve))


def developer_scaling_sweep(
    d_values: Sequence[float],
    lambda_per_dev: float,
    service_rate: float,
    model: CostModel,
    sla: Optional[SlaConstraint] = None,
) -> tuple[SweepRow, ...]:
    """Optimal runner count and cost as the developer headcount grows.

    The aggregate arrival rate scales as lambda(d) = d * lambda_per_dev; the
    proportionality constant is the caller's to choose.
    """
    if lambda_per_dev <= 0:
        raise ValueError("per-developer arrival rate must be strictly positive")
    rows = []
    for d in d_values:
        if d < 0:
            raise ValueError("developer counts must be non-negative")
        lam = d * lambda_per_dev
        result = optimal_runner_count(lam, service_rate, model, sla)
        rows.append(
            SweepRow(
                developers=d,
                arrival_rate=lam,
                best_count=result.best_count,
                total_cost=result.best_cost,
            )
        )
    return tuple(rows)
