"""Closed-form queueing formulas for runner-fleet capacity planning.

All rates are jobs per minute and all times are minutes unless a caller
converts at the boundary. Arithmetic is performed in the type of the inputs,
so passing ``fractions.Fraction`` values keeps results exact; floats behave
as usual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import UnstableSystemError

__all__ = [
    "QueueParams",
    "RunnerPool",
    "HeterogeneousFleet",
    "FleetCapacity",
    "StageUtilization",
    "StabilityReport",
    "MG1MeanJobs",
    "utilization",
    "erlang_c_pwait",
    "mmc_wq",
    "mgc_wq_allen_cunneen",
    "ggc_wq_kingman",
    "mg1_wq",
    "pk_mean_jobs",
    "littles_law",
    "effective_service_rate",
    "stability_and_bottleneck",
    "forkjoin_expected_completion",
]

Number = Union[int, float]


def _check_rates(arrival_rate, service_rate) -> None:
    if arrival_rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if service_rate <= 0:
        raise ValueError("service rate must be strictly positive")


def _server_count(servers) -> int:
    c = int(servers)
    if c != servers or c < 1:
        raise ValueError(f"server count must be a positive integer, got {servers!r}")
    return c


@dataclass(frozen=True)
class QueueParams:
    """Workload description for one queueing station.

    ``ca2``/``cs2`` are squared coefficients of variation of inter-arrival
    and service times (1.0 for the Markovian case, 0.0 for deterministic).
    """

    arrival_rate: float
    service_rate: float
    servers: int
    ca2: float = 1.0
    cs2: float = 1.0

    def __post_init__(self) -> None:
        _check_rates(self.arrival_rate, self.service_rate)
        _server_count(self.servers)
        if self.ca2 < 0 or self.cs2 < 0:
            raise ValueError("squared coefficients of variation must be non-negative")

    @property
    def offered_load(self):
        return self.arrival_rate / self.service_rate

    @property
    def rho(self):
        """Utilization lambda / (c * mu); >= 1 signals an unstable queue."""
        return utilization(self.arrival_rate, self.service_rate, self.servers)


@dataclass(frozen=True)
class RunnerPool:
    """A homogeneous group of runners: ``count`` servers at ``rate`` jobs/min each."""

    count: int
    rate: float

    def __post_init__(self) -> None:
        if int(self.count) != self.count or self.count < 1:
            raise ValueError("pool count must be a positive integer")
        if self.rate <= 0:
            raise ValueError("pool rate must be strictly positive")


@dataclass(frozen=True)
class HeterogeneousFleet:
    """An ordered collection of runner pools with individual service rates."""

    pools: tuple[RunnerPool, ...]

    def __post_init__(self) -> None:
        if not self.pools:
            raise ValueError("fleet must contain at least one pool")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]]) -> "HeterogeneousFleet":
        return cls(tuple(RunnerPool(count, rate) for count, rate in pairs))

    @property
    def total_servers(self) -> int:
        return sum(p.count for p in self.pools)


@dataclass(frozen=True)
class FleetCapacity:
    mu_eff: float
    rho: Optional[float] = None


@dataclass(frozen=True)
class StageUtilization:
    rho: float
    stable: bool


@dataclass(frozen=True)
class StabilityReport:
    stages: tuple[StageUtilization, ...]
    bottleneck: int

    @property
    def all_stable(self) -> bool:
        return all(s.stable for s in self.stages)


@dataclass(frozen=True)
class MG1MeanJobs:
    """Mean number of jobs in an M/G/1 system.

    ``mean_jobs`` is the standard Pollaczek-Khinchine value
    rho + (rho^2 + lambda^2 * sigma_s^2) / (2 * (1 - rho)).
    ``mean_jobs_simplified`` drops the rho^2 term; some capacity-planning
    references quote the formula in that reduced form, so it is exposed for
    cross-checking against such sources. Only ``mean_jobs`` satisfies the
    M/M/1 consistency check L = rho / (1 - rho).
    """

    mean_jobs: float
    mean_jobs_simplified: float
    rho: float


def utilization(arrival_rate, service_rate, servers):
    """Utilization rho = lambda / (c * mu).

    No upper clamp: values >= 1 are valid output and signal that the queue
    grows without bound.
    """
    _check_rates(arrival_rate, service_rate)
    c = _server_count(servers)
    return arrival_rate / (c * service_rate)


def erlang_c_pwait(arrival_rate, service_rate, servers):
    """Probability that an arriving job must wait in an M/M/c queue (Erlang C).

    Evaluated through the Erlang-B recurrence B(n) = a*B(n-1) / (n + a*B(n-1)),
    which keeps every intermediate in (0, 1] and therefore cannot overflow even
    for thousands of servers, then converted via C = B / (1 - rho * (1 - B)).
    Mathematically identical to summing the a^k/k! series directly.

    Raises:
        UnstableSystemError: if rho = lambda / (c * mu) >= 1.
    """
    _check_rates(arrival_rate, service_rate)
    c = _server_count(servers)
    rho = arrival_rate / (c * service_rate)
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho} >= 1: the queue has no steady state")
    a = arrival_rate / service_rate
    b = 1  # Erlang B with zero servers
    for n in range(1, c + 1):
        b = a * b / (n + a * b)
    return b / (1 - rho * (1 - b))


def mmc_wq(arrival_rate, service_rate, servers):
    """Mean time in queue (minutes) for an M/M/c system: P_wait / (c*mu - lambda).

    Raises:
        UnstableSystemError: if rho >= 1.
    """
    c = _server_count(servers)
    pwait = erlang_c_pwait(arrival_rate, service_rate, c)
    return pwait / (c * service_rate - arrival_rate)


def mgc_wq_allen_cunneen(arrival_rate, service_rate, servers, cs2):
    """Allen-Cunneen approximation of the M/G/c mean queueing delay.

    Scales the M/M/c delay by (cs2 + 1) / 2, so cs2 = 1 reproduces M/M/c
    exactly and heavy-tailed services (cs2 > 1) inflate the wait.
    """
    if cs2 < 0:
        raise ValueError("cs2 must be non-negative")
    return (cs2 + 1) / 2 * mmc_wq(arrival_rate, service_rate, servers)


def ggc_wq_kingman(arrival_rate, service_rate, servers, ca2, cs2):
    """Kingman-style approximation of the G/G/c mean queueing delay.

    W_q ~= rho/(1-rho) * (ca2 + cs2)/2 * 1/mu with rho = lambda / (c*mu).
    This is the single-server Kingman expression applied with the multi-server
    utilization; refined G/G/c corrections (e.g. substituting the Erlang-C
    delay probability) are intentionally not applied.
    """
    if ca2 < 0 or cs2 < 0:
        raise ValueError("ca2 and cs2 must be non-negative")
    _check_rates(arrival_rate, service_rate)
    c = _server_count(servers)
    rho = arrival_rate / (c * service_rate)
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho} >= 1: the queue has no steady state")
    return rho / (1 - rho) * ((ca2 + cs2) / 2) * (1 / service_rate)


def mg1_wq(arrival_rate, mean_service, second_moment_service):
    """Mean queueing delay of an M/G/1 system: lambda * E[S^2] / (2 * (1 - rho)).

    Raises:
        UnstableSystemError: if rho = lambda * E[S] >= 1.
        ValueError: if E[S^2] < E[S]^2 (impossible second moment).
    """
    if arrival_rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if mean_service <= 0:
        raise ValueError("mean service time must be strictly positive")
    if second_moment_service < mean_service * mean_service:
        raise ValueError("second moment cannot be smaller than the squared mean")
    rho = arrival_rate * mean_service
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho} >= 1: the queue has no steady state")
    return arrival_rate * second_moment_service / (2 * (1 - rho))


def pk_mean_jobs(arrival_rate, service_rate, service_variance) -> MG1MeanJobs:
    """Mean number of jobs in an M/G/1 system (Pollaczek-Khinchine).

    ``service_variance`` is the variance of the service-time distribution.
    See :class:`MG1MeanJobs` for the two reported variants.
    """
    _check_rates(arrival_rate, service_rate)
    if service_variance < 0:
        raise ValueError("service variance must be non-negative")
    rho = arrival_rate / service_rate
    if rho >= 1:
        raise UnstableSystemError(f"rho = {rho} >= 1: the queue has no steady state")
    tail = arrival_rate * arrival_rate * service_variance / (2 * (1 - rho))
    standard = rho + (rho * rho) / (2 * (1 - rho)) + tail
    simplified = rho + tail
    return MG1MeanJobs(mean_jobs=standard, mean_jobs_simplified=simplified, rho=rho)


def littles_law(arrival_rate, mean_time):
    """L = lambda * W. Distribution-free; only non-negativity is required."""
    if arrival_rate < 0:
        raise ValueError("arrival rate must be non-negative")
    if mean_time < 0:
        raise ValueError("mean time must be non-negative")
    return arrival_rate * mean_time


def effective_service_rate(fleet, arrival_rate=None) -> FleetCapacity:
    """Aggregate service rate of a mixed fleet: mu_eff = sum of count * rate.

    When ``arrival_rate`` is given the fleet-level utilization
    rho = lambda / mu_eff is reported alongside.
    """
    if not isinstance(fleet, HeterogeneousFleet):
        fleet = HeterogeneousFleet.from_pairs(fleet)
    mu_eff = sum(p.count * p.rate for p in fleet.pools)
    rho = None
    if arrival_rate is not None:
        if arrival_rate < 0:
            raise ValueError("arrival rate must be non-negative")
        rho = arrival_rate / mu_eff
    return FleetCapacity(mu_eff=mu_eff, rho=rho)


def stability_and_bottleneck(stages: Sequence[tuple]) -> StabilityReport:
    """Per-stage utilization check plus bottleneck identification.

    ``stages`` is a sequence of (arrival_rate, service_rate, servers) triples.
    A stage is stable iff its rho < 1; the bottleneck is the stage with the
    highest rho, ties going to the lowest index.
    """
    if not stages:
        raise ValueError("at least one stage is required")
    utils = []
    for lam, mu, c in stages:
        rho = utilization(lam, mu, c)
        utils.append(StageUtilization(rho=rho, stable=rho < 1))
    bottleneck = 0
    for i, s in enumerate(utils):
        if s.rho > utils[bottleneck].rho:
            bottleneck = i
    return StabilityReport(stages=tuple(utils), bottleneck=bottleneck)


def forkjoin_expected_completion(fan_out, service_rate):
    """Expected completion time of a job forked into ``fan_out`` parallel subtasks.

    Assumes independent exponential subtasks that all start immediately (one
    idle runner each, no queueing). The slowest subtask gates completion, so
    E[max] = H_k / mu with H_k the k-th harmonic number.
    """
    k = int(fan_out)
    if k != fan_out or k < 1:
        raise ValueError("fan-out must be a positive integer")
    if service_rate <= 0:
        raise ValueError("service rate must be strictly positive")
    harmonic = 0.0
    for i in range(1, k + 1):
        harmonic += 1.0 / i
    return harmonic / service_rate
