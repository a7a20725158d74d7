"""Deterministic seeded discrete-event simulator for multi-stage runner pipelines.

A run processes three event kinds ordered by (time, kind, job id): service
completions first, then scaling actions, then arrivals. Random draws are split
into independent streams per concern (arrivals, services, dispatch, job mix)
so that, for a fixed seed, changing a scheduling or scaling policy never
perturbs the workload itself; that is what makes common-random-number policy
comparisons meaningful.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..analytic import HeterogeneousFleet
from ..forecast import SmootherState
from .policies import (
    DISCIPLINES,
    DISPATCH_JSQ,
    DISPATCH_POLICIES,
    DISPATCH_SIZE_BASED,
    FCFS,
    PredictiveScaling,
    ScalingPolicy,
    SIZE_WINDOW,
    ThresholdScaling,
    dispatch,
    predictive_autoscale,
    select_next,
    threshold_autoscale,
)
from .workload import (
    ArrivalProcess,
    JobMix,
    PRIORITY_CRITICAL,
    PRIORITY_NORMAL,
    ServiceDistribution,
    TraceArrivals,
)

__all__ = [
    "ForkJoin",
    "StageConfig",
    "StageMetrics",
    "MetricsReport",
    "run_simulation",
    "forkjoin_completion_samples",
]

_RANK_COMPLETION = 0
_RANK_SCALING = 1
_RANK_ARRIVAL = 2


@dataclass(frozen=True)
class ForkJoin:
    """Fan a job out into ``fan_out`` parallel subtasks; the job finishes when
    the slowest subtask does."""

    fan_out: int
    subtask_service: ServiceDistribution

    def __post_init__(self) -> None:
        if int(self.fan_out) != self.fan_out or self.fan_out < 2:
            raise ValueError("fork-join fan-out must be an integer >= 2")


@dataclass(frozen=True)
class StageConfig:
    """One pipeline stage: runner pools plus the policies that drive them.

    ``service`` is required unless the stage is fork-join (subtask times then
    come from the fork-join's own distribution). Pool rates rescale the drawn
    demand so that a pool with rate mu serves jobs at rate mu on average while
    keeping the distribution's shape; when the pool rate equals the rate
    implied by the distribution mean, service times equal the drawn demands
    exactly. Autoscaling is supported for single-pool stages.
    """

    pools: HeterogeneousFleet
    service: Optional[ServiceDistribution] = None
    discipline: str = FCFS
    dispatch: str = DISPATCH_JSQ
    fork_join: Optional[ForkJoin] = None
    boot_delay: float = 0.0
    scaling: Optional[ScalingPolicy] = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.discipline not in DISCIPLINES:
            raise ValueError(f"unknown discipline {self.discipline!r}")
        if self.dispatch not in DISPATCH_POLICIES:
            raise ValueError(f"unknown dispatch policy {self.dispatch!r}")
        if self.boot_delay < 0:
            raise ValueError("boot delay must be non-negative")
        if self.fork_join is None and self.service is None:
            raise ValueError("a stage needs a service distribution unless it is fork-join")
        if self.scaling is not None and len(self.pools.pools) != 1:
            raise ValueError("autoscaling requires a single-pool stage")


@dataclass(frozen=True)
class StageMetrics:
    """Post-warmup steady-state metrics for one stage.

    ``rho`` is the busy-server time fraction (busy time over available-runner
    time), so it lies in [0, 1] even for overloaded stages. ``arrivals``,
    ``completions`` and ``in_stage_end`` count the whole run so that
    conservation (arrived = completed + still present) holds exactly.
    """

    name: str
    l: float
    lq: float
    w: float
    wq: float
    rho: float
    throughput: float
    arrivals: int
    completions: int
    in_stage_end: int
    lq_windows: tuple[float, ...]


@dataclass(frozen=True)
class MetricsReport:
    stages: tuple[StageMetrics, ...]
    horizon: float
    warmup: float
    jobs_arrived: int
    jobs_completed: int
    jobs_in_system_end: int
    measured_completions: int
    max_lateness: Optional[float]
    wq_by_class: dict
    bottleneck_stage: int


class Job:
    """A simulated CI task travelling through the pipeline."""

    __slots__ = (
        "id",
        "arrival_time",
        "priority_class",
        "deadline",
        "size_estimate",
        "demands",
        "stage_arrival",
        "stage_wait",
        "total_wait",
        "fj_remaining",
        "fj_started",
    )

    def __init__(self, jid, arrival_time, priority_class, deadline, size_estimate, demands):
        self.id = jid
        self.arrival_time = arrival_time
        self.priority_class = priority_class
        self.deadline = deadline
        self.size_estimate = size_estimate
        self.demands = demands
        self.stage_arrival = arrival_time
        self.stage_wait = 0.0
        self.total_wait = 0.0
        self.fj_remaining = 0
        self.fj_started = 0


class _Task:
    """Unit of queued work: a whole job, or one fork-join subtask."""

    __slots__ = ("job", "arrival_time", "demand", "size_estimate", "subtask_index")

    def __init__(self, job, arrival_time, demand, size_estimate, subtask_index):
        self.job = job
        self.arrival_time = arrival_time
        self.demand = demand
        self.size_estimate = size_estimate
        self.subtask_index = subtask_index

    @property
    def deadline(self):
        return self.job.deadline

    @property
    def priority_class(self):
        return self.job.priority_class

    @property
    def job_id(self):
        return self.job.id


class _Pool:
    __slots__ = (
        "rate",
        "time_scale",
        "idle",
        "busy",
        "booting",
        "boot_cancel",
        "pending_retire",
        "queue",
    )

    def __init__(self, rate: float, count: int, time_scale: float):
        self.rate = rate
        self.time_scale = time_scale
        self.idle = count
        self.busy = 0
        self.booting = 0
        self.boot_cancel = 0
        self.pending_retire = 0
        self.queue: list[_Task] = []

    @property
    def idle_count(self) -> int:
        return self.idle

    @property
    def total_tasks(self) -> int:
        return len(self.queue) + self.busy

    @property
    def total_runners(self) -> int:
        return self.idle + self.busy + self.booting - self.boot_cancel - self.pending_retire


class _StageState:
    __slots__ = (
        "index",
        "cfg",
        "pools",
        "jobs_in_stage",
        "queued_jobs",
        "arrivals_total",
        "completions_total",
        "arrivals_since_review",
        "smoother",
        "recent_sizes",
        "int_l",
        "int_lq",
        "busy_int",
        "cap_int",
        "sum_w",
        "sum_wq",
        "n_completed",
        "lq_bins",
    )

    def __init__(self, index: int, cfg: StageConfig, windows: int):
        self.index = index
        self.cfg = cfg
        dist = cfg.fork_join.subtask_service if cfg.fork_join else cfg.service
        mean = dist.mean
        self.pools = [
            _Pool(p.rate, p.count, 1.0 / (p.rate * mean)) for p in cfg.pools.pools
        ]
        self.jobs_in_stage = 0
        self.queued_jobs = 0
        self.arrivals_total = 0
        self.completions_total = 0
        self.arrivals_since_review = 0
        self.smoother: Optional[SmootherState] = None
        self.recent_sizes = deque(maxlen=SIZE_WINDOW)
        self.int_l = 0.0
        self.int_lq = 0.0
        self.busy_int = 0.0
        self.cap_int = 0.0
        self.sum_w = 0.0
        self.sum_wq = 0.0
        self.n_completed = 0
        self.lq_bins = [0.0] * windows if windows > 0 else None


class _Simulation:
    def __init__(
        self,
        stage_configs: Sequence[StageConfig],
        arrivals: ArrivalProcess,
        horizon: float,
        seed: int,
        warmup: float,
        job_mix: JobMix,
        windows: int,
    ):
        self.horizon = horizon
        self.warmup = warmup
        self.mix = job_mix
        self.windows = windows
        self.window_width = (horizon - warmup) / windows if windows > 0 else 0.0
        self.stages = [_StageState(i, cfg, windows) for i, cfg in enumerate(stage_configs)]

        root = np.random.SeedSequence(seed)
        arr_ss, svc_ss, disp_ss, mix_ss = root.spawn(4)
        self.arrival_rng = np.random.default_rng(arr_ss)
        self.service_rng = np.random.default_rng(svc_ss)
        self.dispatch_rng = np.random.default_rng(disp_ss)
        self.mix_rng = np.random.default_rng(mix_ss)

        self.now = 0.0
        self.heap: list = []
        self.seq = 0
        self.next_job_id = 0
        self.arrival_iter = arrivals.stream(self.arrival_rng, horizon)

        self.jobs_arrived = 0
        self.jobs_completed = 0
        self.measured_completions = 0
        self.class_wait_sum = {PRIORITY_CRITICAL: 0.0, PRIORITY_NORMAL: 0.0}
        self.class_wait_n = {PRIORITY_CRITICAL: 0, PRIORITY_NORMAL: 0}
        self.max_lateness: Optional[float] = None

        if self.mix.estimate_noise_cv > 0:
            sigma2 = math.log1p(self.mix.estimate_noise_cv**2)
            self._noise_mu = -sigma2 / 2
            self._noise_sigma = math.sqrt(sigma2)

    # -- event plumbing ----------------------------------------------------

    def _push(self, t: float, rank: int, key: int, payload) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, rank, key, self.seq, payload))

    def _push_next_arrival(self) -> None:
        try:
            t, override = next(self.arrival_iter)
        except StopIteration:
            return
        jid = self.next_job_id
        self.next_job_id += 1
        self._push(t, _RANK_ARRIVAL, jid, ("arr", jid, override))

    def run(self) -> MetricsReport:
        self._push_next_arrival()
        for st in self.stages:
            if st.cfg.scaling is not None:
                t0 = st.cfg.scaling.review_period
                if t0 <= self.horizon:
                    self._push(t0, _RANK_SCALING, st.index, ("scale", st.index))

        heap = self.heap
        while heap:
            t, rank, key, _seq, payload = heapq.heappop(heap)
            if t > self.horizon:
                break
            self._advance(t)
            kind = payload[0]
            if kind == "done":
                self._handle_completion(payload[1], payload[2], payload[3], t)
            elif kind == "arr":
                self._handle_arrival(payload[1], payload[2], t)
            elif kind == "scale":
                self._handle_scaling(payload[1], t)
            else:  # "ready"
                self._handle_runner_ready(payload[1], payload[2], t)
        self._advance(self.horizon)
        return self._build_report()

    # -- statistics --------------------------------------------------------

    def _advance(self, t: float) -> None:
        a = self.now if self.now > self.warmup else self.warmup
        b = t if t < self.horizon else self.horizon
        if b > a:
            dt = b - a
            for st in self.stages:
                st.int_l += st.jobs_in_stage * dt
                st.int_lq += st.queued_jobs * dt
                busy = 0
                cap = 0
                for pool in st.pools:
                    busy += pool.busy
                    cap += pool.busy + pool.idle
                st.busy_int += busy * dt
                st.cap_int += cap * dt
                if st.lq_bins is not None:
                    self._bin_lq(st, a, b)
        self.now = t

    def _bin_lq(self, st: _StageState, a: float, b: float) -> None:
        width = self.window_width
        bins = st.lq_bins
        i = int((a - self.warmup) / width)
        last = len(bins) - 1
        pos = a
        while pos < b:
            edge = self.warmup + (i + 1) * width
            seg_end = b if b < edge else edge
            bins[i if i < last else last] += st.queued_jobs * (seg_end - pos)
            pos = seg_end
            i += 1

    # -- job lifecycle -----------------------------------------------------

    def _make_job(self, jid: int, t: float, override) -> Job:
        demands = []
        for st in self.stages:
            fj = st.cfg.fork_join
            if fj is not None:
                dist = fj.subtask_service
                demands.append(tuple(dist.sample(self.service_rng) for _ in range(fj.fan_out)))
            elif override is not None and override.demand is not None:
                demands.append(override.demand)
            else:
                demands.append(st.cfg.service.sample(self.service_rng))

        priority = PRIORITY_NORMAL
        if override is not None and override.priority is not None:
            priority = override.priority
        elif self.mix.critical_fraction > 0:
            if self.mix_rng.random() < self.mix.critical_fraction:
                priority = PRIORITY_CRITICAL

        deadline = None
        if override is not None and override.deadline is not None:
            deadline = override.deadline
        elif self.mix.deadline_slack is not None:
            low, high = self.mix.deadline_slack
            deadline = t + self.mix_rng.uniform(low, high)

        first = demands[0]
        base = sum(first) if isinstance(first, tuple) else first
        if override is not None and override.size_estimate is not None:
            estimate = override.size_estimate
        elif self.mix.estimate_noise_cv > 0:
            estimate = base * self.mix_rng.lognormal(self._noise_mu, self._noise_sigma)
        else:
            estimate = base

        return Job(jid, t, priority, deadline, estimate, demands)

    def _handle_arrival(self, jid: int, override, t: float) -> None:
        job = self._make_job(jid, t, override)
        self.jobs_arrived += 1
        self._stage_arrive(0, job, t)
        self._push_next_arrival()

    def _stage_arrive(self, stage_idx: int, job: Job, t: float) -> None:
        st = self.stages[stage_idx]
        st.arrivals_total += 1
        st.arrivals_since_review += 1
        job.stage_arrival = t
        job.stage_wait = 0.0
        st.jobs_in_stage += 1
        st.queued_jobs += 1
        fj = st.cfg.fork_join
        if fj is not None:
            job.fj_remaining = fj.fan_out
            job.fj_started = 0
            dem = job.demands[stage_idx]
            for sub in range(fj.fan_out):
                self._dispatch_task(st, _Task(job, t, dem[sub], dem[sub], sub), t)
        else:
            task = _Task(job, t, job.demands[stage_idx], job.size_estimate, -1)
            self._dispatch_task(st, task, t)

    def _dispatch_task(self, st: _StageState, task: _Task, t: float) -> None:
        if len(st.pools) == 1:
            pool_idx = 0
        else:
            pool_idx = dispatch(
                task, st.pools, st.cfg.dispatch, self.dispatch_rng, st.recent_sizes
            )
        if st.cfg.dispatch == DISPATCH_SIZE_BASED:
            st.recent_sizes.append(task.size_estimate)
        st.pools[pool_idx].queue.append(task)
        self._try_start(st, pool_idx, t)

    def _try_start(self, st: _StageState, pool_idx: int, t: float) -> None:
        pool = st.pools[pool_idx]
        discipline = st.cfg.discipline
        while pool.idle > 0 and pool.queue:
            if discipline == FCFS:
                task = pool.queue.pop(0)
            else:
                task = select_next(pool.queue, discipline, t)
                pool.queue.remove(task)
            pool.idle -= 1
            pool.busy += 1
            job = task.job
            if task.subtask_index < 0:
                st.queued_jobs -= 1
                job.stage_wait = t - job.stage_arrival
            else:
                if job.fj_started == 0:
                    st.queued_jobs -= 1
                    job.stage_wait = t - job.stage_arrival
                job.fj_started += 1
            duration = task.demand * pool.time_scale
            self._push(
                t + duration,
                _RANK_COMPLETION,
                job.id,
                ("done", task, st.index, pool_idx),
            )

    def _handle_completion(self, task: _Task, stage_idx: int, pool_idx: int, t: float) -> None:
        st = self.stages[stage_idx]
        pool = st.pools[pool_idx]
        pool.busy -= 1
        if pool.pending_retire > 0:
            pool.pending_retire -= 1
        else:
            pool.idle += 1
        job = task.job
        finished = True
        if task.subtask_index >= 0:
            job.fj_remaining -= 1
            finished = job.fj_remaining == 0
        if finished:
            st.jobs_in_stage -= 1
            st.completions_total += 1
            in_window = t >= self.warmup
            if in_window:
                st.n_completed += 1
                st.sum_w += t - job.stage_arrival
                st.sum_wq += job.stage_wait
            job.total_wait += job.stage_wait
            nxt = stage_idx + 1
            if nxt < len(self.stages):
                self._stage_arrive(nxt, job, t)
            else:
                self._job_leaves(job, t, in_window)
        self._try_start(st, pool_idx, t)

    def _job_leaves(self, job: Job, t: float, in_window: bool) -> None:
        self.jobs_completed += 1
        if not in_window:
            return
        self.measured_completions += 1
        self.class_wait_sum[job.priority_class] += job.total_wait
        self.class_wait_n[job.priority_class] += 1
        if job.deadline is not None:
            lateness = t - job.deadline
            if self.max_lateness is None or lateness > self.max_lateness:
                self.max_lateness = lateness

    # -- autoscaling -------------------------------------------------------

    def _handle_scaling(self, stage_idx: int, t: float) -> None:
        st = self.stages[stage_idx]
        pol = st.cfg.scaling
        pool = st.pools[0]
        if isinstance(pol, ThresholdScaling):
            delta = threshold_autoscale(pool.total_runners, st.jobs_in_stage, pol)
        else:
            rate = st.arrivals_since_review / pol.review_period
            if st.smoother is None:
                # First review seeds the smoother with the first observation.
                st.smoother = SmootherState(alpha=pol.alpha, estimate=rate)
            desired, st.smoother = predictive_autoscale(
                st.smoother, rate, pool.rate, pol.target_rho
            )
            delta = desired - pool.total_runners
        st.arrivals_since_review = 0
        if delta > 0:
            self._add_runners(st, pool, delta, t)
        elif delta < 0:
            self._remove_runners(pool, -delta)
        nxt = t + pol.review_period
        if nxt <= self.horizon:
            self._push(nxt, _RANK_SCALING, stage_idx, ("scale", stage_idx))

    def _add_runners(self, st: _StageState, pool: _Pool, count: int, t: float) -> None:
        bd = st.cfg.boot_delay
        if bd <= 0:
            pool.idle += count
            self._try_start(st, 0, t)
            return
        for _ in range(count):
            pool.booting += 1
            self._push(t + bd, _RANK_SCALING, st.index, ("ready", st.index, 0))

    def _remove_runners(self, pool: _Pool, count: int) -> None:
        count = min(count, pool.total_runners - 1)
        while count > 0:
            if pool.idle > 0:
                pool.idle -= 1
            elif pool.booting - pool.boot_cancel > 0:
                pool.boot_cancel += 1
            else:
                # Graceful removal: a busy runner finishes its job first.
                pool.pending_retire += 1
            count -= 1

    def _handle_runner_ready(self, stage_idx: int, pool_idx: int, t: float) -> None:
        st = self.stages[stage_idx]
        pool = st.pools[pool_idx]
        pool.booting -= 1
        if pool.boot_cancel > 0:
            pool.boot_cancel -= 1
            return
        pool.idle += 1
        self._try_start(st, pool_idx, t)

    # -- report ------------------------------------------------------------

    def _build_report(self) -> MetricsReport:
        span = self.horizon - self.warmup
        metrics = []
        for st in self.stages:
            n = st.n_completed
            if st.lq_bins is not None:
                lq_windows = tuple(b / self.window_width for b in st.lq_bins)
            else:
                lq_windows = ()
            metrics.append(
                StageMetrics(
                    name=st.cfg.name or f"stage{st.index}",
                    l=st.int_l / span,
                    lq=st.int_lq / span,
                    w=st.sum_w / n if n else 0.0,
                    wq=st.sum_wq / n if n else 0.0,
                    rho=st.busy_int / st.cap_int if st.cap_int > 0 else 0.0,
                    throughput=n / span,
                    arrivals=st.arrivals_total,
                    completions=st.completions_total,
                    in_stage_end=st.jobs_in_stage,
                    lq_windows=lq_windows,
                )
            )
        bottleneck = 0
        for i, m in enumerate(metrics):
            if m.rho > metrics[bottleneck].rho:
                bottleneck = i
        wq_by_class = {}
        for cls in (PRIORITY_CRITICAL, PRIORITY_NORMAL):
            n = self.class_wait_n[cls]
            wq_by_class[cls] = self.class_wait_sum[cls] / n if n else 0.0
        return MetricsReport(
            stages=tuple(metrics),
            horizon=self.horizon,
            warmup=self.warmup,
            jobs_arrived=self.jobs_arrived,
            jobs_completed=self.jobs_completed,
            jobs_in_system_end=self.jobs_arrived - self.jobs_completed,
            measured_completions=self.measured_completions,
            max_lateness=self.max_lateness,
            wq_by_class=wq_by_class,
            bottleneck_stage=bottleneck,
        )


def run_simulation(
    stages: Sequence[StageConfig],
    arrivals: ArrivalProcess,
    horizon: float,
    seed: int,
    warmup: Optional[float] = None,
    job_mix: Optional[JobMix] = None,
    windows: int = 0,
) -> MetricsReport:
    """Simulate a pipeline and return its metrics.

    ``warmup`` defaults to 1% of the horizon; statistics are collected only
    after it. ``windows`` > 0 additionally splits the measured span into that
    many equal windows and reports the per-window mean queue length (useful
    for spotting unstable growth). Identical (configuration, seed) pairs
    produce identical reports.

    Raises:
        ValueError: for malformed configurations, before any event runs.
    """
    stages = tuple(stages)
    if not stages:
        raise ValueError("at least one stage is required")
    if horizon <= 0:
        raise ValueError("horizon must be strictly positive")
    if warmup is None:
        warmup = 0.01 * horizon
    if not 0 <= warmup < horizon:
        raise ValueError("warmup must satisfy 0 <= warmup < horizon")
    if windows < 0:
        raise ValueError("windows must be non-negative")
    if job_mix is None:
        job_mix = JobMix()
    if isinstance(arrivals, TraceArrivals) and arrivals.demands is not None:
        if len(stages) != 1 or stages[0].fork_join is not None:
            raise ValueError(
                "trace-attached demands require a single stage without fork-join"
            )
    sim = _Simulation(stages, arrivals, horizon, seed, warmup, job_mix, windows)
    return sim.run()


def forkjoin_completion_samples(
    fan_out: int,
    subtask_service: ServiceDistribution,
    replications: int,
    seed: int,
) -> np.ndarray:
    """Fork-join completion times with one idle runner per subtask.

    With unlimited runners no subtask ever queues, so each replication is the
    maximum of ``fan_out`` independent service draws; this vectorized path
    makes million-replication studies cheap. Use :func:`run_simulation` with a
    fork-join stage when runners are contended.
    """
    if int(fan_out) != fan_out or fan_out < 1:
        raise ValueError("fan-out must be a positive integer")
    if replications < 1:
        raise ValueError("at least one replication is required")
    rng = np.random.default_rng(seed)
    draws = subtask_service.sample_n(rng, (replications, int(fan_out)))
    return draws.max(axis=1)
