"""Scenario files: strict parsing, validation, and serialization.

A scenario is one JSON document describing a whole experiment: workload,
stages, cost model, SLA, and scaling policy. Rates in scenario files are
jobs per hour (converted to per-minute internally); durations are minutes.
Unknown keys are rejected so that typos fail loudly instead of silently
changing an experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .costs import CostModel, SlaConstraint
from .des.engine import ForkJoin, StageConfig
from .des.policies import (
    DISCIPLINES,
    DISPATCH_JSQ,
    DISPATCH_POLICIES,
    FCFS,
    PredictiveScaling,
    ScalingPolicy,
    ThresholdScaling,
)
from .des.workload import (
    ArrivalProcess,
    BatchPoissonArrivals,
    DeterministicService,
    EmpiricalService,
    ExponentialService,
    JobMix,
    LognormalService,
    PoissonArrivals,
    ServiceDistribution,
    TraceArrivals,
)
from .analytic import HeterogeneousFleet, RunnerPool
from .errors import ScenarioError

__all__ = [
    "ArrivalSpec",
    "ServiceSpec",
    "ScalingSpec",
    "PoolSpec",
    "ForkJoinSpec",
    "StageSpec",
    "CostSpec",
    "SlaSpec",
    "JobMixSpec",
    "SweepSpec",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "write_scenario",
    "scenario_to_dict",
    "bundled_scenario_path",
]


@dataclass(frozen=True)
class ArrivalSpec:
    kind: str
    rate_per_hour: Optional[float] = None
    batch_sizes: Optional[tuple[int, ...]] = None
    batch_weights: Optional[tuple[float, ...]] = None
    timestamps_minutes: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class ServiceSpec:
    kind: str
    mean_minutes: Optional[float] = None
    minutes: Optional[float] = None
    cv2: Optional[float] = None
    samples_minutes: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class ScalingSpec:
    kind: str
    l_high: Optional[float] = None
    l_low: Optional[float] = None
    step: int = 1
    target_rho: Optional[float] = None
    alpha: float = 0.3
    review_period_minutes: float = 1.0


@dataclass(frozen=True)
class PoolSpec:
    count: int
    rate_per_hour: float


@dataclass(frozen=True)
class ForkJoinSpec:
    fan_out: int
    subtask_service: ServiceSpec


@dataclass(frozen=True)
class StageSpec:
    name: str = ""
    runners: Optional[int] = None
    pools: Optional[tuple[PoolSpec, ...]] = None
    discipline: str = FCFS
    dispatch: str = DISPATCH_JSQ
    service: Optional[ServiceSpec] = None
    fork_join: Optional[ForkJoinSpec] = None
    boot_delay_minutes: float = 0.0
    scaling: Optional[ScalingSpec] = None


@dataclass(frozen=True)
class CostSpec:
    runner_rate_per_minute: float
    wait_rate_per_minute: float
    w1: float = 1.0
    w2: float = 1.0
    horizon_minutes: float = 60.0


@dataclass(frozen=True)
class SlaSpec:
    max_wait_minutes: float


@dataclass(frozen=True)
class JobMixSpec:
    critical_fraction: float = 0.0
    deadline_slack_minutes: Optional[tuple[float, float]] = None
    estimate_noise_cv: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    developers: tuple[float, ...]
    lambda_per_dev_per_hour: float


@dataclass(frozen=True)
class Scenario:
    """Validated scenario; field units mirror the file (hours/minutes)."""

    name: str
    seed: int
    horizon_minutes: float
    arrivals: ArrivalSpec
    stages: tuple[StageSpec, ...]
    replications: int = 1
    warmup_minutes: Optional[float] = None
    windows: int = 0
    service: Optional[ServiceSpec] = None
    scaling: Optional[ScalingSpec] = None
    cost: Optional[CostSpec] = None
    sla: Optional[SlaSpec] = None
    job_mix: Optional[JobMixSpec] = None
    reference_wq_minutes: Optional[float] = None
    developer_sweep: Optional[SweepSpec] = None

    # -- conversions to runtime objects ---------------------------------

    def stage_service(self, index: int) -> Optional[ServiceSpec]:
        spec = self.stages[index]
        return spec.service if spec.service is not None else self.service

    def stage_scaling(self, index: int) -> Optional[ScalingSpec]:
        spec = self.stages[index]
        local = spec.scaling
        if local is not None:
            return None if local.kind == "none" else local
        if self.scaling is not None and self.scaling.kind != "none":
            return self.scaling
        return None

    def stage_fleet(self, index: int) -> HeterogeneousFleet:
        spec = self.stages[index]
        if spec.pools is not None:
            return HeterogeneousFleet(
                tuple(RunnerPool(p.count, p.rate_per_hour / 60.0) for p in spec.pools)
            )
        service = self.stage_service(index)
        if spec.fork_join is not None and service is None:
            service = spec.fork_join.subtask_service
        mean = build_service(service).mean
        return HeterogeneousFleet((RunnerPool(spec.runners, 1.0 / mean),))

    def build_arrivals(self) -> ArrivalProcess:
        return build_arrivals(self.arrivals)

    def build_stages(self) -> tuple[StageConfig, ...]:
        configs = []
        for i, spec in enumerate(self.stages):
            service_spec = self.stage_service(i)
            fork_join = None
            if spec.fork_join is not None:
                fork_join = ForkJoin(
                    fan_out=spec.fork_join.fan_out,
                    subtask_service=build_service(spec.fork_join.subtask_service),
                )
            configs.append(
                StageConfig(
                    pools=self.stage_fleet(i),
                    service=build_service(service_spec) if service_spec else None,
                    discipline=spec.discipline,
                    dispatch=spec.dispatch,
                    fork_join=fork_join,
                    boot_delay=spec.boot_delay_minutes,
                    scaling=build_scaling(self.stage_scaling(i)),
                    name=spec.name or f"stage{i}",
                )
            )
        return tuple(configs)

    def build_job_mix(self) -> JobMix:
        mix = self.job_mix
        if mix is None:
            return JobMix()
        return JobMix(
            critical_fraction=mix.critical_fraction,
            deadline_slack=mix.deadline_slack_minutes,
            estimate_noise_cv=mix.estimate_noise_cv,
        )

    def build_cost_model(self) -> Optional[CostModel]:
        if self.cost is None:
            return None
        return CostModel(
            runner_rate=self.cost.runner_rate_per_minute,
            wait_rate=self.cost.wait_rate_per_minute,
            w1=self.cost.w1,
            w2=self.cost.w2,
            horizon=self.cost.horizon_minutes,
        )

    def build_sla(self) -> Optional[SlaConstraint]:
        if self.sla is None:
            return None
        return SlaConstraint(max_wait=self.sla.max_wait_minutes)


def build_service(spec: ServiceSpec) -> ServiceDistribution:
    if spec.kind == "exponential":
        return ExponentialService(rate=1.0 / spec.mean_minutes)
    if spec.kind == "deterministic":
        return DeterministicService(minutes=spec.minutes)
    if spec.kind == "lognormal":
        return LognormalService(mean=spec.mean_minutes, cv2=spec.cv2)
    if spec.kind == "empirical":
        return EmpiricalService(samples=spec.samples_minutes)
    raise ScenarioError(f"unknown service kind {spec.kind!r}")


def build_arrivals(spec: ArrivalSpec) -> ArrivalProcess:
    if spec.kind == "poisson":
        return PoissonArrivals(rate=spec.rate_per_hour / 60.0)
    if spec.kind == "batch_poisson":
        return BatchPoissonArrivals(
            rate=spec.rate_per_hour / 60.0,
            batch_sizes=spec.batch_sizes,
            batch_weights=spec.batch_weights,
        )
    if spec.kind == "trace":
        return TraceArrivals(timestamps=spec.timestamps_minutes)
    raise ScenarioError(f"unknown arrival kind {spec.kind!r}")


def build_scaling(spec: Optional[ScalingSpec]) -> Optional[ScalingPolicy]:
    if spec is None or spec.kind == "none":
        return None
    if spec.kind == "threshold":
        return ThresholdScaling(
            l_high=spec.l_high,
            l_low=spec.l_low,
            step=spec.step,
            review_period=spec.review_period_minutes,
        )
    if spec.kind == "predictive":
        return PredictiveScaling(
            target_rho=spec.target_rho,
            alpha=spec.alpha,
            review_period=spec.review_period_minutes,
        )
    raise ScenarioError(f"unknown scaling kind {spec.kind!r}")


# -- strict parsing ------------------------------------------------------


def _check_keys(data: dict, ctx: str, allowed: set, required: set) -> None:
    if not isinstance(data, dict):
        raise ScenarioError(f"{ctx}: expected an object, got {type(data).__name__}")
    for key in data:
        if key not in allowed:
            raise ScenarioError(f"{ctx}: unknown key {key!r}")
    for key in required:
        if key not in data:
            raise ScenarioError(f"{ctx}: missing required key {key!r}")


def _number(data: dict, key: str, ctx: str, default=None):
    if key not in data:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{ctx}.{key}: expected a number, got {v!r}")
    return v


def _integer(data: dict, key: str, ctx: str, default=None):
    if key not in data:
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{ctx}.{key}: expected an integer, got {v!r}")
    return v


def _string(data: dict, key: str, ctx: str, default=None):
    if key not in data:
        return default
    v = data[key]
    if not isinstance(v, str):
        raise ScenarioError(f"{ctx}.{key}: expected a string, got {v!r}")
    return v


def _number_list(data: dict, key: str, ctx: str):
    if key not in data:
        return None
    v = data[key]
    if not isinstance(v, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
    ):
        raise ScenarioError(f"{ctx}.{key}: expected a list of numbers")
    return tuple(v)


def _parse_arrivals(data: dict, ctx: str) -> ArrivalSpec:
    _check_keys(
        data,
        ctx,
        allowed={"kind", "rate_per_hour", "batch_sizes", "batch_weights", "timestamps_minutes"},
        required={"kind"},
    )
    kind = _string(data, "kind", ctx)
    batch_sizes = None
    if "batch_sizes" in data:
        v = data["batch_sizes"]
        if not isinstance(v, list) or any(isinstance(b, bool) or not isinstance(b, int) for b in v):
            raise ScenarioError(f"{ctx}.batch_sizes: expected a list of integers")
        batch_sizes = tuple(v)
    spec = ArrivalSpec(
        kind=kind,
        rate_per_hour=_number(data, "rate_per_hour", ctx),
        batch_sizes=batch_sizes,
        batch_weights=_number_list(data, "batch_weights", ctx),
        timestamps_minutes=_number_list(data, "timestamps_minutes", ctx),
    )
    if kind in ("poisson", "batch_poisson") and spec.rate_per_hour is None:
        raise ScenarioError(f"{ctx}: {kind} arrivals need rate_per_hour")
    if kind == "batch_poisson" and spec.batch_sizes is None:
        raise ScenarioError(f"{ctx}: batch_poisson arrivals need batch_sizes")
    if kind == "trace" and spec.timestamps_minutes is None:
        raise ScenarioError(f"{ctx}: trace arrivals need timestamps_minutes")
    _validate(lambda: build_arrivals(spec), ctx)
    return spec


def _parse_service(data: dict, ctx: str) -> ServiceSpec:
    _check_keys(
        data,
        ctx,
        allowed={"kind", "mean_minutes", "minutes", "cv2", "samples_minutes"},
        required={"kind"},
    )
    spec = ServiceSpec(
        kind=_string(data, "kind", ctx),
        mean_minutes=_number(data, "mean_minutes", ctx),
        minutes=_number(data, "minutes", ctx),
        cv2=_number(data, "cv2", ctx),
        samples_minutes=_number_list(data, "samples_minutes", ctx),
    )
    needs = {
        "exponential": ("mean_minutes",),
        "deterministic": ("minutes",),
        "lognormal": ("mean_minutes", "cv2"),
        "empirical": ("samples_minutes",),
    }
    if spec.kind not in needs:
        raise ScenarioError(f"{ctx}: unknown service kind {spec.kind!r}")
    for key in needs[spec.kind]:
        if getattr(spec, key) is None:
            raise ScenarioError(f"{ctx}: {spec.kind} service needs {key}")
    _validate(lambda: build_service(spec), ctx)
    return spec


def _parse_scaling(data: dict, ctx: str) -> ScalingSpec:
    _check_keys(
        data,
        ctx,
        allowed={"kind", "l_high", "l_low", "step", "target_rho", "alpha", "review_period_minutes"},
        required={"kind"},
    )
    spec = ScalingSpec(
        kind=_string(data, "kind", ctx),
        l_high=_number(data, "l_high", ctx),
        l_low=_number(data, "l_low", ctx),
        step=_integer(data, "step", ctx, default=1),
        target_rho=_number(data, "target_rho", ctx),
        alpha=_number(data, "alpha", ctx, default=0.3),
        review_period_minutes=_number(data, "review_period_minutes", ctx, default=1.0),
    )
    if spec.kind not in ("none", "threshold", "predictive"):
        raise ScenarioError(f"{ctx}: unknown scaling kind {spec.kind!r}")
    if spec.kind == "threshold" and (spec.l_high is None or spec.l_low is None):
        raise ScenarioError(f"{ctx}: threshold scaling needs l_high and l_low")
    if spec.kind == "predictive" and spec.target_rho is None:
        raise ScenarioError(f"{ctx}: predictive scaling needs target_rho")
    _validate(lambda: build_scaling(spec), ctx)
    return spec


def _parse_stage(data: dict, ctx: str) -> StageSpec:
    _check_keys(
        data,
        ctx,
        allowed={
            "name",
            "runners",
            "pools",
            "discipline",
            "dispatch",
            "service",
            "fork_join",
            "boot_delay_minutes",
            "scaling",
        },
        required=set(),
    )
    pools = None
    if "pools" in data:
        if not isinstance(data["pools"], list) or not data["pools"]:
            raise ScenarioError(f"{ctx}.pools: expected a non-empty list")
        parsed = []
        for j, p in enumerate(data["pools"]):
            pctx = f"{ctx}.pools[{j}]"
            _check_keys(p, pctx, allowed={"count", "rate_per_hour"}, required={"count", "rate_per_hour"})
            parsed.append(
                PoolSpec(count=_integer(p, "count", pctx), rate_per_hour=_number(p, "rate_per_hour", pctx))
            )
        pools = tuple(parsed)
    fork_join = None
    if "fork_join" in data:
        fctx = f"{ctx}.fork_join"
        _check_keys(data["fork_join"], fctx, allowed={"fan_out", "subtask_service"}, required={"fan_out", "subtask_service"})
        fork_join = ForkJoinSpec(
            fan_out=_integer(data["fork_join"], "fan_out", fctx),
            subtask_service=_parse_service(data["fork_join"]["subtask_service"], f"{fctx}.subtask_service"),
        )
    spec = StageSpec(
        name=_string(data, "name", ctx, default=""),
        runners=_integer(data, "runners", ctx),
        pools=pools,
        discipline=_string(data, "discipline", ctx, default=FCFS),
        dispatch=_string(data, "dispatch", ctx, default=DISPATCH_JSQ),
        service=_parse_service(data["service"], f"{ctx}.service") if "service" in data else None,
        fork_join=fork_join,
        boot_delay_minutes=_number(data, "boot_delay_minutes", ctx, default=0.0),
        scaling=_parse_scaling(data["scaling"], f"{ctx}.scaling") if "scaling" in data else None,
    )
    if (spec.runners is None) == (spec.pools is None):
        raise ScenarioError(f"{ctx}: exactly one of 'runners' and 'pools' is required")
    if spec.discipline not in DISCIPLINES:
        raise ScenarioError(f"{ctx}.discipline: unknown discipline {spec.discipline!r}")
    if spec.dispatch not in DISPATCH_POLICIES:
        raise ScenarioError(f"{ctx}.dispatch: unknown dispatch policy {spec.dispatch!r}")
    return spec


def _validate(factory, ctx: str) -> None:
    try:
        factory()
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{ctx}: {exc}") from exc


def parse_scenario(data: dict, ctx: str = "scenario") -> Scenario:
    _check_keys(
        data,
        ctx,
        allowed={
            "name",
            "seed",
            "horizon_minutes",
            "warmup_minutes",
            "windows",
            "replications",
            "arrivals",
            "service",
            "stages",
            "cost",
            "sla",
            "scaling",
            "job_mix",
            "reference_wq_minutes",
            "developer_sweep",
        },
        required={"name", "seed", "horizon_minutes", "arrivals", "stages"},
    )
    if not isinstance(data["stages"], list) or not data["stages"]:
        raise ScenarioError(f"{ctx}.stages: expected a non-empty list")

    cost = None
    if "cost" in data:
        cctx = f"{ctx}.cost"
        _check_keys(
            data["cost"],
            cctx,
            allowed={"runner_rate_per_minute", "wait_rate_per_minute", "w1", "w2", "horizon_minutes"},
            required={"runner_rate_per_minute", "wait_rate_per_minute"},
        )
        cost = CostSpec(
            runner_rate_per_minute=_number(data["cost"], "runner_rate_per_minute", cctx),
            wait_rate_per_minute=_number(data["cost"], "wait_rate_per_minute", cctx),
            w1=_number(data["cost"], "w1", cctx, default=1.0),
            w2=_number(data["cost"], "w2", cctx, default=1.0),
            horizon_minutes=_number(data["cost"], "horizon_minutes", cctx, default=60.0),
        )

    sla = None
    if "sla" in data:
        sctx = f"{ctx}.sla"
        _check_keys(data["sla"], sctx, allowed={"max_wait_minutes"}, required={"max_wait_minutes"})
        sla = SlaSpec(max_wait_minutes=_number(data["sla"], "max_wait_minutes", sctx))

    job_mix = None
    if "job_mix" in data:
        jctx = f"{ctx}.job_mix"
        _check_keys(
            data["job_mix"],
            jctx,
            allowed={"critical_fraction", "deadline_slack_minutes", "estimate_noise_cv"},
            required=set(),
        )
        slack = _number_list(data["job_mix"], "deadline_slack_minutes", jctx)
        if slack is not None and len(slack) != 2:
            raise ScenarioError(f"{jctx}.deadline_slack_minutes: expected [low, high]")
        job_mix = JobMixSpec(
            critical_fraction=_number(data["job_mix"], "critical_fraction", jctx, default=0.0),
            deadline_slack_minutes=slack,
            estimate_noise_cv=_number(data["job_mix"], "estimate_noise_cv", jctx, default=0.0),
        )

    sweep = None
    if "developer_sweep" in data:
        wctx = f"{ctx}.developer_sweep"
        _check_keys(
            data["developer_sweep"],
            wctx,
            allowed={"developers", "lambda_per_dev_per_hour"},
            required={"developers", "lambda_per_dev_per_hour"},
        )
        sweep = SweepSpec(
            developers=_number_list(data["developer_sweep"], "developers", wctx),
            lambda_per_dev_per_hour=_number(data["developer_sweep"], "lambda_per_dev_per_hour", wctx),
        )

    scenario = Scenario(
        name=_string(data, "name", ctx),
        seed=_integer(data, "seed", ctx),
        horizon_minutes=_number(data, "horizon_minutes", ctx),
        warmup_minutes=_number(data, "warmup_minutes", ctx),
        windows=_integer(data, "windows", ctx, default=0),
        replications=_integer(data, "replications", ctx, default=1),
        arrivals=_parse_arrivals(data["arrivals"], f"{ctx}.arrivals"),
        service=_parse_service(data["service"], f"{ctx}.service") if "service" in data else None,
        stages=tuple(
            _parse_stage(s, f"{ctx}.stages[{i}]") for i, s in enumerate(data["stages"])
        ),
        scaling=_parse_scaling(data["scaling"], f"{ctx}.scaling") if "scaling" in data else None,
        cost=cost,
        sla=sla,
        job_mix=job_mix,
        reference_wq_minutes=_number(data, "reference_wq_minutes", ctx),
        developer_sweep=sweep,
    )

    if scenario.horizon_minutes <= 0:
        raise ScenarioError(f"{ctx}.horizon_minutes: must be strictly positive")
    if scenario.warmup_minutes is not None and not (
        0 <= scenario.warmup_minutes < scenario.horizon_minutes
    ):
        raise ScenarioError(f"{ctx}.warmup_minutes: must satisfy 0 <= warmup < horizon")
    if scenario.windows < 0:
        raise ScenarioError(f"{ctx}.windows: must be non-negative")
    if scenario.replications < 1:
        raise ScenarioError(f"{ctx}.replications: must be at least 1")
    if scenario.reference_wq_minutes is not None and scenario.reference_wq_minutes <= 0:
        raise ScenarioError(f"{ctx}.reference_wq_minutes: must be strictly positive")
    for i in range(len(scenario.stages)):
        stage_ctx = f"{ctx}.stages[{i}]"
        if scenario.stages[i].fork_join is None and scenario.stage_service(i) is None:
            raise ScenarioError(
                f"{stage_ctx}: no service distribution (set stage service or the scenario default)"
            )
        _validate(lambda i=i: scenario.stage_fleet(i), stage_ctx)
    _validate(scenario.build_stages, ctx)
    _validate(scenario.build_job_mix, f"{ctx}.job_mix")
    _validate(scenario.build_cost_model, f"{ctx}.cost")
    _validate(scenario.build_sla, f"{ctx}.sla")
    return scenario


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        ScenarioError: on parse errors (with line/column context) or any
        invariant violation (naming the offending field).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"parse error in {path}: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from exc
    return parse_scenario(data)


# -- serialization -------------------------------------------------------


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def _arrivals_dict(a: ArrivalSpec) -> dict:
    return _drop_none(
        {
            "kind": a.kind,
            "rate_per_hour": a.rate_per_hour,
            "batch_sizes": list(a.batch_sizes) if a.batch_sizes else None,
            "batch_weights": list(a.batch_weights) if a.batch_weights else None,
            "timestamps_minutes": list(a.timestamps_minutes)
            if a.timestamps_minutes is not None
            else None,
        }
    )


def _service_dict(s: ServiceSpec) -> dict:
    return _drop_none(
        {
            "kind": s.kind,
            "mean_minutes": s.mean_minutes,
            "minutes": s.minutes,
            "cv2": s.cv2,
            "samples_minutes": list(s.samples_minutes) if s.samples_minutes else None,
        }
    )


def _scaling_dict(s: ScalingSpec) -> dict:
    out = {"kind": s.kind}
    if s.kind == "threshold":
        out.update({"l_high": s.l_high, "l_low": s.l_low, "step": s.step})
    if s.kind == "predictive":
        out.update({"target_rho": s.target_rho, "alpha": s.alpha})
    if s.kind != "none":
        out["review_period_minutes"] = s.review_period_minutes
    return out


def _stage_dict(s: StageSpec) -> dict:
    out: dict = {}
    if s.name:
        out["name"] = s.name
    if s.runners is not None:
        out["runners"] = s.runners
    if s.pools is not None:
        out["pools"] = [{"count": p.count, "rate_per_hour": p.rate_per_hour} for p in s.pools]
    out["discipline"] = s.discipline
    out["dispatch"] = s.dispatch
    if s.service is not None:
        out["service"] = _service_dict(s.service)
    if s.fork_join is not None:
        out["fork_join"] = {
            "fan_out": s.fork_join.fan_out,
            "subtask_service": _service_dict(s.fork_join.subtask_service),
        }
    if s.boot_delay_minutes:
        out["boot_delay_minutes"] = s.boot_delay_minutes
    if s.scaling is not None:
        out["scaling"] = _scaling_dict(s.scaling)
    return out


def scenario_to_dict(s: Scenario) -> dict:
    out: dict = {
        "name": s.name,
        "seed": s.seed,
        "horizon_minutes": s.horizon_minutes,
        "replications": s.replications,
        "arrivals": _arrivals_dict(s.arrivals),
        "stages": [_stage_dict(st) for st in s.stages],
    }
    if s.warmup_minutes is not None:
        out["warmup_minutes"] = s.warmup_minutes
    if s.windows:
        out["windows"] = s.windows
    if s.service is not None:
        out["service"] = _service_dict(s.service)
    if s.scaling is not None:
        out["scaling"] = _scaling_dict(s.scaling)
    if s.cost is not None:
        out["cost"] = {
            "runner_rate_per_minute": s.cost.runner_rate_per_minute,
            "wait_rate_per_minute": s.cost.wait_rate_per_minute,
            "w1": s.cost.w1,
            "w2": s.cost.w2,
            "horizon_minutes": s.cost.horizon_minutes,
        }
    if s.sla is not None:
        out["sla"] = {"max_wait_minutes": s.sla.max_wait_minutes}
    if s.job_mix is not None:
        out["job_mix"] = _drop_none(
            {
                "critical_fraction": s.job_mix.critical_fraction,
                "deadline_slack_minutes": list(s.job_mix.deadline_slack_minutes)
                if s.job_mix.deadline_slack_minutes
                else None,
                "estimate_noise_cv": s.job_mix.estimate_noise_cv,
            }
        )
    if s.reference_wq_minutes is not None:
        out["reference_wq_minutes"] = s.reference_wq_minutes
    if s.developer_sweep is not None:
        out["developer_sweep"] = {
            "developers": list(s.developer_sweep.developers),
            "lambda_per_dev_per_hour": s.developer_sweep.lambda_per_dev_per_hour,
        }
    return out


def write_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (e.g. 'case_study')."""
    path = Path(__file__).parent / "scenarios" / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in path.parent.glob("*.json"))
        raise ScenarioError(f"no bundled scenario {name!r}; available: {available}")
    return path
