"""Discrete-event simulation of multi-stage runner pipelines."""

from .engine import (
    ForkJoin,
    MetricsReport,
    StageConfig,
    StageMetrics,
    forkjoin_completion_samples,
    run_simulation,
)
from .policies import (
    DISCIPLINES,
    DISPATCH_JSQ,
    DISPATCH_POLICIES,
    DISPATCH_RANDOM,
    DISPATCH_SIZE_BASED,
    EDF,
    FCFS,
    PRIORITY_FCFS,
    PredictiveScaling,
    SPT,
    ScalingPolicy,
    ThresholdScaling,
    desired_server_count,
    dispatch,
    predictive_autoscale,
    select_next,
    threshold_autoscale,
)
from .workload import (
    ArrivalProcess,
    BatchPoissonArrivals,
    DeterministicService,
    EmpiricalService,
    ExponentialService,
    JobMix,
    JobOverride,
    LognormalService,
    PRIORITY_CRITICAL,
    PRIORITY_NORMAL,
    PoissonArrivals,
    ServiceDistribution,
    TraceArrivals,
)

__all__ = [
    "ForkJoin",
    "MetricsReport",
    "StageConfig",
    "StageMetrics",
    "forkjoin_completion_samples",
    "run_simulation",
    "DISCIPLINES",
    "DISPATCH_JSQ",
    "DISPATCH_POLICIES",
    "DISPATCH_RANDOM",
    "DISPATCH_SIZE_BASED",
    "EDF",
    "FCFS",
    "PRIORITY_FCFS",
    "SPT",
    "PredictiveScaling",
    "ScalingPolicy",
    "ThresholdScaling",
    "desired_server_count",
    "dispatch",
    "predictive_autoscale",
    "select_next",
    "threshold_autoscale",
    "ArrivalProcess",
    "BatchPoissonArrivals",
    "DeterministicService",
    "EmpiricalService",
    "ExponentialService",
    "JobMix",
    "JobOverride",
    "LognormalService",
    "PRIORITY_CRITICAL",
    "PRIORITY_NORMAL",
    "PoissonArrivals",
    "ServiceDistribution",
    "TraceArrivals",
]
