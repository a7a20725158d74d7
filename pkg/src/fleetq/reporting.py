"""Report generation: analytic tables, simulation summaries, and comparisons.

Machine-readable reports are plain dicts with a stable key set: a key is
always present and carries null (plus a status marker) when a value does not
apply, e.g. analytic delay columns for an unstable or fork-join stage.
Utilization is additionally computed in exact rational arithmetic whenever the
scenario's rates permit it, and reported as a fraction string.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Optional, Sequence

from .analytic import (
    erlang_c_pwait,
    ggc_wq_kingman,
    mg1_wq,
    mgc_wq_allen_cunneen,
    mmc_wq,
    pk_mean_jobs,
)
from .costs import min_runners_for_sla, optimal_runner_count, developer_scaling_sweep
from .des.engine import MetricsReport, run_simulation
from .errors import ScenarioError, UnstableSystemError
from .forecast import estimate_rate_and_cv2
from .scenario import (
    ScalingSpec,
    Scenario,
    _parse_scaling,
    build_service,
    scenario_to_dict,
)
from dataclasses import replace

__all__ = [
    "run_analysis",
    "run_report",
    "run_simulation_summary",
    "optimize_report",
    "compare_policies",
    "render_text",
    "report_to_json",
]

STATUS_OK = "ok"
STATUS_UNSTABLE = "unstable (rho >= 1)"
STATUS_FORK_JOIN = "not-applicable (fork-join)"


# -- workload characterization -------------------------------------------


def _arrival_rate_per_min(scenario: Scenario) -> float:
    a = scenario.arrivals
    if a.kind == "poisson":
        return a.rate_per_hour / 60.0
    if a.kind == "batch_poisson":
        return scenario.build_arrivals().job_rate
    # trace: estimate from the recorded gaps
    rate, _ = estimate_rate_and_cv2(a.timestamps_minutes, kind="timestamps")
    return rate


def _arrival_ca2(scenario: Scenario) -> Optional[float]:
    a = scenario.arrivals
    if a.kind == "poisson":
        return 1.0
    if a.kind == "batch_poisson":
        # Inter-job gaps are a mix of zero (within a batch) and exponential
        # (between batches): Cv^2 works out to 2*E[B] - 1 for any batch-size
        # distribution with mean E[B].
        return 2.0 * scenario.build_arrivals().mean_batch_size - 1.0
    try:
        _, ca2 = estimate_rate_and_cv2(a.timestamps_minutes, kind="timestamps")
        return ca2
    except ValueError:
        return None


def _arrival_rate_fraction(scenario: Scenario) -> Optional[Fraction]:
    a = scenario.arrivals
    if a.kind == "poisson":
        return Fraction(a.rate_per_hour) / 60
    if a.kind == "batch_poisson":
        sizes = a.batch_sizes
        if a.batch_weights is None:
            mean_b = Fraction(sum(sizes), len(sizes))
        else:
            wsum = sum(Fraction(w) for w in a.batch_weights)
            mean_b = sum(Fraction(s) * Fraction(w) for s, w in zip(sizes, a.batch_weights)) / wsum
        return Fraction(a.rate_per_hour) / 60 * mean_b
    return None


def _service_mean_fraction(spec) -> Fraction:
    if spec.kind == "exponential" or spec.kind == "lognormal":
        return Fraction(spec.mean_minutes)
    if spec.kind == "deterministic":
        return Fraction(spec.minutes)
    # empirical
    return sum(Fraction(s) for s in spec.samples_minutes) / len(spec.samples_minutes)


def _fleet_rate_fraction(scenario: Scenario, index: int) -> Fraction:
    spec = scenario.stages[index]
    if spec.pools is not None:
        return sum(Fraction(p.count) * Fraction(p.rate_per_hour) / 60 for p in spec.pools)
    service = scenario.stage_service(index)
    if service is None and spec.fork_join is not None:
        service = spec.fork_join.subtask_service
    return Fraction(spec.runners) / _service_mean_fraction(service)


def _stage_equivalent(scenario: Scenario, index: int) -> tuple[int, float]:
    """Equivalent homogeneous (servers, per-server rate) for analytic formulas.

    A single pool is used as-is; a mixed fleet is approximated by its total
    server count running at mu_eff / total each.
    """
    fleet = scenario.stage_fleet(index)
    total = fleet.total_servers
    mu_eff = sum(p.count * p.rate for p in fleet.pools)
    return total, mu_eff / total


def _stage_analytic(scenario: Scenario, index: int, lam: float, ca2: Optional[float]) -> dict:
    spec = scenario.stages[index]
    servers, mu = _stage_equivalent(scenario, index)
    fork_join = spec.fork_join is not None
    task_rate = lam * spec.fork_join.fan_out if fork_join else lam

    lam_frac = _arrival_rate_fraction(scenario)
    rho_exact: Optional[str] = None
    rho: Optional[float] = None
    if lam_frac is not None:
        exact = lam_frac * (spec.fork_join.fan_out if fork_join else 1) / _fleet_rate_fraction(
            scenario, index
        )
        rho_exact = str(exact)
        rho = float(exact)
    else:
        rho = task_rate / (servers * mu)

    out = {
        "status": STATUS_OK,
        "servers": servers,
        "service_rate_per_min": mu,
        "arrival_rate_per_min": lam,
        "rho": rho,
        "rho_exact": rho_exact,
        "stable": rho < 1,
        "ca2": ca2,
        "cs2": None,
        "pwait_erlang_c": None,
        "wq_mmc": None,
        "wq_allen_cunneen": None,
        "wq_kingman": None,
        "wq_mg1": None,
        "l_pk": None,
        "l_mmc": None,
    }

    if fork_join:
        out["status"] = STATUS_FORK_JOIN
        return out
    if rho >= 1:
        out["status"] = STATUS_UNSTABLE
        return out

    service_spec = scenario.stage_service(index)
    dist = build_service(service_spec)
    cs2 = dist.cv2
    out["cs2"] = cs2
    out["pwait_erlang_c"] = erlang_c_pwait(task_rate, mu, servers)
    wq = mmc_wq(task_rate, mu, servers)
    out["wq_mmc"] = wq
    out["wq_allen_cunneen"] = mgc_wq_allen_cunneen(task_rate, mu, servers, cs2)
    if ca2 is not None:
        out["wq_kingman"] = ggc_wq_kingman(task_rate, mu, servers, ca2, cs2)
    out["l_mmc"] = task_rate * (wq + 1.0 / mu)
    if servers == 1:
        mean_s = dist.mean
        second_moment = (cs2 + 1.0) * mean_s * mean_s
        out["wq_mg1"] = mg1_wq(task_rate, mean_s, second_moment)
        out["l_pk"] = pk_mean_jobs(task_rate, mu, cs2 * mean_s * mean_s).mean_jobs
    return out


def _agg(values: Sequence[float]) -> dict:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return {"mean": mean, "ci95": 0.0}
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return {"mean": mean, "ci95": 1.96 * math.sqrt(var / n)}


def _simulate(scenario: Scenario, seed: int, replications: int, horizon: float) -> list[MetricsReport]:
    stages = scenario.build_stages()
    arrivals = scenario.build_arrivals()
    mix = scenario.build_job_mix()
    reports = []
    for rep in range(replications):
        reports.append(
            run_simulation(
                stages,
                arrivals,
                horizon=horizon,
                seed=seed + rep,
                warmup=scenario.warmup_minutes,
                job_mix=mix,
                windows=scenario.windows,
            )
        )
    return reports


def _sim_stage_section(reports: list[MetricsReport], index: int) -> dict:
    stats = [r.stages[index] for r in reports]
    section = {
        "l": _agg([s.l for s in stats]),
        "lq": _agg([s.lq for s in stats]),
        "w": _agg([s.w for s in stats]),
        "wq": _agg([s.wq for s in stats]),
        "rho": _agg([s.rho for s in stats]),
        "throughput": _agg([s.throughput for s in stats]),
        "arrivals": _agg([float(s.arrivals) for s in stats]),
        "completions": _agg([float(s.completions) for s in stats]),
        "lq_windows": list(stats[0].lq_windows) if stats[0].lq_windows else [],
    }
    gaps = []
    for s in stats:
        if s.l > 0:
            gaps.append(abs(s.l - s.throughput * s.w) / s.l * 100.0)
    section["littles_gap_pct"] = max(gaps) if gaps else None
    return section


def _pct_delta(sim: Optional[float], ref: Optional[float]) -> Optional[float]:
    if sim is None or ref is None or ref == 0:
        return None
    return (sim - ref) / ref * 100.0


def _cost_section(scenario: Scenario, total_wq: Optional[float]) -> Optional[dict]:
    model = scenario.build_cost_model()
    if model is None or total_wq is None:
        return None
    lam = _arrival_rate_per_min(scenario)
    total_servers = sum(scenario.stage_fleet(i).total_servers for i in range(len(scenario.stages)))
    runner_cost = model.w1 * total_servers * model.horizon * model.runner_rate
    waiting_cost = model.w2 * (lam * model.horizon) * total_wq * model.wait_rate
    return {
        "runner_cost": runner_cost,
        "waiting_cost": waiting_cost,
        "total": runner_cost + waiting_cost,
        "wq_used": total_wq,
        "horizon_minutes": model.horizon,
    }


def _total_wq(sections: list[dict], key: str) -> Optional[float]:
    total = 0.0
    for s in sections:
        v = s.get(key)
        if v is None:
            return None
        total += v
    return total


def _reference_check(scenario: Scenario, computed_wq: Optional[float]) -> dict:
    ref = scenario.reference_wq_minutes
    out = {
        "reference_wq_minutes": ref,
        "computed_wq_minutes": computed_wq,
        "consistent": None,
        "note": None,
        "cost_with_reference": None,
        "cost_with_computed": None,
    }
    if ref is None:
        return out
    out["cost_with_reference"] = _cost_section(scenario, ref)
    if computed_wq is None:
        out["note"] = "reference W_q supplied but no analytic W_q is available to check it"
        return out
    out["cost_with_computed"] = _cost_section(scenario, computed_wq)
    consistent = abs(ref - computed_wq) <= 0.01 * computed_wq
    out["consistent"] = consistent
    if consistent:
        out["note"] = (
            f"reference W_q {ref:.4f} min matches the Erlang-C value "
            f"{computed_wq:.4f} min for these parameters"
        )
    else:
        out["note"] = (
            f"reference W_q {ref:.4f} min does not satisfy the Erlang-C formula for "
            f"these parameters (computed W_q = {computed_wq:.4f} min, ratio "
            f"{ref / computed_wq:.2f}); costs are shown with both values"
        )
    return out


def _sla_section(scenario: Scenario, analytic_wq: Optional[float], sim_wq: Optional[float]) -> dict:
    max_wait = scenario.sla.max_wait_minutes if scenario.sla else None
    return {
        "max_wait_minutes": max_wait,
        "analytic_wq": analytic_wq,
        "analytic_pass": (analytic_wq <= max_wait) if (max_wait is not None and analytic_wq is not None) else None,
        "simulated_wq": sim_wq,
        "simulated_pass": (sim_wq <= max_wait) if (max_wait is not None and sim_wq is not None) else None,
    }


def _analytic_sections(scenario: Scenario) -> list[dict]:
    lam = _arrival_rate_per_min(scenario)
    ca2 = _arrival_ca2(scenario)
    sections = []
    for i in range(len(scenario.stages)):
        # Downstream stages see the departure stream of the one before; we use
        # the renewal approximation ca2 = 1 there (exact for M/M/c departures).
        stage_ca2 = ca2 if i == 0 else 1.0
        sections.append(_stage_analytic(scenario, i, lam, stage_ca2))
    return sections


def _analytic_bottleneck(sections: list[dict]) -> int:
    best = 0
    for i, s in enumerate(sections):
        if s["rho"] > sections[best]["rho"]:
            best = i
    return best


def run_analysis(scenario: Scenario) -> dict:
    """Analytic-only report: closed-form metrics, cost, SLA, bottleneck."""
    sections = _analytic_sections(scenario)
    analytic_wq = _total_wq(sections, "wq_mmc")
    cost = _cost_section(scenario, analytic_wq)
    sla_min = None
    if scenario.sla is not None:
        servers, mu = _stage_equivalent(scenario, 0)
        lam = _arrival_rate_per_min(scenario)
        sla_min = min_runners_for_sla(lam, mu, scenario.build_sla())
    return {
        "kind": "analysis",
        "scenario": scenario_to_dict(scenario),
        "stages": [
            {"name": scenario.stages[i].name or f"stage{i}", "analytic": s}
            for i, s in enumerate(sections)
        ],
        "bottleneck_stage": _analytic_bottleneck(sections),
        "cost": cost,
        "sla": _sla_section(scenario, analytic_wq, None),
        "sla_min_runners": sla_min,
        "reference_wq_check": _reference_check(scenario, analytic_wq),
    }


def run_simulation_summary(
    scenario: Scenario,
    seed: Optional[int] = None,
    replications: Optional[int] = None,
    horizon_minutes: Optional[float] = None,
) -> dict:
    """Simulation-only report over the scenario's replications."""
    seed = scenario.seed if seed is None else seed
    replications = scenario.replications if replications is None else replications
    horizon = scenario.horizon_minutes if horizon_minutes is None else horizon_minutes
    reports = _simulate(scenario, seed, replications, horizon)
    stage_sections = [_sim_stage_section(reports, i) for i in range(len(scenario.stages))]
    sim_wq = _total_wq([{"wq": s["wq"]["mean"]} for s in stage_sections], "wq")
    cost = _cost_section(scenario, sim_wq)
    rho_means = [s["rho"]["mean"] for s in stage_sections]
    bottleneck = max(range(len(rho_means)), key=lambda i: (rho_means[i], -i))
    return {
        "kind": "simulation",
        "scenario": scenario_to_dict(scenario),
        "seed": seed,
        "replications": replications,
        "horizon_minutes": horizon,
        "stages": [
            {"name": scenario.stages[i].name or f"stage{i}", "simulated": s}
            for i, s in enumerate(stage_sections)
        ],
        "global": _global_section(reports),
        "bottleneck_stage": bottleneck,
        "cost": cost,
        "sla": _sla_section(scenario, None, sim_wq),
    }


def _global_section(reports: list[MetricsReport]) -> dict:
    lateness = [r.max_lateness for r in reports if r.max_lateness is not None]
    return {
        "jobs_arrived": _agg([float(r.jobs_arrived) for r in reports]),
        "jobs_completed": _agg([float(r.jobs_completed) for r in reports]),
        "measured_completions": _agg([float(r.measured_completions) for r in reports]),
        "max_lateness": max(lateness) if lateness else None,
        "wq_by_class": {
            cls: _agg([r.wq_by_class[cls] for r in reports])
            for cls in ("critical", "normal")
        },
    }


def run_report(
    scenario: Scenario,
    seed: Optional[int] = None,
    replications: Optional[int] = None,
    horizon_minutes: Optional[float] = None,
) -> dict:
    """Full side-by-side report: analytic columns, simulation, deltas, cost, SLA."""
    seed = scenario.seed if seed is None else seed
    replications = scenario.replications if replications is None else replications
    horizon = scenario.horizon_minutes if horizon_minutes is None else horizon_minutes

    analytic_sections = _analytic_sections(scenario)
    reports = _simulate(scenario, seed, replications, horizon)
    stages = []
    for i in range(len(scenario.stages)):
        sim = _sim_stage_section(reports, i)
        ana = analytic_sections[i]
        stages.append(
            {
                "name": scenario.stages[i].name or f"stage{i}",
                "analytic": ana,
                "simulated": sim,
                "delta": {
                    "wq_sim_vs_mmc_pct": _pct_delta(sim["wq"]["mean"], ana["wq_mmc"]),
                    "l_sim_vs_pk_pct": _pct_delta(sim["l"]["mean"], ana["l_pk"]),
                    "rho_sim_vs_analytic": _pct_delta(sim["rho"]["mean"], ana["rho"]),
                },
            }
        )

    analytic_wq = _total_wq(analytic_sections, "wq_mmc")
    sim_wq = _total_wq([{"wq": s["simulated"]["wq"]["mean"]} for s in stages], "wq")
    rho_means = [s["simulated"]["rho"]["mean"] for s in stages]
    sim_bottleneck = max(range(len(rho_means)), key=lambda i: (rho_means[i], -i))

    return {
        "kind": "report",
        "scenario": scenario_to_dict(scenario),
        "seed": seed,
        "replications": replications,
        "horizon_minutes": horizon,
        "stages": stages,
        "global": _global_section(reports),
        "bottleneck_stage_analytic": _analytic_bottleneck(analytic_sections),
        "bottleneck_stage_simulated": sim_bottleneck,
        "cost_analytic": _cost_section(scenario, analytic_wq),
        "cost_simulated": _cost_section(scenario, sim_wq),
        "sla": _sla_section(scenario, analytic_wq, sim_wq),
        "reference_wq_check": _reference_check(scenario, analytic_wq),
    }


def optimize_report(scenario: Scenario) -> dict:
    """Cost/SLA optimization over the runner count of the first stage."""
    if scenario.cost is None:
        raise ScenarioError("scenario has no cost section; nothing to optimize")
    lam = _arrival_rate_per_min(scenario)
    _, mu = _stage_equivalent(scenario, 0)
    model = scenario.build_cost_model()
    sla = scenario.build_sla()
    result = optimal_runner_count(lam, mu, model, sla)
    sla_min = min_runners_for_sla(lam, mu, sla) if sla is not None else None
    sweep_rows = None
    if scenario.developer_sweep is not None:
        rows = developer_scaling_sweep(
            scenario.developer_sweep.developers,
            scenario.developer_sweep.lambda_per_dev_per_hour / 60.0,
            mu,
            model,
            sla,
        )
        sweep_rows = [
            {
                "developers": r.developers,
                "arrival_rate_per_min": r.arrival_rate,
                "best_count": r.best_count,
                "total_cost": r.total_cost,
            }
            for r in rows
        ]
    return {
        "kind": "optimization",
        "scenario": scenario_to_dict(scenario),
        "arrival_rate_per_min": lam,
        "service_rate_per_min": mu,
        "sla_min_runners": sla_min,
        "best_count": result.best_count,
        "best_cost": result.best_cost,
        "curve": [[c, cost] for c, cost in result.curve],
        "developer_sweep": sweep_rows,
    }


_VARIANT_KEYS = {"name", "discipline", "dispatch", "runners", "scaling"}


def _apply_variant(scenario: Scenario, variant: dict) -> Scenario:
    unknown = set(variant) - _VARIANT_KEYS
    if unknown:
        raise ScenarioError(f"variant {variant.get('name')!r}: unknown keys {sorted(unknown)}")
    if "name" not in variant:
        raise ScenarioError("every variant needs a name")
    new_stages = []
    for stage in scenario.stages:
        changes: dict = {}
        if "discipline" in variant:
            changes["discipline"] = variant["discipline"]
        if "dispatch" in variant:
            changes["dispatch"] = variant["dispatch"]
        if "runners" in variant:
            changes["runners"] = variant["runners"]
            changes["pools"] = None
        if "scaling" in variant:
            if variant["scaling"] is None:
                changes["scaling"] = ScalingSpec(kind="none")
            else:
                changes["scaling"] = _parse_scaling(
                    variant["scaling"], f"variant {variant['name']!r} scaling"
                )
        new_stages.append(replace(stage, **changes) if changes else stage)
    out = replace(scenario, stages=tuple(new_stages))
    # Revalidate the assembled configuration so bad variants fail loudly.
    try:
        out.build_stages()
    except ValueError as exc:
        raise ScenarioError(f"variant {variant['name']!r}: {exc}") from exc
    return out


def compare_policies(
    scenario: Scenario,
    variants: Sequence[dict],
    seed: Optional[int] = None,
    replications: Optional[int] = None,
    horizon_minutes: Optional[float] = None,
) -> dict:
    """Common-random-numbers comparison of scheduling/scaling variants.

    Every variant runs with the same replication seeds; because arrival and
    service draws live on their own random streams, all variants see the
    identical workload and the table differences isolate the policy effect.
    """
    if len(variants) < 2:
        raise ScenarioError("need at least 2 variants to compare")
    seed = scenario.seed if seed is None else seed
    replications = scenario.replications if replications is None else replications
    horizon = scenario.horizon_minutes if horizon_minutes is None else horizon_minutes
    rows = []
    for variant in variants:
        modified = _apply_variant(scenario, variant)
        reports = _simulate(modified, seed, replications, horizon)
        wq_totals = []
        w_totals = []
        for r in reports:
            wq_totals.append(math.fsum(s.wq for s in r.stages))
            w_totals.append(math.fsum(s.w for s in r.stages))
        sim_wq = _agg(wq_totals)
        cost = _cost_section(modified, sim_wq["mean"])
        max_wait = scenario.sla.max_wait_minutes if scenario.sla else None
        rows.append(
            {
                "name": variant["name"],
                "wq": sim_wq,
                "w": _agg(w_totals),
                "cost_total": cost["total"] if cost else None,
                "sla_met": (sim_wq["mean"] <= max_wait) if max_wait is not None else None,
                "completions": _agg([float(r.jobs_completed) for r in reports]),
                "max_lateness": max(
                    (r.max_lateness for r in reports if r.max_lateness is not None),
                    default=None,
                ),
            }
        )
    return {
        "kind": "comparison",
        "scenario": scenario_to_dict(scenario),
        "seed": seed,
        "replications": replications,
        "horizon_minutes": horizon,
        "variants": rows,
    }


# -- rendering -------------------------------------------------------------


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _fmt(value, width: int = 10, digits: int = 4) -> str:
    if value is None:
        return "n/a".rjust(width)
    if isinstance(value, bool):
        return ("yes" if value else "no").rjust(width)
    if isinstance(value, int):
        return str(value).rjust(width)
    return f"{value:.{digits}f}".rjust(width)


def _fmt_ci(agg: Optional[dict], width: int = 18) -> str:
    if agg is None:
        return "n/a".rjust(width)
    return f"{agg['mean']:.4f} ±{agg['ci95']:.4f}".rjust(width)


def _analytic_lines(stage: dict) -> list[str]:
    a = stage["analytic"]
    lines = [f"  stage {stage['name']}: status={a['status']}"]
    rho_exact = f" (= {a['rho_exact']})" if a.get("rho_exact") else ""
    lines.append(
        f"    rho={a['rho']:.4f}{rho_exact}  servers={a['servers']}"
        f"  lam={a['arrival_rate_per_min']:.4f}/min  mu={a['service_rate_per_min']:.4f}/min"
    )
    lines.append(
        "    Pwait=" + _fmt(a["pwait_erlang_c"], 8)
        + "  Wq[M/M/c]=" + _fmt(a["wq_mmc"], 8)
        + "  Wq[M/G/c]=" + _fmt(a["wq_allen_cunneen"], 8)
        + "  Wq[G/G/c]=" + _fmt(a["wq_kingman"], 8)
        + "  Wq[M/G/1]=" + _fmt(a["wq_mg1"], 8)
    )
    return lines


def _render_analysis(report: dict) -> list[str]:
    lines = [f"Analytic report for scenario {report['scenario']['name']!r}", ""]
    for stage in report["stages"]:
        lines.extend(_analytic_lines(stage))
    lines.append(f"  bottleneck stage: {report['bottleneck_stage']}")
    if report.get("sla_min_runners") is not None:
        lines.append(f"  minimum runners meeting the SLA: {report['sla_min_runners']}")
    lines.extend(_cost_lines("cost (analytic Wq)", report.get("cost")))
    lines.extend(_sla_lines(report["sla"]))
    lines.extend(_reference_lines(report["reference_wq_check"]))
    return lines


def _cost_lines(title: str, cost: Optional[dict]) -> list[str]:
    if cost is None:
        return []
    return [
        f"  {title}: runners ${cost['runner_cost']:.2f}"
        f" + waiting ${cost['waiting_cost']:.2f}"
        f" = ${cost['total']:.2f} per {cost['horizon_minutes']:.0f} min"
        f" (Wq used: {cost['wq_used']:.4f} min)"
    ]


def _sla_lines(sla: dict) -> list[str]:
    if sla["max_wait_minutes"] is None:
        return []
    lines = [f"  SLA: mean wait <= {sla['max_wait_minutes']} min"]
    if sla["analytic_pass"] is not None:
        lines.append(
            f"    analytic Wq {sla['analytic_wq']:.4f} min -> "
            + ("PASS" if sla["analytic_pass"] else "FAIL")
        )
    if sla["simulated_pass"] is not None:
        lines.append(
            f"    simulated Wq {sla['simulated_wq']:.4f} min -> "
            + ("PASS" if sla["simulated_pass"] else "FAIL")
        )
    return lines


def _reference_lines(check: dict) -> list[str]:
    if check["reference_wq_minutes"] is None:
        return []
    lines = [f"  reference Wq check: {check['note']}"]
    for label, key in (("reference", "cost_with_reference"), ("computed", "cost_with_computed")):
        cost = check.get(key)
        if cost:
            lines.append(
                f"    cost with {label} Wq ({cost['wq_used']:.4f} min):"
                f" ${cost['total']:.2f} per {cost['horizon_minutes']:.0f} min"
            )
    return lines


def _sim_lines(stage: dict) -> list[str]:
    s = stage["simulated"]
    lines = [
        f"  stage {stage['name']}:"
        f" L={_fmt_ci(s['l'], 16)} Lq={_fmt_ci(s['lq'], 16)}"
        f" W={_fmt_ci(s['w'], 16)} Wq={_fmt_ci(s['wq'], 16)}"
    ]
    lines.append(
        f"    rho={s['rho']['mean']:.4f}  throughput={s['throughput']['mean']:.4f}/min"
        + (
            f"  Little's-law gap={s['littles_gap_pct']:.3f}%"
            if s.get("littles_gap_pct") is not None
            else ""
        )
    )
    if s.get("lq_windows"):
        lines.append("    Lq windows: " + ", ".join(f"{v:.2f}" for v in s["lq_windows"]))
    return lines


def render_text(report: dict) -> str:
    kind = report.get("kind")
    if kind == "analysis":
        lines = _render_analysis(report)
    elif kind == "simulation":
        lines = [
            f"Simulation report for scenario {report['scenario']['name']!r}"
            f" (seed {report['seed']}, {report['replications']} replication(s),"
            f" horizon {report['horizon_minutes']:.0f} min)",
            "",
        ]
        for stage in report["stages"]:
            lines.extend(_sim_lines(stage))
        lines.append(f"  bottleneck stage: {report['bottleneck_stage']}")
        lines.extend(_global_lines(report["global"]))
        lines.extend(_cost_lines("cost (simulated Wq)", report.get("cost")))
        lines.extend(_sla_lines(report["sla"]))
    elif kind == "report":
        lines = [
            f"Report for scenario {report['scenario']['name']!r}"
            f" (seed {report['seed']}, {report['replications']} replication(s),"
            f" horizon {report['horizon_minutes']:.0f} min)",
            "",
            "analytic:",
        ]
        for stage in report["stages"]:
            lines.extend(_analytic_lines(stage))
        lines.append("")
        lines.append("simulated:")
        for stage in report["stages"]:
            lines.extend(_sim_lines(stage))
        lines.append("")
        lines.append("analytic vs simulated:")
        for stage in report["stages"]:
            d = stage["delta"]

            def pct(v):
                return f"{v:+.2f}%" if v is not None else "n/a"

            lines.append(
                f"  stage {stage['name']}: Wq delta={pct(d['wq_sim_vs_mmc_pct'])}"
                f"  L-vs-PK delta={pct(d['l_sim_vs_pk_pct'])}"
            )
        lines.append(
            f"  bottleneck: analytic stage {report['bottleneck_stage_analytic']},"
            f" simulated stage {report['bottleneck_stage_simulated']}"
        )
        lines.extend(_global_lines(report["global"]))
        lines.extend(_cost_lines("cost (analytic Wq)", report.get("cost_analytic")))
        lines.extend(_cost_lines("cost (simulated Wq)", report.get("cost_simulated")))
        lines.extend(_sla_lines(report["sla"]))
        lines.extend(_reference_lines(report["reference_wq_check"]))
    elif kind == "optimization":
        lines = [f"Optimization report for scenario {report['scenario']['name']!r}", ""]
        lines.append(
            f"  lam={report['arrival_rate_per_min']:.4f}/min"
            f"  mu={report['service_rate_per_min']:.4f}/min"
        )
        if report["sla_min_runners"] is not None:
            lines.append(f"  SLA floor: {report['sla_min_runners']} runners")
        lines.append(
            f"  optimal runner count: {report['best_count']}"
            f" at ${report['best_cost']:.2f} per horizon"
        )
        lines.append("  cost curve:")
        for c, cost in report["curve"]:
            marker = "  <-- optimum" if c == report["best_count"] else ""
            lines.append(f"    c={c:4d}  ${cost:10.2f}{marker}")
        if report.get("developer_sweep"):
            lines.append("  developer sweep:")
            for row in report["developer_sweep"]:
                lines.append(
                    f"    d={row['developers']:6.1f}  lam={row['arrival_rate_per_min']:.4f}/min"
                    f"  c*={row['best_count']:4d}  ${row['total_cost']:.2f}"
                )
    elif kind == "comparison":
        lines = [
            f"Policy comparison for scenario {report['scenario']['name']!r}"
            f" (seed {report['seed']}, {report['replications']} replication(s))",
            "",
            f"  {'variant':<16} {'Wq (min)':>18} {'W (min)':>18} {'cost':>12} {'SLA':>5}",
        ]
        for row in report["variants"]:
            cost = f"${row['cost_total']:.2f}" if row["cost_total"] is not None else "n/a"
            sla = "pass" if row["sla_met"] else ("fail" if row["sla_met"] is not None else "n/a")
            lines.append(
                f"  {row['name']:<16} {_fmt_ci(row['wq'])} {_fmt_ci(row['w'])}"
                f" {cost:>12} {sla:>5}"
            )
    else:
        raise ValueError(f"unknown report kind {kind!r}")
    return "\n".join(lines) + "\n"


def _global_lines(g: dict) -> list[str]:
    lines = [
        f"  jobs: arrived {g['jobs_arrived']['mean']:.0f},"
        f" completed {g['jobs_completed']['mean']:.0f},"
        f" measured {g['measured_completions']['mean']:.0f}"
    ]
    if g["max_lateness"] is not None:
        lines.append(f"  max lateness: {g['max_lateness']:.4f} min")
    crit = g["wq_by_class"]["critical"]
    norm = g["wq_by_class"]["normal"]
    if crit["mean"] > 0 or norm["mean"] > 0:
        lines.append(
            f"  per-class Wq: critical {crit['mean']:.4f} min, normal {norm['mean']:.4f} min"
        )
    return lines
