"""Tests for the closed-form queueing formulas."""

import math
from fractions import Fraction

import numpy as np
import pytest

from fleetq.analytic import (
    HeterogeneousFleet,
    QueueParams,
    effective_service_rate,
    erlang_c_pwait,
    forkjoin_expected_completion,
    ggc_wq_kingman,
    littles_law,
    mg1_wq,
    mgc_wq_allen_cunneen,
    mmc_wq,
    pk_mean_jobs,
    stability_and_bottleneck,
    utilization,
)
from fleetq.errors import UnstableSystemError


def erlang_c_series_exact(lam: Fraction, mu: Fraction, c: int) -> Fraction:
    """Independent oracle: the a^k/k! series summed in exact rationals."""
    a = lam / mu
    rho = a / c
    terms = [a**k / math.factorial(k) for k in range(c)]
    last = a**c / math.factorial(c)
    return last / ((1 - rho) * sum(terms) + last)


# -- utilization -----------------------------------------------------------


def test_utilization_case_study():
    assert utilization(Fraction(20, 60), Fraction(1, 5), 5) == Fraction(1, 3)
    assert math.isclose(utilization(20 / 60, 0.2, 5), 1 / 3, rel_tol=1e-12)


def test_utilization_zero_arrivals():
    assert utilization(0, 0.2, 5) == 0


def test_utilization_sensitivity():
    assert utilization(Fraction(30, 60), Fraction(1, 5), 5) == Fraction(1, 2)


def test_utilization_no_upper_clamp():
    assert utilization(3.0, 1.0, 2) == 1.5


def test_utilization_domain_errors():
    with pytest.raises(ValueError):
        utilization(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        utilization(1.0, -1.0, 1)
    with pytest.raises(ValueError):
        utilization(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        utilization(-1.0, 1.0, 1)


# -- Erlang C ----------------------------------------------------------------


def test_erlang_c_mm1_equals_rho():
    assert math.isclose(erlang_c_pwait(0.5, 1.0, 1), 0.5, rel_tol=1e-12)


def test_erlang_c_case_study_matches_exact_series():
    exact = erlang_c_series_exact(Fraction(1, 3), Fraction(1, 5), 5)
    assert exact == Fraction(625, 20643)  # frozen from the oracle
    value = erlang_c_pwait(1 / 3, 0.2, 5)
    assert math.isclose(value, float(exact), rel_tol=1e-12)
    assert math.isclose(value, 0.0303, abs_tol=5e-5)


def test_erlang_c_matches_exact_series_on_grid():
    for c in (1, 2, 3, 7, 20):
        for rho_num in (1, 5, 9):
            lam = Fraction(rho_num, 10) * c  # rho in {0.1, 0.5, 0.9}, mu = 1
            exact = erlang_c_series_exact(lam, Fraction(1), c)
            got = erlang_c_pwait(float(lam), 1.0, c)
            assert math.isclose(got, float(exact), rel_tol=1e-10), (c, rho_num)


def test_erlang_c_zero_arrivals():
    assert erlang_c_pwait(0.0, 0.2, 5) == 0


def test_erlang_c_unstable():
    with pytest.raises(UnstableSystemError):
        erlang_c_pwait(1.0, 0.2, 5)
    with pytest.raises(UnstableSystemError):
        erlang_c_pwait(1.2, 0.2, 5)


def test_erlang_c_result_in_unit_interval():
    for lam in (0.01, 0.5, 0.9, 0.99):
        p = erlang_c_pwait(lam, 1.0, 1)
        assert 0 <= p <= 1


def test_erlang_c_monotone_in_lambda():
    values = [erlang_c_pwait(lam, 1.0, 4) for lam in np.linspace(0.1, 3.9, 20)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_erlang_c_monotone_decreasing_in_servers():
    values = [erlang_c_pwait(1.5, 1.0, c) for c in range(2, 12)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_erlang_c_huge_server_count_does_not_overflow():
    # Overload regimes near and far from saturation, all at c = 10_000.
    assert 0 <= erlang_c_pwait(3000.0, 1.0, 10_000) <= 1
    p = erlang_c_pwait(9990.0, 1.0, 10_000)
    assert 0 < p <= 1 and math.isfinite(p)


# -- M/M/c waiting time ------------------------------------------------------


def test_mmc_wq_mm1_closed_form():
    # M/M/1: Wq = rho / (mu (1 - rho))
    assert math.isclose(mmc_wq(0.5, 1.0, 1), 1.0, rel_tol=1e-12)


def test_mmc_wq_mm1_closed_form_grid():
    for rho in (0.1, 0.3, 0.5, 0.7, 0.9):
        expected = rho / (1.0 * (1 - rho))
        assert math.isclose(mmc_wq(rho, 1.0, 1), expected, rel_tol=1e-12)


def test_mmc_wq_case_study_value():
    exact = erlang_c_series_exact(Fraction(1, 3), Fraction(1, 5), 5) / (
        5 * Fraction(1, 5) - Fraction(1, 3)
    )
    assert exact == Fraction(625, 13762)  # ~0.045415 min; frozen from the oracle
    assert math.isclose(mmc_wq(1 / 3, 0.2, 5), float(exact), rel_tol=1e-12)


def test_mmc_wq_zero_arrivals():
    assert mmc_wq(0.0, 0.2, 5) == 0


def test_mmc_wq_unstable():
    with pytest.raises(UnstableSystemError):
        mmc_wq(1.0, 0.2, 5)


# -- Allen-Cunneen -----------------------------------------------------------


def test_allen_cunneen_cs2_one_equals_mmc_exactly():
    for lam, mu, c in ((0.5, 1.0, 1), (1 / 3, 0.2, 5), (2.5, 1.0, 3)):
        assert mgc_wq_allen_cunneen(lam, mu, c, cs2=1.0) == mmc_wq(lam, mu, c)


def test_allen_cunneen_deterministic_halves_mm1():
    assert math.isclose(mgc_wq_allen_cunneen(0.5, 1.0, 1, cs2=0.0), 0.5, rel_tol=1e-12)


def test_allen_cunneen_heavy_tail_scales_up():
    assert math.isclose(mgc_wq_allen_cunneen(0.5, 1.0, 1, cs2=3.0), 2.0, rel_tol=1e-12)


def test_allen_cunneen_rejects_negative_cs2():
    with pytest.raises(ValueError):
        mgc_wq_allen_cunneen(0.5, 1.0, 1, cs2=-0.1)


# -- Kingman -------------------------------------------------------------------


def test_kingman_reduces_to_mm1():
    assert math.isclose(ggc_wq_kingman(0.5, 1.0, 1, ca2=1.0, cs2=1.0), 1.0, rel_tol=1e-12)


def test_kingman_deterministic_never_queues():
    assert ggc_wq_kingman(0.5, 1.0, 2, ca2=0.0, cs2=0.0) == 0


def test_kingman_md1_matches_pollaczek_khinchine():
    # M/D/1: Kingman with ca2=1, cs2=0 equals the exact M/D/1 value.
    got = ggc_wq_kingman(0.5, 1.0, 1, ca2=1.0, cs2=0.0)
    assert math.isclose(got, mg1_wq(0.5, 1.0, 1.0), rel_tol=1e-12)
    assert math.isclose(got, 0.5, rel_tol=1e-12)


def test_kingman_equals_mg1_for_any_cs2_at_c1():
    # Algebraic identity at c=1, ca2=1: both reduce to lambda E[S^2] / (2(1-rho)).
    for lam in (0.2, 0.5, 0.8):
        for mean_s in (0.5, 1.0):
            for cs2 in (0.0, 0.5, 1.0, 4.0):
                if lam * mean_s >= 1:
                    continue
                second = (cs2 + 1) * mean_s * mean_s
                a = ggc_wq_kingman(lam, 1 / mean_s, 1, ca2=1.0, cs2=cs2)
                b = mg1_wq(lam, mean_s, second)
                assert math.isclose(a, b, rel_tol=1e-12), (lam, mean_s, cs2)


def test_kingman_unstable():
    with pytest.raises(UnstableSystemError):
        ggc_wq_kingman(2.0, 1.0, 2, ca2=1.0, cs2=1.0)


# -- M/G/1 ---------------------------------------------------------------------


def test_mg1_wq_exponential_matches_mm1():
    assert math.isclose(mg1_wq(0.5, 1.0, 2.0), 1.0, rel_tol=1e-12)


def test_mg1_wq_deterministic():
    assert math.isclose(mg1_wq(0.5, 1.0, 1.0), 0.5, rel_tol=1e-12)


def test_mg1_wq_zero_arrivals():
    assert mg1_wq(0.0, 1.0, 2.0) == 0


def test_mg1_wq_errors():
    with pytest.raises(UnstableSystemError):
        mg1_wq(1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        mg1_wq(0.5, 1.0, 0.5)  # E[S^2] < E[S]^2


# -- Pollaczek-Khinchine mean jobs ---------------------------------------------


def test_pk_exponential_matches_mm1():
    result = pk_mean_jobs(0.5, 1.0, 1.0)
    assert math.isclose(result.mean_jobs, 1.0, rel_tol=1e-12)  # rho/(1-rho)


def test_pk_exponential_grid():
    for rho in (0.1, 0.3, 0.5, 0.7, 0.9):
        result = pk_mean_jobs(rho, 1.0, 1.0)
        assert math.isclose(result.mean_jobs, rho / (1 - rho), rel_tol=1e-12)


def test_pk_deterministic():
    result = pk_mean_jobs(0.5, 1.0, 0.0)
    assert math.isclose(result.mean_jobs, 0.75, rel_tol=1e-12)
    # The reduced variant drops the rho^2 term and misses the M/M/1 check.
    assert math.isclose(result.mean_jobs_simplified, 0.5, rel_tol=1e-12)


def test_pk_simplified_variant_fails_mm1_check():
    result = pk_mean_jobs(0.5, 1.0, 1.0)
    assert not math.isclose(result.mean_jobs_simplified, 1.0, rel_tol=1e-6)


def test_pk_zero_arrivals():
    assert pk_mean_jobs(0.0, 1.0, 1.0).mean_jobs == 0


def test_pk_unstable():
    with pytest.raises(UnstableSystemError):
        pk_mean_jobs(1.0, 1.0, 1.0)


# -- Little's law --------------------------------------------------------------


def test_littles_law_direct_product():
    assert littles_law(20.0, 0.1) == 2.0


def test_littles_law_zero():
    assert littles_law(0.0, 123.0) == 0


def test_littles_law_rejects_negative():
    with pytest.raises(ValueError):
        littles_law(-1.0, 1.0)
    with pytest.raises(ValueError):
        littles_law(1.0, -1.0)


# -- heterogeneous fleets -------------------------------------------------------


def test_effective_rate_homogeneous():
    assert effective_service_rate([(5, 0.2)]).mu_eff == 1.0


def test_effective_rate_mixed():
    cap = effective_service_rate([(2, 0.5), (3, 0.1)])
    assert math.isclose(cap.mu_eff, 1.3, rel_tol=1e-12)


def test_effective_rate_symmetry():
    assert effective_service_rate([(1, 1.0), (1, 1.0)]).mu_eff == 2.0


def test_effective_rate_reports_rho():
    cap = effective_service_rate([(2, 0.5), (3, 0.1)], arrival_rate=0.65)
    assert math.isclose(cap.rho, 0.5, rel_tol=1e-12)
    assert effective_service_rate([(1, 1.0)]).rho is None


def test_effective_rate_empty_fleet():
    with pytest.raises(ValueError):
        effective_service_rate([])
    with pytest.raises(ValueError):
        HeterogeneousFleet(())


# -- stability and bottleneck ----------------------------------------------------


def test_bottleneck_argmax():
    report = stability_and_bottleneck(
        [(1 / 3, 0.2, 5), (0.9, 1.0, 1), (0.5, 1.0, 1)]
    )
    assert report.bottleneck == 1
    assert report.all_stable
    assert [round(s.rho, 4) for s in report.stages] == [0.3333, 0.9, 0.5]


def test_bottleneck_unstable_stage_flagged():
    report = stability_and_bottleneck([(0.5, 1.0, 1), (1.2, 1.0, 1)])
    assert not report.stages[1].stable
    assert report.stages[0].stable
    assert report.bottleneck == 1
    assert not report.all_stable


def test_bottleneck_single_stage():
    assert stability_and_bottleneck([(0.5, 1.0, 1)]).bottleneck == 0


def test_bottleneck_tie_goes_to_lowest_index():
    assert stability_and_bottleneck([(0.5, 1.0, 1), (0.5, 1.0, 1)]).bottleneck == 0


def test_bottleneck_empty_errors():
    with pytest.raises(ValueError):
        stability_and_bottleneck([])


# -- fork-join --------------------------------------------------------------------


def test_forkjoin_single_subtask():
    assert forkjoin_expected_completion(1, 1.0) == 1.0


def test_forkjoin_harmonic_values():
    assert math.isclose(forkjoin_expected_completion(2, 1.0), 1.5, rel_tol=1e-12)
    assert math.isclose(forkjoin_expected_completion(4, 2.0), 25 / 24, rel_tol=1e-12)


def test_forkjoin_monte_carlo_oracle():
    rng = np.random.default_rng(20240805)
    for k in (2, 4):
        draws = rng.exponential(1.0, size=(1_000_000, k)).max(axis=1)
        assert math.isclose(
            forkjoin_expected_completion(k, 1.0), draws.mean(), rel_tol=0.01
        )


def test_forkjoin_monotone_in_fanout():
    values = [forkjoin_expected_completion(k, 1.0) for k in range(1, 20)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_forkjoin_domain_errors():
    with pytest.raises(ValueError):
        forkjoin_expected_completion(0, 1.0)
    with pytest.raises(ValueError):
        forkjoin_expected_completion(2, 0.0)


# -- unstable-error boundary -------------------------------------------------------


def test_unstable_error_exactly_at_rho_one():
    # rho >= 1 raises, rho < 1 never does, for every delay formula.
    cases_raise = [(1.0, 1.0, 1), (2.0, 1.0, 2), (1.000001, 1.0, 1)]
    cases_ok = [(0.999, 1.0, 1), (1.99, 1.0, 2)]
    for lam, mu, c in cases_raise:
        for fn in (
            lambda: erlang_c_pwait(lam, mu, c),
            lambda: mmc_wq(lam, mu, c),
            lambda: mgc_wq_allen_cunneen(lam, mu, c, 1.0),
            lambda: ggc_wq_kingman(lam, mu, c, 1.0, 1.0),
        ):
            with pytest.raises(UnstableSystemError):
                fn()
    for lam, mu, c in cases_ok:
        erlang_c_pwait(lam, mu, c)
        mmc_wq(lam, mu, c)
        mgc_wq_allen_cunneen(lam, mu, c, 1.0)
        ggc_wq_kingman(lam, mu, c, 1.0, 1.0)


# -- QueueParams -----------------------------------------------------------------


def test_queue_params_reports_rho():
    p = QueueParams(arrival_rate=1 / 3, service_rate=0.2, servers=5)
    assert math.isclose(p.rho, 1 / 3, rel_tol=1e-12)
    assert math.isclose(p.offered_load, 5 / 3, rel_tol=1e-12)


def test_queue_params_validation():
    with pytest.raises(ValueError):
        QueueParams(arrival_rate=-1.0, service_rate=1.0, servers=1)
    with pytest.raises(ValueError):
        QueueParams(arrival_rate=1.0, service_rate=1.0, servers=1, ca2=-0.5)
