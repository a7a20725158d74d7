"""Tests for the streaming rate estimators."""

import math

import numpy as np
import pytest

from fleetq.errors import DegenerateDataError, InsufficientDataError
from fleetq.forecast import (
    RateSeries,
    SmootherState,
    estimate_rate_and_cv2,
    exp_smoothing_step,
    sma_forecast,
)


# -- simple moving average ---------------------------------------------------


def test_sma_mean_of_window():
    assert sma_forecast(RateSeries.from_rates([10, 20, 30]), window=3) == 20


def test_sma_constant_series():
    assert sma_forecast(RateSeries.from_rates([7.5] * 10), window=4) == 7.5


def test_sma_last_two():
    assert sma_forecast(RateSeries.from_rates([0, 0, 60]), window=2) == 30


def test_sma_insufficient_data():
    with pytest.raises(InsufficientDataError):
        sma_forecast(RateSeries.from_rates([1, 2]), window=3)


def test_sma_bad_window():
    with pytest.raises(ValueError):
        sma_forecast(RateSeries.from_rates([1, 2]), window=0)


def test_sma_within_window_bounds_random_series():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        rates = rng.uniform(0, 100, size=n)
        w = int(rng.integers(1, n + 1))
        series = RateSeries.from_rates(rates)
        value = sma_forecast(series, w)
        tail = rates[-w:]
        assert tail.min() - 1e-12 <= value <= tail.max() + 1e-12


def test_rate_series_validation():
    with pytest.raises(ValueError):
        RateSeries(((0, 1.0), (0, 2.0)))  # non-increasing minutes
    with pytest.raises(ValueError):
        RateSeries(((0, -1.0),))


# -- exponential smoothing ----------------------------------------------------


def test_smoothing_midpoint():
    state = SmootherState(alpha=0.5, estimate=20.0)
    assert exp_smoothing_step(state, 10.0).estimate == 15.0


def test_smoothing_fixed_point():
    state = SmootherState(alpha=0.3, estimate=12.0)
    assert exp_smoothing_step(state, 12.0).estimate == 12.0


def test_smoothing_arithmetic():
    state = SmootherState(alpha=0.2, estimate=10.0)
    assert math.isclose(exp_smoothing_step(state, 0.0).estimate, 8.0, rel_tol=1e-12)


def test_smoothing_alpha_domain():
    for alpha in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            SmootherState(alpha=alpha, estimate=1.0)


def test_smoothing_geometric_convergence():
    # With constant input v the error shrinks exactly geometrically at 1-alpha.
    for alpha in (0.1, 0.5, 0.9):
        v = 5.0
        state = SmootherState(alpha=alpha, estimate=50.0)
        initial_gap = abs(state.estimate - v)
        for t in range(1, 40):
            state = exp_smoothing_step(state, v)
            bound = (1 - alpha) ** t * initial_gap
            assert abs(state.estimate - v) <= bound * (1 + 1e-9) + 1e-15


def test_smoothing_stays_in_envelope():
    rng = np.random.default_rng(11)
    values = rng.uniform(2.0, 9.0, size=200)
    state = SmootherState(alpha=0.4, estimate=values[0])
    for v in values[1:]:
        state = exp_smoothing_step(state, float(v))
        assert 2.0 - 1e-9 <= state.estimate <= 9.0 + 1e-9


# -- rate and Cv^2 estimation ---------------------------------------------------


def test_estimate_equal_gaps():
    timestamps = [0.0, 3.0, 6.0, 9.0]
    rate, cv2 = estimate_rate_and_cv2(timestamps, kind="timestamps")
    assert math.isclose(rate, 1 / 3, rel_tol=1e-12)
    assert cv2 == 0


def test_estimate_hand_computed_gaps():
    # Gaps [1, 3]: mean 2, unbiased variance 2, Cv^2 = 0.5.
    mean, cv2 = estimate_rate_and_cv2([1.0, 3.0], kind="durations")
    assert mean == 2.0
    assert math.isclose(cv2, 0.5, rel_tol=1e-12)


def test_estimate_exponential_gaps_cv2_near_one():
    rng = np.random.default_rng(42)
    gaps = rng.exponential(1.0, size=100_000)
    timestamps = np.concatenate([[0.0], np.cumsum(gaps)])
    rate, cv2 = estimate_rate_and_cv2(timestamps.tolist(), kind="timestamps")
    assert math.isclose(rate, 1.0, rel_tol=0.02)
    assert abs(cv2 - 1.0) <= 0.05


def test_estimate_insufficient_data():
    with pytest.raises(InsufficientDataError):
        estimate_rate_and_cv2([1.0], kind="timestamps")
    with pytest.raises(InsufficientDataError):
        # Two timestamps give one gap; the unbiased estimator needs two.
        estimate_rate_and_cv2([1.0, 2.0], kind="timestamps")
    with pytest.raises(InsufficientDataError):
        estimate_rate_and_cv2([1.0], kind="durations")


def test_estimate_zero_mean_degenerate():
    with pytest.raises(DegenerateDataError):
        estimate_rate_and_cv2([5.0, 5.0, 5.0], kind="timestamps")  # all gaps zero
    with pytest.raises(DegenerateDataError):
        estimate_rate_and_cv2([0.0, 0.0], kind="durations")


def test_estimate_scale_consistency():
    rng = np.random.default_rng(3)
    gaps = rng.exponential(2.0, size=500)
    for scale in (0.5, 3.0, 60.0):
        base_mean, base_cv2 = estimate_rate_and_cv2(gaps.tolist(), kind="durations")
        scaled_mean, scaled_cv2 = estimate_rate_and_cv2(
            (gaps * scale).tolist(), kind="durations"
        )
        assert math.isclose(scaled_mean, base_mean * scale, rel_tol=1e-9)
        assert math.isclose(scaled_cv2, base_cv2, rel_tol=1e-9)


def test_estimate_unknown_kind():
    with pytest.raises(ValueError):
        estimate_rate_and_cv2([1.0, 2.0], kind="nope")
