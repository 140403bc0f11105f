import math

import numpy as np
import pytest

from renewalrisk.marginals import Deterministic, Exponential, Pareto, Weibull
from renewalrisk.renewal import (
    exp_moment_N,
    lambda_support,
    renewal_function,
    renewal_function_mc,
    step_halving_error,
    tilted_measure,
)


def test_poisson_renewal_is_linear():
    grid = renewal_function(Exponential(1.0), 5.0, 1e-3)
    assert np.max(np.abs(grid.lambda_values - grid.times)) <= 1e-3
    grid2 = renewal_function(Exponential(0.5), 4.0, 1e-3)
    assert np.max(np.abs(grid2.lambda_values - 0.5 * grid2.times)) <= 1e-3


def test_deterministic_renewal_is_floor():
    grid = renewal_function(Deterministic(0.7), 3.0, 0.01)
    expect = np.floor(grid.times / 0.7 + 1e-12)
    np.testing.assert_array_equal(grid.lambda_values, expect)


def test_renewal_monotone_weibull():
    grid = renewal_function(Weibull(0.5), 3.0, 0.005)
    assert np.all(np.diff(grid.lambda_values) >= 0)
    assert grid.lambda_values[0] == 0.0


def test_value_at_interpolates():
    grid = renewal_function(Exponential(1.0), 2.0, 0.01)
    assert grid.value_at(1.234) == pytest.approx(1.234, abs=0.011)
    assert grid.value_at(1.23) == pytest.approx(1.23, abs=2e-3)
    with pytest.raises(ValueError):
        grid.value_at(2.5)


def test_step_validation():
    with pytest.raises(ValueError):
        renewal_function(Exponential(1.0), 1.0, 0.2)  # h > t_max/10
    with pytest.raises(ValueError):
        renewal_function(Exponential(1.0), -1.0, 0.01)


def test_step_halving_convergence():
    e1 = step_halving_error(Weibull(0.5), 2.0, 0.02)
    e2 = step_halving_error(Weibull(0.5), 2.0, 0.01)
    assert e2 < e1
    assert e2 < 5e-3


def test_renewal_against_mc():
    g = Weibull(0.8, 1.0)
    grid = renewal_function(g, 3.0, 0.005)
    ts = np.array([0.5, 1.5, 3.0])
    est, se = renewal_function_mc(g, ts, 200_000, np.random.default_rng(0))
    for t, m, s in zip(ts, est, se):
        assert abs(grid.value_at(t) - m) < 4 * s + 5e-3


def test_unit_tilt_recovers_renewal_function():
    grid = renewal_function(Exponential(1.0), 3.0, 1e-3)
    tm = tilted_measure(grid, lambda u: np.ones_like(u), kind="unit")
    assert np.max(np.abs(tm.values - grid.lambda_values)) <= 1e-6


def test_tilted_measure_weight_bounds():
    # a weight in [lo, hi] pins the tilted measure between scaled copies
    grid = renewal_function(Exponential(1.0), 2.0, 1e-3)
    w = lambda u: 1.0 + 0.5 * np.sin(u)
    tm = tilted_measure(grid, w)
    unit = tilted_measure(grid, lambda u: np.ones_like(u))
    assert np.all(tm.values <= 1.5 * unit.values + 1e-12)
    assert np.all(tm.values >= 0.5 * unit.values - 1e-12)
    assert np.all(tm.increments >= -1e-15)


def test_tilted_measure_rejects_bad_weight():
    grid = renewal_function(Exponential(1.0), 2.0, 0.01)
    with pytest.raises(ValueError):
        tilted_measure(grid, lambda u: np.where(u > 1.0, -1.0, 1.0))


def test_lambda_support():
    s = lambda_support(Exponential(1.0))
    assert s.contains(0.5) and not s.contains(-1.0)
    d = lambda_support(Deterministic(1.0))
    assert not d.contains(0.5) and d.contains(1.5)


def test_exp_moment_poisson_oracle():
    # E exp(beta N(t)) = exp(t (e^beta - 1)) for a Poisson process
    beta, t = 0.3, 2.0
    est, se, bad = exp_moment_N(Exponential(1.0), beta, t, 200_000, np.random.default_rng(1))
    exact = math.exp(t * (math.exp(beta) - 1.0))
    assert not bad
    assert abs(est - exact) < 4 * se


def test_exp_moment_divergence_flag():
    # Pareto(1) inter-arrivals concentrate arrivals; large beta blows up
    _, _, bad = exp_moment_N(Deterministic(0.01), 5.0, 1.0, 10_000, np.random.default_rng(2))
    # deterministic => N(T) constant => perfectly reliable
    assert not bad
    est, se, bad2 = exp_moment_N(Exponential(5.0), 8.0, 2.0, 20_000, np.random.default_rng(3))
    assert bad2  # heavy exponent: top quantile dominates the sum


def test_renewal_speed():
    import time

    t0 = time.time()
    renewal_function(Exponential(1.0), 5.0, 1e-3)
    assert time.time() - t0 < 5.0
