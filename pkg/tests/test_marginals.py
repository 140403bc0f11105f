import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renewalrisk.marginals import (
    Deterministic,
    Exponential,
    LocalWindow,
    Pareto,
    Weibull,
    almost_decreasing_constant,
    lloc_ratio_diagnostic,
    local_prob,
    scaled_local_prob,
)

DISTS = [Pareto(1.0), Pareto(2.5), Weibull(0.5), Weibull(0.8, 2.0), Exponential(1.0), Exponential(0.3)]


@pytest.mark.parametrize("dist", DISTS, ids=str)
@given(p=st.floats(min_value=0.0, max_value=0.999999, exclude_max=False))
@settings(max_examples=50, deadline=None)
def test_quantile_cdf_roundtrip(dist, p):
    x = dist.quantile(p)
    assert dist.cdf(x) == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("dist", DISTS, ids=str)
@given(x=st.floats(min_value=0.0, max_value=1e6))
@settings(max_examples=50, deadline=None)
def test_cdf_sf_complement(dist, x):
    assert dist.cdf(x) + dist.sf(x) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("dist", DISTS, ids=str)
def test_cdf_monotone_and_range(dist):
    xs = np.linspace(0, 100, 500)
    vals = np.asarray(dist.cdf(xs))
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] >= 0 and vals[-1] <= 1
    assert dist.cdf(-1.0) == 0.0


def test_deterministic_point_mass():
    d = Deterministic(1.5)
    assert d.cdf(1.5) == 1.0
    assert d.cdf(1.4999) == 0.0
    assert d.quantile(0.3) == 1.5
    assert np.all(d.sample(np.random.default_rng(0), 5) == 1.5)


def test_window_validation():
    with pytest.raises(ValueError):
        LocalWindow(-1.0, 1.0)
    with pytest.raises(ValueError):
        LocalWindow(0.0, 0.0)
    LocalWindow(0.0, math.inf)  # tail window allowed


def test_local_prob_values():
    p = Pareto(1.0)
    w = LocalWindow(1.0, 1.0)
    assert local_prob(p, w) == pytest.approx(0.5 - 1 / 3, rel=1e-12)
    assert local_prob(p, LocalWindow(3.0, math.inf)) == pytest.approx(0.25, rel=1e-12)


def test_local_prob_deep_tail_accuracy():
    # survival-based difference keeps relative accuracy where CDFs round to 1
    p = Pareto(1.0)
    x = 1e8
    got = local_prob(p, LocalWindow(x, 1.0))
    exact = 1 / (1 + x) - 1 / (2 + x)
    assert got == pytest.approx(exact, rel=1e-6)


def test_scaled_local_prob_matches_scaling():
    p = Pareto(1.0)
    w = LocalWindow(10.0, 2.0)
    r, u = 0.05, 3.0
    scale = math.exp(r * u)
    expected = p.cdf(12.0 * scale) - p.cdf(10.0 * scale)
    assert scaled_local_prob(p, w, r, u) == pytest.approx(expected, rel=1e-12)
    assert scaled_local_prob(p, w, 0.0, 5.0) == pytest.approx(local_prob(p, w), rel=1e-15)


def test_scaled_local_prob_overflow():
    with pytest.raises(OverflowError):
        scaled_local_prob(Pareto(1.0), LocalWindow(1.0, 1.0), 1.0, 1e6)
    with pytest.raises(ValueError):
        scaled_local_prob(Pareto(1.0), LocalWindow(1.0, 1.0), -0.1, 1.0)


def test_lloc_diagnostic_heavy_vs_light():
    xs = [10.0, 100.0, 1000.0]
    heavy = lloc_ratio_diagnostic(Pareto(1.0), xs, y_bound=2.0, d_range=(0.5, 2.0))
    assert np.all(np.diff(heavy) < 0)
    assert heavy[-1] < 0.05
    light = lloc_ratio_diagnostic(Exponential(1.0), [5.0, 10.0, 20.0], y_bound=2.0, d_range=(0.5, 2.0))
    assert light[-1] > 1.0  # shift-sensitivity persists for light tails


@pytest.mark.parametrize("dist", [Pareto(1.0), Exponential(1.0), Weibull(0.5)], ids=str)
def test_almost_decreasing_for_monotone_densities(dist):
    # these densities are decreasing, so the local law is already decreasing
    assert almost_decreasing_constant(dist, d=1.0, grid_max=20.0) == pytest.approx(0.0, abs=1e-12)


def test_quantile_rejects_bad_p():
    with pytest.raises(ValueError):
        Pareto(1.0).quantile(1.0)
    with pytest.raises(ValueError):
        Exponential(1.0).quantile(-0.01)


def test_parameter_validation():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            Pareto(bad)
        with pytest.raises(ValueError):
            Exponential(bad)
        with pytest.raises(ValueError):
            Weibull(bad)
