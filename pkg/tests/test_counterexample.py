import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from renewalrisk.counterexample import (
    BreakpointTable,
    CounterexampleDensity,
    CounterexampleF,
    breakpoints,
    density_raw,
    m_index,
    normalizer,
)


@pytest.fixture(scope="module")
def dens():
    return CounterexampleDensity(n_max=8)


def test_m_index_values():
    # m_n = ceil(sqrt(5/6) n); first drops below n at n = 12
    assert [m_index(n) for n in (1, 2, 3)] == [1, 2, 3]
    assert m_index(12) == 11
    assert all(m_index(n) == n for n in range(1, 12))


def test_breakpoint_ordering():
    tab = breakpoints(8)
    a = tab.a
    assert np.all(np.diff(a) > 0)
    assert a[1] == 2.0 and a[2] == 16.0 and a[3] == 512.0  # a_n = 2^(n^2)
    for n in range(1, 9):
        assert a[n] < tab.b[n] < tab.mid[n] < a[n + 1]


def test_density_positive_and_raises_outside_range(dens):
    xs = np.linspace(0.1, 1e4, 2000)
    vals = np.array([dens.pdf(x) for x in xs])
    assert np.all(vals >= 0)
    # truncation beyond the last tabulated block is explicit, not silent
    with pytest.raises(ValueError):
        dens.pdf(-1.0)
    with pytest.raises(ValueError):
        dens.pdf(dens.x_max * 2.0)  # x_max + 1 rounds back to x_max at 2^81


def test_normalizer_frozen(dens):
    norm, tail = normalizer(dens.table)
    assert norm == pytest.approx(3.7796086395436226, rel=1e-14)
    assert tail < 2.0**-110
    assert tail == pytest.approx(1.79e-43, rel=0.05)


def test_cdf_properties(dens):
    assert dens.cdf(0.0) == 0.0
    assert dens.cdf(dens.x_max) == pytest.approx(1.0, abs=1e-12)
    xs = np.geomspace(0.5, dens.x_max, 200)
    vals = np.array([dens.cdf(x) for x in xs])
    assert np.all(np.diff(vals) >= -1e-15)


def test_cdf_matches_numeric_integral(dens):
    # trapezoid on a fine grid over the first two blocks
    lo, hi = 0.0, 100.0
    grid = np.linspace(lo, hi, 20001)
    pdfv = np.array([dens.pdf(x) for x in grid])
    integral = np.trapezoid(pdfv, grid)
    assert dens.cdf(hi) == pytest.approx(integral, rel=1e-6)


DENS8 = CounterexampleDensity(n_max=8)


@given(x=st.floats(min_value=0.01, max_value=1e6))
@settings(max_examples=60, deadline=None)
def test_cdf_pdf_consistency_locally(x):
    dens = DENS8
    h = 1e-4 * max(x, 1.0)
    fd = (dens.cdf(x + h) - dens.cdf(x - h)) / (2 * h)
    mid = dens.pdf(x)
    # fd straddles at most one breakpoint; bound by neighbouring density values
    lo = min(dens.pdf(x - h), mid, dens.pdf(x + h))
    hi = max(dens.pdf(x - h), mid, dens.pdf(x + h))
    assert lo - 1e-12 <= fd <= hi + 1e-12


def test_witness_sequence(dens):
    # the almost-decreasing witness at block n equals ln(n+1)
    for n in range(1, 8):
        assert dens.almost_decreasing_witness(n) == pytest.approx(
            math.log(n + 1), rel=1e-12
        )


def test_long_tail_ratio_trend(dens):
    # f(x+t)/f(x) along the geometric anchors tends to 1 within blocks
    vals = [dens.long_tail_ratio(dens.table.a[dens.table.m[n]] * 1.5, 1.0) for n in (3, 5, 7)]
    assert all(abs(v - 1.0) < 0.1 for v in vals)
    assert abs(vals[-1] - 1.0) < abs(vals[0] - 1.0)


def test_self_convolution_ratio_frozen(dens):
    # pinned values of |ratio - 1| at the block anchors a_n
    expect = {2: 199.995, 3: 1382.09, 4: 1179.83, 5: 170.25, 6: 5.3847, 7: 0.04205}
    for n, val in expect.items():
        x = dens.table.a[n]
        assert abs(dens.self_convolution_ratio(x) - 1.0) == pytest.approx(val, rel=2e-3)


def test_self_convolution_ratio_eventually_decreases(dens):
    devs = []
    for n in range(3, 9):
        devs.append(abs(dens.self_convolution_ratio(dens.table.a[n]) - 1.0))
    assert all(a > b for a, b in zip(devs, devs[1:])), devs
    assert devs[-1] < 1e-3


def test_middle_part_vanishes(dens):
    expect = {2: 380.99, 5: 3.7096, 7: 2.1146e-7, 8: 7.96e-13}
    prev = math.inf
    for n in range(3, 9):  # decreasing once the asymptotic regime activates
        r = dens.middle_part_ratio(dens.table.a[n])
        assert r < prev
        prev = r
        if n in expect:
            assert r == pytest.approx(expect[n], rel=2e-3)
    assert prev < 1e-11
    assert dens.middle_part_ratio(dens.table.a[2]) == pytest.approx(expect[2], rel=2e-3)


def test_marginal_wrapper_quantile_roundtrip():
    F = CounterexampleF(n_max=6)
    for p in (0.05, 0.3, 0.7, 0.95, 0.999):
        x = F.quantile(p)
        assert F.cdf(x) == pytest.approx(p, abs=1e-9)


def test_marginal_wrapper_sampling():
    F = CounterexampleF(n_max=6)
    rng = np.random.default_rng(11)
    xs = F.sample(rng, 50_000)
    assert np.all(xs >= 0)
    for q in (1.0, 10.0, 100.0):
        assert np.mean(xs <= q) == pytest.approx(F.cdf(q), abs=0.01)


def test_n_max_bounds():
    with pytest.raises(ValueError):
        CounterexampleDensity(n_max=0)
    with pytest.raises(ValueError):
        CounterexampleDensity(n_max=9)
