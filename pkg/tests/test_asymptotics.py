import math

import numpy as np
import pytest

from renewalrisk.asymptotics import (
    AsymptoticValue,
    Box2,
    net_loss_window_shift,
    theorem_rhs,
)
from renewalrisk.marginals import Exponential, LocalWindow, Pareto, local_prob
from renewalrisk.renewal import renewal_function, tilted_measure


def poisson_tilted(t_max=3.0, h=1e-3):
    grid = renewal_function(Exponential(1.0), t_max, h)
    unit = lambda u: np.ones_like(u)
    tm = tilted_measure(grid, unit, kind="unit")
    return tm, tm, tm


def test_box_validation():
    with pytest.raises(ValueError):
        Box2(-1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Box2(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Box2(1.0, 1.0, 1.0, math.inf)
    b = Box2(2.0, 3.0, 1.0, 2.0)
    assert b.window1 == LocalWindow(2.0, 1.0)
    assert b.window2 == LocalWindow(3.0, 2.0)


def test_poisson_unit_closed_form():
    # independent Poisson case, r=0, unit weights: the approximation equals
    # p1 p2 (t^2 + t) with p_i the window probabilities
    f = Pareto(1.0)
    box = Box2(20.0, 20.0, 5.0, 5.0)
    t1, t2, tj = poisson_tilted()
    p1 = local_prob(f, box.window1)
    p2 = local_prob(f, box.window2)
    for t in (0.5, 1.0, 2.0):
        val = theorem_rhs(f, f, box, 0.0, t, t1, t2, tj)
        exact = p1 * p2 * (t * t + t)
        assert val.total == pytest.approx(exact, rel=5e-3)
        assert val.cross_term == pytest.approx(p1 * p2 * t * t, rel=5e-3)
        assert val.diagonal_term == pytest.approx(p1 * p2 * t, rel=5e-3)


def test_monotone_in_t_and_zero_at_origin():
    f = Pareto(1.0)
    box = Box2(10.0, 10.0, 2.0, 2.0)
    t1, t2, tj = poisson_tilted()
    vals = [theorem_rhs(f, f, box, 0.05, t, t1, t2, tj).total for t in (0.0, 0.5, 1.0, 2.0, 3.0)]
    assert vals[0] == 0.0
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_step_halving_consistency():
    f = Pareto(1.0)
    box = Box2(10.0, 10.0, 2.0, 2.0)
    coarse = poisson_tilted(h=2e-3)
    fine = poisson_tilted(h=1e-3)
    a = theorem_rhs(f, f, box, 0.05, 2.0, *coarse).total
    b = theorem_rhs(f, f, box, 0.05, 2.0, *fine).total
    assert a == pytest.approx(b, rel=2e-3)


def test_discount_reduces_probability():
    # discounting shrinks claims, so reaching a high box becomes harder
    f = Pareto(1.0)
    box = Box2(10.0, 10.0, 2.0, 2.0)
    t1, t2, tj = poisson_tilted()
    v0 = theorem_rhs(f, f, box, 0.0, 2.0, t1, t2, tj).total
    v5 = theorem_rhs(f, f, box, 0.5, 2.0, t1, t2, tj).total
    assert v5 < v0


def test_t_outside_grid_raises():
    f = Pareto(1.0)
    box = Box2(10.0, 10.0, 2.0, 2.0)
    t1, t2, tj = poisson_tilted(t_max=1.0, h=1e-3)
    with pytest.raises(ValueError):
        theorem_rhs(f, f, box, 0.0, 2.0, t1, t2, tj)


def test_mismatched_grids_raise():
    f = Pareto(1.0)
    box = Box2(10.0, 10.0, 2.0, 2.0)
    a = poisson_tilted(h=1e-3)[0]
    b = poisson_tilted(h=2e-3)[0]
    with pytest.raises(ValueError):
        theorem_rhs(f, f, box, 0.0, 1.0, a, b, a)


def test_net_loss_shift_r_zero():
    box = Box2(10.0, 20.0, 5.0, 5.0)
    out = net_loss_window_shift(box, (1.0, 2.0), 0.0, 3.0)
    assert out == Box2(13.0, 26.0, 5.0, 5.0)


def test_net_loss_shift_discounted():
    box = Box2(10.0, 20.0, 5.0, 5.0)
    r, t = 0.05, 2.0
    out = net_loss_window_shift(box, (1.0, 2.0), r, t)
    disc = (1.0 - math.exp(-r * t)) / r
    assert out.x1 == pytest.approx(10.0 + disc)
    assert out.x2 == pytest.approx(20.0 + 2 * disc)
    assert out.d1 == pytest.approx(5.0 * math.exp(-r * t))
    # r -> 0 limit matches the r = 0 branch
    tiny = net_loss_window_shift(box, (1.0, 2.0), 1e-12, t)
    assert tiny.x1 == pytest.approx(12.0, rel=1e-6)


def test_net_loss_shift_validation():
    with pytest.raises(ValueError):
        net_loss_window_shift(Box2(1, 1, 1, 1), (-1.0, 0.0), 0.0, 1.0)
