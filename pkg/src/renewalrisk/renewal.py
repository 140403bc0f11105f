"""Renewal function, its support, tilted renewal measures, and N(T) moments.

The renewal function lambda(t) = E N(t) solves
lambda = G + lambda * G.  We march on a uniform grid with trapezoidal
Stieltjes increments, solving implicitly for the newest value; the
scheme is chosen so that the unit-weight tilted measure

    lambda~(t) = int_0^t (1 + lambda(t-u)) w(u) G(du)

reproduces lambda exactly on the grid when w == 1, which is the discrete
analogue of the renewal equation itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .marginals import Deterministic, Marginal

__all__ = [
    "RenewalGrid",
    "TiltedMeasure",
    "SupportInfo",
    "renewal_function",
    "renewal_function_mc",
    "lambda_support",
    "tilted_measure",
    "exp_moment_N",
    "step_halving_error",
]

#: hard cap on arrivals per path; hitting it means G puts mass
#: absurdly close to zero for the requested horizon
MAX_ARRIVALS = 1_000_000


@dataclass(frozen=True)
class RenewalGrid:
    """lambda(k*h) for k = 0..round(T/h) plus the generating distribution."""

    step: float
    t_max: float
    lambda_values: np.ndarray
    g_dist: Marginal

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(len(self.lambda_values))

    def value_at(self, t: float) -> float:
        """lambda at the nearest grid node <= t."""
        if not 0.0 <= t <= self.t_max + 0.5 * self.step:
            raise ValueError(f"t={t} outside the grid [0, {self.t_max}]")
        return float(self.lambda_values[min(int(t / self.step + 1e-9), len(self.lambda_values) - 1)])


@dataclass(frozen=True)
class TiltedMeasure:
    """Increments of the weighted renewal measure on the grid of ``grid``."""

    grid: RenewalGrid
    increments: np.ndarray
    weight_kind: str

    @property
    def values(self) -> np.ndarray:
        return np.cumsum(self.increments)


@dataclass(frozen=True)
class SupportInfo:
    """Lower endpoint of the support of sigma_1 and whether it carries mass."""

    t_lower: float
    closed: bool

    def contains(self, t: float) -> bool:
        """Membership in {t : lambda(t) > 0}."""
        if self.closed:
            return t >= self.t_lower
        return t > self.t_lower


def _stieltjes_increments(g: Marginal, h: float, k_max: int) -> np.ndarray:
    t = h * np.arange(k_max + 1)
    cdf = np.asarray(g.cdf(t), dtype=float)
    return np.diff(cdf)


def renewal_function(g: Marginal, t_max: float, h: float) -> RenewalGrid:
    """Solve lambda = G + lambda * G on a uniform grid of step h.

    Trapezoidal treatment of lambda(t-u) against the exact increments
    G((j-1)h, jh]; the newest value appears on both sides and is solved
    for, which keeps the scheme stable and the output monotone.
    """
    if not t_max > 0:
        raise ValueError("t_max must be > 0")
    if not 0 < h <= t_max / 10:
        raise ValueError("step must satisfy 0 < h <= t_max/10")
    k_max = round(t_max / h)
    if isinstance(g, Deterministic):
        # N(t) = floor(t / c) exactly; snap near-node times onto the jump
        if g.value == 0:
            raise ValueError("zero inter-arrival time gives an exploding renewal process")
        t = h * np.arange(k_max + 1)
        lam = np.floor(t / g.value + 1e-12)
        return RenewalGrid(step=h, t_max=t_max, lambda_values=lam, g_dist=g)

    dg = _stieltjes_increments(g, h, k_max)
    cdf = np.concatenate([[0.0], np.cumsum(dg)])
    # c[j] = dG_j + dG_{j+1} pairs lambda_{k-j} with both trapezoid halves
    c = dg.copy()
    c[:-1] += dg[1:]
    lam = np.zeros(k_max + 1)
    pivot = 1.0 - 0.5 * dg[0]
    for k in range(1, k_max + 1):
        acc = 0.5 * np.dot(c[: k - 1], lam[k - 1 : 0 : -1]) if k > 1 else 0.0
        lam[k] = (cdf[k] + acc) / pivot
    return RenewalGrid(step=h, t_max=t_max, lambda_values=lam, g_dist=g)


def tilted_measure(grid: RenewalGrid, weight, g: Marginal | None = None, kind: str = "custom") -> TiltedMeasure:
    """Increments of lambda~(t) = int (1 + lambda(t-u)) w(u) G(du).

    ``weight`` is a vectorized function of u on [0, t_max]; it must be
    positive there.  With w == 1 the cumulative measure reproduces the
    renewal function exactly on the grid, by construction of the solver.
    """
    if g is None:
        g = grid.g_dist
    h = grid.step
    lam = grid.lambda_values
    k_max = len(lam) - 1
    t = h * np.arange(k_max + 1)
    w = np.asarray(weight(t), dtype=float)
    if w.shape != t.shape:
        w = np.broadcast_to(w, t.shape)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("tilting weight must be positive and finite on the grid")
    dg = _stieltjes_increments(g, h, k_max)
    # lambda~_k = sum_j [ (1+lam_{k-j}) w_j + (1+lam_{k-j+1}) w_{j-1} ] / 2 * dG_j
    one_lam = 1.0 + lam
    a = 0.5 * w[1:] * dg          # pairs with lam_{k-j}, j = 1..k
    b = 0.5 * w[:-1] * dg         # pairs with lam_{k-j+1}
    # values[k] = sum_{i=0}^{k-1} a[i]*(1+lam[k-1-i]) + b[i]*(1+lam[k-i])
    conv_a = np.convolve(a, one_lam)[:k_max]
    conv_b = np.convolve(b, one_lam[1:])[:k_max]
    values = np.zeros(k_max + 1)
    values[1:] = conv_a + conv_b
    inc = np.diff(np.concatenate([[0.0], values]))
    return TiltedMeasure(grid=grid, increments=inc, weight_kind=kind)


def lambda_support(g: Marginal) -> SupportInfo:
    """Lower endpoint of Lambda = {t : lambda(t) > 0} and its openness."""
    t_lower = float(np.asarray(g.quantile(0.0)))
    closed = float(np.asarray(g.cdf(t_lower))) > 0.0
    return SupportInfo(t_lower=t_lower, closed=closed)


def _sample_counts(g: Marginal, t_values: np.ndarray, t_max: float, n_paths: int, rng) -> np.ndarray:
    """N(t) for each path at each requested time, vectorized over paths."""
    counts = np.zeros((n_paths, len(t_values)), dtype=np.int64)
    clock = np.zeros(n_paths)
    alive = np.ones(n_paths, dtype=bool)
    for _ in range(MAX_ARRIVALS):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            return counts
        clock[idx] += g.sample(rng, idx.size)
        arrived = clock[idx] <= t_max
        counts[idx] += clock[idx, None] <= t_values[None, :]
        alive[idx] = arrived
    raise RuntimeError(f"a path exceeded {MAX_ARRIVALS} arrivals; check G")


def renewal_function_mc(g: Marginal, t_values, n_paths: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Plain MC estimate of lambda at ``t_values`` with standard errors."""
    if n_paths < 10_000:
        raise ValueError("n_paths must be at least 1e4 for a usable oracle")
    t_values = np.asarray(t_values, dtype=float)
    counts = _sample_counts(g, t_values, float(t_values.max()), n_paths, rng)
    est = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(n_paths)
    return est, se


def exp_moment_N(g: Marginal, beta: float, t_max: float, n_paths: int, rng):
    """MC estimate of E exp(beta * N(T)) with a divergence heuristic.

    Returns (estimate, std_error, unreliable).  The flag is raised when
    the top 0.1% of paths contribute more than half the sample sum,
    which is the signature of an infinite or barely-finite moment.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    counts = _sample_counts(g, np.array([t_max]), t_max, n_paths, rng)[:, 0]
    vals = np.exp(beta * counts.astype(float))
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_paths))
    top = np.sort(vals)[-max(1, n_paths // 1000):]
    unreliable = float(top.sum()) > 0.5 * float(vals.sum())
    return est, se, unreliable


def step_halving_error(g: Marginal, t_max: float, h: float) -> float:
    """Max |lambda_h - lambda_{h/2}| on the common grid; discretization gauge."""
    coarse = renewal_function(g, t_max, h)
    fine = renewal_function(g, t_max, h / 2)
    return float(np.max(np.abs(coarse.lambda_values - fine.lambda_values[::2])))
