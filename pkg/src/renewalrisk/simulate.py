"""Exact Monte Carlo of the bidimensional renewal risk model.

Paths draw (X1, X2, theta) triples from the dependence structure until
the renewal clock passes the horizon, accumulating the discounted claim
pair; estimators are plain hit counters with binomial confidence
intervals (Clopper-Pearson at low counts).

Reproducibility: the path budget is cut into fixed-size batches and each
batch owns a counter-based Philox stream keyed by (seed, batch index,
stream id).  Batch results land in preallocated slots and merge by
summation, so the result is bit-identical no matter how many worker
threads execute the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from .asymptotics import Box2, net_loss_window_shift
from .copulas import DependenceSpec
from .marginals import Marginal

__all__ = [
    "Linear",
    "CompoundPoisson",
    "ModelConfig",
    "Estimate",
    "StratumTable",
    "simulate_discounted_claims",
    "simulate_grid",
    "simulate_net_loss",
    "stratified_estimate",
    "lemma33_check",
]

#: arrivals cap per path; reaching it means G is misconfigured
MAX_ARRIVALS = 1_000_000
#: stream ids separating the independent substreams of one batch
_CLAIM_STREAM, _PREMIUM_STREAM = 0, 1


@dataclass(frozen=True)
class Linear:
    """Deterministic premium income C(t) = rate * t."""

    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("premium rate must be >= 0")

    def discounted(self, r: float, t: float) -> float:
        """int_0^t e^{-ry} C(dy), a closed form."""
        if r == 0:
            return self.rate * t
        return self.rate * (-math.expm1(-r * t)) / r

    @property
    def deterministic(self) -> bool:
        return True


@dataclass(frozen=True)
class CompoundPoisson:
    """Premium income as a compound Poisson process of positive jumps."""

    rate: float
    jump_dist: Marginal

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("jump arrival rate must be > 0")

    @property
    def deterministic(self) -> bool:
        return False

    def sample_discounted(self, rng, n: int, r: float, t: float) -> np.ndarray:
        """Per-path int_0^t e^{-ry} C(dy) by simulating the jumps."""
        counts = rng.poisson(self.rate * t, size=n)
        total = int(counts.sum())
        times = rng.random(total) * t
        jumps = self.jump_dist.quantile(rng.random(total))
        vals = jumps * np.exp(-r * times)
        out = np.zeros(n)
        np.add.at(out, np.repeat(np.arange(n), counts), vals)
        return out


@dataclass(frozen=True)
class ModelConfig:
    """Full model: dependence (with marginals), discounting, premiums."""

    dependence: DependenceSpec
    t_max: float
    r: float = 0.0
    premiums: tuple = (Linear(0.0), Linear(0.0))
    seed: int = 0
    batch_size: int = 2_000_000

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("horizon t_max must be > 0")
        if self.r < 0:
            raise ValueError("force of interest r must be >= 0")
        if len(self.premiums) != 2:
            raise ValueError("exactly one premium process per claim class")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @property
    def f1(self) -> Marginal:
        return self.dependence.f1

    @property
    def f2(self) -> Marginal:
        return self.dependence.f2

    @property
    def g_dist(self) -> Marginal:
        return self.dependence.g_dist


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    ci95: tuple[float, float]
    hits: int
    n: int
    unreliable: bool


def _make_estimate(hits: int, n: int) -> Estimate:
    p = hits / n
    se = math.sqrt(max(p * (1.0 - p), 0.0) / n)
    if hits < 100:
        # exact binomial interval; the normal one is useless down here
        lo = 0.0 if hits == 0 else float(beta_dist.ppf(0.025, hits, n - hits + 1))
        hi = 1.0 if hits == n else float(beta_dist.ppf(0.975, hits + 1, n - hits))
    else:
        lo, hi = p - 1.96 * se, p + 1.96 * se
    return Estimate(value=p, std_error=se, ci95=(lo, hi), hits=int(hits), n=int(n), unreliable=hits < 30)


def _batch_rng(config: ModelConfig, batch_index: int, stream: int):
    key = (int(config.seed) << 64) | (batch_index << 8) | stream
    return np.random.Generator(np.random.Philox(key=key))


def _batch_plan(n_paths: int, batch_size: int) -> list[int]:
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    full, rem = divmod(n_paths, batch_size)
    return [batch_size] * full + ([rem] if rem else [])


def _run_batches(worker, n_paths: int, batch_size: int, threads: int):
    """Execute ``worker(batch_index, batch_n)`` over the fixed batch plan.

    Results are placed in order-stable slots; the merge is a plain sum,
    so thread scheduling cannot affect the total.
    """
    plan = _batch_plan(n_paths, batch_size)
    slots = [None] * len(plan)

    def run(i):
        slots[i] = worker(i, plan[i])

    if threads <= 1 or len(plan) == 1:
        for i in range(len(plan)):
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(len(plan))))
    return slots


def _accumulate_paths(config: ModelConfig, rng, n: int, t_grid: np.ndarray):
    """Discounted claim pair and arrival counts per path at each grid time.

    Returns (d1, d2, counts) of shapes (n, m), (n, m), (n, m) where
    column i holds the state at t_grid[i]; arrival times are bucketed by
    the first grid time they do not exceed, then prefix-summed.
    """
    m = len(t_grid)
    t_top = float(t_grid[-1])
    acc1 = np.zeros((n, m))
    acc2 = np.zeros((n, m))
    counts = np.zeros((n, m), dtype=np.int64)
    clock = np.zeros(n)
    alive_idx = np.arange(n)
    for _ in range(MAX_ARRIVALS):
        if alive_idx.size == 0:
            break
        x1, x2, theta = config.dependence.sample_triple(rng, alive_idx.size)
        clock[alive_idx] += theta
        sigma = clock[alive_idx]
        arrived = sigma <= t_top
        rows = alive_idx[arrived]
        if rows.size:
            sig = sigma[arrived]
            bucket = np.searchsorted(t_grid, sig, side="left")
            disc = np.exp(-config.r * sig) if config.r > 0 else 1.0
            acc1[rows, bucket] += np.asarray(x1)[arrived] * disc
            acc2[rows, bucket] += np.asarray(x2)[arrived] * disc
            counts[rows, bucket] += 1
        alive_idx = rows
    else:
        raise RuntimeError(f"a path exceeded {MAX_ARRIVALS} arrivals; check G")
    return np.cumsum(acc1, axis=1), np.cumsum(acc2, axis=1), np.cumsum(counts, axis=1)


def _in_box(d1, d2, box: Box2):
    return (
        (d1 > box.x1) & (d1 <= box.x1 + box.d1) & (d2 > box.x2) & (d2 <= box.x2 + box.d2)
    )


def simulate_grid(config: ModelConfig, t_grid, boxes, n_paths: int, threads: int = 1):
    """Hit counts for every (t, box) cell from one shared path budget.

    Returns an integer array of shape (len(t_grid), len(boxes)); each
    cell's estimate uses all n_paths paths (common random numbers across
    cells, which only correlates the estimates, never biases them).
    """
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if t_grid[0] <= 0 or t_grid[-1] > config.t_max + 1e-12:
        raise ValueError("t_grid must lie in (0, t_max]")
    boxes = list(boxes)

    def worker(batch_index: int, batch_n: int):
        rng = _batch_rng(config, batch_index, _CLAIM_STREAM)
        d1, d2, _ = _accumulate_paths(config, rng, batch_n, t_grid)
        hits = np.zeros((len(t_grid), len(boxes)), dtype=np.int64)
        for i in range(len(t_grid)):
            for j, box in enumerate(boxes):
                hits[i, j] = int(np.count_nonzero(_in_box(d1[:, i], d2[:, i], box)))
        return hits

    slots = _run_batches(worker, n_paths, config.batch_size, threads)
    return np.sum(slots, axis=0)


def simulate_discounted_claims(
    config: ModelConfig, t: float, box: Box2, n_paths: int, threads: int = 1
) -> Estimate:
    """P(discounted claim pair at t lands in the box), plain MC."""
    hits = simulate_grid(config, [t], [box], n_paths, threads=threads)
    return _make_estimate(int(hits[0, 0]), n_paths)


def simulate_net_loss(
    config: ModelConfig,
    x_levels: tuple[float, float],
    t: float,
    widths: tuple[float, float],
    n_paths: int,
    threads: int = 1,
) -> Estimate:
    """P(net loss of each class in (0, d_i]) at horizon t.

    Shares the claim stream with simulate_discounted_claims (the premium
    stream is independent), so with deterministic premiums the event
    coincides path-by-path with the premium-shifted box event.
    """
    box = Box2(x_levels[0], x_levels[1], widths[0], widths[1])

    def worker(batch_index: int, batch_n: int):
        rng = _batch_rng(config, batch_index, _CLAIM_STREAM)
        d1, d2, _ = _accumulate_paths(config, rng, batch_n, np.array([t]))
        s1, s2 = _premium_values(config, batch_index, batch_n, t)
        target = net_loss_window_shift(box, (0.0, 0.0), config.r, t)
        return int(np.count_nonzero(_in_box(d1[:, 0] - s1, d2[:, 0] - s2, target)))

    slots = _run_batches(worker, n_paths, config.batch_size, threads)
    return _make_estimate(int(np.sum(slots)), n_paths)


def _premium_values(config: ModelConfig, batch_index: int, batch_n: int, t: float):
    out = []
    prng = None
    for p in config.premiums:
        if p.deterministic:
            out.append(p.discounted(config.r, t))
        else:
            if prng is None:
                prng = _batch_rng(config, batch_index, _PREMIUM_STREAM)
            out.append(p.sample_discounted(prng, batch_n, config.r, t))
    return out


@dataclass(frozen=True)
class StratumTable:
    """Post-stratification of the box event by the arrival count N(t)."""

    n_cap: int
    counts: np.ndarray          # paths with N(t) = n for n = 0..n_cap, then N > n_cap
    hits: np.ndarray            # box hits within each stratum
    combined: Estimate = field(compare=False)


def stratified_estimate(
    config: ModelConfig, t: float, box: Box2, n_cap: int, n_paths: int, threads: int = 1
) -> StratumTable:
    """Box-probability estimate with per-stratum tallies over N(t).

    The point estimate equals the plain estimator (post-stratification
    with proportional observed allocation); the combined standard error
    uses within-stratum binomial variances, which cannot exceed the
    plain binomial error.
    """
    if n_cap < 0:
        raise ValueError("n_cap must be >= 0")

    def worker(batch_index: int, batch_n: int):
        rng = _batch_rng(config, batch_index, _CLAIM_STREAM)
        d1, d2, counts = _accumulate_paths(config, rng, batch_n, np.array([t]))
        strata = np.minimum(counts[:, 0], n_cap + 1)
        hit = _in_box(d1[:, 0], d2[:, 0], box)
        c = np.bincount(strata, minlength=n_cap + 2)
        h = np.bincount(strata[hit], minlength=n_cap + 2)
        return np.stack([c, h])

    tallies = np.sum(_run_batches(worker, n_paths, config.batch_size, threads), axis=0)
    counts, hits = tallies[0], tallies[1]
    total_hits = int(hits.sum())
    value = total_hits / n_paths
    var = 0.0
    for c, h in zip(counts, hits):
        if c > 0:
            p = h / c
            var += (c / n_paths) ** 2 * p * (1.0 - p) / c
    se = math.sqrt(var)
    base = _make_estimate(total_hits, n_paths)
    combined = Estimate(
        value=value,
        std_error=se,
        ci95=(value - 1.96 * se, value + 1.96 * se) if total_hits >= 100 else base.ci95,
        hits=total_hits,
        n=n_paths,
        unreliable=total_hits < 30,
    )
    return StratumTable(n_cap=n_cap, counts=counts, hits=hits, combined=combined)


def lemma33_check(
    config: ModelConfig, n: int, t: float, box: Box2, n_paths: int, threads: int = 1
):
    """Compare the n-arrival box event against the sum-of-pairs expectation.

    lhs estimates P(sum of the first n discounted claim pairs in the box,
    N(t) = n); rhs estimates E[sum over claim indices k, j <= n of
    1{claim-1 value k in window 1} 1{claim-2 value j in window 2};
    N(t) = n].  The single-big-jump principle makes the ratio tend to 1
    as the box levels grow.
    """
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")

    def worker(batch_index: int, batch_n: int):
        rng = _batch_rng(config, batch_index, _CLAIM_STREAM)
        v1 = np.zeros((batch_n, n))
        v2 = np.zeros((batch_n, n))
        clock = np.zeros(batch_n)
        arrivals = np.zeros(batch_n, dtype=np.int64)
        alive_idx = np.arange(batch_n)
        round_no = 0
        while alive_idx.size:
            x1, x2, theta = config.dependence.sample_triple(rng, alive_idx.size)
            clock[alive_idx] += theta
            sigma = clock[alive_idx]
            arrived = sigma <= t
            rows = alive_idx[arrived]
            if rows.size:
                disc = np.exp(-config.r * sigma[arrived])
                if round_no < n:
                    v1[rows, round_no] = np.asarray(x1)[arrived] * disc
                    v2[rows, round_no] = np.asarray(x2)[arrived] * disc
                arrivals[rows] += 1
            alive_idx = rows
            round_no += 1
            if round_no > MAX_ARRIVALS:
                raise RuntimeError("path exceeded the arrival cap; check G")
        exact_n = arrivals == n
        s1, s2 = v1.sum(axis=1), v2.sum(axis=1)
        lhs_hits = int(np.count_nonzero(exact_n & _in_box(s1, s2, box)))
        in1 = (v1 > box.x1) & (v1 <= box.x1 + box.d1)
        in2 = (v2 > box.x2) & (v2 <= box.x2 + box.d2)
        pair_count = in1.sum(axis=1) * in2.sum(axis=1)
        pair_count[~exact_n] = 0
        rhs_sum = int(pair_count.sum())
        rhs_pos = int(np.count_nonzero(pair_count))
        rhs_sq = int(np.dot(pair_count, pair_count))
        return np.array([lhs_hits, rhs_sum, rhs_pos, rhs_sq], dtype=np.int64)

    lhs_hits, rhs_sum, rhs_pos, rhs_sq = np.sum(
        _run_batches(worker, n_paths, config.batch_size, threads), axis=0
    )
    lhs = _make_estimate(int(lhs_hits), n_paths)
    mean = int(rhs_sum) / n_paths
    var = max(rhs_sq / n_paths - mean**2, 0.0)
    rhs = Estimate(
        value=mean,
        std_error=math.sqrt(var / n_paths),
        ci95=(mean - 1.96 * math.sqrt(var / n_paths), mean + 1.96 * math.sqrt(var / n_paths)),
        hits=int(rhs_pos),
        n=n_paths,
        unreliable=rhs_pos < 30,
    )
    ratio = lhs.value / rhs.value if rhs.value > 0 else math.nan
    return lhs, rhs, ratio
