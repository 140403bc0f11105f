"""Tri-dimensional dependence structures for (X1, X2, theta).

Four variants: independence, the Sarmanov family with FGM kernels, the
exchangeable tri-dimensional Frank copula, and a product copula nested
inside a bivariate Frank copula.  Each variant carries

* the joint copula CDF and C-volumes,
* exact conditional distributions (given theta; given the other claim and
  theta), obtained from closed-form copula partial derivatives,
* an exact sampler,
* the closed-form dependence weights h_i(s), g(s), g_ij(z, s) describing
  the large-claim limits of those conditionals, and grid estimates of
  their horizon bounds.

The conditional-ratio scans cross-check the hard-coded weights against
the exact conditionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .marginals import LocalWindow, Marginal, local_prob

__all__ = [
    "DependenceSpec",
    "Independent",
    "SarmanovFGM",
    "FrankTri",
    "NestedFrankProduct",
    "BoundsReport",
    "bounds_over_horizon",
    "condition_ratio_scan",
    "mean_h_check",
]


@dataclass(frozen=True)
class BoundsReport:
    """Grid infima/suprema of the dependence weights over a horizon."""

    horizon: float
    b_lower: float
    b_upper: float
    d_lower: float
    d_upper: float
    a_lower: float
    a_upper: float
    c1: float
    c2: float
    c3: float
    warnings: tuple[str, ...] = ()

    def valid(self) -> bool:
        return min(self.b_lower, self.d_lower, self.a_lower) > 0.0


class DependenceSpec:
    """Joint law of (X1, X2, theta) through a copula and three marginals."""

    f1: Marginal
    f2: Marginal
    g_dist: Marginal

    # --- copula-scale interface -------------------------------------------

    def copula_cdf(self, u, v, w):
        raise NotImplementedError

    def cond_cdf_given_w(self, u, v, w):
        """P(U <= u, V <= v | W = w) = dC/dw."""
        raise NotImplementedError

    def cond_cdf_given_vw(self, i: int, u, v, w):
        """P(U_i <= u | U_j = v, W = w) for the claim pair i != j."""
        raise NotImplementedError

    def sample_uniform(self, rng, n: int):
        """n draws of (U, V, W) from the copula."""
        raise NotImplementedError

    # --- dependence weights ------------------------------------------------

    def h_func(self, i: int, s):
        raise NotImplementedError

    def g_func(self, s):
        raise NotImplementedError

    def g_ij_func(self, i: int, j: int, z, s):
        raise NotImplementedError

    # --- derived operations -----------------------------------------------

    def c_volume(self, box) -> float:
        """Alternating 8-corner sum over [u1,u2]x[v1,v2]x[w1,w2]."""
        (u1, u2), (v1, v2), (w1, w2) = box
        if not (0 <= u1 <= u2 <= 1 and 0 <= v1 <= v2 <= 1 and 0 <= w1 <= w2 <= 1):
            raise ValueError("box corners must be ordered and lie in [0,1]")
        total = 0.0
        for u, su in ((u2, 1), (u1, -1)):
            for v, sv in ((v2, 1), (v1, -1)):
                for w, sw in ((w2, 1), (w1, -1)):
                    total += su * sv * sw * self.copula_cdf(u, v, w)
        return float(total)

    def c_volumes(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Vectorized C-volumes for boxes given by (n,3) corner arrays."""
        total = np.zeros(lo.shape[0])
        for iu, u in ((1, hi[:, 0]), (-1, lo[:, 0])):
            for iv, v in ((1, hi[:, 1]), (-1, lo[:, 1])):
                for iw, w in ((1, hi[:, 2]), (-1, lo[:, 2])):
                    total += iu * iv * iw * self.copula_cdf(u, v, w)
        return total

    def sample_triple(self, rng, n: int):
        """n exact draws of (X1, X2, theta)."""
        u, v, w = self.sample_uniform(rng, n)
        return self.f1.quantile(u), self.f2.quantile(v), self.g_dist.quantile(w)

    def _window(self, i: int, win: LocalWindow):
        """(u_lo, u_hi, width) of the window on the uniform scale of claim i.

        The width is computed from the marginal local probability, not as
        a difference of corner values, so it stays accurate deep in the
        tail where u_lo and u_hi agree to machine precision.
        """
        fi = self.f1 if i == 1 else self.f2
        u_lo = fi.cdf(win.x)
        if math.isinf(win.d):
            return u_lo, 1.0, np.asarray(fi.sf(win.x))
        return u_lo, fi.cdf(win.x + win.d), np.asarray(local_prob(fi, win))

    def cond_local_prob_given_theta(self, i: int, win: LocalWindow, s):
        """Exact P(X_i in (x, x+d] | theta = s)."""
        u_lo, u_hi, _ = self._window(i, win)
        w = self.g_dist.cdf(s)
        if i == 1:
            return self.cond_cdf_given_w(u_hi, 1.0, w) - self.cond_cdf_given_w(u_lo, 1.0, w)
        return self.cond_cdf_given_w(1.0, u_hi, w) - self.cond_cdf_given_w(1.0, u_lo, w)

    def cond_joint_local_prob_given_theta(self, win1: LocalWindow, win2: LocalWindow, s):
        """Exact P(X1 in win1, X2 in win2 | theta = s)."""
        u_lo, u_hi, _ = self._window(1, win1)
        v_lo, v_hi, _ = self._window(2, win2)
        w = self.g_dist.cdf(s)
        return (
            self.cond_cdf_given_w(u_hi, v_hi, w)
            - self.cond_cdf_given_w(u_lo, v_hi, w)
            - self.cond_cdf_given_w(u_hi, v_lo, w)
            + self.cond_cdf_given_w(u_lo, v_lo, w)
        )

    def cond_local_prob_given_other(self, i: int, win: LocalWindow, z, s):
        """Exact P(X_i in (x, x+d] | X_j = z, theta = s), j the other claim."""
        fj = self.f2 if i == 1 else self.f1
        u_lo, u_hi, _ = self._window(i, win)
        w = self.g_dist.cdf(s)
        v = fj.cdf(z)
        return self.cond_cdf_given_vw(i, u_hi, v, w) - self.cond_cdf_given_vw(i, u_lo, v, w)


def _win_hi(dist: Marginal, win: LocalWindow):
    return 1.0 if math.isinf(win.d) else dist.cdf(win.x + win.d)


# ---------------------------------------------------------------------------
# Independence


@dataclass(frozen=True)
class Independent(DependenceSpec):
    f1: Marginal
    f2: Marginal
    g_dist: Marginal

    def copula_cdf(self, u, v, w):
        return np.asarray(u) * v * w

    def cond_cdf_given_w(self, u, v, w):
        return np.asarray(u) * v

    def cond_cdf_given_vw(self, i, u, v, w):
        return np.asarray(u, dtype=float)[()]

    def sample_uniform(self, rng, n):
        return rng.random(n), rng.random(n), rng.random(n)

    def h_func(self, i, s):
        return np.ones_like(np.asarray(s, dtype=float))[()]

    def g_func(self, s):
        return np.ones_like(np.asarray(s, dtype=float))[()]

    def g_ij_func(self, i, j, z, s):
        return np.ones_like(np.asarray(z, dtype=float) * np.asarray(s, dtype=float))[()]


# ---------------------------------------------------------------------------
# Sarmanov with FGM kernels


@dataclass(frozen=True)
class SarmanovFGM(DependenceSpec):
    """Sarmanov joint density with kernels phi(t) = 1 - 2*CDF(t).

    The copula density is 1 + sum gamma_ij phi_i phi_j on the unit cube;
    nonnegativity over the cube requires all four corner values
    1 +/- g12 +/- g13 +/- g23 (with consistent signs) to be positive.
    The large-claim kernel limits are phi_1 = phi_2 = -1.
    """

    f1: Marginal
    f2: Marginal
    g_dist: Marginal
    g12: float
    g13: float
    g23: float

    REJECTION_CAP = 10_000

    def __post_init__(self):
        for g in (self.g12, self.g13, self.g23):
            if abs(g) > 1:
                raise ValueError("FGM coefficients must lie in [-1, 1]")
        corners = [
            1 + self.g12 + self.g13 + self.g23,
            1 + self.g12 - self.g13 - self.g23,
            1 - self.g12 + self.g13 - self.g23,
            1 - self.g12 - self.g13 + self.g23,
        ]
        if min(corners) <= 0:
            raise ValueError(
                "invalid FGM parameters: the joint density reaches "
                f"{min(corners):g} <= 0 on the unit cube"
            )

    def copula_cdf(self, u, v, w):
        u, v, w = (np.asarray(t, dtype=float) for t in (u, v, w))
        uu, vv, ww = u * (1 - u), v * (1 - v), w * (1 - w)
        return (u * v * w + self.g12 * uu * vv * w + self.g13 * uu * v * ww + self.g23 * u * vv * ww)[()]

    def cond_cdf_given_w(self, u, v, w):
        u, v, w = (np.asarray(t, dtype=float) for t in (u, v, w))
        uu, vv = u * (1 - u), v * (1 - v)
        dw = 1 - 2 * w
        return (u * v + self.g12 * uu * vv + self.g13 * uu * v * dw + self.g23 * u * vv * dw)[()]

    def cond_cdf_given_vw(self, i, u, v, w):
        u, v, w = (np.asarray(t, dtype=float) for t in (u, v, w))
        uu = u * (1 - u)
        dv, dw = 1 - 2 * v, 1 - 2 * w
        g_uv, g_uw, g_vw = self._oriented(i)
        num = u + g_uv * uu * dv + g_uw * uu * dw + g_vw * u * dv * dw
        return (num / (1 + g_vw * dv * dw))[()]

    def _oriented(self, i):
        # (claim-other coupling, claim-time coupling, other-time coupling)
        if i == 1:
            return self.g12, self.g13, self.g23
        return self.g12, self.g23, self.g13

    def cond_local_prob_given_theta(self, i, win, s):
        # factored form: the polynomial corner differences collapse to a
        # single multiple of the window width, avoiding cancellation
        u_lo, u_hi, du = self._window(i, win)
        dw = 1 - 2 * self.g_dist.cdf(s)
        g = self.g13 if i == 1 else self.g23
        return (du * (1 + g * (1 - u_lo - u_hi) * dw))[()]

    def cond_joint_local_prob_given_theta(self, win1, win2, s):
        u_lo, u_hi, du = self._window(1, win1)
        v_lo, v_hi, dv = self._window(2, win2)
        dw = 1 - 2 * self.g_dist.cdf(s)
        su, sv = 1 - u_lo - u_hi, 1 - v_lo - v_hi
        return (du * dv * (1 + self.g12 * su * sv + self.g13 * su * dw + self.g23 * sv * dw))[()]

    def cond_local_prob_given_other(self, i, win, z, s):
        fj = self.f2 if i == 1 else self.f1
        u_lo, u_hi, du = self._window(i, win)
        dv = 1 - 2 * fj.cdf(z)
        dw = 1 - 2 * self.g_dist.cdf(s)
        su = 1 - u_lo - u_hi
        g_uv, g_uw, g_vw = self._oriented(i)
        num = du * (1 + g_uv * su * dv + g_uw * su * dw + g_vw * dv * dw)
        return (num / (1 + g_vw * dv * dw))[()]

    def sample_uniform(self, rng, n):
        # acceptance-rejection against the product law; the density is
        # bounded by 1 + |g12| + |g13| + |g23|
        bound = 1 + abs(self.g12) + abs(self.g13) + abs(self.g23)
        out = np.empty((3, n))
        filled = 0
        for _ in range(self.REJECTION_CAP):
            m = max(int(1.2 * (n - filled) * bound), 16)
            u, v, w = rng.random(m), rng.random(m), rng.random(m)
            du, dv, dw = 1 - 2 * u, 1 - 2 * v, 1 - 2 * w
            dens = 1 + self.g12 * du * dv + self.g13 * du * dw + self.g23 * dv * dw
            keep = rng.random(m) * bound < dens
            k = min(int(keep.sum()), n - filled)
            sel = np.flatnonzero(keep)[:k]
            out[0, filled : filled + k] = u[sel]
            out[1, filled : filled + k] = v[sel]
            out[2, filled : filled + k] = w[sel]
            filled += k
            if filled == n:
                return out[0], out[1], out[2]
        raise RuntimeError("rejection sampler failed to fill the batch")

    def h_func(self, i, s):
        phi3 = 1 - 2 * self.g_dist.cdf(s)
        g = self.g13 if i == 1 else self.g23
        return 1 - g * phi3

    def g_func(self, s):
        phi3 = 1 - 2 * self.g_dist.cdf(s)
        return 1 + self.g12 - (self.g13 + self.g23) * phi3

    def g_ij_func(self, i, j, z, s):
        if {i, j} != {1, 2}:
            raise ValueError("need i != j in {1, 2}")
        phi3 = 1 - 2 * self.g_dist.cdf(s)
        fj = self.f2 if j == 2 else self.f1
        phij = 1 - 2 * fj.cdf(z)
        g_ij = self.g12
        g_i3 = self.g13 if i == 1 else self.g23
        g_j3 = self.g23 if i == 1 else self.g13
        denom = 1 + g_j3 * phij * phi3
        if np.any(np.asarray(denom) < 1e-12):
            raise ValueError("conditional density of (X_j, theta) vanishes on the grid")
        return 1 - (g_ij * phij + g_i3 * phi3) / denom


# ---------------------------------------------------------------------------
# Frank machinery shared by the two Frank-based variants


def _lam(gamma, t):
    return np.expm1(-gamma * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class FrankTri(DependenceSpec):
    """Exchangeable tri-dimensional Frank copula, gamma > 0."""

    f1: Marginal
    f2: Marginal
    g_dist: Marginal
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("Frank parameter gamma must be > 0")

    @property
    def _alpha(self):
        return math.expm1(-self.gamma)

    def copula_cdf(self, u, v, w):
        a = self._alpha
        lu, lv, lw = _lam(self.gamma, u), _lam(self.gamma, v), _lam(self.gamma, w)
        return (-np.log1p(lu * lv * lw / a**2) / self.gamma)[()]

    def cond_cdf_given_w(self, u, v, w):
        a = self._alpha
        lu, lv, lw = _lam(self.gamma, u), _lam(self.gamma, v), _lam(self.gamma, w)
        return ((1 + lw) * lu * lv / (a**2 + lu * lv * lw))[()]

    def cond_cdf_given_vw(self, i, u, v, w):
        a = self._alpha
        lu, lv, lw = _lam(self.gamma, u), _lam(self.gamma, v), _lam(self.gamma, w)
        return (lu * a * (a + lv * lw) ** 2 / (a**2 + lu * lv * lw) ** 2)[()]

    def _dlam(self, u_lo, du):
        """lam(u_lo + du) - lam(u_lo) without cancellation."""
        return np.exp(-self.gamma * np.asarray(u_lo, dtype=float)) * np.expm1(-self.gamma * du)

    def cond_local_prob_given_theta(self, i, win, s):
        # exact factored corner difference of dC/dw at v = 1
        a = self._alpha
        u_lo, u_hi, du = self._window(i, win)
        lw = _lam(self.gamma, self.g_dist.cdf(s))
        l1, l2 = _lam(self.gamma, u_lo), _lam(self.gamma, u_hi)
        dl = self._dlam(u_lo, du)
        return ((1 + lw) * a * dl / ((a + l2 * lw) * (a + l1 * lw)))[()]

    def cond_joint_local_prob_given_theta(self, win1, win2, s):
        a = self._alpha
        u_lo, u_hi, du = self._window(1, win1)
        v_lo, v_hi, dv = self._window(2, win2)
        lw = _lam(self.gamma, self.g_dist.cdf(s))
        lu1, lu2 = _lam(self.gamma, u_lo), _lam(self.gamma, u_hi)
        lv1, lv2 = _lam(self.gamma, v_lo), _lam(self.gamma, v_hi)
        dlu, dlv = self._dlam(u_lo, du), self._dlam(v_lo, dv)
        denom = (
            (a**2 + lu1 * lv1 * lw)
            * (a**2 + lu1 * lv2 * lw)
            * (a**2 + lu2 * lv1 * lw)
            * (a**2 + lu2 * lv2 * lw)
        )
        num = (1 + lw) * a**2 * dlu * dlv * (a**4 - lu1 * lu2 * lv1 * lv2 * lw**2)
        return (num / denom)[()]

    def cond_local_prob_given_other(self, i, win, z, s):
        a = self._alpha
        fj = self.f2 if i == 1 else self.f1
        u_lo, u_hi, du = self._window(i, win)
        lv = _lam(self.gamma, fj.cdf(z))
        lw = _lam(self.gamma, self.g_dist.cdf(s))
        lu1, lu2 = _lam(self.gamma, u_lo), _lam(self.gamma, u_hi)
        dlu = self._dlam(u_lo, du)
        c = lv * lw
        num = a * (a + c) ** 2 * dlu * (a**4 - c**2 * lu1 * lu2)
        return (num / ((a**2 + lu2 * c) ** 2 * (a**2 + lu1 * c) ** 2))[()]

    def sample_uniform(self, rng, n):
        # logarithmic-series frailty: exact and O(1) per draw
        p = -math.expm1(-self.gamma)
        frail = rng.logseries(p, size=n).astype(float)
        e = rng.standard_exponential((3, n))
        vals = -np.log1p(self._alpha * np.exp(-e / frail)) / self.gamma
        return vals[0], vals[1], vals[2]

    def sample_uniform_conditional(self, rng, n):
        """Conditional-distribution sampler; slower oracle for the frailty path."""
        a = self._alpha
        u = rng.random(n)
        lu = _lam(self.gamma, u)
        p2 = rng.random(n)
        lv = p2 * a / (1 + lu - p2 * lu)
        v = -np.log1p(lv) / self.gamma
        p3 = rng.random(n)
        # P(W <= w | U, V) = lw * a * (a + c)^2 / (a^2 + c*lw)^2 with c = lu*lv
        # solves a quadratic in lw
        c = lu * lv
        qa = p3 * a * c**2
        qb = 2 * p3 * a**3 * c - a**2 * (a + c) ** 2
        qc = p3 * a**5
        disc = np.sqrt(qb**2 - 4 * qa * qc)
        root = np.where(qa == 0.0, -qc / qb, (2 * qc) / (-qb + disc))
        w = -np.log1p(root) / self.gamma
        return u, v, w

    def h_func(self, i, s):
        gs = self.g_dist.cdf(s)
        return self.gamma * np.exp(self.gamma * gs) / math.expm1(self.gamma)

    def g_func(self, s):
        gs = self.g_dist.cdf(s)
        e = np.exp(self.gamma * gs)
        return self.gamma**2 * (2 * e**2 - e) / math.expm1(self.gamma) ** 2

    def g_ij_func(self, i, j, z, s):
        if {i, j} != {1, 2}:
            raise ValueError("need i != j in {1, 2}")
        a = self._alpha
        fj = self.f2 if j == 2 else self.f1
        lz = _lam(self.gamma, fj.cdf(z))
        ls = _lam(self.gamma, self.g_dist.cdf(s))
        ratio = (a - lz * ls) / (a + lz * ls)
        return self.gamma / math.expm1(self.gamma) * ratio


@dataclass(frozen=True)
class NestedFrankProduct(DependenceSpec):
    """Product copula of the claim pair nested in a bivariate Frank copula.

    C(u, v, w) = C_gamma(u*v, w).  The joint density stays nonnegative on
    the unit cube only for 0 < gamma <= 1 (at larger gamma it goes
    negative near the corner (1,1,0), which C-volume checks detect); the
    same restriction keeps the horizon bounds of g and g_ij positive.
    Construction accepts any gamma > 0 so the failure is observable.
    """

    f1: Marginal
    f2: Marginal
    g_dist: Marginal
    gamma: float

    BISECT_ITERS = 60  # |w-interval| < 1e-12 after 60 halvings

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("Frank parameter gamma must be > 0")

    @property
    def _alpha(self):
        return math.expm1(-self.gamma)

    def copula_cdf(self, u, v, w):
        a = self._alpha
        lk = _lam(self.gamma, np.asarray(u, dtype=float) * v)
        lw = _lam(self.gamma, w)
        return (-np.log1p(lk * lw / a) / self.gamma)[()]

    def cond_cdf_given_w(self, u, v, w):
        a = self._alpha
        lk = _lam(self.gamma, np.asarray(u, dtype=float) * v)
        lw = _lam(self.gamma, w)
        return ((1 + lw) * lk / (a + lk * lw))[()]

    def cond_cdf_given_vw(self, i, u, v, w):
        a = self._alpha
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        lk = _lam(self.gamma, u * v)
        lv = _lam(self.gamma, v)
        lw = _lam(self.gamma, w)
        return (u * (1 + lk) * (a + lv * lw) ** 2 / ((1 + lv) * (a + lk * lw) ** 2))[()]

    def _cond_w_cdf(self, w, k):
        """P(W <= w | U = u, V = v) with k = u*v."""
        a = self._alpha
        lk = _lam(self.gamma, k)
        lw = _lam(self.gamma, w)
        d = a + lk * lw
        return (1 + lk) * lw * (d - self.gamma * k * (a - lw)) / d**2

    def cond_local_prob_given_theta(self, i, win, s):
        # with the other claim's argument at 1 the nesting key is just u
        a = self._alpha
        u_lo, u_hi, du = self._window(i, win)
        lw = _lam(self.gamma, self.g_dist.cdf(s))
        l1, l2 = _lam(self.gamma, u_lo), _lam(self.gamma, u_hi)
        dl = np.exp(-self.gamma * np.asarray(u_lo, dtype=float)) * np.expm1(-self.gamma * du)
        return ((1 + lw) * a * dl / ((a + l2 * lw) * (a + l1 * lw)))[()]

    def _dw_strip(self, u_lo, du, v, lw):
        """dC/dw over the u-strip (u_lo, u_lo+du] at fixed v, factored in du."""
        a = self._alpha
        k1 = np.asarray(u_lo, dtype=float) * v
        lk1 = _lam(self.gamma, k1)
        lk2 = _lam(self.gamma, k1 + du * v)
        dlk = np.exp(-self.gamma * k1) * np.expm1(-self.gamma * du * v)
        return (1 + lw) * a * dlk / ((a + lk2 * lw) * (a + lk1 * lw))

    def cond_joint_local_prob_given_theta(self, win1, win2, s):
        u_lo, _, du = self._window(1, win1)
        v_lo, v_hi, _ = self._window(2, win2)
        lw = _lam(self.gamma, self.g_dist.cdf(s))
        return (self._dw_strip(u_lo, du, v_hi, lw) - self._dw_strip(u_lo, du, v_lo, lw))[()]

    def sample_uniform(self, rng, n):
        u, v = rng.random(n), rng.random(n)
        k = u * v
        p = rng.random(n)
        lo, hi = np.zeros(n), np.ones(n)
        for _ in range(self.BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            below = self._cond_w_cdf(mid, k) < p
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return u, v, 0.5 * (lo + hi)

    def h_func(self, i, s):
        gs = self.g_dist.cdf(s)
        return self.gamma * np.exp(self.gamma * gs) / math.expm1(self.gamma)

    def g_func(self, s):
        # corner density of the claim pair given theta: with k = uv and
        # D = dC/dw, this is D_k + k D_kk evaluated at k = 1
        g = self.gamma
        e = np.exp(g * self.g_dist.cdf(s))
        num = g * (math.exp(-g) - math.exp(-2 * g)) * e + g**2 * e * (
            2 * math.exp(-2 * g) * e - math.exp(-g) - math.exp(-2 * g)
        )
        return num / (-math.expm1(-g)) ** 2

    def g_ij_func(self, i, j, z, s):
        if {i, j} != {1, 2}:
            raise ValueError("need i != j in {1, 2}")
        g = self.gamma
        a = self._alpha
        fj = self.f2 if j == 2 else self.f1
        fz = fj.cdf(z)
        lz = _lam(g, fz)
        ls = _lam(g, self.g_dist.cdf(s))
        num = g * fz * (-a + (np.exp(-g * fz) + 1) * ls)
        return 1 + num / (a + lz * ls)


# ---------------------------------------------------------------------------
# Horizon bounds, scans, checks


def bounds_over_horizon(
    spec: DependenceSpec,
    horizon: float,
    s_grid=None,
    z_grid=None,
    x_probe=(1e3, 1e4),
    d_probe: float = 1.0,
) -> BoundsReport:
    """Grid estimates of the Conditions-1/2/3 horizon constants.

    ``b`` bounds come from h_i over s in [0, T], ``d`` bounds from g, and
    ``a`` bounds from g_ij over the (z, s) grid.  C1-C3 are estimated as
    the largest conditional/unconditional local-probability ratio minus 1
    over the grids, probing the windows (x, x+d] for x in ``x_probe``.
    """
    if s_grid is None:
        s_grid = np.linspace(0.0, horizon, 101)
    else:
        s_grid = np.asarray(s_grid, dtype=float)
    if z_grid is None:
        z_grid = np.concatenate([np.linspace(0.0, 50.0, 51), [1e2, 1e3, 1e6, 1e12]])
    else:
        z_grid = np.asarray(z_grid, dtype=float)
    warnings = []

    h_vals = np.concatenate([np.asarray(spec.h_func(i, s_grid)).ravel() for i in (1, 2)])
    g_vals = np.asarray(spec.g_func(s_grid)).ravel()
    zz, ss = np.meshgrid(z_grid, s_grid, indexing="ij")
    gij_vals = np.concatenate(
        [np.asarray(spec.g_ij_func(i, j, zz, ss)).ravel() for i, j in ((1, 2), (2, 1))]
    )
    if isinstance(spec, NestedFrankProduct) and spec.gamma >= 1:
        warnings.append(
            "nested-product variant needs 0 < gamma < 1 for a positive lower g_ij bound"
        )
    if gij_vals.min() <= 0:
        warnings.append("g_ij is nonpositive on the grid: Condition 3 fails for this horizon")

    c1 = c2 = c3 = 0.0
    for x in x_probe:
        win = LocalWindow(x, d_probe)
        for i in (1, 2):
            base = local_prob(spec.f1 if i == 1 else spec.f2, win)
            cond = np.asarray(spec.cond_local_prob_given_theta(i, win, s_grid))
            c1 = max(c1, float(np.max(cond / base)) - 1.0)
            condz = np.asarray(spec.cond_local_prob_given_other(i, win, zz, ss))
            c3 = max(c3, float(np.max(condz / base)) - 1.0)
        base2 = local_prob(spec.f1, win) * local_prob(spec.f2, win)
        cond2 = np.asarray(spec.cond_joint_local_prob_given_theta(win, win, s_grid))
        c2 = max(c2, float(np.max(cond2 / base2)) - 1.0)

    return BoundsReport(
        horizon=horizon,
        b_lower=float(h_vals.min()),
        b_upper=float(h_vals.max()),
        d_lower=float(g_vals.min()),
        d_upper=float(g_vals.max()),
        a_lower=float(gij_vals.min()),
        a_upper=float(gij_vals.max()),
        c1=max(c1, 0.0),
        c2=max(c2, 0.0),
        c3=max(c3, 0.0),
        warnings=tuple(warnings),
    )


def condition_ratio_scan(
    spec: DependenceSpec,
    i: int,
    s_grid,
    x_grid,
    d: float,
    condition: int = 1,
    z_grid=None,
) -> np.ndarray:
    """Max deviation of exact/asymptotic conditional ratios from 1, per x.

    condition=1 checks the single-claim conditional against F_i * h_i;
    condition=2 the joint conditional against F_1 F_2 * g; condition=3 the
    conditional given the other claim against F_i * g_ij.  For heavy-tailed
    marginals the deviations must shrink along an increasing x grid.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    out = np.empty(len(x_grid))
    fi = spec.f1 if i == 1 else spec.f2
    for k, x in enumerate(x_grid):
        win = LocalWindow(x, d)
        if condition == 1:
            exact = np.asarray(spec.cond_local_prob_given_theta(i, win, s_grid))
            asym = local_prob(fi, win) * np.asarray(spec.h_func(i, s_grid))
        elif condition == 2:
            exact = np.asarray(spec.cond_joint_local_prob_given_theta(win, win, s_grid))
            asym = local_prob(spec.f1, win) * local_prob(spec.f2, win) * np.asarray(spec.g_func(s_grid))
        elif condition == 3:
            if z_grid is None:
                z_grid = np.concatenate([np.linspace(0.0, 20.0, 21), [1e2, 1e4]])
            zz, ss = np.meshgrid(np.asarray(z_grid, dtype=float), s_grid, indexing="ij")
            j = 2 if i == 1 else 1
            exact = np.asarray(spec.cond_local_prob_given_other(i, win, zz, ss))
            asym = local_prob(fi, win) * np.asarray(spec.g_ij_func(i, j, zz, ss))
        else:
            raise ValueError("condition must be 1, 2 or 3")
        out[k] = float(np.max(np.abs(exact / asym - 1.0)))
    return out


def mean_h_check(spec: DependenceSpec, i: int, n_nodes: int = 200) -> float:
    """E h_i(theta) by Gauss-Legendre quadrature; equals 1 by total probability.

    Every variant's h_i depends on s only through G(s), so the integral
    against G(ds) is a smooth integral over the unit interval.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    p = 0.5 * (nodes + 1.0)
    with np.errstate(over="ignore"):
        s = spec.g_dist.quantile(np.minimum(p, 1.0 - 1e-14))
    vals = np.asarray(spec.h_func(i, s), dtype=float)
    return float(np.sum(vals * weights) * 0.5)
