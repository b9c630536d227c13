"""Bootstrap intervals for the difference and the odds ratio of two proportions.

Given observed counts ``(x, y)`` the bootstrap estimates are functions of
``U ~ Bino(n1, x/n1)`` and ``V ~ Bino(n2, y/n2)``.  Their distribution is
built by enumerating all ``(u, v)`` pairs with exact-rational support keys.

For grid work a :class:`TwoSampleDesign` stacks the conditional CDFs of all
``(n1+1)(n2+1)`` outcomes on the union of their supports, so that one
coverage evaluation is a couple of vectorized binomial-CDF calls.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .percentile import BootstrapPlan, DiscreteDist, expected_width, make_plan, to_fraction
from .stats import SNAP_TOL, DomainError, binom_cdf, binom_pmf, count_thresholds

DIFF = "d"
THETA = "theta"


@dataclass(frozen=True)
class DiffPoint:
    d: float
    p2: float

    def __post_init__(self):
        if not -1.0 <= self.d <= 1.0:
            raise DomainError(f"d={self.d} outside [-1, 1]")
        if not 0.0 <= self.p2 <= 1.0:
            raise DomainError(f"p2={self.p2} outside [0, 1]")
        p1 = self.d + self.p2
        if p1 < -1e-12 or p1 > 1 + 1e-12:
            raise DomainError(f"(d, p2)=({self.d}, {self.p2}) outside the parallelogram")

    @property
    def p1(self) -> float:
        return min(1.0, max(0.0, self.d + self.p2))


@dataclass(frozen=True)
class OddsPoint:
    theta: float
    p2: float

    def __post_init__(self):
        if self.theta < 0 or math.isinf(self.theta) or math.isnan(self.theta):
            raise DomainError(f"theta={self.theta} must be finite and >= 0")
        if not 0.0 <= self.p2 <= 1.0:
            raise DomainError(f"p2={self.p2} outside [0, 1]")

    @property
    def p1(self) -> float:
        den = 1.0 + (self.theta - 1.0) * self.p2
        if den == 0.0:
            # theta = 0 and p2 = 1
            return 0.0
        return min(1.0, max(0.0, self.theta * self.p2 / den))


def gart_theta(x: int, y: int, n1: int, n2: int) -> float:
    """Gart's odds-ratio estimate ``(x+.5)(n2-y+.5) / ((n1-x+.5)(y+.5))``."""
    return float(gart_key(x, y, n1, n2))


def gart_key(x: int, y: int, n1: int, n2: int) -> Fraction:
    if not (0 <= x <= n1 and 0 <= y <= n2):
        raise DomainError(f"(x, y)=({x}, {y}) outside 0..{n1} x 0..{n2}")
    return Fraction((2 * x + 1) * (2 * (n2 - y) + 1), (2 * (n1 - x) + 1) * (2 * y + 1))


def diff_key(u: int, v: int, n1: int, n2: int) -> Fraction:
    return Fraction(u * n2 - v * n1, n1 * n2)


_KEYS = {DIFF: diff_key, THETA: gart_key}


def _bootstrap_dist(x: int, y: int, n1: int, n2: int, which: str) -> DiscreteDist:
    if not (0 <= x <= n1 and 0 <= y <= n2):
        raise DomainError(f"(x, y)=({x}, {y}) outside 0..{n1} x 0..{n2}")
    pu = np.atleast_1d(binom_pmf(np.arange(n1 + 1), n1, x / n1))
    pv = np.atleast_1d(binom_pmf(np.arange(n2 + 1), n2, y / n2))
    keyf = _KEYS[which]
    pairs = ((keyf(int(u), int(v), n1, n2), pu[u] * pv[v])
             for u in np.flatnonzero(pu) for v in np.flatnonzero(pv))
    return DiscreteDist(pairs)


def dist_dhat(x: int, y: int, design: "TwoSampleDesign") -> DiscreteDist:
    """Distribution of ``U/n1 - V/n2`` given the observed counts."""
    return _bootstrap_dist(x, y, design.n1, design.n2, DIFF)


def dist_thetahat(x: int, y: int, design: "TwoSampleDesign") -> DiscreteDist:
    """Distribution of the Gart estimate recomputed on ``(U, V)``."""
    return _bootstrap_dist(x, y, design.n1, design.n2, THETA)


def hd_cdf(z, x: int, y: int, n1: int, n2: int) -> float:
    """Closed-form ``H^D_{x,y}(z) = sum_v F_B(n1 (z + v/n2), n1, x/n1) p_B(v, n2, y/n2)``."""
    z = to_fraction(z) if isinstance(z, (int, Fraction)) else float(z)
    total = 0.0
    for v in range(n2 + 1):
        w = binom_pmf(v, n2, y / n2)
        if w == 0:
            continue
        k_le, _ = count_thresholds(n1 * (z + Fraction(v, n2)) if isinstance(z, Fraction) else n1 * (z + v / n2))
        total += binom_cdf(k_le, n1, x / n1) * w
    return total


def r_threshold(z: float, v: int, n1: int, n2: int) -> float:
    """Largest real ``u`` with Gart(u, v) <= z: ``R(z, v)``."""
    return (z * (n1 + 0.5) * (v + 0.5) - 0.5 * (n2 - v + 0.5)) / ((n2 - v + 0.5) + z * (v + 0.5))


def hr_cdf(z: float, x: int, y: int, n1: int, n2: int) -> float:
    """Closed-form ``H^R_{x,y}(z) = sum_v F_B(R(z, v), n1, x/n1) p_B(v, n2, y/n2)``."""
    total = 0.0
    for v in range(n2 + 1):
        w = binom_pmf(v, n2, y / n2)
        if w == 0:
            continue
        k_le, _ = count_thresholds(r_threshold(float(z), v, n1, n2))
        total += binom_cdf(k_le, n1, x / n1) * w
    return total


class _Stack:
    """Conditional CDFs of every ``(x, y)`` outcome on a shared sorted support."""

    def __init__(self, n1: int, n2: int, plan: BootstrapPlan, which: str):
        keyf = _KEYS[which]
        grid = [[keyf(u, v, n1, n2) for v in range(n2 + 1)] for u in range(n1 + 1)]
        self.keys = sorted({k for row in grid for k in row})
        pos = {k: i for i, k in enumerate(self.keys)}
        idx = np.array([[pos[k] for k in row] for row in grid])
        self.values = np.array([float(k) for k in self.keys])
        K = len(self.keys)
        pu = np.array([np.atleast_1d(binom_pmf(np.arange(n1 + 1), n1, x / n1)) for x in range(n1 + 1)])
        pv = np.array([np.atleast_1d(binom_pmf(np.arange(n2 + 1), n2, y / n2)) for y in range(n2 + 1)])
        mass = np.zeros((n1 + 1, n2 + 1, K))
        for u in range(n1 + 1):
            # keys within a fixed u are distinct in v, so plain fancy-index accumulation is safe
            mass[:, :, idx[u]] += pu[:, u, None, None] * pv[None, :, :]
        self.cum = np.minimum(np.cumsum(mass, axis=2), 1.0)
        if K > 1:
            gaps = np.diff(self.values)
            self.widths = np.tensordot(plan.width_factor(self.cum[:, :, :-1]), gaps, axes=([2], [0]))
        else:
            self.widths = np.zeros((n1 + 1, n2 + 1))

    def counts(self, t) -> tuple[int, int]:
        if isinstance(t, (Fraction, int)):
            import bisect
            t = Fraction(t)
            return bisect.bisect_right(self.keys, t), bisect.bisect_left(self.keys, t)
        t = float(t)
        le = int(np.searchsorted(self.values, t, side="right"))
        lt = int(np.searchsorted(self.values, t, side="left"))
        tol = SNAP_TOL * max(1.0, abs(t))
        if lt == le:
            if le > 0 and t - self.values[le - 1] <= tol:
                lt = le - 1
            elif le < len(self.values) and self.values[le] - t <= tol:
                le += 1
        return le, lt

    def cdf_pair(self, t):
        le, lt = self.counts(t)
        zeros = np.zeros(self.cum.shape[:2])
        h = self.cum[:, :, le - 1] if le else zeros
        h_left = self.cum[:, :, lt - 1] if lt else zeros
        return h_left, h


class TwoSampleDesign:
    """Bootstrap intervals ``C_d`` and ``C_theta`` for two independent binomial samples."""

    def __init__(self, n1: int, n2: int, plan: BootstrapPlan):
        if n1 < 1 or n2 < 1:
            raise DomainError("n1 and n2 must be >= 1")
        self.n1, self.n2, self.plan = n1, n2, plan
        self._stacks: dict[str, _Stack] = {}

    @classmethod
    def build(cls, n1: int, n2: int, m: int, alpha: float) -> "TwoSampleDesign":
        return cls(n1, n2, make_plan(m, alpha))

    def __repr__(self):
        return f"TwoSampleDesign(n1={self.n1}, n2={self.n2}, m={self.plan.m}, alpha={self.plan.alpha})"

    def stack(self, which: str) -> _Stack:
        if which not in _KEYS:
            raise ValueError(f"unknown interval {which!r}")
        if which not in self._stacks:
            self._stacks[which] = _Stack(self.n1, self.n2, self.plan, which)
        return self._stacks[which]

    def weights(self, p1: float, p2: float) -> np.ndarray:
        wx = np.atleast_1d(binom_pmf(np.arange(self.n1 + 1), self.n1, p1))
        wy = np.atleast_1d(binom_pmf(np.arange(self.n2 + 1), self.n2, p2))
        return np.outer(wx, wy)

    def coverage(self, which: str, target, p1: float, p2: float) -> float:
        st = self.stack(which)
        h_left, h = st.cdf_pair(target)
        return float(np.clip(np.sum(self.plan.bracket(h_left, h) * self.weights(p1, p2)), 0.0, 1.0))

    def expected_length(self, which: str, p1: float, p2: float) -> float:
        return float(np.sum(self.stack(which).widths * self.weights(p1, p2)))


def coverage_cd(point: DiffPoint, design: TwoSampleDesign) -> float:
    return design.coverage(DIFF, point.d, point.p1, point.p2)


def coverage_ctheta(point: OddsPoint, design: TwoSampleDesign) -> float:
    return design.coverage(THETA, point.theta, point.p1, point.p2)


def el_cd(point: DiffPoint, design: TwoSampleDesign) -> float:
    return design.expected_length(DIFF, point.p1, point.p2)


def el_ctheta(point: OddsPoint, design: TwoSampleDesign) -> float:
    return design.expected_length(THETA, point.p1, point.p2)


def reference_sums(design: TwoSampleDesign, which: str, target, p1: float, p2: float) -> tuple[float, float]:
    """Coverage and expected length by the per-outcome double sum.

    Builds every conditional distribution separately with
    :func:`dist_dhat`/:func:`dist_thetahat`; slow, kept as a cross-check of
    the stacked evaluation.
    """
    from .percentile import coverage_bracket
    w = design.weights(p1, p2)
    cov = el = 0.0
    for x in range(design.n1 + 1):
        for y in range(design.n2 + 1):
            if w[x, y] == 0:
                continue
            dist = _bootstrap_dist(x, y, design.n1, design.n2, which)
            cov += coverage_bracket(dist, target, design.plan) * w[x, y]
            el += expected_width(dist, design.plan) * w[x, y]
    return cov, el


@dataclass
class SurfaceGrid:
    """Coverage (and expected length) on a lattice of parameter points, row-major."""

    which: str
    axis1: np.ndarray
    p2: np.ndarray
    coverage: np.ndarray
    el: np.ndarray
    level: float

    def __len__(self):
        return len(self.axis1)

    @property
    def min_coverage(self) -> float:
        return float(self.coverage.min())

    @property
    def fraction_below(self) -> float:
        return float(np.mean(self.coverage < self.level))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["axis1", "p2", "coverage", "el"])
            for row in zip(self.axis1, self.p2, self.coverage, self.el):
                w.writerow([format(float(v), ".17g") for v in row])


def surface_grid(design: TwoSampleDesign, which: str, n_axis1: int | None = None,
                 n_p2: int = 101, theta_range=(1.0, 100.0), with_el: bool = True) -> SurfaceGrid:
    """Evaluate coverage over the parameter domain.

    For ``which="d"`` the first axis is ``d`` on [-1, 1] and, for each ``d``,
    ``p2`` spans ``D(d)`` evenly; for ``which="theta"`` the first axis is
    log-spaced on ``theta_range`` and ``p2`` spans [0, 1].
    """
    if which == DIFF:
        ax = np.linspace(-1.0, 1.0, n_axis1 or 101)
    elif which == THETA:
        lo, hi = theta_range
        if lo <= 0 or hi < lo:
            raise DomainError("theta range must be positive and increasing")
        ax = np.geomspace(lo, hi, n_axis1 or 100)
    else:
        raise ValueError(f"unknown interval {which!r}")
    a1, p2s, cov, el = [], [], [], []
    for a in ax:
        if which == DIFF:
            lo, hi = (0.0, 1.0 - a) if a >= 0 else (-a, 1.0)
            col = np.linspace(lo, hi, n_p2)
        else:
            col = np.linspace(0.0, 1.0, n_p2)
        for p2 in col:
            point = DiffPoint(float(a), float(p2)) if which == DIFF else OddsPoint(float(a), float(p2))
            a1.append(a)
            p2s.append(p2)
            cov.append(design.coverage(which, point.d if which == DIFF else point.theta, point.p1, point.p2))
            el.append(design.expected_length(which, point.p1, point.p2) if with_el else float("nan"))
    return SurfaceGrid(which, np.array(a1), np.array(p2s), np.array(cov), np.array(el), design.plan.level)
