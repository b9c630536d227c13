"""Percentile bootstrap calculus shared by every design.

A bootstrap interval is ``[u_(m_l), u_(m_u)]`` built from ``m`` i.i.d. draws
of an estimator whose conditional CDF is ``H``.  Given ``H`` the coverage
event and the expected width reduce to binomial CDFs evaluated at ``H``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .stats import SNAP_TOL, DomainError, binom_cdf


class DegeneratePlanError(ValueError):
    pass


def _as_fraction(alpha) -> Fraction:
    if isinstance(alpha, Fraction):
        return alpha
    # decimals such as 0.1 are meant literally; 100 * 0.1 must be exactly 10
    return Fraction(alpha).limit_denominator(10**12)


@dataclass(frozen=True)
class BootstrapPlan:
    """Resample count ``m``, nominal ``alpha`` and the two order-statistic indices."""

    m: int
    alpha: float
    m_l: int
    m_u: int

    @property
    def level(self) -> float:
        return 1.0 - self.alpha

    def bracket(self, h_left, h):
        """``F_B(m_u-1, m, h_left) - F_B(m_l-1, m, h)``, clipped at 0."""
        val = np.asarray(binom_cdf(self.m_u - 1, self.m, h_left)) - np.asarray(
            binom_cdf(self.m_l - 1, self.m, h))
        out = np.maximum(val, 0.0)
        return out.item() if out.ndim == 0 else out

    def width_factor(self, h):
        """``F_B(m_u-1, m, h) - F_B(m_l-1, m, h)``: the per-gap weight in expected widths."""
        return self.bracket(h, h)


def make_plan(m: int, alpha: float, allow_degenerate: bool = False) -> BootstrapPlan:
    """Build the plan ``m_l = floor(m alpha / 2) + 1``, ``m_u = m + 1 - m_l``.

    Raises
    ------
    DegeneratePlanError
        If ``m_l >= m_u`` (``m_l > m_u`` even with ``allow_degenerate``).
    """
    if m < 1:
        raise DegeneratePlanError("degenerate plan: m must be >= 1")
    if not 0.0 < float(alpha) < 1.0:
        raise DegeneratePlanError(f"degenerate plan: alpha={alpha} outside (0, 1)")
    m_l = math.floor(m * _as_fraction(alpha) / 2) + 1
    m_u = m + 1 - m_l
    if m_l > m_u or (m_l == m_u and not allow_degenerate):
        raise DegeneratePlanError(
            f"degenerate plan: m_l={m_l} must be below m_u={m_u} "
            f"(requires floor(m*alpha/2) + 1 < (m + 1)/2; m={m}, alpha={alpha})")
    return BootstrapPlan(m=m, alpha=float(alpha), m_l=m_l, m_u=m_u)


def percentile_index(m: int, p: float, side: str = "lower") -> int:
    """Order-statistic index of the largest (``lower``) or smallest (``upper``) 100p-th percentile."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    mp = m * _as_fraction(p)
    if mp.denominator != 1:
        return math.floor(mp) + 1
    mp = int(mp)
    # mp + 1 cannot exceed m; at p = 0 the smallest percentile is u_(1)
    if side == "lower":
        return min(mp + 1, m)
    return max(mp, 1)


def order_stat_cdf(j: int, m: int, h):
    """CDF of the ``j``-th order statistic of ``m`` draws at a point where the parent CDF is ``h``."""
    if not 1 <= j <= m:
        raise DomainError(f"order statistic index {j} outside 1..{m}")
    return 1.0 - binom_cdf(j - 1, m, h)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class DiscreteDist:
    """Finite distribution on exact-rational support points.

    Support keys are :class:`fractions.Fraction`; coincident keys are merged
    (masses summed) at construction.  Real values are materialized only for
    the queries and the expected-width sums.
    """

    __slots__ = ("keys", "values", "mass", "cum")

    def __init__(self, pairs):
        acc: dict[Fraction, float] = {}
        for key, w in pairs:
            if w < 0:
                raise ValueError("negative mass")
            if w == 0:
                continue
            k = to_fraction(key)
            acc[k] = acc.get(k, 0.0) + float(w)
        if not acc:
            raise DomainError("empty support")
        self.keys = tuple(sorted(acc))
        self.mass = np.array([acc[k] for k in self.keys])
        self.values = np.array([float(k) for k in self.keys])
        cum = np.cumsum(self.mass)
        total = cum[-1]
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total}, not 1")
        self.cum = np.minimum(cum / total, 1.0)

    @classmethod
    def point_mass(cls, c) -> "DiscreteDist":
        return cls([(c, 1.0)])

    def __len__(self):
        return len(self.keys)

    def __repr__(self):
        return f"DiscreteDist(K={len(self)}, min={self.values[0]:.6g}, max={self.values[-1]:.6g})"

    def _counts(self, x) -> tuple[int, int]:
        """Number of support points ``<= x`` and ``< x``."""
        if isinstance(x, (Fraction, int, np.integer)):
            x = Fraction(int(x)) if isinstance(x, np.integer) else x
            return bisect.bisect_right(self.keys, x), bisect.bisect_left(self.keys, x)
        x = float(x)
        le = int(np.searchsorted(self.values, x, side="right"))
        lt = int(np.searchsorted(self.values, x, side="left"))
        tol = SNAP_TOL * max(1.0, abs(x))
        # snap a float target onto a neighbouring support point
        if lt == le:
            if le > 0 and x - self.values[le - 1] <= tol:
                lt = le - 1
            elif le < len(self.values) and self.values[le] - x <= tol:
                le += 1
        return le, lt

    def cdf(self, x) -> float:
        le, _ = self._counts(x)
        return float(self.cum[le - 1]) if le else 0.0

    def cdf_left(self, x) -> float:
        _, lt = self._counts(x)
        return float(self.cum[lt - 1]) if lt else 0.0

    def pmf(self, x) -> float:
        le, lt = self._counts(x)
        return float(self.mass[lt:le].sum())


def coverage_bracket(dist: DiscreteDist, theta, plan: BootstrapPlan) -> float:
    """``P(u_(m_l) <= theta <= u_(m_u))`` for ``m`` draws from ``dist``."""
    return plan.bracket(dist.cdf_left(theta), dist.cdf(theta))


def order_stat_expect(dist: DiscreteDist, j: int, m: int) -> float:
    """``E[u_(j)] = d_1 + sum_s (d_{s+1} - d_s) F_B(j-1, m, H(d_s))``."""
    if not 1 <= j <= m:
        raise DomainError(f"order statistic index {j} outside 1..{m}")
    if len(dist) == 1:
        return float(dist.values[0])
    gaps = np.diff(dist.values)
    return float(dist.values[0] + np.dot(gaps, binom_cdf(j - 1, m, dist.cum[:-1])))


def expected_width(dist: DiscreteDist, plan: BootstrapPlan) -> float:
    """``E[u_(m_u) - u_(m_l)]`` for ``m`` draws from ``dist``."""
    if len(dist) == 1:
        return 0.0
    gaps = np.diff(dist.values)
    return float(max(0.0, np.dot(gaps, plan.width_factor(dist.cum[:-1]))))
