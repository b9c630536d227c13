"""Parametric bootstrap intervals for a normal mean.

For an estimator ``Q`` whose standardized density is even (the sample mean,
or the sample median for odd ``n``), the parametric bootstrap interval has
constant coverage ``(m_u - m_l) / (m + 1)`` and an expected length that is a
single integral of the standardized quantile function against two beta
densities.  The unknown-variance interval ``C_Nu`` is handled through a
Student-t expectation and the gamma-ratio factor ``B(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from scipy import special

from .percentile import BootstrapPlan, make_plan
from .stats import (DEFAULT_QUAD, DomainError, QuadratureSpec, binom_pmf, gamma_ln, integrate,
                    normal_cdf, normal_quantile, t_cdf, t_pdf, t_quantile)

MEAN = "mean"
MEDIAN = "median"


class UnsupportedDesignError(ValueError):
    pass


@dataclass(frozen=True)
class NormalDesign:
    """``n`` normal observations; ``sigma=None`` marks the unknown-variance case."""

    n: int
    plan: BootstrapPlan
    sigma: float | None = 1.0
    estimator: str = MEAN

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.estimator not in (MEAN, MEDIAN):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == MEDIAN and self.n % 2 == 0:
            raise UnsupportedDesignError("median designs require odd n")
        if self.sigma is None and self.estimator != MEAN:
            raise UnsupportedDesignError("unknown-variance designs use the sample mean")
        if self.sigma is not None and self.sigma <= 0:
            raise DomainError("sigma must be positive")


def mean_quantile(n: int) -> Callable[[float], float]:
    """Standardized quantile of the sample mean: ``Phi^{-1}(z) / sqrt(n)``."""
    root = math.sqrt(n)
    return lambda z: float(special.ndtri(z)) / root


def median_quantile(n: int) -> Callable[[float], float]:
    """Standardized quantile of the sample median of odd ``n`` normals."""
    if n % 2 == 0:
        raise UnsupportedDesignError("the median quantile is only provided for odd n")
    a = n // 2 + 1
    b = n - a + 1
    return lambda z: float(special.ndtri(special.betaincinv(a, b, z)))


def qspec(n: int, estimator: str) -> Callable[[float], float]:
    return mean_quantile(n) if estimator == MEAN else median_quantile(n)


def coverage_cq(plan: BootstrapPlan) -> Fraction:
    """Exact constant coverage ``(m_u - m_l) / (m + 1)``."""
    return Fraction(plan.m_u - plan.m_l, plan.m + 1)


def _beta_points(j: int, m: int) -> list[float]:
    """Breakpoints around the bulk of the Beta(j, m - j + 1) density."""
    a, b = j, m - j + 1
    mean = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)))
    pts = [mean + k * sd for k in (-12, -8, -4, -2, 0, 2, 4, 8, 12)]
    return [p for p in pts if 0.0 < p < 1.0]


def order_gap_integral(quantile: Callable[[float], float], j_hi: int, j_lo: int, m: int,
                       spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``m * int_0^1 q(z) [p_B(j_hi-1, m-1, z) - p_B(j_lo-1, m-1, z)] dz``.

    This is ``E[q(Z_hi)] - E[q(Z_lo)]`` for ``Z_j ~ Beta(j, m - j + 1)``, the
    expected gap between the ``j_hi``-th and ``j_lo``-th of ``m`` order
    statistics from a population with quantile function ``q``.
    """
    if not (1 <= j_lo <= m and 1 <= j_hi <= m):
        raise DomainError("order statistic index out of range")
    if j_hi == j_lo:
        return 0.0

    def f(z):
        if z <= 0.0 or z >= 1.0:
            return 0.0
        w = binom_pmf(j_hi - 1, m - 1, z) - binom_pmf(j_lo - 1, m - 1, z)
        return m * quantile(z) * w if w != 0.0 else 0.0

    pts = _beta_points(j_hi, m) + _beta_points(j_lo, m) + [0.5]
    return integrate(f, 0.0, 1.0, spec, points=pts, probit=True).value


def el_cq(design: NormalDesign, quantile: Callable[[float], float] | None = None,
          spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected length of the parametric bootstrap interval based on ``Q``."""
    if design.sigma is None:
        raise UnsupportedDesignError("use el_cnu for the unknown-variance design")
    q = quantile or qspec(design.n, design.estimator)
    plan = design.plan
    return design.sigma * order_gap_integral(q, plan.m_u, plan.m_l, plan.m, spec)


def a_factor(n: int, m: int, alpha: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``A(n, m, alpha)``: expected length of ``C_N`` at ``sigma = 1``."""
    return el_cq(NormalDesign(n, make_plan(m, alpha), 1.0, MEAN), spec=spec)


def el_cn(n: int, m: int, alpha: float, sigma: float = 1.0) -> float:
    return a_factor(n, m, alpha) * sigma


def el_cnm(n: int, m: int, alpha: float, sigma: float = 1.0,
           spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected length of the median-based parametric interval ``C_NM`` (odd ``n``)."""
    if n % 2 == 0:
        raise UnsupportedDesignError("C_NM is only provided for odd n")
    return el_cq(NormalDesign(n, make_plan(m, alpha), sigma, MEDIAN), spec=spec)


def coverage_cnu(n: int, m: int, alpha: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coverage of ``C_Nu``: ``E[bracket(Phi(-T sqrt(n/(n-1))))]`` with ``T ~ t_{n-1}``."""
    if n < 2:
        raise DomainError("C_Nu needs n >= 2")
    plan = make_plan(m, alpha)
    c = math.sqrt(n / (n - 1))
    df = n - 1

    def f(t):
        return plan.bracket(normal_cdf(-t * c), normal_cdf(-t * c)) * t_pdf(t, df)

    # the bracket vanishes in both tails, so the truncation only drops negligible mass
    cut = spec.tail_cutoff * max(1.0, math.sqrt((n - 1) / n))
    pts = []
    for j in (plan.m_l, plan.m_u):
        for h in (j / (m + 1), (j - 1) / m if j > 1 else None, j / m if j < m else None):
            if h is not None and 0 < h < 1:
                pts.append(-normal_quantile(h) / c)
    pts.append(0.0)
    return integrate(f, -cut, cut, spec, points=pts).value


def cnu_truncation_bound(n: int, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """t-tail mass outside the truncated range used by :func:`coverage_cnu`."""
    cut = spec.tail_cutoff * max(1.0, math.sqrt((n - 1) / n))
    return 2.0 * (1.0 - t_cdf(cut, n - 1))


def b_factor(n: int) -> float:
    """``B(n) = sqrt(2/n) Gamma(n/2) / Gamma((n-1)/2)``, the mean of the MLE ``s`` at ``sigma = 1``."""
    if n < 2:
        raise DomainError("B(n) needs n >= 2")
    return math.sqrt(2.0 / n) * math.exp(gamma_ln(n / 2.0) - gamma_ln((n - 1) / 2.0))


def el_cnu(n: int, m: int, alpha: float, sigma: float = 1.0) -> float:
    return b_factor(n) * a_factor(n, m, alpha) * sigma


def z_interval_el(n: int, alpha: float, sigma: float = 1.0) -> float:
    return 2.0 * normal_quantile(1 - alpha / 2) * sigma / math.sqrt(n)


def expected_sd(n: int, sigma: float = 1.0) -> float:
    """Mean of the (n-1)-divisor sample standard deviation."""
    if n < 2:
        raise DomainError("needs n >= 2")
    return math.sqrt(2.0 / (n - 1)) * math.exp(gamma_ln(n / 2.0) - gamma_ln((n - 1) / 2.0)) * sigma


def t_interval_el(n: int, alpha: float, sigma: float = 1.0) -> float:
    if n < 2:
        raise DomainError("the t-interval needs n >= 2")
    return 2.0 * t_quantile(1 - alpha / 2, n - 1) * expected_sd(n, sigma) / math.sqrt(n)


def z_star_el(target_cc: float, n: int, sigma: float = 1.0) -> float:
    """Expected length of the z-interval whose confidence coefficient is ``target_cc``."""
    if not 0 < target_cc < 1:
        raise DomainError("target confidence coefficient must lie in (0, 1)")
    return z_interval_el(n, 1.0 - target_cc, sigma)
