"""Percentile bootstrap for the centre of a symmetric population.

Mean-based interval ``C_pN``: the resampled mean takes one value per
composition ``(k_1, ..., k_n)`` of ``n``, with multinomial mass.  Its
coverage is an ``n``-dimensional integral, evaluated exactly for ``n = 2``
and otherwise by Monte Carlo over the outer sample with the inner bootstrap
distribution enumerated exactly (Rao-Blackwellized), or fully simulated.

Median-based interval ``C_pM`` (odd ``n``): the resampled median only
depends on ranks, which makes coverage a finite binomial sum and the
expected length a sum of order-statistic gap expectations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .normal import UnsupportedDesignError, order_gap_integral
from .percentile import BootstrapPlan, DiscreteDist, make_plan, to_fraction
from .stats import DEFAULT_QUAD, DomainError, QuadratureSpec, binom_cdf, binom_pmf
from .streams import Accumulator, EvalResult, McConfig, chunks

ENUM_CAP = 12

EXACT = "exact-enum"
RAO_BLACKWELL = "rao-blackwell-mc"
FULL_MC = "full-mc"


class EnumerationCapError(ValueError):
    pass


@lru_cache(maxsize=None)
def s_count(n: int, t: int) -> int:
    """Number of monomials of degree ``t`` in ``n`` variables."""
    if n < 1 or t < 0:
        raise DomainError("s_count needs n >= 1 and t >= 0")
    if n == 1 or t == 0:
        return 1
    return sum(s_count(n - 1, j) for j in range(t + 1))


@lru_cache(maxsize=16)
def compositions(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All weak compositions of ``n`` into ``n`` parts and their resampling masses.

    Returns ``(K, w)`` with ``K`` of shape ``(S(n, n), n)`` and
    ``w = n! / prod(k_j!) / n^n``.
    """
    if n > ENUM_CAP:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap {ENUM_CAP}; use the Monte Carlo path")
    rows = []
    for combo in itertools.combinations_with_replacement(range(n), n):
        rows.append(np.bincount(combo, minlength=n))
    K = np.array(rows, dtype=np.int64)
    logw = special.gammaln(n + 1) - special.gammaln(K + 1).sum(axis=1) - n * math.log(n)
    return K, np.exp(logw)


def _multinomial(k) -> int:
    out = math.factorial(sum(k))
    for kj in k:
        out //= math.factorial(kj)
    return out


def mean_boot_table(sample: Sequence) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Exact ``(value, pmf, cdf)`` rows of the resampled mean, as rationals."""
    n = len(sample)
    if n > ENUM_CAP:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap {ENUM_CAP}; use the Monte Carlo path")
    ys = [to_fraction(v) for v in sample]
    acc: dict[Fraction, int] = {}
    for combo in itertools.combinations_with_replacement(range(n), n):
        k = [combo.count(j) for j in range(n)]
        key = sum(kj * y for kj, y in zip(k, ys)) / n
        acc[key] = acc.get(key, 0) + _multinomial(k)
    total = n**n
    rows, run = [], 0
    for key in sorted(acc):
        run += acc[key]
        rows.append((key, Fraction(acc[key], total), Fraction(run, total)))
    return rows


def dist_mean_boot(sample: Sequence) -> DiscreteDist:
    """Distribution of the resampled mean over all ``n^n`` labelled resamples."""
    return DiscreteDist((v, float(p)) for v, p, _ in mean_boot_table(sample))


def coverage_cpn_n2(m: int, alpha: float) -> float:
    """Exact coverage of ``C_pN`` for ``n = 2``."""
    plan = make_plan(m, alpha)
    return 0.5 * plan.width_factor(0.25)


def el_cpn_n2(m: int, alpha: float, sigma: float = 1.0) -> float:
    """Exact expected length of ``C_pN`` for ``n = 2``; the integral equals ``1/sqrt(pi)``."""
    plan = make_plan(m, alpha)
    return 2.0 * sigma * plan.width_factor(0.25) / math.sqrt(math.pi)


def cpn_upper_bound(n: int) -> float:
    """Coverage ceiling ``1 - 2^{-(n-1)}`` of the percentile interval for a symmetric centre."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return 1.0 - 2.0 ** (-(n - 1))


def _exact_n_le_2(n: int, plan: BootstrapPlan, sigma: float) -> EvalResult:
    if n == 1:
        # one observation: every resample equals it, H(0) is 0 or 1
        return EvalResult(0.0, 0.0, "exact")
    # the four sign regions of (y_(1), mean, y_(2)) each have probability 1/4,
    # with H(0) = 0, 1/4, 3/4, 1 on them
    cov = 0.25 * (plan.width_factor(0.25) + plan.width_factor(0.75))
    el = 2.0 * sigma * plan.width_factor(0.25) / math.sqrt(math.pi)
    return EvalResult(float(cov), float(el), "exact")


def _rb_block(Y: np.ndarray, K: np.ndarray, w: np.ndarray, plan: BootstrapPlan, target: float):
    n = K.shape[1]
    means = (Y - target) @ K.T / n
    # the weights sum to 1 only up to rounding
    h0 = np.clip((means <= 0.0) @ w, 0.0, 1.0)
    cover = plan.bracket(h0, h0)
    order = np.argsort(means, axis=1, kind="stable")
    srt = np.take_along_axis(means, order, axis=1)
    cum = np.minimum(np.cumsum(w[order], axis=1), 1.0)
    width = np.sum(np.diff(srt, axis=1) * plan.width_factor(cum[:, :-1]), axis=1)
    return np.atleast_1d(cover), width


def _full_block(rng, Y: np.ndarray, plan: BootstrapPlan, target: float, stat: str):
    reps, n = Y.shape
    m = plan.m
    idx = rng.integers(0, n, size=(reps, m, n))
    boot = np.take_along_axis(Y[:, None, :].repeat(m, axis=1), idx, axis=2)
    est = boot.mean(axis=2) if stat == "mean" else np.median(boot, axis=2)
    part = np.partition(est, (plan.m_l - 1, plan.m_u - 1), axis=1)
    lo, hi = part[:, plan.m_l - 1], part[:, plan.m_u - 1]
    return ((lo <= target) & (target <= hi)).astype(float), hi - lo


def cpn_eval(n: int, m: int, alpha: float, sigma: float = 1.0, mode: str = RAO_BLACKWELL,
             config: McConfig | None = None, mu: float = 0.0,
             sampler: Callable | None = None) -> EvalResult:
    """Coverage and expected length of ``C_pN`` under ``N(mu, sigma^2)`` data.

    Both quantities are free of ``mu``; ``mu`` is exposed only for
    equivariance checks.  ``sampler(rng, size)`` may replace the normal
    generator with any symmetric population centred at 0 (scaled by
    ``sigma``, shifted by ``mu``).
    """
    plan = make_plan(m, alpha)
    if mode == EXACT:
        if n > 2:
            raise UnsupportedDesignError("closed-form C_pN coverage exists only for n <= 2")
        return _exact_n_le_2(n, plan, sigma)
    if mode not in (RAO_BLACKWELL, FULL_MC):
        raise ValueError(f"unknown mode {mode!r}")
    config = config or McConfig()
    acc = Accumulator()
    if mode == RAO_BLACKWELL:
        K, w = compositions(n)
        size = max(1, 2_000_000 // len(w))
    else:
        size = max(1, 4_000_000 // (m * n))
    for _, rng, block in config.blocks():
        for k in chunks(block, size):
            Z = sampler(rng, (k, n)) if sampler else rng.standard_normal((k, n))
            Y = mu + sigma * Z
            if mode == RAO_BLACKWELL:
                cover, width = _rb_block(Y, K, w, plan, mu)
            else:
                cover, width = _full_block(rng, Y, plan, mu, "mean")
            acc.add(cover, width)
    est = acc.estimate()
    return EvalResult(est.coverage_hat, est.el_hat, "monte-carlo", est.coverage_se, est.el_se,
                      config.reps, config.seed, config.streams)


def coverage_cpn(n: int, m: int, alpha: float, mode: str = RAO_BLACKWELL, reps: int = 100_000,
                 seed: int = 20191215, streams: int = 8) -> EvalResult:
    """Coverage of ``C_pN``; the result also carries the expected length at ``sigma = 1``."""
    cfg = None if mode == EXACT else McConfig(reps, seed, streams)
    return cpn_eval(n, m, alpha, 1.0, mode, cfg)


def el_cpn(n: int, m: int, alpha: float, sigma: float = 1.0, reps: int = 100_000,
           seed: int = 20191215, streams: int = 8, mode: str = RAO_BLACKWELL) -> EvalResult:
    cfg = None if mode == EXACT else McConfig(reps, seed, streams)
    return cpn_eval(n, m, alpha, sigma, mode, cfg)


def rb_brackets(n: int, m: int, alpha: float, config: McConfig, mu: float = 0.0) -> np.ndarray:
    """Per-replicate Rao-Blackwellized coverage brackets, in replicate order."""
    plan = make_plan(m, alpha)
    K, w = compositions(n)
    out = []
    for _, rng, block in config.blocks():
        Y = mu + rng.standard_normal((block, n))
        out.append(_rb_block(Y, K, w, plan, mu)[0])
    return np.concatenate(out)


# ---------------------------------------------------------------- median


def _median_cdf_levels(n: int) -> np.ndarray:
    """``H_M(y_(i)) = F_B(a-1, n, (n-i)/n)`` for ``i = 0..n``."""
    if n % 2 == 0:
        raise UnsupportedDesignError("the resampled-median distribution is only provided for odd n")
    a = n // 2 + 1
    i = np.arange(n + 1)
    return np.asarray(binom_cdf(a - 1, n, (n - i) / n))


def dist_median_boot(sample: Sequence) -> DiscreteDist:
    """Distribution of the resampled median of an odd-size sample (rank-based)."""
    n = len(sample)
    h = _median_cdf_levels(n)
    ys = sorted(sample)
    mass = np.diff(h)
    return DiscreteDist((y, w) for y, w in zip(ys, mass))


def coverage_cpm(n: int, m: int, alpha: float) -> float:
    """Exact, distribution-free coverage of ``C_pM`` for symmetric continuous populations."""
    plan = make_plan(m, alpha)
    h = _median_cdf_levels(n)
    weights = binom_pmf(np.arange(n + 1), n, 0.5)
    return float(np.dot(plan.width_factor(h), weights))


def family_quantile(family) -> Callable[[float], float]:
    """Standardized quantile function for ``("normal", sigma)``, ``("uniform", c)``, ``("laplace", b)`` or a callable."""
    if callable(family):
        return family
    name, scale = family
    if name == "normal":
        return lambda z: scale * float(special.ndtri(z))
    if name == "uniform":
        return lambda z: scale * (2.0 * z - 1.0)
    if name == "laplace":
        return lambda z: scale * (math.log(2 * z) if z < 0.5 else -math.log(2 * (1 - z)))
    raise ValueError(f"unknown family {name!r}")


def el_cpm(n: int, m: int, alpha: float, family=("normal", 1.0),
           spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Expected length of ``C_pM``: bracket-weighted expected gaps between order statistics."""
    plan = make_plan(m, alpha)
    h = _median_cdf_levels(n)
    q = family_quantile(family)
    total = 0.0
    for i in range(1, n):
        f = plan.width_factor(h[i])
        if f == 0.0:
            continue
        total += f * order_gap_integral(q, i + 1, i, n, spec)
    return total


def cpm_mc(n: int, m: int, alpha: float, config: McConfig, sampler: Callable | None = None,
           scale: float = 1.0) -> EvalResult:
    """Full simulation of ``C_pM`` (data, ``m`` resamples, medians)."""
    if n % 2 == 0:
        raise UnsupportedDesignError("C_pM needs odd n")
    plan = make_plan(m, alpha)
    acc = Accumulator()
    size = max(1, 4_000_000 // (m * n))
    for _, rng, block in config.blocks():
        for k in chunks(block, size):
            Z = sampler(rng, (k, n)) if sampler else rng.standard_normal((k, n))
            acc.add(*_full_block(rng, scale * Z, plan, 0.0, "median"))
    est = acc.estimate()
    return EvalResult(est.coverage_hat, est.el_hat, "monte-carlo", est.coverage_se, est.el_se,
                      config.reps, config.seed, config.streams)


SAMPLERS = {
    "normal": lambda rng, size: rng.standard_normal(size),
    "laplace": lambda rng, size: rng.laplace(0.0, 1.0, size),
    "uniform": lambda rng, size: rng.uniform(-1.0, 1.0, size),
}


@dataclass(frozen=True)
class PercentileDesign:
    """Nonparametric percentile bootstrap of the mean or median of ``n`` draws.

    ``family`` names a symmetric population (``"normal"``, ``"laplace"`` or
    ``"uniform"`` on ``[-1, 1]``) scaled by ``scale``.
    """

    n: int
    plan: BootstrapPlan
    estimator: str = "mean"
    family: str = "normal"
    scale: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.estimator not in ("mean", "median"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "median" and self.n % 2 == 0:
            raise UnsupportedDesignError("median designs require odd n")
        if self.family not in SAMPLERS:
            raise ValueError(f"unknown family {self.family!r}")

    def sampler(self):
        return SAMPLERS[self.family]
