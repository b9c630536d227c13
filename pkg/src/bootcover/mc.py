"""Full-pipeline Monte Carlo and brute-force enumeration of bootstrap intervals.

:func:`simulate` follows the textbook recipe for every design: draw data at
the true parameter, compute the estimate, draw ``m`` bootstrap estimates,
take the ``m_l``-th and ``m_u``-th order statistics and record whether the
interval covers the truth and how wide it is.  Nothing from the exact
formulas is reused beyond the design parameters, which makes it a usable
oracle.  :func:`exhaustive` does the same with every outcome enumerated.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .binom_one import WALD, OneSampleDesign
from .binom_two import DIFF, THETA, DiffPoint, OddsPoint, TwoSampleDesign
from .nonparam import PercentileDesign
from .normal import MEAN, NormalDesign
from .percentile import BootstrapPlan
from .stats import SNAP_TOL, DomainError, binom_pmf
from .streams import Accumulator, EvalResult, McConfig, McEstimate, chunks

EXHAUSTIVE_CAP = 10**7
_CHUNK = 2_000_000


def _order_stats(est: np.ndarray, plan: BootstrapPlan):
    part = np.partition(est, (plan.m_l - 1, plan.m_u - 1), axis=1)
    return part[:, plan.m_l - 1], part[:, plan.m_u - 1]


def _le(a, t):
    """``a <= t`` with float targets snapped onto nearby support values."""
    return a <= t + SNAP_TOL * max(1.0, abs(t))


def _ge(a, t):
    return a >= t - SNAP_TOL * max(1.0, abs(t))


# ---------------------------------------------------------------- one sample


def _one_sample_values(design: OneSampleDesign, counts):
    if design.center == WALD:
        return counts / design.n
    return design.coeffs.a1 * counts + design.coeffs.b1


def _one_sample_block(rng, k, design: OneSampleDesign, p: float):
    n, plan = design.n, design.plan
    y = rng.binomial(n, p, size=k)
    centre = np.clip(_one_sample_values(design, y), 0.0, 1.0)
    u = rng.binomial(n, centre[:, None], size=(k, plan.m))
    lo, hi = _order_stats(u, plan)
    # the centre is increasing in the count, so compare on the estimator scale
    vlo, vhi = _one_sample_values(design, lo), _one_sample_values(design, hi)
    return (_le(vlo, p) & _ge(vhi, p)).astype(float), vhi - vlo


# ---------------------------------------------------------------- two samples


def _two_sample_target(truth):
    if isinstance(truth, DiffPoint):
        return DIFF, truth.d, truth.p1, truth.p2
    if isinstance(truth, OddsPoint):
        return THETA, truth.theta, truth.p1, truth.p2
    raise DomainError("two-sample truth must be a DiffPoint or an OddsPoint")


def _two_sample_values(which, u, v, n1, n2):
    if which == DIFF:
        return u / n1 - v / n2
    return ((2 * u + 1) * (2 * (n2 - v) + 1)) / ((2 * (n1 - u) + 1) * (2 * v + 1))


def _two_sample_block(rng, k, design: TwoSampleDesign, truth):
    which, target, p1, p2 = _two_sample_target(truth)
    n1, n2, plan = design.n1, design.n2, design.plan
    x = rng.binomial(n1, p1, size=k)
    y = rng.binomial(n2, p2, size=k)
    u = rng.binomial(n1, (x / n1)[:, None], size=(k, plan.m))
    v = rng.binomial(n2, (y / n2)[:, None], size=(k, plan.m))
    lo, hi = _order_stats(_two_sample_values(which, u, v, n1, n2), plan)
    return (_le(lo, target) & _ge(hi, target)).astype(float), hi - lo


# ---------------------------------------------------------------- normal


def _normal_block(rng, k, design: NormalDesign, mu: float, sigma: float):
    n, plan = design.n, design.plan
    y = mu + sigma * rng.standard_normal((k, n))
    if design.estimator == MEAN:
        est = y.mean(axis=1)
        sd = sigma if design.sigma is not None else y.std(axis=1)  # MLE, divisor n
        # the mean of n draws from N(est, sd^2) is N(est, sd^2 / n)
        boot = est[:, None] + (np.broadcast_to(sd, (k,)) / math.sqrt(n))[:, None] * \
            rng.standard_normal((k, plan.m))
    else:
        est = np.median(y, axis=1)
        draws = est[:, None, None] + sigma * rng.standard_normal((k, plan.m, n))
        boot = np.median(draws, axis=2)
    lo, hi = _order_stats(boot, plan)
    return ((lo <= mu) & (mu <= hi)).astype(float), hi - lo


def _nonparam_block(rng, k, design: PercentileDesign, mu: float):
    n, plan = design.n, design.plan
    y = mu + design.scale * design.sampler()(rng, (k, n))
    idx = rng.integers(0, n, size=(k, plan.m, n))
    boot = np.take_along_axis(np.broadcast_to(y[:, None, :], (k, plan.m, n)), idx, axis=2)
    est = boot.mean(axis=2) if design.estimator == "mean" else np.median(boot, axis=2)
    lo, hi = _order_stats(est, plan)
    return ((lo <= mu) & (mu <= hi)).astype(float), hi - lo


def _dispatch(design, truth):
    """Return ``(per-replicate cost, block function)`` for a design and truth."""
    if isinstance(design, OneSampleDesign):
        p = float(truth)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0, 1]")
        return design.plan.m, lambda rng, k: _one_sample_block(rng, k, design, p)
    if isinstance(design, TwoSampleDesign):
        _two_sample_target(truth)
        return 2 * design.plan.m, lambda rng, k: _two_sample_block(rng, k, design, truth)
    if isinstance(design, NormalDesign):
        if isinstance(truth, tuple):
            mu, sigma = map(float, truth)
        else:
            mu, sigma = float(truth), design.sigma if design.sigma is not None else 1.0
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        cost = design.plan.m * (design.n if design.estimator != MEAN else 1) + design.n
        return cost, lambda rng, k: _normal_block(rng, k, design, mu, sigma)
    if isinstance(design, PercentileDesign):
        mu = float(truth)
        return design.plan.m * design.n, lambda rng, k: _nonparam_block(rng, k, design, mu)
    raise TypeError(f"unsupported design {type(design).__name__}")


def simulate(design, truth, config: McConfig | None = None) -> McEstimate:
    """Full-pipeline Monte Carlo estimate of coverage and expected length.

    Parameters
    ----------
    design : OneSampleDesign, TwoSampleDesign, NormalDesign or PercentileDesign
    truth
        ``p`` for one-sample designs, a :class:`DiffPoint` or
        :class:`OddsPoint` for two-sample designs, ``mu`` (or ``(mu, sigma)``)
        for normal designs and ``mu`` for percentile designs.
    config : McConfig
        Replicates, seed and stream count.  Results are a deterministic
        function of these three numbers.
    """
    config = config or McConfig()
    cost, block = _dispatch(design, truth)
    acc = Accumulator()
    for _, rng, size in config.blocks():
        for k in chunks(size, _CHUNK // max(cost, 1)):
            acc.add(*block(rng, k))
    return acc.estimate()


# ---------------------------------------------------------------- enumeration


def _enumerate_boot(values: np.ndarray, probs: np.ndarray, plan: BootstrapPlan, target: float):
    """Exact coverage and mean width over all ``m``-tuples of bootstrap outcomes."""
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    tuples = np.array(list(itertools.product(range(len(values)), repeat=plan.m)), dtype=np.int64)
    est = values[tuples]
    lo, hi = _order_stats(est, plan)
    w = np.prod(probs[tuples], axis=1)
    cover = _le(lo, target) & _ge(hi, target)
    return math.fsum(w[cover]), math.fsum(w * (hi - lo))


def exhaustive(design, truth) -> EvalResult:
    """Coverage and expected length by enumerating every data and bootstrap outcome.

    Supports one- and two-sample binomial designs whose total outcome count
    (data outcomes times bootstrap ``m``-tuples) is at most ``10**7``.
    """
    if isinstance(design, OneSampleDesign):
        n, plan, p = design.n, design.plan, float(truth)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0, 1]")
        size = (n + 1) ** (plan.m + 1)
        data = [(y, float(binom_pmf(y, n, p))) for y in range(n + 1)]
        counts = np.arange(n + 1)
        values = _one_sample_values(design, counts)

        def boot(y):
            centre = min(max(float(_one_sample_values(design, y)), 0.0), 1.0)
            return values, np.atleast_1d(binom_pmf(counts, n, centre))
        target = p
    elif isinstance(design, TwoSampleDesign):
        which, target, p1, p2 = _two_sample_target(truth)
        n1, n2, plan = design.n1, design.n2, design.plan
        cells = (n1 + 1) * (n2 + 1)
        size = cells ** (plan.m + 1)
        u, v = np.meshgrid(np.arange(n1 + 1), np.arange(n2 + 1), indexing="ij")
        u, v = u.ravel(), v.ravel()
        values = _two_sample_values(which, u, v, n1, n2)
        data = [(xy, float(binom_pmf(xy[0], n1, p1) * binom_pmf(xy[1], n2, p2)))
                for xy in zip(u.tolist(), v.tolist())]

        def boot(xy):
            x, y = xy
            pr = np.atleast_1d(binom_pmf(u, n1, x / n1)) * np.atleast_1d(binom_pmf(v, n2, y / n2))
            return values, pr
    else:
        raise TypeError(f"exhaustive enumeration does not support {type(design).__name__}")
    if size > EXHAUSTIVE_CAP:
        raise ValueError(f"{size} outcomes exceed the enumeration cap {EXHAUSTIVE_CAP}")
    cov, el = [], []
    for outcome, w in data:
        if w == 0.0:
            continue
        c, e = _enumerate_boot(*boot(outcome), design.plan, target)
        cov.append(w * c)
        el.append(w * e)
    return EvalResult(math.fsum(cov), math.fsum(el), "exact")
