"""Seeded random streams and result containers for Monte Carlo estimates.

Replicates are split into ``streams`` contiguous blocks; block ``s`` draws
from a Philox generator keyed by ``(seed, s)``.  Results therefore depend
only on ``(seed, reps, streams)``, never on execution order.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class McConfig:
    reps: int = 100_000
    seed: int = 20191215
    streams: int = 8

    def __post_init__(self):
        if self.reps < 100:
            raise ValueError("reps must be >= 100")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.streams < 1:
            raise ValueError("streams must be >= 1")

    def blocks(self):
        """Yield ``(stream_index, generator, block_reps)`` in fixed order."""
        base, extra = divmod(self.reps, self.streams)
        for s in range(self.streams):
            size = base + (1 if s < extra else 0)
            if size == 0:
                continue
            ss = np.random.SeedSequence(self.seed, spawn_key=(s,))
            yield s, np.random.Generator(np.random.Philox(ss)), size


def chunks(total: int, size: int):
    size = max(1, int(size))
    done = 0
    while done < total:
        k = min(size, total - done)
        yield k
        done += k


@dataclass(frozen=True)
class EvalResult:
    """Coverage and expected length with a provenance tag.

    ``method`` is ``"exact"``, ``"quadrature"`` or ``"monte-carlo"``; the
    standard errors are zero for exact values.
    """

    coverage: float
    el: float
    method: str
    coverage_se: float = 0.0
    el_se: float = 0.0
    reps: int | None = None
    seed: int | None = None
    streams: int | None = None
    tol: float | None = None

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class McEstimate:
    coverage_hat: float
    coverage_se: float
    el_hat: float
    el_se: float
    reps: int

    def z_coverage(self, exact: float) -> float:
        return _z(self.coverage_hat - exact, self.coverage_se)

    def z_el(self, exact: float) -> float:
        return _z(self.el_hat - exact, self.el_se)


def _z(diff: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if abs(diff) <= 1e-12 else math.copysign(math.inf, diff)
    return diff / se


class Accumulator:
    """Running sums for means and standard errors of coverage and width."""

    def __init__(self):
        self.n = 0
        self.c1 = 0.0
        self.w1 = 0.0
        self.w2 = 0.0
        self.c2 = 0.0

    def add(self, cover, width):
        cover = np.asarray(cover, dtype=float)
        width = np.asarray(width, dtype=float)
        self.n += cover.size
        self.c1 += float(cover.sum())
        self.c2 += float((cover * cover).sum())
        self.w1 += float(width.sum())
        self.w2 += float((width * width).sum())

    def estimate(self) -> McEstimate:
        n = self.n
        c = self.c1 / n
        w = self.w1 / n
        c_var = max(self.c2 / n - c * c, 0.0)
        w_var = max(self.w2 / n - w * w, 0.0)
        # sample variances (Rao-Blackwellized coverage values are fractional); for 0/1
        # indicators this is the binomial-proportion estimator up to a factor n/(n-1)
        c_se = math.sqrt(c_var * n / (n - 1) / n) if n > 1 else 0.0
        w_se = math.sqrt(w_var * n / (n - 1) / n) if n > 1 else 0.0
        return McEstimate(c, c_se, w, w_se, n)
