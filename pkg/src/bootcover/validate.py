"""Registry pairing every exact operation with an independent oracle.

Each pairing yields checks of two kinds: ``enum`` checks compare an exact
value with brute-force enumeration (or a second exact route) and pass when
the absolute difference is at most ``ENUM_TOL``; ``mc`` checks compare with
a seeded full-pipeline simulation and pass when ``|z| <= Z_MAX``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import binom_one, binom_two, nonparam, normal
from .binom_one import OneSampleDesign
from .binom_two import DiffPoint, OddsPoint, TwoSampleDesign
from .mc import exhaustive, simulate
from .nonparam import PercentileDesign
from .normal import NormalDesign
from .percentile import make_plan
from .streams import Accumulator, McConfig

ENUM_TOL = 1e-12
Z_MAX = 3.0
QUICK = "quick"
FULL = "full"


@dataclass(frozen=True)
class Check:
    pair: str
    label: str
    kind: str
    exact: float
    oracle: float
    se: float = 0.0

    @property
    def score(self) -> float:
        """``|difference|`` for enum checks, ``z`` for Monte Carlo checks."""
        diff = self.exact - self.oracle
        if self.kind == "enum":
            return abs(diff)
        if self.se == 0.0:
            return 0.0 if abs(diff) <= ENUM_TOL else math.inf
        return (self.oracle - self.exact) / self.se

    @property
    def passed(self) -> bool:
        if self.kind == "enum":
            return self.score <= ENUM_TOL
        return abs(self.score) <= Z_MAX


@dataclass(frozen=True)
class Pairing:
    name: str
    module: str
    covers: tuple[str, ...]
    run: Callable[[str, int], Iterator[Check]]


REGISTRY: list[Pairing] = []


def register(name: str, module: str, covers: tuple[str, ...]):
    def deco(fn):
        REGISTRY.append(Pairing(name, module, covers, fn))
        return fn
    return deco


def _reps(suite: str) -> int:
    return 100_000 if suite == FULL else 20_000


def _cfg(suite: str, seed: int, offset: int) -> McConfig:
    # distinct pairings draw from distinct seeds so their checks are independent
    return McConfig(_reps(suite), (seed + 7919 * offset) % 2**64, 8)


def _mc_checks(name, label, est, cov, el) -> Iterator[Check]:
    yield Check(name, f"{label} coverage", "mc", cov, est.coverage_hat, est.coverage_se)
    yield Check(name, f"{label} el", "mc", el, est.el_hat, est.el_se)


def _p_grid(suite: str) -> np.ndarray:
    return np.linspace(0.1, 0.9, 9) if suite == FULL else np.array([0.15, 0.5, 0.85])


# ---------------------------------------------------------------- binom-one


@register("one-sample enumeration", "binom-one",
          ("coverage_cwa", "el_cwa", "coverage_cwi", "el_cwi"))
def _one_enum(suite, seed):
    cases = [(2, 2, 0.5, 0.5, "wald"), (3, 4, 0.4, 0.3, "wald"), (3, 4, 0.4, 0.3, "wilson")]
    if suite == FULL:
        cases += [(3, 5, 0.2, 0.71, "wald"), (3, 5, 0.2, 0.71, "wilson")]
    for n, m, a, p, center in cases:
        d = OneSampleDesign.build(n, m, a, center)
        ref = exhaustive(d, p)
        lab = f"{center} n={n} m={m} p={p}"
        yield Check("one-sample enumeration", f"{lab} coverage", "enum", d.coverage(p), ref.coverage)
        yield Check("one-sample enumeration", f"{lab} el", "enum", d.expected_length(p), ref.el)


@register("one-sample simulation", "binom-one",
          ("coverage_cwa", "el_cwa", "coverage_cwi", "el_cwi"))
def _one_mc(suite, seed):
    sizes = [(3, 5), (5, 10)] if suite == FULL else [(5, 10)]
    k = 0
    for n, m in sizes:
        for center in ("wald", "wilson"):
            d = OneSampleDesign.build(n, m, 0.2, center)
            for p in _p_grid(suite):
                k += 1
                est = simulate(d, float(p), _cfg(suite, seed, 100 + k))
                yield from _mc_checks("one-sample simulation", f"{center} n={n} m={m} p={p:.2f}",
                                      est, d.coverage(p), d.expected_length(p))


@register("interval-table simulation", "binom-one", ("coverage_table", "el_table"))
def _table_mc(suite, seed):
    t = binom_one.wilson_table(10, 0.1)
    for i, p in enumerate((0.13, 0.5)):
        rng = np.random.default_rng([seed, 300 + i])
        y = rng.binomial(10, p, size=_reps(suite))
        acc = Accumulator()
        acc.add((t.lower[y] <= p) & (p <= t.upper[y]), t.upper[y] - t.lower[y])
        yield from _mc_checks("interval-table simulation", f"wilson table p={p}", acc.estimate(),
                              t.coverage(p), t.expected_length(p))


@register("closed-form areas", "binom-one", ("area_exact", "el_area_exact"))
def _area_quad(suite, seed):
    for center in ("wald", "wilson"):
        d = OneSampleDesign.build(6, 20, 0.2, center)
        bp = d.breakpoints()
        yield Check("closed-form areas", f"{center} area", "enum", binom_one.area_exact(d),
                    binom_one.area_under(d.coverage, bp))
        yield Check("closed-form areas", f"{center} el area", "enum", binom_one.el_area_exact(d),
                    binom_one.area_under(d.expected_length, bp))


# ---------------------------------------------------------------- binom-two


@register("two-sample enumeration", "binom-two",
          ("coverage_cd", "el_cd", "coverage_ctheta", "el_ctheta"))
def _two_enum(suite, seed):
    d = TwoSampleDesign.build(2, 2, 5, 0.4)
    points = [DiffPoint(0.0, 0.5), OddsPoint(1.0, 0.5)]
    if suite == FULL:
        points += [DiffPoint(-0.3, 0.7), OddsPoint(3.2, 0.25)]
    for pt in points:
        ref = exhaustive(d, pt)
        if isinstance(pt, DiffPoint):
            cov, el = binom_two.coverage_cd(pt, d), binom_two.el_cd(pt, d)
        else:
            cov, el = binom_two.coverage_ctheta(pt, d), binom_two.el_ctheta(pt, d)
        yield Check("two-sample enumeration", f"{pt} coverage", "enum", cov, ref.coverage)
        yield Check("two-sample enumeration", f"{pt} el", "enum", el, ref.el)


@register("two-sample simulation", "binom-two",
          ("coverage_cd", "el_cd", "coverage_ctheta", "el_ctheta"))
def _two_mc(suite, seed):
    d = TwoSampleDesign.build(3, 4, 10, 0.2)
    rng = np.random.default_rng([seed, 400])
    npts = 5 if suite == FULL else 2
    k = 0
    for _ in range(npts):
        p1, p2 = rng.uniform(0.05, 0.95, size=2)
        k += 1
        dp = DiffPoint(float(p1 - p2), float(p2))
        yield from _mc_checks("two-sample simulation", f"{dp}", simulate(d, dp, _cfg(suite, seed, 400 + k)),
                              binom_two.coverage_cd(dp, d), binom_two.el_cd(dp, d))
        theta = float(p1 * (1 - p2) / ((1 - p1) * p2))
        op = OddsPoint(theta, float(p2))
        k += 1
        yield from _mc_checks("two-sample simulation", f"{op}", simulate(d, op, _cfg(suite, seed, 400 + k)),
                              binom_two.coverage_ctheta(op, d), binom_two.el_ctheta(op, d))


# ---------------------------------------------------------------- normal-param


@register("normal simulation", "normal-param",
          ("coverage_cq", "el_cq", "el_cn", "el_cnm", "coverage_cnu", "el_cnu"))
def _normal_mc(suite, seed):
    n, m, a = 5, 20, 0.2
    plan = make_plan(m, a)
    cq = float(normal.coverage_cq(plan))
    cases = [
        ("C_N", NormalDesign(n, plan), 0.3, cq, normal.el_cn(n, m, a)),
        ("C_NM", NormalDesign(n, plan, estimator="median"), -1.1, cq, normal.el_cnm(n, m, a)),
        ("C_Nu", NormalDesign(n, plan, sigma=None), (0.3, 2.0),
         normal.coverage_cnu(n, m, a), normal.el_cnu(n, m, a, 2.0)),
    ]
    for k, (lab, d, truth, cov, el) in enumerate(cases):
        yield from _mc_checks("normal simulation", f"{lab} (5,20,0.2)",
                              simulate(d, truth, _cfg(suite, seed, 500 + k)), cov, el)


# ---------------------------------------------------------------- nonparam-percentile


def _brute_mean_masses(sample):
    n = len(sample)
    acc: dict[Fraction, Fraction] = {}
    for idx in itertools.product(range(n), repeat=n):
        key = sum(Fraction(sample[i]) for i in idx) / n
        acc[key] = acc.get(key, 0) + Fraction(1, n**n)
    return acc


def _brute_median_cdf(n):
    """``P(median of a resample <= y_(i))`` for each rank by listing all ``n^n`` resamples."""
    counts = np.zeros(n + 1)
    for idx in itertools.product(range(n), repeat=n):
        counts[sorted(idx)[n // 2] + 1] += 1
    return np.cumsum(counts) / n**n


@register("resample enumeration", "nonparam-percentile",
          ("s_count", "dist_mean_boot", "dist_median_boot"))
def _np_enum(suite, seed):
    samples = [(0, 1, 5), (Fraction(1, 3), 2, 2, Fraction(-7, 2))]
    if suite == FULL:
        samples.append((3, -1, 4, 1, 5))
    for s in samples:
        brute = _brute_mean_masses(s)
        rows = nonparam.mean_boot_table(s)
        worst = max(abs(float(p - brute[v])) for v, p, _ in rows)
        yield Check("resample enumeration", f"mean masses {s}", "enum", 0.0, worst)
        yield Check("resample enumeration", f"support size {s}", "enum", float(len(rows)), float(len(brute)))
    for n in ((3, 5) if suite == FULL else (3,)):
        yield Check("resample enumeration", f"S({n},{n})", "enum", float(nonparam.s_count(n, n)),
                    float(len(nonparam.compositions(n)[1])))
        d = nonparam.dist_median_boot(list(range(n)))
        yield Check("resample enumeration", f"median cdf n={n}", "enum", 0.0,
                    float(np.max(np.abs(d.cum - _brute_median_cdf(n)[1:]))))


@register("percentile-mean simulation", "nonparam-percentile",
          ("coverage_cpn_n2", "el_cpn_n2", "coverage_cpn", "el_cpn"))
def _cpn_mc(suite, seed):
    plan = make_plan(10, 0.2)
    exact = nonparam.cpn_eval(2, 10, 0.2, mode=nonparam.EXACT)
    yield Check("percentile-mean simulation", "n=2 closed form vs exact-enum", "enum",
                nonparam.coverage_cpn_n2(10, 0.2), exact.coverage)
    est = simulate(PercentileDesign(2, plan), 0.0, _cfg(suite, seed, 600))
    yield from _mc_checks("percentile-mean simulation", "n=2 (10,0.2)", est,
                          nonparam.coverage_cpn_n2(10, 0.2), nonparam.el_cpn_n2(10, 0.2))
    # Rao-Blackwellized estimate against the full pipeline: independent runs, joint SE
    rb = nonparam.cpn_eval(3, 10, 0.2, config=_cfg(suite, seed, 601))
    full = simulate(PercentileDesign(3, plan), 0.0, _cfg(suite, seed, 602))
    yield Check("percentile-mean simulation", "n=3 (10,0.2) coverage rb vs full", "mc", rb.coverage,
                full.coverage_hat, math.hypot(rb.coverage_se, full.coverage_se))
    yield Check("percentile-mean simulation", "n=3 (10,0.2) el rb vs full", "mc", rb.el,
                full.el_hat, math.hypot(rb.el_se, full.el_se))


@register("percentile-median simulation", "nonparam-percentile", ("coverage_cpm", "el_cpm"))
def _cpm_mc(suite, seed):
    n, m, a = 5, 20, 0.2
    plan = make_plan(m, a)
    cov = nonparam.coverage_cpm(n, m, a)
    fams = [("normal", ("normal", 1.0)), ("laplace", ("laplace", 1.0))]
    if suite == FULL:
        fams.append(("uniform", ("uniform", 1.0)))
    for k, (fam, spec) in enumerate(fams):
        est = simulate(PercentileDesign(n, plan, "median", fam), 0.0, _cfg(suite, seed, 700 + k))
        yield from _mc_checks("percentile-median simulation", f"{fam} (5,20,0.2)", est, cov,
                              nonparam.el_cpm(n, m, a, spec))


# ---------------------------------------------------------------- driver


EXACT_OPERATIONS = {
    "binom-one": ("coverage_cwa", "el_cwa", "coverage_cwi", "el_cwi", "coverage_table", "el_table",
                  "area_exact", "el_area_exact"),
    "binom-two": ("coverage_cd", "el_cd", "coverage_ctheta", "el_ctheta"),
    "normal-param": ("coverage_cq", "el_cq", "el_cn", "el_cnm", "coverage_cnu", "el_cnu"),
    "nonparam-percentile": ("s_count", "dist_mean_boot", "dist_median_boot", "coverage_cpn_n2",
                            "el_cpn_n2", "coverage_cpn", "el_cpn", "coverage_cpm", "el_cpm"),
}


def uncovered() -> list[tuple[str, str]]:
    """Exact operations without a registered oracle pairing."""
    have = {(p.module, op) for p in REGISTRY for op in p.covers}
    return [(mod, op) for mod, ops in EXACT_OPERATIONS.items() for op in ops if (mod, op) not in have]


@dataclass
class Report:
    suite: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and not uncovered()

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def run_suite(suite: str = QUICK, seed: int = 20191215, only: str | None = None) -> Report:
    if suite not in (QUICK, FULL):
        raise ValueError(f"unknown suite {suite!r}")
    if only is not None and only not in EXACT_OPERATIONS:
        raise ValueError(f"unknown module {only!r}; choose from {', '.join(EXACT_OPERATIONS)}")
    start = time.perf_counter()
    report = Report(suite, seed)
    for pairing in REGISTRY:
        if only and pairing.module != only:
            continue
        report.checks.extend(pairing.run(suite, seed))
    report.seconds = time.perf_counter() - start
    return report
