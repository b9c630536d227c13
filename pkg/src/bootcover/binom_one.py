"""Bootstrap intervals for a single binomial proportion.

Two bootstrap intervals are covered: ``C_wa`` centred on ``y/n`` and
``C_wi`` centred on the Wilson point ``a1*y + b1``.  For binary data the
parametric and percentile bootstraps resample the same distribution, so one
implementation serves both.  Deterministic comparator intervals
(Wald, Wilson, Agresti-Coull, Clopper-Pearson or anything imported from CSV)
are handled through :class:`IntervalTable`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, special

from .percentile import BootstrapPlan, make_plan
from .stats import (DEFAULT_QUAD, DomainError, QuadratureSpec, beta_quantile, binom_cdf,
                    binom_pmf, count_thresholds, integrate_pieces, normal_quantile)

WALD = "wald"
WILSON = "wilson"


@dataclass(frozen=True)
class WilsonCoeffs:
    a1: float
    b1: float
    z: float


def wilson_coeffs(n: int, alpha: float) -> WilsonCoeffs:
    """Coefficients of the Wilson centre ``(y + z^2/2) / (n + z^2)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    z = normal_quantile(1.0 - alpha / 2.0)
    denom = n + z * z
    return WilsonCoeffs(a1=1.0 / denom, b1=(z * z / 2.0) / denom, z=z)


def _check_p(p):
    if not 0 <= p <= 1:
        raise DomainError(f"p={p!r} outside [0, 1]")


class OneSampleDesign:
    """Bootstrap interval for ``p`` from ``y ~ Bino(n, p)``.

    Parameters
    ----------
    n : int
        Number of Bernoulli trials.
    plan : BootstrapPlan
        Resample count and order-statistic indices.
    center : {"wald", "wilson"}
        Point estimator re-computed on each bootstrap sample.
    """

    def __init__(self, n: int, plan: BootstrapPlan, center: str = WALD):
        if n < 1:
            raise DomainError("n must be >= 1")
        if center not in (WALD, WILSON):
            raise ValueError(f"unknown center {center!r}")
        self.n = n
        self.plan = plan
        self.center = center
        ys = np.arange(n + 1)
        if center == WALD:
            self.coeffs = None
            self.scale = 1.0 / n
            self.centers = ys / n
        else:
            self.coeffs = wilson_coeffs(n, plan.alpha)
            self.scale = self.coeffs.a1
            self.centers = self.coeffs.a1 * ys + self.coeffs.b1
        self._brackets: dict[tuple[int, int], np.ndarray] = {}
        self._widths = None

    @classmethod
    def build(cls, n: int, m: int, alpha: float, center: str = WALD) -> "OneSampleDesign":
        return cls(n, make_plan(m, alpha), center)

    def __repr__(self):
        return f"OneSampleDesign(n={self.n}, m={self.plan.m}, alpha={self.plan.alpha}, center={self.center!r})"

    def count_argument(self, p):
        """The threshold on the bootstrap count ``Bino(n, centre)`` equivalent to ``estimate <= p``."""
        if self.center == WALD:
            return self.n * p if isinstance(p, (int, Fraction)) else self.n * float(p)
        return (float(p) - self.coeffs.b1) / self.coeffs.a1

    def breakpoints(self) -> list[float]:
        """Values of ``p`` where the coverage curve jumps."""
        if self.center == WALD:
            return [k / self.n for k in range(self.n + 1)]
        pts = [self.coeffs.a1 * k + self.coeffs.b1 for k in range(self.n + 1)]
        return [x for x in pts if 0.0 <= x <= 1.0]

    def brackets(self, p) -> np.ndarray:
        """Per-``y`` conditional coverage ``P(u_(m_l) <= p <= u_(m_u) | y)``."""
        k_le, k_lt = count_thresholds(self.count_argument(p))
        k_le = min(max(k_le, -1), self.n)
        k_lt = min(max(k_lt, -1), self.n)
        key = (k_le, k_lt)
        out = self._brackets.get(key)
        if out is None:
            h = binom_cdf(k_le, self.n, self.centers)
            h_left = binom_cdf(k_lt, self.n, self.centers)
            out = np.asarray(self.plan.bracket(h_left, h))
            self._brackets[key] = out
        return out

    def coverage(self, p) -> float:
        _check_p(p)
        weights = binom_pmf(np.arange(self.n + 1), self.n, float(p))
        return float(np.clip(np.dot(self.brackets(p), weights), 0.0, 1.0))

    def widths(self) -> np.ndarray:
        """Per-``y`` conditional expected width of the bootstrap interval."""
        if self._widths is None:
            xs = np.arange(self.n)[:, None]
            h = binom_cdf(xs, self.n, self.centers[None, :])
            self._widths = self.scale * np.asarray(self.plan.width_factor(h)).sum(axis=0)
        return self._widths

    def expected_length(self, p) -> float:
        _check_p(p)
        weights = binom_pmf(np.arange(self.n + 1), self.n, float(p))
        return float(np.dot(self.widths(), weights))


def coverage_cwa(p, design: OneSampleDesign) -> float:
    if design.center != WALD:
        raise ValueError("coverage_cwa needs a Wald-centred design")
    return design.coverage(p)


def coverage_cwi(p, design: OneSampleDesign) -> float:
    if design.center != WILSON:
        raise ValueError("coverage_cwi needs a Wilson-centred design")
    return design.coverage(p)


def el_cwa(p, design: OneSampleDesign) -> float:
    if design.center != WALD:
        raise ValueError("el_cwa needs a Wald-centred design")
    return design.expected_length(p)


def el_cwi(p, design: OneSampleDesign) -> float:
    if design.center != WILSON:
        raise ValueError("el_cwi needs a Wilson-centred design")
    return design.expected_length(p)


# ---------------------------------------------------------------- deterministic intervals


@dataclass
class IntervalTable:
    """A deterministic interval ``[lower[y], upper[y]]`` for ``y = 0..n``."""

    n: int
    lower: np.ndarray
    upper: np.ndarray
    name: str = "table"
    alpha: float | None = None

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != (self.n + 1,) or self.upper.shape != (self.n + 1,):
            raise ValueError(f"table needs one row per y = 0..{self.n}")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")

    @classmethod
    def from_rows(cls, rows, n: int | None = None, name: str = "table") -> "IntervalTable":
        rows = {int(y): (float(lo), float(hi)) for y, lo, hi in rows}
        if n is None:
            n = max(rows) if rows else -1
        missing = [y for y in range(n + 1) if y not in rows]
        if missing or n < 0:
            raise ValueError(f"interval table incomplete; missing y = {missing}")
        lo = [rows[y][0] for y in range(n + 1)]
        hi = [rows[y][1] for y in range(n + 1)]
        return cls(n, lo, hi, name=name)

    @classmethod
    def read_csv(cls, path, n: int | None = None, name: str | None = None) -> "IntervalTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["y", "lower", "upper"]:
                raise ValueError(f"{path}: expected header 'y,lower,upper'")
            rows = [(r["y"], r["lower"], r["upper"]) for r in reader]
        return cls.from_rows(rows, n=n, name=name or str(path))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["y", "lower", "upper"])
            for y in range(self.n + 1):
                w.writerow([y, format(self.lower[y], ".17g"), format(self.upper[y], ".17g")])

    def breakpoints(self) -> list[float]:
        pts = np.concatenate([self.lower, self.upper])
        # coverage only changes where a bound crosses p inside [0, 1]
        return sorted({float(x) for x in pts if 0.0 <= x <= 1.0})

    def coverage(self, p) -> float:
        _check_p(p)
        p = float(p)
        inside = (self.lower <= p) & (p <= self.upper)
        weights = binom_pmf(np.arange(self.n + 1), self.n, p)
        return float(np.dot(inside, weights))

    def expected_length(self, p) -> float:
        _check_p(p)
        weights = binom_pmf(np.arange(self.n + 1), self.n, float(p))
        return float(np.dot(self.upper - self.lower, weights))


def coverage_table(p, table: IntervalTable, n: int | None = None) -> float:
    if n is not None and n != table.n:
        raise ValueError(f"table built for n={table.n}, not {n}")
    return table.coverage(p)


def el_table(p, table: IntervalTable, n: int | None = None) -> float:
    if n is not None and n != table.n:
        raise ValueError(f"table built for n={table.n}, not {n}")
    return table.expected_length(p)


def wald_table(n: int, alpha: float, clip: bool = False) -> IntervalTable:
    """``y/n -/+ z sqrt(phat (1 - phat) / n)``; bounds may leave [0, 1] unless ``clip``."""
    z = normal_quantile(1 - alpha / 2)
    ph = np.arange(n + 1) / n
    half = z * np.sqrt(ph * (1 - ph) / n)
    lo, hi = ph - half, ph + half
    if clip:
        lo, hi = np.clip(lo, 0, 1), np.clip(hi, 0, 1)
    return IntervalTable(n, lo, hi, "wald", alpha)


def wilson_table(n: int, alpha: float) -> IntervalTable:
    z = normal_quantile(1 - alpha / 2)
    ph = np.arange(n + 1) / n
    center = (ph + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * np.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
    return IntervalTable(n, np.clip(center - half, 0, 1), np.clip(center + half, 0, 1), "wilson", alpha)


def agresti_coull_table(n: int, alpha: float) -> IntervalTable:
    z = normal_quantile(1 - alpha / 2)
    nt = n + z * z
    pt = (np.arange(n + 1) + z * z / 2) / nt
    half = z * np.sqrt(pt * (1 - pt) / nt)
    return IntervalTable(n, np.clip(pt - half, 0, 1), np.clip(pt + half, 0, 1), "agresti-coull", alpha)


def clopper_pearson_table(n: int, alpha: float) -> IntervalTable:
    lo = np.zeros(n + 1)
    hi = np.ones(n + 1)
    for y in range(n + 1):
        if y > 0:
            lo[y] = beta_quantile(alpha / 2, y, n - y + 1)
        if y < n:
            hi[y] = beta_quantile(1 - alpha / 2, y + 1, n - y)
    return IntervalTable(n, lo, hi, "clopper-pearson", alpha)


TABLE_BUILDERS = {
    "wald": wald_table,
    "wilson": wilson_table,
    "agresti-coull": agresti_coull_table,
    "clopper-pearson": clopper_pearson_table,
}


# ---------------------------------------------------------------- summaries over p


def area_under(curve: Callable[[float], float], breakpoints: Sequence[float] = (),
               spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_0^1 curve(p) dp``, integrated piecewise between the breakpoints."""
    return integrate_pieces(curve, breakpoints, 0.0, 1.0, spec).value


def area_exact(design) -> float:
    """Closed-form area under a binomial coverage curve.

    Between consecutive breakpoints the curve is ``sum_y c_y p_B(y, n, p)``
    with constant ``c_y``, and ``int_a^b p_B(y, n, p) dp`` is a difference of
    regularized incomplete beta values divided by ``n + 1``.  Works for a
    :class:`OneSampleDesign` or an :class:`IntervalTable`.
    """
    n = design.n
    ys = np.arange(n + 1)
    cuts = sorted({0.0, 1.0, *design.breakpoints()})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        if isinstance(design, IntervalTable):
            c = ((design.lower <= mid) & (mid <= design.upper)).astype(float)
        else:
            c = design.brackets(mid)
        mass = special.betainc(ys + 1.0, n - ys + 1.0, hi) - special.betainc(ys + 1.0, n - ys + 1.0, lo)
        total += float(np.dot(c, mass)) / (n + 1)
    return total


def el_area_exact(design) -> float:
    """Closed-form area under the expected-length curve: ``sum_y w_y / (n + 1)``."""
    if isinstance(design, IntervalTable):
        w = design.upper - design.lower
    else:
        w = design.widths()
    return float(np.sum(w)) / (design.n + 1)


@dataclass
class IcpReport:
    """Grid minimum of a coverage curve, reported with the grid that produced it."""

    value: float
    argmin: float
    n_points: int
    resolution: float
    smallest_probe: float
    analytic_bound: float | None = None
    note: str = ""

    def __float__(self):
        return self.value


def icp(curve: Callable[[float], float], breakpoints: Sequence[float] = (),
        boundary_limits: str = "open", grid: int = 2000, approach_depth: int = 8,
        n_for_bound: int | None = None) -> IcpReport:
    """Minimum of ``curve`` over a breakpoint-refined grid on [0, 1].

    With ``boundary_limits="open"`` the endpoints 0 and 1 themselves are not
    probed; instead ``10**-k`` and ``1 - 10**-k`` for ``k <= approach_depth``
    are.  ``n_for_bound`` attaches the analytic bound ``1 - (1 - p)^n`` at the
    smallest probed ``p``, the evidence that the infimum over the continuum is
    zero for binomial bootstrap intervals.
    """
    if boundary_limits not in ("open", "closed"):
        raise ValueError("boundary_limits must be 'open' or 'closed'")
    pts = set(np.linspace(0.0, 1.0, grid).tolist())
    eps = 1e-9
    for b in breakpoints:
        pts.update((b - eps, b, b + eps))
    for k in range(1, approach_depth + 1):
        pts.update((10.0 ** -k, 1.0 - 10.0 ** -k))
    if boundary_limits == "open":
        pts = {p for p in pts if 0.0 < p < 1.0}
    else:
        pts = {p for p in pts if 0.0 <= p <= 1.0}
    probe = sorted(pts)
    vals = np.array([curve(p) for p in probe])
    i = int(np.argmin(vals))
    smallest = probe[0]
    bound = None
    note = ""
    if n_for_bound is not None:
        bound = 1.0 - (1.0 - smallest) ** n_for_bound
        note = (f"coverage(p) <= 1 - (1 - p)^{n_for_bound} for p in (0, 1); "
                f"at p={smallest:.0e} the bound is {bound:.3e}, so the infimum is 0")
    return IcpReport(float(vals[i]), probe[i], len(probe), 1.0 / (grid - 1), smallest, bound, note)


@dataclass
class Calibration:
    alpha: float
    area: float
    residual: float
    flagged: bool
    grid: np.ndarray = field(repr=False, default=None)
    areas: np.ndarray = field(repr=False, default=None)

    @property
    def level(self) -> float:
        return 1.0 - self.alpha


def default_alpha_grid(points: int = 199) -> np.ndarray:
    return np.linspace(0.005, 0.995, points)


def calibrate_alpha(area_of: Callable[[float], float], target_area: float, alphas=None,
                    tol: float = 0.005, refine: bool = True) -> Calibration:
    """Nominal ``alpha`` whose area under the coverage curve is closest to ``target_area``.

    Every grid point is evaluated; no monotonicity in ``alpha`` is assumed.
    When the best grid value sits on a plateau (step families such as
    bootstrap intervals with fixed ``m``), the middle of the plateau is
    returned.  When a neighbouring grid point brackets the target, a root
    search refines the answer.
    """
    if not 0 < target_area < 1:
        raise ValueError("target area must lie in (0, 1)")
    alphas = default_alpha_grid() if alphas is None else np.asarray(alphas, dtype=float)
    areas = np.array([area_of(a) for a in alphas])
    resid = np.abs(areas - target_area)
    best = float(resid.min())
    i = int(np.argmin(resid))
    lo = hi = i
    while lo > 0 and abs(resid[lo - 1] - best) <= 1e-12 and abs(areas[lo - 1] - areas[i]) <= 1e-12:
        lo -= 1
    while hi < len(alphas) - 1 and abs(resid[hi + 1] - best) <= 1e-12 and abs(areas[hi + 1] - areas[i]) <= 1e-12:
        hi += 1
    alpha, area = float(0.5 * (alphas[lo] + alphas[hi])), float(areas[i])
    if lo != hi:
        area = float(area_of(alpha))
    if refine and lo == hi:
        f = lambda a: area_of(a) - target_area  # noqa: E731
        for j in (i - 1, i + 1):
            if 0 <= j < len(alphas) and (areas[j] - target_area) * (areas[i] - target_area) < 0:
                a0, a1 = sorted((alphas[i], alphas[j]))
                root = optimize.brentq(f, a0, a1, xtol=1e-10)
                r_area = area_of(root)
                if abs(r_area - target_area) < abs(area - target_area):
                    alpha, area = float(root), float(r_area)
                break
    residual = area - target_area
    return Calibration(alpha, area, residual, abs(residual) > tol, alphas, areas)
