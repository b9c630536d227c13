"""Special functions, distributions and quadrature used throughout the package.

Everything here accepts scalars or numpy arrays (broadcasting) unless noted.
The binomial CDF is evaluated through the regularized incomplete beta
function; :func:`binom_cdf_sum` keeps a direct compensated summation as an
independent route for cross-checking.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate as _integrate
from scipy import special

# relative distance below which a real argument is treated as an attained integer
SNAP_TOL = 1e-12
_ONE_MINUS = 1.0 - 2.0**-53


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class IntegrationError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def _check_prob(p):
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError(f"probability outside [0, 1]: {p!r}")
    return arr


def _scalar(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


# ---------------------------------------------------------------- binomial


def binom_pmf(k, n: int, p):
    """P(Bino(n, p) = k), evaluated in log space.

    ``k`` must lie in ``0..n``; raises :class:`DomainError` otherwise.
    """
    k_arr = np.asarray(k)
    if np.any(k_arr < 0) or np.any(k_arr > n):
        raise DomainError(f"k={k!r} outside 0..{n}")
    p_arr = _check_prob(p)
    k_arr = k_arr.astype(float)
    logc = special.gammaln(n + 1.0) - special.gammaln(k_arr + 1.0) - special.gammaln(n - k_arr + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = logc + special.xlogy(k_arr, p_arr) + special.xlog1py(n - k_arr, -p_arr)
    return _scalar(np.exp(logp))


def binom_cdf(k, n: int, p):
    """P(Bino(n, p) <= k) for any real ``k`` (floored, clamped to the support).

    Uses ``F_B(k, n, p) = I_{1-p}(n - k, k + 1)``.
    """
    p_arr = _check_prob(p)
    k_arr = np.floor(np.asarray(k, dtype=float))
    k_arr, p_arr = np.broadcast_arrays(k_arr, p_arr)
    out = np.empty(k_arr.shape, dtype=float)
    low = k_arr < 0
    high = k_arr >= n
    mid = ~(low | high)
    out[low] = 0.0
    out[high] = 1.0
    if np.any(mid):
        km = k_arr[mid]
        out[mid] = special.betainc(n - km, km + 1.0, 1.0 - p_arr[mid])
    return _scalar(out)


def binom_cdf_sum(k: int, n: int, p: float) -> float:
    """Scalar binomial CDF by compensated direct summation of the PMF."""
    k = math.floor(k)
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    terms = binom_pmf(np.arange(k + 1), n, p)
    return min(1.0, math.fsum(np.atleast_1d(terms)))


def count_thresholds(x, tol: float = SNAP_TOL) -> tuple[int, int]:
    """Integer thresholds ``(k_le, k_lt)`` for a real argument ``x``.

    ``F(x) = F(k_le)`` and the left limit ``F(x^-) = F(k_lt)`` for any
    integer-supported CDF.  Exact rationals are compared exactly; floats
    within ``tol`` (relative) of an integer are snapped onto it.
    """
    if isinstance(x, (int, Fraction)):
        fl = math.floor(x)
        return fl, (fl - 1 if fl == x else fl)
    r = round(x)
    if abs(x - r) <= tol * max(1.0, abs(x)):
        return int(r), int(r) - 1
    fl = math.floor(x)
    return fl, fl


def binom_cdf_left(x, n: int, p):
    """Left limit ``F_B(x^-, n, p)``: the mass strictly below ``x``."""
    _, k_lt = count_thresholds(x)
    return binom_cdf(k_lt, n, p)


# ---------------------------------------------------------------- normal / beta / t


def normal_pdf(x, mu: float = 0.0, sigma: float = 1.0):
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    z = (np.asarray(x, dtype=float) - mu) / sigma
    return _scalar(np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi)))


def normal_cdf(x, mu: float = 0.0, sigma: float = 1.0):
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    return _scalar(special.ndtr((np.asarray(x, dtype=float) - mu) / sigma))


def normal_quantile(z, mu: float = 0.0, sigma: float = 1.0):
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr <= 0.0) | (z_arr >= 1.0)) or np.any(np.isnan(z_arr)):
        raise DomainError("normal quantile is unbounded outside (0, 1)")
    return _scalar(mu + sigma * special.ndtri(z_arr))


def beta_cdf(x, a: float, b: float):
    if a <= 0 or b <= 0:
        raise DomainError("beta parameters must be positive")
    return _scalar(special.betainc(a, b, _check_prob(x)))


def beta_quantile(q, a: float, b: float):
    if a <= 0 or b <= 0:
        raise DomainError("beta parameters must be positive")
    q_arr = np.asarray(q, dtype=float)
    if np.any((q_arr <= 0.0) | (q_arr >= 1.0)):
        raise DomainError("beta quantile requires p in (0, 1)")
    return _scalar(special.betaincinv(a, b, q_arr))


def gamma_ln(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("gamma_ln requires x > 0")
    return _scalar(special.gammaln(x_arr))


def t_pdf(x, df: int):
    if df < 1:
        raise DomainError("df must be >= 1")
    x = np.asarray(x, dtype=float)
    logc = special.gammaln((df + 1) / 2.0) - special.gammaln(df / 2.0) - 0.5 * math.log(df * math.pi)
    return _scalar(np.exp(logc - (df + 1) / 2.0 * np.log1p(x * x / df)))


def t_cdf(x, df: int):
    if df < 1:
        raise DomainError("df must be >= 1")
    return _scalar(special.stdtr(df, np.asarray(x, dtype=float)))


def t_quantile(q, df: int):
    if df < 1:
        raise DomainError("df must be >= 1")
    return _scalar(special.stdtrit(df, np.asarray(q, dtype=float)))


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate`.

    ``tail_cutoff`` is the half-width, in standard-normal units, of the
    truncated real line used by the probit substitution.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000
    tail_cutoff: float = 8.5

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.tail_cutoff < 6:
            raise ValueError("tail cutoff must be at least 6")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    evaluations: int

    def __float__(self):
        return self.value


def integrate(f, a: float = 0.0, b: float = 1.0, spec: QuadratureSpec = DEFAULT_QUAD,
              points=None, probit: bool = False, strict: bool = True) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    With ``probit=True`` the integral is over ``z`` in (a, b) within (0, 1)
    and is rewritten with ``z = Phi(t)``, so that integrands involving the
    normal quantile become bounded-weight on the real line; ``t`` is
    truncated at ``spec.tail_cutoff``.  ``points`` are breakpoints in the
    original ``z`` coordinate.

    Non-convergence raises :class:`IntegrationError` when ``strict``;
    otherwise the estimate is returned with ``converged=False``.
    """
    if probit:
        c = spec.tail_cutoff
        lo = -c if a <= 0.0 else max(-c, float(special.ndtri(a)))
        hi = c if b >= 1.0 else min(c, float(special.ndtri(b)))

        def g(t):
            # Phi(t) rounds to 1.0 for t > 8.3; keep z inside the open interval
            z = min(float(special.ndtr(t)), _ONE_MINUS)
            return f(z) * math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)

        if points is not None:
            pts = [float(special.ndtri(z)) for z in points if 0.0 < z < 1.0]
            points = [t for t in pts if lo < t < hi]
        return integrate(g, lo, hi, spec, points=points, probit=False, strict=strict)

    if points is not None:
        points = sorted({float(x) for x in points if a < x < b})
        if not points:
            points = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                              limit=spec.max_subdivisions, points=points, full_output=1)
    value, err, info = out[0], out[1], out[2]
    ier = out[3] if len(out) > 3 else 0
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    converged = ier == 0 or err <= 10.0 * tol
    res = QuadResult(float(value), float(err), bool(converged), int(info.get("neval", 0)))
    if strict and not converged:
        raise IntegrationError(
            f"quadrature on [{a}, {b}] did not converge: estimate {value!r}, error {err!r}",
            estimate=value, error=err)
    return res


def integrate_pieces(f, breakpoints, a: float = 0.0, b: float = 1.0,
                     spec: QuadratureSpec = DEFAULT_QUAD, strict: bool = True) -> QuadResult:
    """Sum of :func:`integrate` over the pieces delimited by ``breakpoints``."""
    cuts = sorted({a, b, *(float(x) for x in breakpoints if a < x < b)})
    total, err, neval, ok = 0.0, 0.0, 0, True
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        r = integrate(f, lo, hi, spec, strict=strict)
        total += r.value
        err += r.error
        neval += r.evaluations
        ok = ok and r.converged
    return QuadResult(total, err, ok, neval)
