"""Self-contained CDF/quantile kernel for the normal, chi-squared and Student-t families.

Everything here is scalar, pure and deterministic.  CDFs target an absolute
accuracy of 1e-12; quantiles are found by safeguarded root finding on the CDF
and reproduce p to roughly 1e-12 relative to the nearer tail mass.  The
incomplete gamma and beta functions are evaluated by the classic series /
continued-fraction split, switching at the conventional boundary.

No random variate generation lives here; see :mod:`sil_assessor.montecarlo`.
"""

from __future__ import annotations

import math
from functools import lru_cache

_SQRT2 = math.sqrt(2.0)
_EPS = 1e-16
_MAX_ITER = 500


def _require_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def _require_open_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not (0.0 < p < 1.0):
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {p!r}")
    return p


def _require_df(nu: int) -> int:
    if int(nu) != nu or nu < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {nu!r}")
    return int(nu)


# ---------------------------------------------------------------------------
# incomplete gamma / beta kernels
# ---------------------------------------------------------------------------

def _gammainc_lower_series(a: float, x: float) -> float:
    # series representation, converges fast for x < a + 1
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_upper_contfrac(a: float, x: float) -> float:
    # Lentz continued fraction for the upper tail, x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_reg(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0."""
    if x < 0.0 or a <= 0.0:
        raise ValueError(f"invalid incomplete-gamma arguments a={a}, x={x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _gammainc_lower_series(a, x))
    return min(1.0, max(0.0, 1.0 - _gammainc_upper_contfrac(a, x)))


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0, 1]."""
    if not (0.0 <= x <= 1.0) or a <= 0.0 or b <= 0.0:
        raise ValueError(f"invalid incomplete-beta arguments a={a}, b={b}, x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, front * _betacf(a, b, x) / a)
    return min(1.0, max(0.0, 1.0 - front * _betacf(b, a, 1.0 - x) / b))


# ---------------------------------------------------------------------------
# CDFs
# ---------------------------------------------------------------------------

def normal_cdf(x: float) -> float:
    """Standard normal CDF Phi(x)."""
    x = _require_finite(x)
    return 0.5 * math.erfc(-x / _SQRT2)


def chi2_cdf(x: float, nu: int) -> float:
    """Chi-squared CDF with ``nu`` degrees of freedom, x >= 0."""
    nu = _require_df(nu)
    x = _require_finite(x)
    if x < 0.0:
        raise ValueError(f"chi-squared CDF argument must be >= 0, got {x!r}")
    return _gammainc_reg(0.5 * nu, 0.5 * x)


def t_cdf(x: float, nu: int) -> float:
    """Student-t CDF with ``nu`` degrees of freedom."""
    nu = _require_df(nu)
    x = _require_finite(x)
    if x == 0.0:
        return 0.5
    tail = 0.5 * _betainc_reg(0.5 * nu, 0.5, nu / (nu + x * x))
    return 1.0 - tail if x > 0.0 else tail


def binomial_tail(k: int, n: int, p: float) -> float:
    """P(Bin(n, p) <= k) via the regularized incomplete beta function."""
    if n < 1:
        raise ValueError(f"binomial needs n >= 1, got {n!r}")
    if not 0 <= k <= n:
        raise ValueError(f"failure count {k} outside [0, {n}]")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"success probability must lie in [0, 1], got {p!r}")
    if k == n:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    return _betainc_reg(n - k, k + 1.0, 1.0 - p)


# ---------------------------------------------------------------------------
# quantiles: safeguarded bracketing + bisection/secant on the CDF
# ---------------------------------------------------------------------------

def _invert_cdf(cdf, p: float, lo: float, hi: float) -> float:
    """Solve cdf(x) = p for x in [lo, hi] with cdf(lo) <= p <= cdf(hi).

    Illinois-modified false position: secant steps inside a hard bracket,
    with the stagnant endpoint's residual halved so flat CDF tails cannot
    stall the iteration.  Terminates when the residual is negligible
    relative to the nearer tail mass (so extreme-tail quantiles stay
    relatively accurate) or on bracket collapse to adjacent floats.
    """
    tol = 1e-12 * min(p, 1.0 - p)
    flo = cdf(lo) - p
    fhi = cdf(hi) - p
    if flo > 0.0 or fhi < 0.0:
        raise ValueError("quantile bracket does not enclose the target probability")
    side = 0
    for _ in range(200):
        if fhi != flo:
            x = lo - flo * (hi - lo) / (fhi - flo)
        else:
            x = 0.5 * (lo + hi)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = cdf(x) - p
        if abs(fx) <= tol:
            return x
        if fx < 0.0:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        if hi - lo <= abs(x) * 4e-16 + 5e-324:
            break
    return 0.5 * (lo + hi)


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` on (0, 1)."""
    p = _require_open_prob(p)
    if p == 0.5:
        return 0.0
    if p < 0.5:
        # solve on the negative axis directly: the lower tail is evaluated
        # without cancellation, so tiny p keeps its relative accuracy
        lo = -1.0
        while normal_cdf(lo) > p and lo > -50.0:
            lo *= 2.0
        return _invert_cdf(normal_cdf, p, lo, 0.0)
    hi = 1.0
    while normal_cdf(hi) < p and hi < 50.0:
        hi *= 2.0
    return _invert_cdf(normal_cdf, p, 0.0, hi)


@lru_cache(maxsize=1024)
def chi2_quantile(p: float, nu: int) -> float:
    """Inverse of :func:`chi2_cdf` on (0, 1); strictly increasing in p."""
    p = _require_open_prob(p)
    nu = _require_df(nu)
    hi = max(float(nu), 1.0)
    while chi2_cdf(hi, nu) < p and hi < 1e9:
        hi *= 2.0
    return _invert_cdf(lambda x: chi2_cdf(x, nu), p, 0.0, hi)


@lru_cache(maxsize=1024)
def t_quantile(p: float, nu: int) -> float:
    """Inverse of :func:`t_cdf` on (0, 1); odd around p = 0.5."""
    p = _require_open_prob(p)
    nu = _require_df(nu)
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, nu)
    hi = 1.0
    while t_cdf(hi, nu) < p and hi < 1e18:
        hi *= 2.0
    return _invert_cdf(lambda x: t_cdf(x, nu), p, 0.0, hi)
