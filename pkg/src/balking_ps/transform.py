"""Laplace transform of the conditional sojourn density via the Green's function.

With ``a = 1/(1+theta)`` and ``r = rho theta / (1+theta)^2`` the transform is

    p^_n(theta) = M G_n sum_{l<=n} rho^l H_l / l!  +  M H_n sum_{l>n} rho^l G_l / l!,

where ``G_n`` (an integral over ``[0, a]``) decays and ``H_n`` (over
``[a, inf)``) grows with ``n``.  Both integrands carry an algebraic factor
``|z - a|^r`` with ``r`` possibly in ``(-1, 0)``.  QUADPACK's algebraic-weight
rule (QAWS) integrates that factor exactly, so no hand-made substitution is
needed at the singular endpoint.

Everything is assembled in logarithms because ``H_l`` grows like ``l!``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import mpmath
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .spectral import ModelParams, eigenvalues, weighted_series
from .specfun import log_gamma

__all__ = [
    "TransformPoint",
    "r_of",
    "m_factor",
    "g_integral",
    "h_integral",
    "log_g",
    "log_h",
    "laplace_transform",
    "pole_sum_transform",
    "wronskian_check",
    "recurrence_residual",
]

_EPSREL = 1e-13
_LIMIT = 400


@dataclass(frozen=True)
class TransformPoint:
    theta: float
    r: float
    m_factor: float
    value: float


def r_of(rho, theta):
    return rho * theta / (1.0 + theta) ** 2


def _check(params, n, theta):
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    if theta <= eigenvalues(params, 1).nu:
        raise DomainError(f"theta={theta} is not to the right of the dominant pole")


def _log_m(rho, theta):
    r = r_of(rho, theta)
    # r/theta written without the division so theta = 0 is harmless
    return (r + 1.0) * math.log(rho) + rho / (1.0 + theta) ** 2 - math.log1p(theta) - log_gamma(r + 1.0)


def m_factor(params: ModelParams, theta: float) -> float:
    """``M(theta) = rho^{r+1} e^{r/theta} / ((1+theta) Gamma(r+1))``."""
    return math.exp(_log_m(params.rho, theta))


def _qaws(f, lo, hi, wvar, what):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(
                f, lo, hi, weight="alg", wvar=wvar, epsabs=0.0, epsrel=_EPSREL, limit=_LIMIT
            )
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(f"{what}: {exc}") from None
    return value, err


@lru_cache(maxsize=65536)
def log_g(rho: float, n: int, theta: float) -> float:
    """``log G_n(theta)``.

    With ``z = a w`` the integral is ``a^{n+r+1} int_0^1 w^n (1-w)^r e^{-rho a^2 w} dw``.
    """
    a = 1.0 / (1.0 + theta)
    r = r_of(rho, theta)
    c = rho * a * a
    # peak of w^n e^{-c w} on [0, 1] used to keep the integrand O(1)
    w_peak = min(1.0, n / c) if c > 0 else 1.0
    shift = (n * math.log(w_peak) if n else 0.0) - c * w_peak

    def f(w):
        if w == 0.0:
            return math.exp(-shift) if n == 0 else 0.0
        return math.exp(n * math.log(w) - c * w - shift)

    value, _ = _qaws(f, 0.0, 1.0, (0.0, r), "G_n quadrature")
    return (n + r + 1.0) * math.log(a) + shift + math.log(value)


@lru_cache(maxsize=65536)
def log_h(rho: float, n: int, theta: float) -> float:
    """``log H_n(theta)``.

    With ``z = a + s/(rho a)`` the integral becomes
    ``e^{-rho a^2} (rho a)^{-r-1} int_0^inf (a + s/(rho a))^n s^r e^{-s} ds``.
    The upper limit is where the log-integrand has fallen 40 below its peak,
    and it is certified by doubling.
    """
    a = 1.0 / (1.0 + theta)
    r = r_of(rho, theta)
    b = 1.0 / (rho * a)

    def g(s):
        return n * math.log(a + b * s) - s

    # maximiser of n log(a + b s) - s is s = n - a/b (clamped at 0)
    s_peak = max(0.0, n - a / b)
    peak = g(s_peak)

    def f(s):
        return math.exp(g(s) - peak)

    top = s_peak + 10.0
    while g(top) + r * math.log(top) - peak - r * math.log(max(s_peak, 1.0)) > -40.0:
        top *= 2.0
    value, _ = _qaws(f, 0.0, top, (r, 0.0), "H_n quadrature")
    extra, _ = integrate.quad(lambda s: f(s) * s**r, top, 2.0 * top, epsabs=0.0, epsrel=1e-8)
    if extra > 1e-14 * value:
        raise ConvergenceError("H_n truncation point failed the doubling check")
    return -rho * a * a - (r + 1.0) * math.log(rho * a) + peak + math.log(value)


def g_integral(params: ModelParams, n: int, theta: float) -> float:
    _check(params, n, theta)
    return math.exp(log_g(params.rho, int(n), float(theta)))


def h_integral(params: ModelParams, n: int, theta: float) -> float:
    _check(params, n, theta)
    return math.exp(log_h(params.rho, int(n), float(theta)))


def _logsumexp(values):
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _log_tail_sum(rho, n, theta, tol):
    """``log sum_{l>n} rho^l G_l / l!``; terms eventually fall off like ``(rho a)^l / l!``."""
    logs = []
    l = n + 1
    while True:
        term = l * math.log(rho) - math.lgamma(l + 1.0) + log_g(rho, l, theta)
        logs.append(term)
        if len(logs) >= 3:
            q = math.exp(logs[-1] - logs[-2])
            if q < 0.5:
                # remainder of a series whose term ratio keeps shrinking
                bound = logs[-1] + math.log(q / (1.0 - q))
                if bound - _logsumexp(logs) < math.log(tol * 1e-3):
                    return _logsumexp(logs)
        if l > n + 5000:
            raise ConvergenceError("transform tail sum did not converge")
        l += 1


def laplace_transform(params: ModelParams, n: int, theta: float) -> TransformPoint:
    """``p^_n(theta)`` assembled from the two integral solutions."""
    _check(params, n, theta)
    rho = params.rho
    n = int(n)
    theta = float(theta)
    lm = _log_m(rho, theta)
    head = _logsumexp([l * math.log(rho) - math.lgamma(l + 1.0) + log_h(rho, l, theta) for l in range(n + 1)])
    first = lm + log_g(rho, n, theta) + head
    second = lm + log_h(rho, n, theta) + _log_tail_sum(rho, n, theta, params.tol)
    value = math.exp(first) + math.exp(second)
    return TransformPoint(theta=theta, r=r_of(rho, theta), m_factor=math.exp(lm), value=value)


def pole_sum_transform(params: ModelParams, n: int, theta: float) -> float:
    """Term-by-term transform of the spectral series: ``sum C phi / (theta - nu)``."""
    _check(params, n, theta)
    th = mpmath.mpf(theta)
    return weighted_series(params, n, lambda nu: 1 / (th - nu))[0]


def wronskian_check(params: ModelParams, l: int, theta: float) -> float:
    """Relative residual of ``G_l H_{l+1} - G_{l+1} H_l = l! / (rho^l G1)``.

    ``G1 = rho^{r+2} e^{r/theta} / (Gamma(r+1) (1+theta))``.
    """
    _check(params, l, theta)
    rho = params.rho
    l = int(l)
    r = r_of(rho, theta)
    lg0, lg1 = log_g(rho, l, theta), log_g(rho, l + 1, theta)
    lh0, lh1 = log_h(rho, l, theta), log_h(rho, l + 1, theta)
    log_g1 = (r + 2.0) * math.log(rho) + rho / (1.0 + theta) ** 2 - log_gamma(r + 1.0) - math.log1p(theta)
    log_rhs = math.lgamma(l + 1.0) - l * math.log(rho) - log_g1
    # lhs / rhs computed as a difference of two exponentials relative to rhs
    ratio = math.exp(lg0 + lh1 - log_rhs) - math.exp(lg1 + lh0 - log_rhs)
    return abs(ratio - 1.0)


def recurrence_residual(params: ModelParams, n: int, theta: float) -> float:
    """``rho p^_{n+1} - [(n+1)(theta+1) + rho] p^_n + n p^_{n-1} + 1`` for ``n >= 1``."""
    if n < 1:
        raise DomainError("the recurrence needs n >= 1")
    rho = params.rho
    lo = laplace_transform(params, n - 1, theta).value
    mid = laplace_transform(params, n, theta).value
    hi = laplace_transform(params, n + 1, theta).value
    return rho * hi - ((n + 1) * (theta + 1.0) + rho) * mid + n * lo + 1.0
