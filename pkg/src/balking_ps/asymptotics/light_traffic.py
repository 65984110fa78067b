"""Light traffic, ``rho -> 0``.

Three time scales matter: ``t = O(1)`` (a regular expansion in ``rho``),
``t = omega/sqrt(rho)`` (a series over the whole spectrum, ``Q_n(omega)``) and
``t = zeta/rho``.  On the slowest scale the answer depends again on how ``n``
compares with ``t``, on the sub-scales ``n = O(1)``, ``O(rho^{-1/2})`` and
``O(rho^{-1})``.

The scales are separated at the geometric midpoints ``rho^{-1/4}`` and
``rho^{-3/4}``.  When a coordinate lies within a factor of two of such a
boundary, both neighbouring formulas are evaluated and a warning is attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from ..errors import DomainError
from ..specfun import erfc, log_gamma
from ..spectral import DensityResult, ModelParams, pair_series, _log_c_prefactor_mp

__all__ = [
    "LightTrafficCoords",
    "light_coords",
    "p0_light",
    "p1_light",
    "q_omega",
    "q0_omega",
    "classify_light_traffic",
    "approx_light_traffic",
    "BAND",
]

BAND = 3.0
NEAR = 2.0  # factor defining "close to a scale boundary"


@dataclass(frozen=True)
class LightTrafficCoords:
    zeta: float
    omega_big: float
    x_cap: float
    y_cap: float
    omega: float
    x: float


def light_coords(params: ModelParams, n, t) -> LightTrafficCoords:
    rho = params.rho
    x = rho * n
    zeta = rho * t
    big_x = math.sqrt(rho) * n
    return LightTrafficCoords(
        zeta=zeta,
        omega_big=(x - zeta) / math.sqrt(rho),
        x_cap=big_x,
        y_cap=(big_x - zeta) / rho**0.25,
        omega=math.sqrt(rho) * t,
        x=x,
    )


# ---------------------------------------------------------------------------
# t = O(1)


def p0_light(n: int, t: float) -> float:
    """``p^(0)_n(t) = e^{-t}/(n+1) sum_{l<=n} t^l/l!`` (no arrivals during the sojourn)."""
    term = 1.0
    total = 1.0
    for l in range(1, n + 1):
        term *= t / l
        total += term
    return math.exp(-t) * total / (n + 1.0)


def p1_light(n: int, t: float) -> float:
    """First-order correction ``p^(1)_n(t)``."""
    harmonic = math.fsum(1.0 / (l + 2.0) for l in range(n + 1))
    lead = math.exp((n + 2) * math.log(t) - math.lgamma(n + 3.0)) * harmonic if t > 0 else 0.0
    parts = [lead]
    term = 1.0
    for l in range(1, n + 2):
        term *= t / l
        parts.append(term * (1.0 / (n + 2.0) - 1.0 / (n + 2.0 - l)))
    return math.exp(-t) / (n + 1.0) * math.fsum(parts)


# ---------------------------------------------------------------------------
# t = omega / sqrt(rho)


def _laguerre_scaled(m, n):
    """``n! m^{-n/2} L_n^{(m-1-n)}(m)`` for real ``m``, with guard digits for the cancellation."""
    guard = 10 + int(0.5 * n * float(mpmath.log10(max(m, 2))))
    with mpmath.extradps(guard):
        mm = mpmath.mpf(m)
        total = mpmath.mpf(0)
        # sum_k (-1)^k C(m-1, n-k) m^k / k!
        for k in range(n + 1):
            total += (-1) ** k * mpmath.binomial(mm - 1, n - k) * mm**k / mpmath.factorial(k)
        value = mpmath.factorial(n) * total * mm ** (-mpmath.mpf(n) / 2)
    return +value


def q_omega(n: int, omega: float, tol: float = 1e-12) -> float:
    """``Q_n(omega)``, summed over ``m`` with the paired Euler-Maclaurin engine."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    n = int(n)
    sign = -1 if n % 2 else 1

    def term(m):
        with mpmath.extradps(10):
            pre = mpmath.exp(_log_c_prefactor_mp(m))
            w = omega / mpmath.sqrt(m)
            out = pre * _laguerre_scaled(m, n) / 2 * (sign * mpmath.exp(w) + mpmath.exp(-w))
        return +out

    value, _, _ = pair_series(term, max(16, 4 * (n + 2)), tol, 1 << 16)
    return value


def q0_omega(omega: float, tol: float = 1e-12) -> float:
    """``Q_0(omega) = sum m^{m-1} e^{-m} cosh(omega/sqrt(m)) / m!``."""

    def term(m):
        with mpmath.extradps(10):
            out = mpmath.exp(_log_c_prefactor_mp(m)) * mpmath.cosh(omega / mpmath.sqrt(m))
        return +out

    value, _, _ = pair_series(term, 16, tol, 1 << 16)
    return value


# ---------------------------------------------------------------------------
# classification


def _scale(value, rho):
    """0 for O(1), 1 for O(rho^{-1/2}), 2 for O(rho^{-1}); plus distance-to-boundary flag."""
    lo, hi = rho**-0.25, rho**-0.75
    level = 0 if value < lo else (1 if value < hi else 2)
    near = None
    for edge, below, above in ((lo, 0, 1), (hi, 1, 2)):
        if edge / NEAR <= value <= edge * NEAR:
            near = above if level == below else below
    return level, near


def _case_for(t_level, n_level, c):
    if t_level == 0:
        return "3" if n_level == 0 else None
    if t_level == 1:
        return "2" if n_level == 0 else None
    if n_level == 2:
        if abs(c.omega_big) / math.sqrt(c.x) <= BAND:
            return "1b"
        return "1a" if c.x > c.zeta else "1c"
    if n_level == 1:
        if abs(c.y_cap) / math.sqrt(c.zeta) <= BAND:
            return "1e"
        return "1d" if c.x_cap > c.zeta else "1f"
    return "1g"


def classify_light_traffic(params: ModelParams, n, t):
    """Return ``(case, alternative_or_None)`` with case labels ``1a``..``1g``, ``2``, ``3``."""
    rho = params.rho
    c = light_coords(params, n, t)
    t_level, t_near = _scale(t, rho)
    n_level, n_near = _scale(max(n, 1e-300), rho) if n > 0 else (0, None)
    case = _case_for(t_level, n_level, c)
    if case is None:
        raise DomainError(f"no light-traffic formula covers n={n}, t={t} at rho={rho}")
    alt = None
    for tl, nl in ((t_near, n_level), (t_level, n_near)):
        if tl is not None and nl is not None:
            other = _case_for(tl, nl, c)
            if other is not None and other != case:
                alt = other
    return case, alt


# ---------------------------------------------------------------------------
# formulas


def _evaluate(case, rho, n, t, c):
    sq = math.sqrt(rho)
    if case == "3":
        return p0_light(n, t) + rho * p1_light(n, t), rho * rho
    if case == "2":
        value = math.exp(-t - 0.5 * n * math.log(rho)) * q_omega(n, c.omega)
        return value, abs(value) * sq
    if case == "1a":
        # leading term only; the 1/n^2 marker mirrors the fixed-rho plateau and is not proven
        return 1.0 / n, 1.0 / n**2
    if case == "1b":
        value = erfc(-c.omega_big / math.sqrt(2.0 * c.x)) / (2.0 * n)
        return value, value * sq
    if case == "1c":
        x, z = c.x, c.zeta
        log_v = (
            1.5 * math.log(rho)
            + math.log(z)
            - 0.5 * math.log(2.0 * math.pi)
            - math.log(z - x)
            - 1.5 * math.log(x)
            + (x - z + x * math.log(z / x)) / rho
        )
        value = math.exp(log_v)
        return value, value * rho
    if case == "1d":
        q = (c.zeta / c.x_cap) ** 2
        log_v = (
            -0.5 * math.log(2.0 * math.pi)
            + log_gamma(1.0 - q)
            - q
            + (-1.5 + q) * math.log(n)
            + n * math.log(t / n)
            + n
            - t
        )
        value = math.exp(log_v)
        return value, value * sq
    base = -1.0 - 0.5 * n * math.log(rho) - (1.0 - sq) * t
    if case == "1e":
        value = 0.25 * math.exp(base) * erfc(c.y_cap / math.sqrt(2.0 * c.zeta))
        return value, value * rho**0.25
    if case == "1f":
        value = 0.5 * math.exp(base + 0.5 * c.x_cap - 0.5 * c.zeta)
        return value, value * sq
    if case == "1g":
        value = 0.5 * math.exp(base - 0.5 * c.zeta)
        return value, value * sq
    raise DomainError(f"unknown light-traffic case {case!r}")


def approx_light_traffic(params: ModelParams, n, t, case: str | None = None) -> DensityResult:
    """Light-traffic approximation of ``p_n(t)`` on the classified scale.

    ``err_est`` is a scale marker for the first neglected order, not a bound.
    """
    if int(n) != n or n < 0 or not t > 0:
        raise DomainError("need integer n >= 0 and t > 0")
    n = int(n)
    rho = params.rho
    c = light_coords(params, n, t)
    alt = None
    if case is None:
        case, alt = classify_light_traffic(params, n, t)
    value, err = _evaluate(case, rho, n, t, c)
    warning = None
    alternatives = {}
    if alt is not None:
        alternatives[alt] = _evaluate(alt, rho, n, t, c)[0]
        warning = f"near a scale boundary: case {alt} also plausible"
    if case == "1a":
        warning = "error marker 1/n^2 is heuristic for this case"
    return DensityResult(
        value=value,
        method="asymptotic",
        err_est=err,
        regime=f"light traffic case {case}",
        warning=warning,
        extras={"coords": c.__dict__.copy(), "case": case, "alternatives": alternatives},
    )
