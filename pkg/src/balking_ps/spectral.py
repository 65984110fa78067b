"""Spectral representation of the conditional sojourn-time density.

The density of a tagged customer who finds ``n`` others is a discrete sum
over two eigenvalue families ``nu_m`` in (-1, 0) and ``nu~_m`` < -1,

    p_n(t) = sum_m C_m(nu_m) phi_m(n, nu_m) e^{nu_m t} + (same with nu~_m).

Both families accumulate at -1, so the coefficients only decay like
``m^{-3/2}`` and the plain partial sums converge like ``m^{-1/2}``.  The sums
here pair the two families at each ``m``, add the integer terms exactly up to
a cut ``M`` and replace the remainder by an Euler-Maclaurin tail.  The pair
term is an analytic function of real ``m`` once ``m > n + 1``.  The cut is
doubled until two successive estimates agree to ``tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import mpmath

from .errors import ConvergenceError, DomainError
from .specfun import stirling_remainder

__all__ = [
    "ModelParams",
    "EigenPair",
    "SpectralTerm",
    "DensityResult",
    "eigenvalues",
    "eigenfunction",
    "coefficient",
    "spectral_term",
    "t_switch",
    "conditional_density",
    "spectral_density",
    "spectral_tail",
    "unconditional_density",
    "unconditional_spectral",
    "completeness_sum",
    "normalization_sum",
    "spectral_mean",
    "spectral_second_moment",
    "pair_series",
    "weighted_series",
    "mean_sojourn",
    "second_moment",
]

METHODS = ("spectral", "transform", "ode", "simulation", "asymptotic")


@dataclass(frozen=True)
class ModelParams:
    """Traffic intensity (service rate normalised to one) plus numerical targets."""

    rho: float
    tol: float = 1e-10
    m_cap: int = 8192

    def __post_init__(self):
        if not (isinstance(self.rho, (int, float)) and math.isfinite(self.rho) and self.rho > 0):
            raise DomainError(f"rho must be a finite positive number, got {self.rho!r}")
        if not (0 < self.tol < 1e-2):
            raise DomainError(f"tol must lie in (0, 1e-2), got {self.tol!r}")
        if int(self.m_cap) != self.m_cap or self.m_cap < 8:
            raise DomainError(f"m_cap must be an integer >= 8, got {self.m_cap!r}")
        object.__setattr__(self, "rho", float(self.rho))


@dataclass(frozen=True)
class EigenPair:
    m: int
    nu: float
    nu_tilde: float
    lam0: float


@dataclass(frozen=True)
class SpectralTerm:
    m: int
    c: float
    phi: float
    nu: float

    def contribution(self, t):
        return self.c * self.phi * math.exp(self.nu * t)


@dataclass
class DensityResult:
    """A density (or tail probability) value with its provenance.

    ``extras`` carries method-specific detail such as the asymptotic regime,
    scaled coordinates, or alternative candidate values.
    """

    value: float
    method: str
    err_est: float = 0.0
    terms_used: int = 0
    regime: str | None = None
    warning: str | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


# ---------------------------------------------------------------------------
# eigenvalues and eigenfunctions


def _check_m(m):
    if int(m) != m or m < 1:
        raise DomainError(f"spectral index must be a positive integer, got {m!r}")
    return int(m)


def _check_n(n):
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    return int(n)


def _shifted_pair(rho, m):
    """Return ``(nu_m + 1, nu~_m + 1)`` without cancellation; ``m`` may be real."""
    s = math.sqrt(rho * rho + 4.0 * m * rho)
    return 2.0 * rho / (rho + s), -(rho + s) / (2.0 * m)


def eigenvalues(params: ModelParams, m: int) -> EigenPair:
    """Both roots of ``m nu^2 + (2m + rho) nu + m = 0`` for index ``m``."""
    m = _check_m(m)
    up, down = _shifted_pair(params.rho, m)
    lam0, _ = _shifted_pair(params.rho, 1)
    return EigenPair(m=m, nu=up - 1.0, nu_tilde=down - 1.0, lam0=lam0)


def _phi_mp(rho, m, n, family):
    """Finite-sum eigenfunction at index ``m`` (integer or real) as an mpf.

    The eigenvalue is recomputed from ``(rho, m)`` at the working precision
    plus guard digits.  The alternating sum over ``l`` can cancel badly for
    large ``m``, so the guard grows until it covers the observed loss.  The
    result carries roughly ``mp.dps`` correct digits.
    """
    integer_m = mpmath.isint(m)
    if integer_m and m - 1 < n:
        top = int(m) - 1
    else:
        if m - 1 < n:
            raise DomainError("real spectral index must exceed n + 1")
        top = n
    target = mpmath.mp.dps
    guard = 10
    while True:
        with mpmath.workdps(target + guard):
            r = mpmath.mpf(rho)
            mm = mpmath.mpf(m)
            s = mpmath.sqrt(r * r + 4 * mm * r)
            x = 2 * r / (r + s) if family > 0 else -(r + s) / (2 * mm)
            ratio = x * x / (-r)
            term = x ** (-n)
            total = term
            biggest = abs(term)
            for l in range(1, top + 1):
                term = term * (mm - l) * (n - l + 1) / l * ratio
                total += term
                biggest = max(biggest, abs(term))
            if total == 0:
                if guard > 400:
                    return mpmath.mpf(0)
                guard *= 2
                continue
            lost = float(mpmath.log10(biggest / abs(total)))
            if lost + 5 <= guard:
                return +total
            guard = int(lost) + 15


@lru_cache(maxsize=100_000)
def _phi_exact(rho, m, n, family):
    with mpmath.workdps(30):
        return float(_phi_mp(rho, m, n, family))


def _family_of(params, m, nu):
    pair = eigenvalues(params, m)
    for family, value in ((1, pair.nu), (-1, pair.nu_tilde)):
        if abs(nu - value) <= 1e-9 * max(1.0, abs(value)):
            return family
    raise DomainError(f"{nu!r} is not an eigenvalue of index {m} at rho={params.rho}")


def eigenfunction(params: ModelParams, m: int, n: int, nu: float) -> float:
    """``phi_m(n, nu)`` for ``nu`` one of the two eigenvalues of index ``m``.

    Normalised by ``phi_m(0, nu) = 1``.
    """
    m = _check_m(m)
    n = _check_n(n)
    return _phi_exact(params.rho, m, n, _family_of(params, m, nu))


def _log_c_prefactor(m):
    # log(m^{m-1} e^{-m} / m!) with m! = m Gamma(m); the large parts cancel analytically
    return -1.5 * math.log(m) - 0.5 * math.log(2.0 * math.pi) - stirling_remainder(m)


def coefficient(params: ModelParams, m: int, nu: float) -> float:
    """Expansion coefficient ``C_m(nu) = m^{m-1}/m! * nu/(nu-1) * e^{-m}``."""
    m = _check_m(m)
    return math.exp(_log_c_prefactor(m)) * nu / (nu - 1.0)


def spectral_term(params: ModelParams, m: int, n: int, family: int = 1) -> SpectralTerm:
    pair = eigenvalues(params, m)
    nu = pair.nu if family > 0 else pair.nu_tilde
    return SpectralTerm(
        m=pair.m, c=coefficient(params, m, nu), phi=_phi_exact(params.rho, pair.m, _check_n(n), family), nu=nu
    )


# ---------------------------------------------------------------------------
# paired series with Euler-Maclaurin tail

_EM_ORDER = 6  # number of Euler-Maclaurin correction terms


def _em_tail(f, a):
    """``sum_{j >= 0} f(a + 1/2 + j)`` for ``f`` analytic with an ``m^{-3/2}`` tail.

    Midpoint Euler-Maclaurin: the integral from ``a`` minus
    ``sum_k B_2k(1/2)/(2k)! f^(2k-1)(a)``.  The integral uses ``x = a/u^2``,
    which turns the algebraic tail into an integrand analytic on [0, 1].
    """
    a = mpmath.mpf(a)
    integral = mpmath.quad(lambda u: f(a / u**2) * 2 * a / u**3, [0, 1], method="gauss-legendre")
    derivs = list(mpmath.diffs(f, a, 2 * _EM_ORDER - 1))
    corr = mpmath.mpf(0)
    for k in range(1, _EM_ORDER + 1):
        corr -= mpmath.bernpoly(2 * k, mpmath.mpf(1) / 2) / mpmath.factorial(2 * k) * derivs[2 * k - 1]
    return integral + corr


def _pair_series_at(term, cut, tol, m_cap):
    head = []

    def estimate(cut):
        while len(head) < cut - 1:
            head.append(term(mpmath.mpf(len(head) + 1)))
        tail = _em_tail(term, cut - mpmath.mpf(1) / 2)
        scale = max([abs(h) for h in head] + [abs(tail)])
        return mpmath.fsum(head[: cut - 1]) + tail, scale

    previous, scale = estimate(cut)
    while True:
        nxt = 2 * cut
        if nxt > m_cap:
            raise ConvergenceError(
                f"spectral series did not reach tol={tol:g} below m_cap={m_cap}", partial=float(previous)
            )
        current, scale2 = estimate(nxt)
        scale = max(scale, scale2)
        err = abs(current - previous)
        if err <= tol * abs(current) or err == 0:
            return current, err, nxt, scale
        previous, cut = current, nxt


def pair_series(term: Callable, m_start: int, tol: float, m_cap: int):
    """Sum ``term(m)`` over ``m = 1, 2, ...`` for terms with an ``m^{-3/2}`` tail.

    ``term`` maps an mpf index (integer-valued in the head, real in the tail)
    to an mpf at the working precision.  Individual terms can exceed the sum
    by many orders of magnitude, so the working precision is raised until the
    observed cancellation is covered.  Returns ``(value, err_est, m_used)``.
    """
    dps = 30
    while True:
        with mpmath.workdps(dps):
            value, err, used, scale = _pair_series_at(term, m_start, tol, m_cap)
            lost = float(mpmath.log10(scale / abs(value))) if value != 0 else float(dps)
            if lost + 20 <= dps:
                rounding = scale * mpmath.mpf(10) ** (-dps + 3)
                return float(value), float(err + rounding), used
        if dps > 400:
            raise ConvergenceError("cancellation in the spectral series exceeds 400 digits", partial=float(value))
        dps = int(lost) + 30


def _log_c_prefactor_mp(m):
    # log(m^{m-1} e^{-m} / m!)
    return (m - 1) * mpmath.log(m) - m - mpmath.loggamma(m + 1)


def _pair_term(rho, n, weight):
    """Pair term ``sum over both families of C_m phi_m(n) weight(nu)``, real ``m`` allowed."""

    def f(m):
        with mpmath.extradps(15):
            r = mpmath.mpf(rho)
            s = mpmath.sqrt(r * r + 4 * m * r)
            pre = mpmath.exp(_log_c_prefactor_mp(m))
            total = mpmath.mpf(0)
            for family, shifted in ((1, 2 * r / (r + s)), (-1, -(r + s) / (2 * m))):
                nu = shifted - 1
                total += pre * nu / (nu - 1) * _phi_mp(rho, m, n, family) * weight(nu)
        return +total

    return f


def weighted_series(params: ModelParams, n: int, weight: Callable):
    """``sum_m [C phi weight(nu) + C~ phi~ weight(nu~)]`` with ``weight`` acting on mpf values.

    Returns ``(value, err_est, m_used)``.
    """
    return _series(params, n, weight)


def _series(params, n, weight):
    n = _check_n(n)
    return pair_series(_pair_term(params.rho, n, weight), _default_start(params, n), params.tol, params.m_cap)


def _default_start(params, n):
    return max(16, 4 * (n + 2), int(math.ceil(params.rho)) + 8)


def t_switch(n):
    """Below this time the spectral route hands over to the master-equation solver."""
    return 0.1 * (1 + n)


def spectral_density(params: ModelParams, n: int, t: float) -> DensityResult:
    """Spectral series for ``p_n(t)`` at any ``t >= 0`` (no small-time routing)."""
    if t < 0:
        raise DomainError("t must be >= 0")
    value, err, used = _series(params, n, lambda nu: mpmath.exp(nu * t))
    return DensityResult(value=value, method="spectral", err_est=err, terms_used=used)


def spectral_tail(params: ModelParams, n: int, t: float) -> DensityResult:
    """``V_n(t) = Prob[sojourn > t]`` from the term-by-term time integral."""
    if t < 0:
        raise DomainError("t must be >= 0")
    value, err, used = _series(params, n, lambda nu: -mpmath.exp(nu * t) / nu)
    return DensityResult(value=value, method="spectral", err_est=err, terms_used=used)


def conditional_density(params: ModelParams, n: int, t: float) -> DensityResult:
    """``p_n(t)``; spectral for ``t >= t_switch(n)``, master equation below."""
    if t < 0:
        raise DomainError("t must be >= 0")
    n = _check_n(n)
    if t < t_switch(n):
        from .master_ode import integrate_density

        return integrate_density(params, n, [t])[0]
    return spectral_density(params, n, t)


def completeness_sum(params, n):
    """``sum_m C phi`` over both families; equals ``p_n(0) = 1/(n+1)``."""
    return _series(params, n, lambda nu: 1)[0]


def normalization_sum(params, n):
    """``-sum_m C phi / nu``; the total mass of ``p_n``."""
    return _series(params, n, lambda nu: -1 / nu)[0]


def spectral_mean(params, n):
    """``sum_m C phi / nu^2`` (first moment, term by term)."""
    return _series(params, n, lambda nu: 1 / (nu * nu))[0]


def spectral_second_moment(params, n):
    """``sum_m 2 C phi / (-nu)^3``."""
    return _series(params, n, lambda nu: 2 / (-nu) ** 3)[0]


def _unconditional_term(rho, t):
    def f(m):
        with mpmath.extradps(15):
            r = mpmath.mpf(rho)
            s = mpmath.sqrt(r * r + 4 * m * r)
            pre = _log_c_prefactor_mp(m)
            total = mpmath.mpf(0)
            for shifted in (2 * r / (r + s), -(r + s) / (2 * m)):
                nu = shifted - 1
                # log Phi_m(nu) = -rho + (m-1) log(-nu) + rho/(nu+1)
                log_big = pre + (m - 1) * mpmath.log(-nu) - r + r / shifted + nu * t
                total += nu / (nu - 1) * mpmath.exp(log_big)
        return +total

    return f


def unconditional_density(params: ModelParams, t: float) -> DensityResult:
    """Stationary sojourn density ``p_PS(t)`` (Poisson(rho) mixture over ``n``).

    ``extras['p_ros']`` holds the continuous part ``(1 - e^{-rho}) p_PS(t)``
    of the random-order-of-service waiting-time density.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    rho = params.rho
    if t < t_switch(0):
        from .master_ode import integrate_unconditional

        value = integrate_unconditional(params, [t])[0]
        return DensityResult(value=value, method="ode", extras={"p_ros": -math.expm1(-rho) * value})
    value, err, used = pair_series(_unconditional_term(rho, t), _default_start(params, 0), params.tol, params.m_cap)
    return DensityResult(
        value=value, method="spectral", err_est=err, terms_used=used, extras={"p_ros": -math.expm1(-rho) * value}
    )


def unconditional_spectral(params: ModelParams, t: float) -> DensityResult:
    """Raw spectral series for ``p_PS(t)`` at any ``t >= 0``."""
    value, err, used = pair_series(
        _unconditional_term(params.rho, t), _default_start(params, 0), params.tol, params.m_cap
    )
    return DensityResult(value=value, method="spectral", err_est=err, terms_used=used,
                         extras={"p_ros": -math.expm1(-params.rho) * value})


# ---------------------------------------------------------------------------
# closed-form moments


def mean_sojourn(params: ModelParams, n: int) -> float:
    """``E[V_n] = (n + rho)/2 + 1``."""
    n = _check_n(n)
    return (n + params.rho) / 2.0 + 1.0


def second_moment(params: ModelParams, n: int) -> float:
    """``E[V_n^2] = n^2/3 + (5/3 + 5 rho/6) n + 5 rho^2/6 + 3 rho + 2``.

    This is the quadratic solution of
    ``rho S_{n+1} - (n+1+rho) S_n + n S_{n-1} = -2 (n+1) E[V_n]``.
    """
    n = _check_n(n)
    rho = params.rho
    return n * n / 3.0 + (5.0 / 3.0 + 5.0 * rho / 6.0) * n + 5.0 * rho * rho / 6.0 + 3.0 * rho + 2.0
