"""Heavy traffic, ``rho -> infinity``.

On the scale ``n = N rho``, ``t = T rho`` the density expands as
``p_n(t) = P_0(N,T)/rho + P_1(N,T)/rho^2 + O(rho^-3)``, with both terms written
through the characteristic variable ``U(N,T)`` solving
``U/(N-1) = 1 - e^{U-T}``.  On the short scale ``t = tau/rho`` with ``n = O(1)``
the density tends to a Bessel-kernel integral ``Q_n(tau)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from ..errors import ConvergenceError, DomainError
from ..specfun import bessel_j0, lambert_w0
from ..spectral import DensityResult, ModelParams

__all__ = [
    "HeavyTrafficCoords",
    "N_CRITICAL",
    "critical_n",
    "solve_U",
    "u_series",
    "heavy_p0",
    "heavy_p0_alt",
    "heavy_p0_series",
    "heavy_p1",
    "heavy_p1_n1",
    "heavy_density",
    "heavy_qn",
    "heavy_coords",
]


def critical_n() -> float:
    """Root of ``(N - 1) e^N = 1``; the ``U`` series at ``T = 0`` converges only below it."""
    return 1.0 + lambert_w0(math.exp(-1.0))


N_CRITICAL = critical_n()


def _check_nt(N, T):
    if not (math.isfinite(N) and math.isfinite(T)) or N < 0 or T < 0:
        raise DomainError("need finite N >= 0 and T >= 0")


def solve_U(N: float, T: float) -> float:
    """``U(N,T) = N - 1 - W_0((N-1) e^{N-T-1})``."""
    _check_nt(N, T)
    if N == 1.0:
        return 0.0
    if T == 0.0:
        return 0.0
    z = (N - 1.0) * math.exp(N - T - 1.0)
    # (N-1) e^{N-1} >= -1/e, so z stays on the principal branch
    assert z >= -math.exp(-1.0) - 1e-16
    return N - 1.0 - lambert_w0(z)


def _series_terms(N, T, power_shift):
    """Yield ``m^{m-1}/m! (1-N)^{m - power_shift} e^{m(N-T-1)}`` for m = 1, 2, ..."""
    base = 1.0 - N
    if base == 0.0:
        return
    log_b = math.log(abs(base))
    sign_b = -1.0 if base < 0 else 1.0
    m = 1
    while True:
        k = m - power_shift
        log_t = (m - 1) * math.log(m) - math.lgamma(m + 1.0) + k * log_b + m * (N - T - 1.0)
        yield (sign_b**k) * math.exp(log_t)
        m += 1


def _sum_series(N, T, power_shift, max_terms=200_000):
    if abs(1.0 - N) * math.exp(N - T) >= 1.0:
        raise DomainError(
            f"series diverges: |1-N| e^(N-T) >= 1 (at T = 0 this means N >= N_c = {N_CRITICAL:.6f})"
        )
    if N == 1.0:
        return 0.0 if power_shift == 0 else math.exp(-T)
    total = 0.0
    comp = 0.0
    for i, term in enumerate(_series_terms(N, T, power_shift), start=1):
        # Kahan summation
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        if abs(term) <= 1e-17 * abs(total) and i > 5:
            return total
        if i >= max_terms:
            raise ConvergenceError("U series converges too slowly this close to its boundary", partial=total)


def u_series(N: float, T: float) -> float:
    """Power-series form ``U = N - 1 + sum m^{m-1}/m! (1-N)^m e^{m(N-T-1)}``."""
    _check_nt(N, T)
    if N == 1.0:
        return 0.0
    return N - 1.0 + _sum_series(N, T, 0)


def heavy_p0(N: float, T: float) -> float:
    """Leading term ``P_0 = e^{U-T}/(N-U)``."""
    _check_nt(N, T)
    if N == 1.0:
        return math.exp(-T)
    U = solve_U(N, T)
    if N - U == 0.0:
        raise DomainError("P_0 is singular at N = T = 0")
    return math.exp(U - T) / (N - U)


def heavy_p0_alt(N: float, T: float) -> float:
    """The equivalent form ``(N-U-1)/((N-1)(N-U))`` (undefined at N = 1)."""
    _check_nt(N, T)
    if N == 1.0:
        raise DomainError("the alternate form is 0/0 at N = 1")
    if T == 0.0:
        return 1.0 / N
    # N - U - 1 is the Lambert value itself; forming it by subtraction would cancel
    w = lambert_w0((N - 1.0) * math.exp(N - T - 1.0))
    return w / ((N - 1.0) * (w + 1.0))


def heavy_p0_series(N: float, T: float) -> float:
    """Series ratio form of ``P_0``, valid where the ``U`` series converges."""
    _check_nt(N, T)
    num = _sum_series(N, T, 1)
    den = 1.0 - _sum_series(N, T, 0)
    return num / den


def heavy_p1(N: float, T: float) -> float:
    """Correction ``P_1(N,T)`` with ``xi = N - U`` and ``eta = U``.

    The closed form is rewritten with ``k = (xi-1)/(xi+eta-1) = e^{U-T}`` and
    ``log|(xi+eta-1)/(xi-1)| = T - U``.  This removes the 0/0 at ``N = 1``, so
    the same expression covers the whole quadrant, including ``N = 1`` and ``N = 0``.
    """
    _check_nt(N, T)
    if T == 0.0:
        if N == 0.0:
            raise DomainError("P_1 is singular at N = T = 0")
        return -1.0 / N**2
    U = solve_U(N, T)
    xi = N - U
    k = math.exp(U - T)
    poly = (
        -(xi - 1.0) * (2.0 * xi - 3.0)
        + 3.0 * k * (2.0 * xi * xi - 2.0 * xi - 3.0)
        - k * k * (2.0 * xi**3 + 2.0 * xi * xi - 5.0 * xi - 15.0)
        - k**3 * (2.0 * xi * xi + 4.0 * xi + 3.0)
        - 4.0 * k * (2.0 * xi - 3.0) * (T - U)
    )
    return poly / (2.0 * xi**5)


def heavy_p1_n1(T: float) -> float:
    """Explicit ``P_1(1, T) = (2T - 9/2) e^{-T} + 8 e^{-2T} - (9/2) e^{-3T}``."""
    e = math.exp(-T)
    return (2.0 * T - 4.5) * e + 8.0 * e * e - 4.5 * e**3


@dataclass(frozen=True)
class HeavyTrafficCoords:
    n_cap: float
    t_cap: float
    tau: float
    u: float
    xi: float
    eta: float
    n_star: float


def heavy_coords(params: ModelParams, n, t) -> HeavyTrafficCoords:
    rho = params.rho
    N, T = n / rho, t / rho
    U = solve_U(N, T)
    return HeavyTrafficCoords(n_cap=N, t_cap=T, tau=rho * t, u=U, xi=N - U, eta=U, n_star=N - U)


def heavy_density(params: ModelParams, n, t) -> DensityResult:
    """Two-term composite ``P_0/rho + P_1/rho^2``; ``err_est`` is the ``rho^-3`` scale marker."""
    rho = params.rho
    c = heavy_coords(params, n, t)
    p0 = heavy_p0(c.n_cap, c.t_cap)
    p1 = heavy_p1(c.n_cap, c.t_cap)
    return DensityResult(
        value=p0 / rho + p1 / rho**2,
        method="asymptotic",
        err_est=rho**-3.0,
        regime="heavy traffic (N, T)",
        extras={"coords": c.__dict__.copy(), "P0": p0, "P1": p1},
    )


def _kernel_arg(s):
    # s - 1 + e^{-s}, with a Taylor form where the subtraction would cancel
    if s < 1e-3:
        return s * s * (0.5 - s * (1.0 / 6.0 - s * (1.0 / 24.0 - s / 120.0)))
    return s + math.expm1(-s)


def heavy_qn(params: ModelParams | None, n: int, tau: float) -> float:
    """Short-time limit ``Q_n(tau) = int_0^1 (1-x)^n J_0(2 sqrt(tau) sqrt(-x - log(1-x))) dx``.

    Evaluated after ``x = 1 - e^{-s}``, which turns the logarithmic endpoint
    into an exponentially damped half-line integral.
    """
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    if not (math.isfinite(tau) and tau >= 0):
        raise DomainError("tau must be finite and >= 0")
    if tau == 0.0:
        return 1.0 / (n + 1.0)
    root = 2.0 * math.sqrt(tau)

    def f(s):
        return math.exp(-(n + 1.0) * s) * bessel_j0(root * math.sqrt(_kernel_arg(s)))

    upper = 42.0 / (n + 1.0)  # e^{-(n+1) s} < 1e-18 beyond
    value, err = integrate.quad(f, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=2000)
    if err > 1e-9 * max(abs(value), 1e-12):
        raise ConvergenceError("Q_n quadrature did not converge", partial=value, err_est=err)
    return value
