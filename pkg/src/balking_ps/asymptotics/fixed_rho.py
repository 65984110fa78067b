"""Fixed traffic intensity with ``n`` and ``t`` large.

The space-time ratio ``n/t`` moves through five regimes as ``t`` grows:
a uniform plateau (``n/t > 1``), an erfc transition at ``n/t = 1``, a
saddle-point region, a second erfc transition at ``n/t = Lambda_0`` and the
pure exponential decay of the dominant eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError
from ..specfun import erfc, log_gamma
from ..spectral import DensityResult, ModelParams

__all__ = ["FixedRhoCoords", "lambda0", "tail_constant", "fixed_rho_coords", "classify_fixed_rho", "approx_fixed_rho"]

BAND = 3.0  # half-width of the transition bands, in units of t^{-1/2}


def lambda0(rho: float) -> float:
    """``Lambda_0 = (-rho + sqrt(rho^2 + 4 rho))/2`` written without cancellation."""
    return 2.0 * rho / (rho + math.sqrt(rho * rho + 4.0 * rho))


def tail_constant(rho: float) -> float:
    """``(sqrt(rho+4) - sqrt(rho)) / (2 sqrt(rho+4)) e^{-1}``: the limit of ``p_n(t) e^{(1-Lambda_0) t} Lambda_0^n``."""
    s4 = math.sqrt(rho + 4.0)
    return 2.0 / (s4 * (s4 + math.sqrt(rho))) * math.exp(-1.0)


@dataclass(frozen=True)
class FixedRhoCoords:
    n: float
    t: float
    ratio: float
    delta: float
    lam0: float
    lam: float
    r_star: float
    theta_s: float
    theta_p: float


def fixed_rho_coords(params: ModelParams, n, t) -> FixedRhoCoords:
    if n < 1 or not t > 0:
        raise DomainError("fixed-rho asymptotics need n >= 1 and t > 0")
    rho = params.rho
    ratio = n / t
    lam0 = lambda0(rho)
    sq = math.sqrt(t)
    return FixedRhoCoords(
        n=n,
        t=t,
        ratio=ratio,
        delta=(n - t) / sq,
        lam0=lam0,
        lam=(ratio - lam0) * sq,
        r_star=rho * (t / n) ** 2 * (ratio - 1.0),
        theta_s=ratio - 1.0,
        theta_p=lam0 - 1.0,
    )


def classify_fixed_rho(params: ModelParams, n, t):
    """Return ``(case, note)``; ``note`` is set when the two transition bands overlap."""
    c = fixed_rho_coords(params, n, t)
    width = BAND / math.sqrt(t)
    near_one = abs(c.ratio - 1.0) <= width
    near_lam0 = abs(c.ratio - c.lam0) <= width
    note = "transition bands overlap" if near_one and near_lam0 else None
    if near_one:
        return 2, note
    if near_lam0:
        return 4, note
    if c.ratio > 1.0:
        return 1, None
    if c.ratio > c.lam0:
        return 3, None
    return 5, None


def _case1(rho, n, t):
    return 1.0 / n - rho / (n * (n - t)) + (rho - 1.0) / n**2, n**-3.0


def _case2(c):
    value = erfc(-c.delta / math.sqrt(2.0)) / (2.0 * c.n)
    return value, value / math.sqrt(c.t)


def _case3(c):
    n, t, r = c.n, c.t, c.r_star
    log_value = (
        log_gamma(r + 1.0)
        + r
        - 0.5 * math.log(2.0 * math.pi)
        - (r + 1.0) * math.log1p(-n / t)
        + (-1.5 - r) * math.log(n)
        + n * math.log(t / n)
        + n
        - t
    )
    value = math.exp(log_value)
    return value, value / math.sqrt(t)


def _case45(rho, c, with_erfc):
    log_value = math.log(tail_constant(rho)) - c.n * math.log(c.lam0) + (c.lam0 - 1.0) * c.t
    value = math.exp(log_value)
    if with_erfc:
        value *= 0.5 * erfc(c.lam / math.sqrt(2.0 * c.lam0))
        return value, value / math.sqrt(c.t)
    return value, 0.0


def approx_fixed_rho(params: ModelParams, n, t, case: int | None = None) -> DensityResult:
    """Leading-order density for the classified (or forced) case.

    ``err_est`` is a size marker for the first neglected order: ``n^{-3}`` on
    the plateau and ``t^{-1/2}`` relative elsewhere.  The pure exponential
    (case 5) carries no algebraic correction, only exponentially smaller
    eigenvalue terms, so its marker is zero.
    """
    c = fixed_rho_coords(params, n, t)
    label, note = classify_fixed_rho(params, n, t)
    case = case or label
    rho = params.rho
    if case == 1:
        if n <= t:
            raise DomainError("case 1 needs n > t")
        value, err = _case1(rho, n, t)
    elif case == 2:
        value, err = _case2(c)
    elif case == 3:
        if not c.lam0 < c.ratio < 1.0:
            raise DomainError("case 3 needs Lambda_0 < n/t < 1")
        value, err = _case3(c)
    elif case == 4:
        value, err = _case45(rho, c, True)
    elif case == 5:
        value, err = _case45(rho, c, False)
    else:
        raise DomainError(f"unknown fixed-rho case {case!r}")
    return DensityResult(
        value=value,
        method="asymptotic",
        err_est=err,
        regime=f"fixed-rho case {case}",
        warning=note,
        extras={"coords": c.__dict__.copy(), "case": case},
    )
