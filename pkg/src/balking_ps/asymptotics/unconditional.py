"""Asymptotic forms of the stationary (Poisson-mixed) sojourn density.

Each formula gives ``p_PS(t)``; the random-order-of-service waiting-time
density is ``p(t) = (1 - e^{-rho}) p_PS(t)`` in every regime.
"""

from __future__ import annotations

import math

from ..errors import DomainError
from ..spectral import DensityResult, ModelParams
from .fixed_rho import lambda0, tail_constant
from .light_traffic import q0_omega

__all__ = ["classify_unconditional", "approx_unconditional", "unconditional_light_identity"]

LIGHT = 0.1
HEAVY = 10.0


def classify_unconditional(params: ModelParams, t: float) -> str:
    rho = params.rho
    if rho >= HEAVY:
        return "3"
    if rho <= LIGHT:
        if t < rho**-0.25:
            return "2c"
        if t < rho**-0.75:
            return "2b"
        return "2a"
    return "1"


def approx_unconditional(params: ModelParams, t: float, case: str | None = None) -> DensityResult:
    if not t > 0:
        raise DomainError("t must be > 0")
    rho = params.rho
    case = case or classify_unconditional(params, t)
    if case == "1":
        lam = lambda0(rho)
        log_v = math.log(tail_constant(rho)) - rho + rho / lam + (lam - 1.0) * t
        value = math.exp(log_v)
    elif case == "2a":
        value = 0.5 * math.exp(-1.0 - 0.5 * rho * t - (1.0 - math.sqrt(rho)) * t)
    elif case == "2b":
        value = math.exp(-t) * q0_omega(math.sqrt(rho) * t)
    elif case == "2c":
        value = math.exp(-t) * (1.0 + 0.25 * rho * (t * t - 2.0))
    elif case == "3":
        value = math.exp(-t / rho) / rho
    else:
        raise DomainError(f"unknown unconditional case {case!r}")
    return DensityResult(
        value=value,
        method="asymptotic",
        regime=f"unconditional case {case}",
        extras={"case": case, "p_ros": -math.expm1(-rho) * value},
    )


def unconditional_light_identity(t: float) -> float:
    """Residual of the first-order light-traffic bookkeeping at time ``t``.

    Mixing ``p^(0)_0 + rho (p^(0)_1 + p^(1)_0)`` with weight ``1 - rho`` must
    give ``e^{-t} [1 + rho (t^2 - 2)/4]`` to first order.  The returned value is
    the difference of the two ``O(rho)`` coefficients and is zero up to rounding.
    """
    from .light_traffic import p0_light, p1_light

    first_order = p0_light(1, t) + p1_light(0, t) - p0_light(0, t)
    return first_order - math.exp(-t) * (t * t - 2.0) / 4.0
