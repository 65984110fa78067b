"""Asymptotic approximations in every published regime, with regime classifiers."""

from typing import Union

from .fixed_rho import FixedRhoCoords, approx_fixed_rho, classify_fixed_rho, fixed_rho_coords, lambda0, tail_constant
from .heavy_traffic import (
    N_CRITICAL,
    HeavyTrafficCoords,
    critical_n,
    heavy_coords,
    heavy_density,
    heavy_p0,
    heavy_p0_alt,
    heavy_p0_series,
    heavy_p1,
    heavy_p1_n1,
    heavy_qn,
    solve_U,
    u_series,
)
from .light_traffic import (
    LightTrafficCoords,
    approx_light_traffic,
    classify_light_traffic,
    light_coords,
    p0_light,
    p1_light,
    q0_omega,
    q_omega,
)
from .unconditional import approx_unconditional, classify_unconditional, unconditional_light_identity

RegimeCoords = Union[FixedRhoCoords, LightTrafficCoords, HeavyTrafficCoords]

__all__ = [
    "FixedRhoCoords",
    "LightTrafficCoords",
    "HeavyTrafficCoords",
    "RegimeCoords",
    "lambda0",
    "tail_constant",
    "fixed_rho_coords",
    "classify_fixed_rho",
    "approx_fixed_rho",
    "light_coords",
    "classify_light_traffic",
    "approx_light_traffic",
    "p0_light",
    "p1_light",
    "q_omega",
    "q0_omega",
    "N_CRITICAL",
    "critical_n",
    "solve_U",
    "u_series",
    "heavy_p0",
    "heavy_p0_alt",
    "heavy_p0_series",
    "heavy_p1",
    "heavy_p1_n1",
    "heavy_coords",
    "heavy_density",
    "heavy_qn",
    "classify_unconditional",
    "approx_unconditional",
    "unconditional_light_identity",
]
