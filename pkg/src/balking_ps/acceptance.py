"""The ten acceptance checks, each returning a :class:`CriterionResult`.

Every check is deterministic given its seed.  The rendered table carries no
timings so that two runs can be compared byte for byte; each check still
enforces its runtime budget and fails when it overruns.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from dataclasses import dataclass
from typing import Callable

from .asymptotics import (
    N_CRITICAL,
    approx_fixed_rho,
    heavy_p0,
    heavy_p0_alt,
    heavy_p1_n1,
    heavy_qn,
    lambda0,
    p0_light,
    p1_light,
    tail_constant,
    unconditional_light_identity,
)
from .master_ode import integrate_density, oracle_moments
from .simulate import compare_ps_ros
from .spectral import (
    ModelParams,
    completeness_sum,
    mean_sojourn,
    normalization_sum,
    second_moment,
    spectral_mean,
    spectral_second_moment,
)
from .transform import laplace_transform, pole_sum_transform, recurrence_residual, wronskian_check

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "render"]

DEFAULT_SEED = 20240917


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    budget: float
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title}: {self.detail}"


def _rel(a, b):
    return abs(a - b) / abs(b)


def _moments(seed, quick):
    worst_mean_spec = worst_mean_ode = worst_second = 0.0
    for rho in (0.5, 1.0, 2.0, 5.0):
        p = ModelParams(rho)
        for n in (0, 1, 5, 20):
            mean = mean_sojourn(p, n)
            second = second_moment(p, n)
            ode_mean, ode_second = oracle_moments(p, n)
            worst_mean_spec = max(worst_mean_spec, _rel(spectral_mean(p, n), mean))
            worst_mean_ode = max(worst_mean_ode, _rel(ode_mean, mean))
            worst_second = max(
                worst_second, _rel(spectral_second_moment(p, n), second), _rel(ode_second, second)
            )
    ok = worst_mean_spec <= 1e-6 and worst_mean_ode <= 1e-5 and worst_second <= 1e-5
    detail = (
        f"mean rel err spectral {worst_mean_spec:.2e} (<=1e-6), ode {worst_mean_ode:.2e} (<=1e-5); "
        f"second moment {worst_second:.2e} (<=1e-5)"
    )
    return ok, detail


def _completeness(seed, quick):
    worst_p0 = worst_mass = 0.0
    for rho in (0.5, 1.0, 2.0):
        p = ModelParams(rho)
        for n in range(11):
            worst_p0 = max(worst_p0, abs(completeness_sum(p, n) - 1.0 / (n + 1)))
            worst_mass = max(worst_mass, abs(normalization_sum(p, n) - 1.0))
    ok = worst_p0 <= 1e-6 and worst_mass <= 1e-6
    return ok, f"|p_n(0) - 1/(n+1)| {worst_p0:.2e}, |mass - 1| {worst_mass:.2e} (<=1e-6)"


def _transform(seed, quick):
    worst_pole = worst_rec = worst_wr = 0.0
    for rho in (0.5, 1.0, 2.0):
        p = ModelParams(rho)
        for theta in (0.25, 1.0, 4.0):
            for n in (0, 3, 10):
                quad = laplace_transform(p, n, theta).value
                worst_pole = max(worst_pole, _rel(quad, pole_sum_transform(p, n, theta)))
                worst_wr = max(worst_wr, wronskian_check(p, n, theta))
                if n >= 1:
                    worst_rec = max(worst_rec, abs(recurrence_residual(p, n, theta)))
    ok = worst_pole <= 1e-6 and worst_rec <= 1e-8 and worst_wr <= 1e-8
    detail = f"pole sum rel err {worst_pole:.2e} (<=1e-6); recurrence {worst_rec:.2e}, Wronskian {worst_wr:.2e} (<=1e-8)"
    return ok, detail


def _tail_law(seed, quick):
    rho, t = 1.0, 30.0
    lam = lambda0(rho)
    target = tail_constant(rho)
    parts = []
    ok = True
    for n in (0, 5):
        p = integrate_density(ModelParams(rho), n, [t])[0].value
        scaled = p * math.exp((1.0 - lam) * t) * lam**n
        dev = _rel(scaled, target)
        ok &= dev <= 0.01
        parts.append(f"n={n} {100 * dev:.2f}%")
    return ok, f"deviation from the tail constant at t=30: {', '.join(parts)} (<=1%)"


def _fixed_rho_plateau(seed, quick):
    p = ModelParams(1.0)
    errs = []
    for n in (100, 200, 400):
        t = n / 2.0
        exact = integrate_density(p, n, [t])[0].value
        approx = approx_fixed_rho(p, n, t, case=1).value
        errs.append(_rel(approx, exact))
    monotone = errs[0] > errs[1] > errs[2]
    ok = errs[1] <= 0.02 and monotone
    return ok, "rel err n=100,200,400: " + ", ".join(f"{e:.2e}" for e in errs) + " (n=200 <=2%, decreasing)"


def _heavy(seed, quick):
    rho = 100.0
    p = ModelParams(rho)
    grid = (0.5, 1.0, 2.0)
    exact = [r.value for r in integrate_density(p, 100, [T * rho for T in grid])]
    lead_ok = improve_ok = True
    worst_lead = 0.0
    for T, pe in zip(grid, exact):
        lead = abs(rho * pe - math.exp(-T))
        corr = abs(rho * pe - math.exp(-T) - heavy_p1_n1(T) / rho)
        worst_lead = max(worst_lead, lead)
        lead_ok &= lead <= 3.0 / rho
        improve_ok &= corr < lead
    initial_ok = all(heavy_p0(N, 0.0) == 1.0 / N and heavy_p0_alt(N, 0.0) == 1.0 / N for N in (0.25, 0.5, 2.0, 4.0))
    nc_ok = abs(N_CRITICAL - 1.2784) <= 1e-3
    ok = lead_ok and improve_ok and initial_ok and nc_ok
    detail = (
        f"max |rho p - e^-T| {worst_lead:.2e} (<=3/rho); P1 improves: {improve_ok}; "
        f"P0(N,0)=1/N: {initial_ok}; N_c={N_CRITICAL:.6f}"
    )
    return ok, detail


def _short_time(seed, quick):
    rho = 100.0
    p = ModelParams(rho)
    worst = 0.0
    for n in (0, 1, 3):
        taus = (0.5, 2.0)
        exact = [r.value for r in integrate_density(p, n, [tau / rho for tau in taus])]
        for tau, pe in zip(taus, exact):
            worst = max(worst, abs(pe - heavy_qn(p, n, tau)))
    return worst <= 5.0 / rho, f"max |p - Q_n(tau)| {worst:.2e} (<= {5.0 / rho:.2e})"


def _light(seed, quick):
    rho = 0.01
    p = ModelParams(rho)
    worst = 0.0
    grid = (0.5, 1.0, 2.0)
    for n in (0, 1, 3):
        exact = [r.value for r in integrate_density(p, n, grid)]
        for t, pe in zip(grid, exact):
            worst = max(worst, abs(pe - (p0_light(n, t) + rho * p1_light(n, t))))
    identity = max(abs(unconditional_light_identity(t)) for t in grid)
    ok = worst <= 5.0 * rho**2 and identity <= 1e-12
    return ok, f"max |p - (p0 + rho p1)| {worst:.2e} (<= {5 * rho**2:.1e}); mixture identity {identity:.1e} (<=1e-12)"


def _equivalence(seed, quick):
    reps = 100_000 if quick else 1_000_000
    r = compare_ps_ros(1.0, reps, seed, ks_reps=100_000)
    gaps = ", ".join(
        f"t={t:g}: {abs(a - b):.1e}/{h:.1e}" for t, a, b, h in zip(r.t_points, r.ros_tail, r.scaled_ps_tail, r.joint_half_width)
    )
    detail = (
        f"reps={reps}; |W - (1-e^-1)V| vs joint 99% half-width {gaps}; "
        f"P(W=0)={r.zero_fraction:.5f} +- {r.zero_half_width:.5f}; "
        f"KS n={r.ks_n} {r.ks_statistic:.4f} < {r.ks_critical:.4f}: {r.ks_passed}"
    )
    return r.passed, detail


def _determinism(seed, quick):
    cmd = [sys.executable, "-m", "balking_ps.cli", "validate", "--quick", "--seed", str(seed), "--only", "1-9"]
    outs = [subprocess.run(cmd, capture_output=True, check=False).stdout for _ in range(2)]
    same = outs[0] == outs[1] and len(outs[0]) > 0
    return same, f"two runs of validate --quick --seed {seed}: {'byte-identical' if same else 'DIFFERENT'} ({len(outs[0])} bytes)"


CRITERIA: dict[int, tuple[str, float, Callable]] = {
    1: ("moments", 30.0, _moments),
    2: ("completeness and normalization", 10.0, _completeness),
    3: ("transform identities", 60.0, _transform),
    4: ("exponential tail law", 30.0, _tail_law),
    5: ("fixed-rho plateau (case 1)", 120.0, _fixed_rho_plateau),
    6: ("heavy traffic", 300.0, _heavy),
    7: ("short-time heavy traffic", 120.0, _short_time),
    8: ("light traffic", 30.0, _light),
    9: ("PS/ROS equivalence", 300.0, _equivalence),
    10: ("determinism", 900.0, _determinism),
}


def run_criterion(number: int, seed: int = DEFAULT_SEED, quick: bool = False) -> CriterionResult:
    title, budget, check = CRITERIA[number]
    start = time.perf_counter()
    try:
        ok, detail = check(seed, quick)
    except Exception as exc:  # a crash is a failure of that criterion, not of the run
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if elapsed > budget:
        ok = False
        detail += f"; over the {budget:g} s budget"
    return CriterionResult(number, title, bool(ok), detail, budget, elapsed)


def run_all(numbers=None, seed: int = DEFAULT_SEED, quick: bool = False):
    return [run_criterion(k, seed, quick) for k in (numbers or sorted(CRITERIA))]


def render(results) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
