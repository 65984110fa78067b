"""Direct integration of the truncated master equations (ground-truth oracle).

The density of a tagged customer who found ``k`` others obeys

    p_k' = k/(k+1) p_{k-1} - (1 + rho b_k) p_k + rho b_k p_{k+1},   p_k(0) = 1/(k+1),

with ``b_k = 1/(k+1)``; the tail ``V_k`` satisfies the same equations with
``V_k(0) = 1``.  The index range is cut at ``n_max`` with an absorbing
closure (``p_{n_max+1} = 0``, equivalently ``V_{n_max+1} = 1``) and every
answer is certified by re-solving with ``2 n_max``.

This module deliberately shares no code with the spectral or closed-form
paths it is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, TruncationError
from .spectral import DensityResult, ModelParams

__all__ = [
    "TruncatedState",
    "default_n_max",
    "integrate_density",
    "integrate_tail",
    "integrate_unconditional",
    "solve_truncated",
    "oracle_moments",
]

RTOL = 1e-10
ATOL = 1e-16
AGREE = 1e-9
MOMENT_AGREE = 1e-7  # quadrature is refined to 1e-8, so moments agree to about that level
MAX_GROWTH = 3


@dataclass(frozen=True)
class TruncatedState:
    n_max: int
    values: np.ndarray
    time: float


def _default_join(k):
    return 1.0 / (k + 1.0)


def default_n_max(rho: float, n: int) -> int:
    return int(n + 10 + math.ceil(5.0 * math.sqrt(rho) + rho))


def _rates(rho, n_max, join):
    k = np.arange(n_max + 1, dtype=float)
    up = rho * np.array([join(int(i)) for i in range(n_max + 1)], dtype=float)
    down = k / (k + 1.0)
    return down, up


def _make_rhs(rho, n_max, join, tail):
    down, up = _rates(rho, n_max, join)
    diag = -(1.0 + up)
    # the tail closure V_{n_max+1} = 1 is an inhomogeneous term at the top row
    top = up[-1] if tail else 0.0

    def rhs(t, y):
        out = diag[:, None] * y if y.ndim == 2 else diag * y
        if y.ndim == 2:
            out[1:] += down[1:, None] * y[:-1]
            out[:-1] += up[:-1, None] * y[1:]
            out[-1] += top
        else:
            out[1:] += down[1:] * y[:-1]
            out[:-1] += up[:-1] * y[1:]
            out[-1] += top
        return out

    return rhs


def _initial(n_max, tail):
    if tail:
        return np.ones(n_max + 1)
    return 1.0 / np.arange(1, n_max + 2, dtype=float)


def solve_truncated(params: ModelParams, n_max: int, t_grid, tail=False, join=None, dense=False, events=None):
    """Integrate the truncated system once; returns the ``solve_ivp`` solution."""
    join = join or _default_join
    t_grid = np.asarray(t_grid, dtype=float)
    t_end = float(t_grid[-1]) if t_grid.size else 0.0
    rhs = _make_rhs(params.rho, n_max, join, tail)
    y0 = _initial(n_max, tail)
    if t_end == 0.0 and events is None:
        return _Static(y0, t_grid)
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        t_eval=t_grid if not dense else None,
        rtol=RTOL,
        atol=ATOL,
        vectorized=True,
        dense_output=dense,
        events=events,
    )
    if sol.status < 0:
        raise ConvergenceError(f"master-equation solver failed: {sol.message}")
    return sol


class _Static:
    """Stand-in solution when every requested time is zero."""

    def __init__(self, y0, t_grid):
        self.t = t_grid
        self.y = np.repeat(y0[:, None], t_grid.size, axis=1)
        self.status = 0


def _check_grid(t_grid):
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t.size == 0:
        raise DomainError("empty time grid")
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("times must be finite and >= 0")
    if np.any(np.diff(t) <= 0):
        raise DomainError("time grid must be strictly increasing")
    return t


def _certified(params, n_query, t_grid, tail, join, reduce):
    """Solve at ``n_max`` and ``2 n_max``; grow until the doubling test passes."""
    t = _check_grid(t_grid)
    n_max = default_n_max(params.rho, n_query)
    for _ in range(MAX_GROWTH + 1):
        a = reduce(solve_truncated(params, n_max, t, tail, join).y)
        b = reduce(solve_truncated(params, 2 * n_max, t, tail, join).y)
        gap = np.abs(a - b)
        if np.all(gap <= AGREE):
            return b, gap, 2 * n_max
        worst = float(gap.max())
        n_max *= 2
    raise TruncationError(
        f"truncation not certified: n_max={n_max // 2} vs {n_max} differ by {worst:.3g}",
        n_max=n_max // 2,
        n_max_doubled=n_max,
        discrepancy=worst,
    )


def integrate_density(params: ModelParams, n_query: int, t_grid: Sequence[float], join: Callable | None = None):
    """``p_n(t)`` on an increasing time grid, one :class:`DensityResult` per time."""
    if int(n_query) != n_query or n_query < 0:
        raise DomainError("n must be a non-negative integer")
    n_query = int(n_query)
    values, gap, used = _certified(params, n_query, t_grid, False, join, lambda y: y[n_query])
    return [
        DensityResult(value=float(v), method="ode", err_est=float(g), terms_used=used) for v, g in zip(values, gap)
    ]


def integrate_tail(params: ModelParams, n_query: int, t_grid: Sequence[float], join: Callable | None = None):
    """``V_n(t) = Prob[sojourn > t]`` on an increasing grid."""
    if int(n_query) != n_query or n_query < 0:
        raise DomainError("n must be a non-negative integer")
    n_query = int(n_query)
    values, gap, used = _certified(params, n_query, t_grid, True, join, lambda y: y[n_query])
    return [
        DensityResult(value=float(v), method="ode", err_est=float(g), terms_used=used) for v, g in zip(values, gap)
    ]


def _poisson_weights(rho, size):
    k = np.arange(size)
    logw = -rho + k * math.log(rho) - np.array([math.lgamma(i + 1.0) for i in k])
    return np.exp(logw)


def integrate_unconditional(params: ModelParams, t_grid: Sequence[float], tail=False):
    """Poisson(rho) mixture of the conditional solutions, as plain floats.

    One solve yields every ``p_k(t)`` at once, so the mixture costs no more
    than a single conditional density.
    """
    rho = params.rho
    n_top = int(math.ceil(rho + 12.0 * math.sqrt(rho) + 30.0))

    def mix(y):
        w = _poisson_weights(rho, y.shape[0])
        w[n_top + 1 :] = 0.0
        return w @ y

    values, _, _ = _certified(params, n_top, t_grid, tail, None, mix)
    return [float(v) for v in values]


def _romberg(fun, a, b, rel=1e-8, max_level=16):
    """Trapezoid rule on [a, b] with Richardson extrapolation of successive halvings."""
    panels = 8
    ts = np.linspace(a, b, panels + 1)
    ys = fun(ts)
    trap = (b - a) / panels * (ys.sum() - 0.5 * (ys[0] + ys[-1]))
    table = [trap]
    for _ in range(max_level):
        h = (b - a) / panels
        mids = a + h * (np.arange(panels) + 0.5)
        trap = 0.5 * trap + 0.5 * h * fun(mids).sum()
        panels *= 2
        row = [trap]
        for j, prev in enumerate(table, start=1):
            row.append(row[-1] + (row[-1] - prev) / (4**j - 1))
        if abs(row[-1] - table[-1]) <= rel * abs(row[-1]):
            return row[-1]
        table = row
    raise ConvergenceError("trapezoid refinement did not settle", partial=table[-1])


def oracle_moments(params: ModelParams, n_query: int, cutoff: float = 1e-9):
    """First and second moments of the sojourn time from the integrated density.

    The density system and the tail system are integrated together until the
    tail of index ``n_query`` falls below ``cutoff``; the moments are then
    ``int t p dt`` and ``int t^2 p dt`` by refined trapezoid on the dense output.
    """
    n_query = int(n_query)
    rho = params.rho
    n_max = default_n_max(rho, n_query)
    previous = _moments_at(rho, n_query, n_max, cutoff)
    for _ in range(MAX_GROWTH + 1):
        current = _moments_at(rho, n_query, 2 * n_max, cutoff)
        gap = max(abs(a - b) / abs(b) for a, b in zip(previous, current))
        if gap <= MOMENT_AGREE:
            return current
        previous = current
        n_max *= 2
    raise TruncationError(
        "moment truncation not certified", n_max=n_max // 2, n_max_doubled=n_max, discrepancy=gap
    )


def _moments_at(rho, n_query, size, cutoff):
    rhs_p = _make_rhs(rho, size, _default_join, tail=False)
    rhs_v = _make_rhs(rho, size, _default_join, tail=True)
    dim = size + 1

    def rhs(t, y):
        return np.concatenate([rhs_p(t, y[:dim]), rhs_v(t, y[dim:])])

    def below(t, y):
        return y[dim + n_query] - cutoff

    below.terminal = True
    below.direction = -1
    y0 = np.concatenate([_initial(size, False), _initial(size, True)])
    horizon = 200.0 * (n_query + rho + 2.0) / min(1.0, rho) + 500.0
    sol = solve_ivp(rhs, (0.0, horizon), y0, method="DOP853", rtol=RTOL, atol=ATOL, dense_output=True, events=below)
    if sol.status != 1:
        raise ConvergenceError("tail never dropped below the cutoff within the horizon")
    t_end = float(sol.t_events[0][0])

    def p_of(ts):
        return sol.sol(ts)[n_query]

    mean = _romberg(lambda ts: ts * p_of(ts), 0.0, t_end)
    second = _romberg(lambda ts: ts * ts * p_of(ts), 0.0, t_end)
    # remainder beyond t_end, treating the far tail as a pure exponential
    y_end = sol.sol(t_end)
    v_end = y_end[dim + n_query]
    rate = y_end[n_query] / v_end
    mean += v_end * (t_end + 1.0 / rate)
    second += v_end * (t_end**2 + 2.0 * t_end / rate + 2.0 / rate**2)
    return mean, second
