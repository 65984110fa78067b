"""Master-equation oracle: initial data, internal consistency, moments."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from balking_ps import DomainError, ModelParams, mean_sojourn, second_moment, spectral_density, t_switch
from balking_ps import master_ode
from balking_ps.errors import TruncationError
from balking_ps.master_ode import (
    default_n_max,
    integrate_density,
    integrate_tail,
    integrate_unconditional,
    oracle_moments,
    solve_truncated,
)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_initial_conditions(n):
    p = ModelParams(1.0)
    assert integrate_density(p, n, [0.0])[0].value == 1.0 / (n + 1)
    assert integrate_tail(p, n, [0.0])[0].value == 1.0


def test_density_example_at_zero():
    r = integrate_density(ModelParams(1.0), 0, [0.0])[0]
    assert r.value == 1.0
    assert r.method == "ode"


def test_default_truncation():
    assert default_n_max(1.0, 0) == 16
    assert default_n_max(4.0, 3) == 27


def test_tail_is_one_minus_integrated_density():
    p = ModelParams(1.0)
    v = integrate_tail(p, 0, [1.5])[0].value
    area, _ = quad(lambda t: integrate_density(p, 0, [t])[0].value if t > 0 else 1.0, 0.0, 1.5, epsabs=1e-12)
    assert abs(v - (1.0 - area)) <= 1e-8


def test_tail_derivative_is_minus_density():
    p = ModelParams(2.0)
    n, t, h = 3, 1.2, 1e-3
    v = [r.value for r in integrate_tail(p, n, [t - h, t + h])]
    dens = integrate_density(p, n, [t])[0].value
    assert abs(-(v[1] - v[0]) / (2 * h) - dens) <= 1e-6


@given(rho=st.floats(0.2, 5.0), n=st.integers(0, 10), t=st.floats(0.01, 10.0), dt=st.floats(0.01, 5.0))
def test_tail_nonincreasing(rho, n, t, dt):
    v1, v2 = (r.value for r in integrate_tail(ModelParams(rho), n, [t, t + dt]))
    assert -1e-12 <= v2 <= v1 + 1e-12 <= 1.0 + 2e-12


@given(rho=st.floats(0.2, 5.0), t=st.floats(0.0, 20.0))
def test_state_in_range(rho, t):
    p = ModelParams(rho)
    sol = solve_truncated(p, 30, [t])
    assert np.all(sol.y >= -1e-12)
    sol = solve_truncated(p, 30, [t], tail=True)
    assert np.all(sol.y >= -1e-12) and np.all(sol.y <= 1.0 + 1e-12)


@pytest.mark.parametrize("rho,n", [(1.0, 0), (1.0, 5), (0.5, 2)])
def test_normalization(rho, n):
    p = ModelParams(rho)
    # integrate until the tail is below 1e-9, then compare the mass with 1 - V
    t_end = 40.0
    while integrate_tail(p, n, [t_end])[0].value > 1e-9:
        t_end *= 1.5
    area, _ = quad(
        lambda t: integrate_density(p, n, [t])[0].value if t > 0 else 1.0 / (n + 1),
        0.0,
        t_end,
        limit=200,
        epsabs=1e-11,
    )
    assert abs(area - 1.0) <= 1e-7


def test_mean_example():
    mean, _ = oracle_moments(ModelParams(1.0), 5)
    assert mean == pytest.approx(4.0, rel=1e-7)


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("n", [0, 3, 20])
def test_moments_reproduced(rho, n):
    p = ModelParams(rho)
    mean, second = oracle_moments(p, n)
    assert mean == pytest.approx(mean_sojourn(p, n), rel=1e-5)
    assert second == pytest.approx(second_moment(p, n), rel=1e-5)


@pytest.mark.parametrize("n", [0, 3, 10])
def test_agrees_with_spectral(n):
    p = ModelParams(1.0)
    grid = [t_switch(n) * f for f in (1.0, 1.5, 3.0)]
    for t, r in zip(grid, integrate_density(p, n, grid)):
        assert abs(r.value - spectral_density(p, n, t).value) <= 1e-6


def test_unconditional_is_poisson_mixture():
    rho = 1.5
    p = ModelParams(rho)
    t = 0.7
    direct = integrate_unconditional(p, [t])[0]
    mix = sum(
        math.exp(-rho) * rho**k / math.factorial(k) * integrate_density(p, k, [t])[0].value for k in range(40)
    )
    assert direct == pytest.approx(mix, abs=1e-9)
    assert integrate_unconditional(p, [0.0])[0] == pytest.approx((1 - math.exp(-rho)) / rho, rel=1e-12)


def test_custom_join_rate():
    # with b_k = 0 nobody joins, so a customer finding k others is served at rate 1/(k+1) behind them
    p = ModelParams(1.0)
    v = integrate_tail(p, 0, [2.0], join=lambda k: 0.0)[0].value
    assert v == pytest.approx(math.exp(-2.0), rel=1e-9)


def test_truncation_error_reports_both_sizes(monkeypatch):
    monkeypatch.setattr(master_ode, "AGREE", 0.0)
    monkeypatch.setattr(master_ode, "MAX_GROWTH", 0)
    with pytest.raises(TruncationError) as info:
        integrate_density(ModelParams(3.0), 2, [5.0])
    err = info.value
    assert err.n_max_doubled == 2 * err.n_max
    assert err.discrepancy > 0.0
    assert str(err.n_max) in str(err) and str(err.n_max_doubled) in str(err)


@pytest.mark.parametrize("grid", [[], [1.0, 1.0], [2.0, 1.0], [-1.0], [math.nan]])
def test_bad_grids(grid):
    with pytest.raises(DomainError):
        integrate_density(ModelParams(1.0), 0, grid)


def test_bad_index():
    with pytest.raises(DomainError):
        integrate_tail(ModelParams(1.0), -1, [1.0])
    with pytest.raises(DomainError):
        integrate_density(ModelParams(1.0), 2.5, [1.0])
