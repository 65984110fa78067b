"""Asymptotic regimes: classifiers, closed forms and agreement with the ODE oracle."""

import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from balking_ps import DomainError, ModelParams, eigenvalues, spectral_term
from balking_ps.asymptotics import (
    N_CRITICAL,
    approx_fixed_rho,
    approx_light_traffic,
    approx_unconditional,
    classify_fixed_rho,
    classify_light_traffic,
    classify_unconditional,
    fixed_rho_coords,
    heavy_coords,
    heavy_density,
    heavy_p0,
    heavy_p0_alt,
    heavy_p0_series,
    heavy_p1,
    heavy_p1_n1,
    heavy_qn,
    lambda0,
    light_coords,
    p0_light,
    p1_light,
    q0_omega,
    q_omega,
    solve_U,
    tail_constant,
    u_series,
    unconditional_light_identity,
)
from balking_ps.master_ode import integrate_density, integrate_unconditional

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------- fixed rho


@pytest.mark.parametrize("rho", [0.1, 1.0, 10.0])
def test_lambda0_is_shifted_dominant_eigenvalue(rho):
    assert lambda0(rho) == pytest.approx(1.0 + eigenvalues(ModelParams(rho), 1).nu, abs=1e-12)


def test_lambda0_golden_ratio():
    assert lambda0(1.0) == pytest.approx(GOLDEN, abs=1e-15)


def test_coords():
    c = fixed_rho_coords(ModelParams(1.0), 150, 100)
    assert c.ratio == 1.5
    assert c.delta == pytest.approx(5.0)
    assert c.lam == pytest.approx((1.5 - GOLDEN) * 10.0)
    assert c.theta_s == pytest.approx(0.5)
    assert c.theta_p == pytest.approx(GOLDEN - 1.0)


@given(rho=st.floats(0.05, 20.0), t=st.floats(1.0, 1e4))
def test_r_star_is_minus_one_at_pole_crossing(rho, t):
    n = lambda0(rho) * t
    assume(n >= 1.0)
    assert fixed_rho_coords(ModelParams(rho), n, t).r_star == pytest.approx(-1.0, abs=1e-10)


@given(rho=st.floats(0.05, 20.0), n=st.integers(1, 10_000), t=st.floats(0.5, 1e4))
def test_saddle_sign(rho, n, t):
    assume(n != t)
    assert (fixed_rho_coords(ModelParams(rho), n, t).theta_s < 0) == (n < t)


@pytest.mark.parametrize(
    "n,t,case",
    [
        (400, 100, 1),
        (100, 100, 2),
        # n/t = 0.4 sits 0.218 below Lambda_0, inside the band of half-width 3/sqrt(100)
        (40, 100, 4),
        (160, 400, 5),
        (320, 400, 3),
        (62, 100, 4),
    ],
)
def test_classifier(n, t, case):
    assert classify_fixed_rho(ModelParams(1.0), n, t)[0] == case


def test_overlapping_bands_are_flagged():
    case, note = classify_fixed_rho(ModelParams(1.0), 8, 10)
    assert case == 2 and note is not None


def test_case1_example():
    p = ModelParams(1.0)
    r = approx_fixed_rho(p, 200, 100)
    assert r.value == pytest.approx(1 / 200 - 1 / (200 * 100), rel=1e-14)
    assert r.err_est == pytest.approx(200.0**-3)
    exact = integrate_density(p, 200, [100.0])[0].value
    assert r.value == pytest.approx(exact, rel=0.02)


def test_case2_at_the_diagonal():
    n = 10**4
    assert approx_fixed_rho(ModelParams(1.0), n, n).value == pytest.approx(1.0 / (2 * n), rel=1e-14)


def test_case5_is_first_spectral_term():
    p = ModelParams(1.0)
    n, t = 5, 60.0
    r = approx_fixed_rho(p, n, t, case=5)
    explicit = (math.sqrt(5) - 1) / (2 * math.sqrt(5)) * math.exp(-1) * GOLDEN**-n * math.exp((GOLDEN - 1) * t)
    assert r.value == pytest.approx(explicit, rel=1e-12)
    assert r.value == pytest.approx(spectral_term(p, 1, n).contribution(t), rel=1e-12)


@pytest.mark.parametrize("rho", [0.3, 1.0, 4.0])
def test_case5_matches_spectral_term_for_other_rho(rho):
    p = ModelParams(rho)
    for n, t in ((3, 50.0), (10, 80.0)):
        assert approx_fixed_rho(p, n, t, case=5).value == pytest.approx(
            spectral_term(p, 1, n).contribution(t), rel=1e-12
        )


def test_case4_is_half_of_case5_on_the_line():
    p = ModelParams(1.0)
    t = 400.0
    n = GOLDEN * t
    assert approx_fixed_rho(p, n, t, case=4).value == pytest.approx(0.5 * approx_fixed_rho(p, n, t, case=5).value)


def test_case3_against_oracle():
    # the saddle form is leading order; its relative error shrinks like t^{-1/2}
    p = ModelParams(1.0)
    errs = []
    for n, t in ((320, 400.0), (800, 1000.0)):
        r = approx_fixed_rho(p, n, t)
        assert r.regime.endswith("3")
        exact = integrate_density(p, n, [t])[0].value
        errs.append(abs(r.value / exact - 1.0))
        assert errs[-1] <= 3.0 / math.sqrt(t)
    assert errs[1] < errs[0]


def test_tail_constant_formula():
    assert tail_constant(1.0) == pytest.approx((math.sqrt(5) - 1) / (2 * math.sqrt(5)) * math.exp(-1), rel=1e-15)


def test_fixed_rho_domain():
    p = ModelParams(1.0)
    with pytest.raises(DomainError):
        approx_fixed_rho(p, 0, 10)
    with pytest.raises(DomainError):
        approx_fixed_rho(p, 50, 100, case=1)
    with pytest.raises(DomainError):
        approx_fixed_rho(p, 50, 100, case=7)


# ---------------------------------------------------------------- light traffic


def test_light_case3_example():
    p = ModelParams(0.01)
    assert p1_light(0, 2.0) == pytest.approx(0.0, abs=1e-16)
    r = approx_light_traffic(p, 0, 2.0)
    assert r.regime.endswith("3")
    assert r.value == pytest.approx(math.exp(-2.0), rel=1e-14)
    assert abs(r.value - integrate_density(p, 0, [2.0])[0].value) <= 5 * 0.01**2


def test_p1_light_zero_closed_form():
    for t in (0.3, 1.0, 4.0):
        assert p1_light(0, t) == pytest.approx(math.exp(-t) * (t * t / 4 - t / 2), rel=1e-13)


@given(n=st.integers(0, 30), t=st.floats(0.0, 30.0))
def test_p0_light_is_poisson_cdf_over_n_plus_1(n, t):
    from scipy.stats import poisson

    assert p0_light(n, t) == pytest.approx(poisson.cdf(n, t) / (n + 1), rel=1e-12, abs=1e-300)


def test_q0_at_zero_is_one():
    assert q0_omega(0.0) == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("omega", [0.0, 0.5, 2.0])
def test_q_omega_zero_index_matches_q0(omega):
    assert q_omega(0, omega) == pytest.approx(q0_omega(omega), rel=1e-11)


def test_light_case2_against_oracle():
    rho = 1e-4
    p = ModelParams(rho)
    t = 1.0 / math.sqrt(rho)
    for n in (0, 1):
        r = approx_light_traffic(p, n, t)
        assert r.regime.endswith(" 2")
        exact = integrate_density(p, n, [t])[0].value
        assert r.value == pytest.approx(exact, rel=0.05)


def test_unconditional_light_identity():
    for t in (0.0, 0.5, 1.0, 2.0, 5.0):
        assert abs(unconditional_light_identity(t)) <= 1e-12


def test_light_coords():
    c = light_coords(ModelParams(0.01), 300, 200)
    assert c.zeta == pytest.approx(2.0)
    assert c.x == pytest.approx(3.0)
    assert c.omega_big == pytest.approx(10.0)
    assert c.x_cap == pytest.approx(30.0)
    assert c.omega == pytest.approx(20.0)


@pytest.mark.parametrize(
    "rho,n,t,case",
    [
        (1e-6, 0, 2.0, "3"),
        (1e-6, 0, 1e3, "2"),
        (1e-6, 3e6, 1e6, "1a"),
        (1e-6, 1e6, 1e6, "1b"),
        (1e-6, 5e5, 1e6, "1c"),
        (1e-6, 1e3, 1e6, "1e"),
        (1e-6, 0, 1e6, "1g"),
    ],
)
def test_light_classifier(rho, n, t, case):
    assert classify_light_traffic(ModelParams(rho), n, t)[0] == case


def test_light_near_boundary_warns():
    rho = 1e-4
    r = approx_light_traffic(ModelParams(rho), 0, rho**-0.25)
    assert r.warning is not None and r.extras["alternatives"]


def test_light_case1a_flags_heuristic_error():
    r = approx_light_traffic(ModelParams(1e-6), int(3e6), 1e6)
    assert r.value == pytest.approx(1 / 3e6)
    assert "heuristic" in r.warning


# ---------------------------------------------------------------- heavy traffic


def test_critical_n():
    assert N_CRITICAL == pytest.approx(1.2784645427610738, abs=1e-13)
    assert (N_CRITICAL - 1) * math.exp(N_CRITICAL) == pytest.approx(1.0, abs=1e-14)


@given(N=st.floats(0.0, 3.0), T=st.floats(0.0, 10.0))
def test_solve_U_residual(N, T):
    U = solve_U(N, T)
    # U = (N-1)(1 - e^{U-T}) written without the division
    assert abs(U - (N - 1.0) * (1.0 - math.exp(U - T))) <= 1e-12


@given(N=st.floats(0.0, 3.0), T=st.floats(0.0, 10.0))
def test_u_series_agrees_inside_domain(N, T):
    assume(abs(1 - N) * math.exp(N - T) < 0.95)
    assert u_series(N, T) == pytest.approx(solve_U(N, T), abs=1e-10)


def test_solve_U_special_values():
    assert solve_U(1.0, 3.0) == 0.0
    assert solve_U(2.5, 0.0) == 0.0
    assert solve_U(0.0, 40.0) == pytest.approx(-1.0, abs=1e-15)
    assert u_series(1.0, 3.0) == 0.0
    assert u_series(0.5, 1.0) == pytest.approx(solve_U(0.5, 1.0), abs=1e-10)


def test_u_series_divergence_names_bound():
    with pytest.raises(DomainError, match="1.278"):
        u_series(1.5, 0.0)


def test_heavy_coords_invariants():
    c = heavy_coords(ModelParams(50.0), 75, 40)
    assert c.n_cap == 1.5 and c.t_cap == 0.8 and c.tau == 2000.0
    assert c.xi + c.eta == pytest.approx(c.n_cap)
    assert c.n_star == c.xi


@given(N=st.floats(0.01, 3.0), T=st.floats(0.0, 10.0))
def test_p0_dual_forms(N, T):
    assume(abs(N - 1.0) > 1e-6)
    assert heavy_p0(N, T) == pytest.approx(heavy_p0_alt(N, T), rel=1e-12, abs=1e-300)


@given(N=st.floats(0.01, 3.0), T=st.floats(0.0, 10.0))
def test_p0_series_form(N, T):
    assume(abs(1 - N) * math.exp(N - T) < 0.9)
    assert heavy_p0_series(N, T) == pytest.approx(heavy_p0(N, T), rel=1e-10)


def test_p0_special_values():
    assert heavy_p0(1.0, 2.0) == math.exp(-2.0)
    for N in (0.25, 0.5, 2.0, 4.0):
        assert heavy_p0(N, 0.0) == 1.0 / N
    assert heavy_p0(0.0, 20.0) == pytest.approx(math.exp(-21.0), rel=1e-6)
    assert heavy_p0(0.0, 5.0) == pytest.approx(math.exp(-6.0), rel=0.02)
    assert heavy_p0(100.0, 0.5) == pytest.approx(0.01, rel=0.01)


def test_p1_at_n_equal_one():
    for T in (0.0, 0.3, 1.0, 2.0, 7.0):
        assert heavy_p1(1.0, T) == pytest.approx(heavy_p1_n1(T), rel=1e-12, abs=1e-15)
    assert heavy_p1_n1(0.0) == pytest.approx(-1.0, abs=1e-15)


def test_p1_is_continuous_through_n_equal_one():
    for T in (0.5, 2.0):
        for eps in (1e-4, 1e-6):
            assert heavy_p1(1.0 + eps, T) == pytest.approx(heavy_p1(1.0, T), abs=50 * eps)
            assert heavy_p1(1.0 - eps, T) == pytest.approx(heavy_p1(1.0, T), abs=50 * eps)


def test_p1_initial_condition():
    for N in (0.3, 1.0, 2.5):
        assert heavy_p1(N, 0.0) == pytest.approx(-1.0 / N**2)
        assert heavy_p1(N, 1e-9) == pytest.approx(-1.0 / N**2, rel=1e-6)


def test_p1_at_n_zero_trend():
    ratios = [heavy_p1(0.0, T) / ((2 * T - 3) * math.exp(-1 - T)) for T in (10.0, 20.0)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1) < 1e-3


def test_heavy_density_examples():
    p = ModelParams(100.0)
    r = heavy_density(p, 100, 200)
    assert r.value == pytest.approx(math.exp(-2) / 100 + heavy_p1_n1(2.0) / 1e4, rel=1e-13)
    assert r.err_est == pytest.approx(1e-6)
    assert abs(r.value - integrate_density(p, 100, [200.0])[0].value) <= 30.0 / 100**3
    assert abs(heavy_density(p, 100, 0).value - 1 / 101) <= 2e-6


def test_heavy_density_plateau():
    devs = [abs(heavy_p0(N, 0.5) * N - 1.0) for N in (5.0, 20.0, 100.0)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-4


def test_heavy_limit_bounds():
    rho = 100.0
    p = ModelParams(rho)
    for T in (0.5, 1.0, 2.0):
        pe = integrate_density(p, 100, [T * rho])[0].value
        assert abs(rho * pe - heavy_p0(1.0, T)) <= 3.0 / rho
        assert abs(rho * pe - heavy_p0(1.0, T) - heavy_p1(1.0, T) / rho) <= 30.0 / rho**2


@pytest.mark.parametrize("n", [0, 1, 5])
def test_qn_at_zero(n):
    assert heavy_qn(None, n, 0.0) == 1.0 / (n + 1)
    assert heavy_qn(None, n, 1e-10) == pytest.approx(1.0 / (n + 1), rel=1e-8)


def test_qn_matching_trend():
    devs = [abs(heavy_qn(None, 10, tau) * math.sqrt(100 + 2 * tau) - 1) for tau in (20.0, 200.0, 2000.0)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[1] < 0.02


def test_qn_against_oracle():
    rho = 100.0
    p = ModelParams(rho)
    for n in (0, 2):
        exact = integrate_density(p, n, [1.0 / rho])[0].value
        assert abs(exact - heavy_qn(p, n, 1.0)) <= 5.0 / rho


def test_heavy_domain_errors():
    with pytest.raises(DomainError):
        solve_U(-1.0, 1.0)
    with pytest.raises(DomainError):
        heavy_p0(0.0, 0.0)
    with pytest.raises(DomainError):
        heavy_p0_alt(1.0, 1.0)
    with pytest.raises(DomainError):
        heavy_qn(None, -1, 1.0)
    with pytest.raises(DomainError):
        heavy_qn(None, 1, -1.0)


# ---------------------------------------------------------------- unconditional


def test_unconditional_classifier():
    assert classify_unconditional(ModelParams(1.0), 40) == "1"
    assert classify_unconditional(ModelParams(0.01), 1.0) == "2c"
    assert classify_unconditional(ModelParams(0.01), 10.0) == "2b"
    assert classify_unconditional(ModelParams(0.01), 100.0) == "2a"
    assert classify_unconditional(ModelParams(100.0), 200.0) == "3"


def test_unconditional_case1():
    rho, t = 1.0, 40.0
    r = approx_unconditional(ModelParams(rho), t)
    expected = (math.sqrt(5) - 1) / (2 * math.sqrt(5)) * math.exp(-2.0) * math.exp(1 / GOLDEN) * math.exp((GOLDEN - 1) * t)
    assert r.value == pytest.approx(expected, rel=1e-12)
    assert r.extras["p_ros"] == pytest.approx((1 - math.exp(-1)) * r.value)
    assert r.value == pytest.approx(integrate_unconditional(ModelParams(rho), [t])[0], rel=0.01)


def test_unconditional_case2c():
    p = ModelParams(0.01)
    r = approx_unconditional(p, 1.0)
    assert r.value == pytest.approx(math.exp(-1) * (1 + 0.0025 * (1 - 2)), rel=1e-14)
    assert abs(r.value - integrate_unconditional(p, [1.0])[0]) <= 5 * 0.01**2


def test_unconditional_case3():
    r = approx_unconditional(ModelParams(100.0), 200.0)
    assert r.value == pytest.approx(math.exp(-2) / 100, rel=1e-14)
    assert r.value == pytest.approx(integrate_unconditional(ModelParams(100.0), [200.0])[0], rel=0.02)


def test_unconditional_case2b_against_oracle():
    p = ModelParams(1e-4)
    t = 100.0
    r = approx_unconditional(p, t)
    assert r.regime.endswith("2b")
    assert r.value == pytest.approx(integrate_unconditional(p, [t])[0], rel=0.05)


def test_unconditional_domain():
    with pytest.raises(DomainError):
        approx_unconditional(ModelParams(1.0), 0.0)
    with pytest.raises(DomainError):
        approx_unconditional(ModelParams(1.0), 1.0, case="9")
