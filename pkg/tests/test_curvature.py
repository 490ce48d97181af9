import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdspc.curvature import (
    CurvatureProfile,
    InfeasibleTurn,
    PlannerState,
    integrate,
    inverse_integrate,
    max_heading_change,
    min_turn_length,
    ramp_out,
    wrap_angle,
)


def euler_oracle(start, kappas, taus, dt):
    """Step-by-step loop; the reference for the vectorized rollout."""
    x, y, z, th = start.x, start.y, start.z, start.theta
    out = [(x, y, z, th)]
    for k, t in zip(kappas, taus):
        x, y, z, th = x + math.cos(th) * dt, y + math.sin(th) * dt, z + t * dt, th + k * dt
        out.append((x, y, z, th))
    return np.array(out)


kappa_lists = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=1, max_size=200)


@given(kappa_lists, st.floats(-math.pi, math.pi), st.sampled_from([0.01, 0.015, 0.005]))
def test_rollout_matches_loop(kappas, theta0, dt):
    taus = np.linspace(-0.3, 0.3, len(kappas))
    start = PlannerState(1.0, -2.0, 0.5, theta0)
    wp = integrate(start, CurvatureProfile(dt, kappas, taus))
    ref = euler_oracle(start, kappas, taus, dt)
    np.testing.assert_allclose(wp.xyz, ref[:, :3], atol=1e-9)
    np.testing.assert_allclose(np.cos(wp.theta), np.cos(ref[:, 3]), atol=1e-9)


@given(kappa_lists)
def test_planar_steps_have_unit_pseudo_velocity(kappas):
    dt = 0.01
    wp = integrate(PlannerState(), CurvatureProfile(dt, kappas))
    steps = np.hypot(np.diff(wp.x), np.diff(wp.y))
    assert np.all(np.abs(steps - dt) <= 1e-12)


def test_straight_line_endpoint_exact():
    start = PlannerState(2.0, 3.0, 0.0, math.radians(30))
    wp = integrate(start, CurvatureProfile.straight(5.0, 0.01))
    assert abs(wp.x[-1] - (2.0 + 5.0 * math.cos(math.radians(30)))) < 1e-9
    assert abs(wp.y[-1] - (3.0 + 5.0 * math.sin(math.radians(30)))) < 1e-9


def _circle_error(n, dt):
    """Largest distance of the rolled-out loop from the exact unit-speed circle."""
    kappa = 2 * math.pi / (n * dt)
    wp = integrate(PlannerState(), CurvatureProfile(dt, np.full(n, kappa)))
    r = 1 / kappa
    ex, ey = r * np.sin(kappa * wp.s), r * (1 - np.cos(kappa * wp.s))
    return float(np.max(np.hypot(wp.x - ex, wp.y - ey)))


def test_circle_error_is_first_order():
    coarse = _circle_error(628, 0.01)
    fine = _circle_error(6283, 0.001)
    assert 8.0 < coarse / fine < 12.0


def test_full_loop_polygon_closes():
    # constant curvature gives a regular polygon, so the loop itself closes
    wp = integrate(PlannerState(), CurvatureProfile(0.01, np.full(628, 2 * math.pi / 6.28)))
    assert math.hypot(wp.x[-1], wp.y[-1]) < 1e-9


def test_waypoint_count_and_arc_length():
    wp = integrate(PlannerState(), CurvatureProfile(0.01, np.zeros(37)))
    assert len(wp) == 38
    assert wp.s[-1] == pytest.approx(0.37)
    empty = integrate(PlannerState(1, 2, theta=0.3), CurvatureProfile.empty(0.01))
    assert len(empty) == 1 and empty.final == PlannerState(1, 2, theta=0.3)


def test_wrap_angle_range():
    a = np.linspace(-20, 20, 4001)
    w = wrap_angle(a)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)
    np.testing.assert_allclose(np.cos(w), np.cos(a), atol=1e-12)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)


def test_inverse_integrate_hits_heading_and_rate_bound():
    prof = inverse_integrate(0.1, 0.4, 3.0, 0.01)
    assert len(prof) == 300
    assert prof.heading_change == pytest.approx(0.1, abs=1e-12)
    assert prof.max_kappa_step(entry_kappa=0.0) <= 0.4 * 0.01 + 1e-12
    assert prof.kappas[0] == 0.0 and prof.kappas[-1] == 0.0


def test_inverse_integrate_infeasible_reports_reachable():
    with pytest.raises(InfeasibleTurn) as info:
        inverse_integrate(3.0, 0.4, 1.0, 0.01)
    assert info.value.reachable == pytest.approx(max_heading_change(0.4, 1.0))
    assert info.value.reachable == pytest.approx(0.1)


def test_inverse_integrate_zero_and_negative():
    assert not np.any(inverse_integrate(0.0, 0.4, 1.0, 0.01).kappas)
    neg = inverse_integrate(-0.5, 0.4, 4.0, 0.01)
    assert neg.heading_change == pytest.approx(-0.5, abs=1e-12)
    assert np.all(neg.kappas <= 0)


def test_inverse_integrate_rejects_bad_arguments():
    for args in ((0.1, 0.0, 1.0, 0.01), (0.1, 0.4, 0.0, 0.01), (0.1, 0.4, 1.0, -0.01)):
        with pytest.raises(ValueError):
            inverse_integrate(*args)


def test_inverse_integrate_round_trip_random_requests():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        dt = float(rng.choice([0.01, 0.015]))
        rho = float(rng.uniform(0.3, 0.5))
        l_int = float(rng.uniform(0.5, 8.0))
        theta_t = float(rng.uniform(-1, 1)) * max_heading_change(rho, l_int) * 0.95
        theta0 = float(rng.uniform(-math.pi, math.pi))
        prof = inverse_integrate(theta_t, rho, l_int, dt)
        wp = integrate(PlannerState(theta=theta0), prof)
        err = abs(wrap_angle(wp.theta[-1] - (theta0 + theta_t)))
        k_peak = float(np.max(np.abs(prof.kappas)))
        assert err <= k_peak * dt + 1e-12
        assert prof.max_kappa_step(entry_kappa=0.0) <= rho * dt + 1e-12


@settings(max_examples=200)
@given(st.floats(0.01, 3.0), st.floats(0.3, 0.5))
def test_min_turn_length_is_tight(delta, rho):
    length = min_turn_length(delta, rho)
    assert max_heading_change(rho, length) == pytest.approx(delta)
    inverse_integrate(delta, rho, length + 0.03, 0.01)


def test_kappa_cap_makes_trapezoid():
    prof = inverse_integrate(1.0, 0.4, 10.0, 0.01, kappa_max=0.2)
    assert np.max(np.abs(prof.kappas)) <= 0.2 + 1e-12
    assert prof.heading_change == pytest.approx(1.0)


def test_ramp_out_values():
    np.testing.assert_allclose(ramp_out(0.0123, 0.4, 0.01), [0.0083, 0.0043, 0.0003, 0.0], atol=1e-15)
    assert len(ramp_out(0.0, 0.4, 0.01)) == 0
    down = ramp_out(-0.02, 0.4, 0.01)
    assert down[-1] == 0.0 and np.all(down <= 0)
    assert np.max(np.abs(np.diff(np.concatenate([[-0.02], down])))) <= 0.004 + 1e-15


def test_profile_concatenation_and_slicing():
    a = CurvatureProfile(0.01, [0.0, 0.004, 0.0])
    b = CurvatureProfile(0.01, [0.0, -0.004], taus=[0.1, 0.0])
    c = a + b
    assert len(c) == 5 and c.taus is not None
    np.testing.assert_array_equal(c.tau_values, [0, 0, 0, 0.1, 0])
    assert len(c[1:3]) == 2
    with pytest.raises(ValueError):
        a + CurvatureProfile(0.02, [0.0])
    with pytest.raises(TypeError):
        a[0]


def test_state_rejects_non_finite():
    with pytest.raises(ValueError):
        PlannerState(x=float("nan"))
