import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourws.errors import GuardError, SingularityError
from fourws.sim import rk4_step
from fourws.vehicle_model import (
    GlobalDerivative,
    GlobalState,
    SteeringInput,
    VehicleParams,
    constraint_residuals,
    global_derivatives,
    global_rhs,
    lateral_acceleration,
    yaw_rate,
)

angles = st.floats(-10, 10)
steer = st.floats(-0.5, 0.5)
speeds = st.floats(0.1, 100)


def test_params_invariants():
    with pytest.raises(ValueError):
        VehicleParams(0.0, 0.0)
    with pytest.raises(ValueError):
        VehicleParams(2.7, 3.0)
    with pytest.raises(ValueError):
        VehicleParams(2.7, -0.1)


def test_straight_motion(params):
    d = global_derivatives(GlobalState(0, 0, 0), SteeringInput(0, 0), params, 5)
    assert (d.dx_R, d.dy_R, d.dpsi) == (5, 0, 0)


def test_equal_angles_give_crab_motion(params):
    d = global_derivatives(GlobalState(0, 0, 0), SteeringInput(0.3, 0.3), params, 5)
    assert d.dpsi == 0
    assert math.atan2(d.dy_R, d.dx_R) == pytest.approx(0.3)


def test_opposite_steer_example(params):
    # frozen from a symbolic solve of the three constraint equations (sympy)
    d = global_derivatives(GlobalState(0, 0, 0), SteeringInput(0.2, -0.2), params, 5)
    assert d.dx_R == pytest.approx(4.90033288920621, abs=1e-12)
    assert d.dy_R == pytest.approx(-0.993346653975306, abs=1e-12)
    assert d.dpsi == pytest.approx(0.735812336278004, abs=1e-12)


def test_guard_and_singularity(params):
    with pytest.raises(GuardError):
        global_derivatives(GlobalState(0, 0, 0), SteeringInput(1.41, 0), params, 5)
    with pytest.raises(SingularityError):
        yaw_rate(math.pi / 2, 0.0, 5.0, 2.7)
    with pytest.raises(ValueError):
        global_derivatives(GlobalState(0, 0, 0), SteeringInput(0, 0), params, 0.0)


def test_residual_examples(params):
    state, inp = GlobalState(0, 0, 0), SteeringInput(0.0, 0.1)
    r1, r2, r3 = constraint_residuals(state, GlobalDerivative(5, 0, 0), inp, 5, params)
    assert r2 == pytest.approx(5 * math.sin(0.1), abs=1e-15)

    good = global_derivatives(state, inp, params, 5)
    doubled = GlobalDerivative(2 * good.dx_R, 2 * good.dy_R, 2 * good.dpsi)
    r = constraint_residuals(state, doubled, inp, 5, params)
    assert r[2] == pytest.approx(5.0, abs=1e-12)


def test_constraints_hold_on_random_draws(params):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10_000):
        state = GlobalState(*rng.uniform(-100, 100, 2), rng.uniform(-20, 20))
        inp = SteeringInput(*rng.uniform(-0.5, 0.5, 2))
        v = rng.uniform(0.1, 100)
        d = global_derivatives(state, inp, params, v)
        worst = max(worst, *map(abs, constraint_residuals(state, d, inp, v, params)))
        assert math.hypot(d.dx_R, d.dy_R) == pytest.approx(v, rel=1e-12)
    assert worst < 1e-12


@given(psi=angles, df=steer, dr=steer, v=speeds, delta=angles)
def test_rotational_equivariance(psi, df, dr, v, delta):
    a = global_rhs(psi, df, dr, v, 2.7)
    b = global_rhs(psi + delta, df, dr, v, 2.7)
    c, s = math.cos(-delta), math.sin(-delta)
    back = (c * b[0] - s * b[1], s * b[0] + c * b[1])
    assert back[0] == pytest.approx(a[0], abs=1e-9 * v)
    assert back[1] == pytest.approx(a[1], abs=1e-9 * v)
    assert b[2] == a[2]


@given(df=steer, v=speeds)
def test_front_steer_reduces_to_bicycle(df, v):
    assert yaw_rate(df, 0.0, v, 2.7) == pytest.approx(v * math.tan(df) / 2.7, rel=1e-12, abs=1e-15)


def test_lateral_acceleration_examples(params):
    assert lateral_acceleration(0, 0, 0, 0, 20, params) == 0
    assert lateral_acceleration(0.5, 0, 0, 0, 20, params) == pytest.approx(10.0)
    # mpmath evaluation, 30 digits
    value = lateral_acceleration(0.5, 0.1, 0.2, 0.05, 5, params)
    assert value == pytest.approx(2.83018308906341, abs=1e-12)


@pytest.mark.parametrize("maneuver", ["constant", "varying"])
def test_lateral_acceleration_matches_finite_differences(params, maneuver):
    """Second differences of the CG position, projected on the body y axis."""
    v, a, dt = 5.0, -0.5, 1e-3

    def front(t):
        return 0.3 if maneuver == "constant" else 0.3 * math.sin(0.8 * t)

    def front_rate(t):
        return 0.0 if maneuver == "constant" else 0.24 * math.cos(0.8 * t)

    def rhs(y):
        x, yy, psi, t = y
        df = front(t)
        return (*global_rhs(psi, df, a * df, v, params.wheelbase_f), 1.0)

    y = (0.0, 0.0, 0.0, 0.0)
    states = [y]
    for _ in range(4000):
        y = rk4_step(rhs, y, dt)
        states.append(y)
    s = np.array(states)
    d = params.cg_offset_d
    gx = s[:, 0] + d * np.cos(s[:, 2])
    gy = s[:, 1] + d * np.sin(s[:, 2])
    ax = (gx[2:] - 2 * gx[1:-1] + gx[:-2]) / dt**2
    ay = (gy[2:] - 2 * gy[1:-1] + gy[:-2]) / dt**2
    psi, t = s[1:-1, 2], s[1:-1, 3]
    fd_lat = -ax * np.sin(psi) + ay * np.cos(psi)

    h = 1e-5
    rate = np.array([yaw_rate(front(ti), a * front(ti), v, 2.7) for ti in t])
    accel = np.array(
        [
            (yaw_rate(front(ti + h), a * front(ti + h), v, 2.7)
             - yaw_rate(front(ti - h), a * front(ti - h), v, 2.7)) / (2 * h)
            for ti in t
        ]
    )
    dr = a * np.array([front(ti) for ti in t])
    dr_rate = a * np.array([front_rate(ti) for ti in t])
    model = lateral_acceleration(rate, accel, dr, dr_rate, v, params)
    assert np.all(np.abs(fd_lat - model) <= 1e-3 * np.maximum(1.0, np.abs(model)))
