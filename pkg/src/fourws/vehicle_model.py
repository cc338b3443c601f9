"""Kinematic single-track model with steerable front and rear axles.

The reference point is the rear axle center R. The model has no tire slip:
the velocity of each axle center is aligned with its wheel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, SingularityError

#: Largest admissible |delta_f| in rad; beyond this the input is rejected.
DELTA_GUARD = 1.4
COS_EPS = 1e-6


@dataclass(frozen=True)
class VehicleParams:
    wheelbase_f: float = 2.7
    cg_offset_d: float = 1.35

    def __post_init__(self):
        if not self.wheelbase_f > 0:
            raise ValueError(f"wheelbase must be positive, got {self.wheelbase_f}")
        if not 0 <= self.cg_offset_d <= self.wheelbase_f:
            raise ValueError(
                f"cg offset must lie in [0, wheelbase], got {self.cg_offset_d}"
            )


@dataclass(frozen=True)
class GlobalState:
    x_R: float
    y_R: float
    psi: float  # unwrapped


@dataclass(frozen=True)
class SteeringInput:
    delta_f: float
    delta_r: float


@dataclass(frozen=True)
class GlobalDerivative:
    dx_R: float
    dy_R: float
    dpsi: float


def check_guard(delta_f: float, guard: float = DELTA_GUARD) -> None:
    if not math.isfinite(delta_f) or abs(delta_f) > guard:
        raise GuardError(
            f"front steering angle {delta_f:.6g} rad exceeds guard {guard} rad"
        )


def yaw_rate(delta_f: float, delta_r: float, speed: float, wheelbase: float) -> float:
    c = math.cos(delta_f)
    if abs(c) < COS_EPS:
        raise SingularityError(f"cos(delta_f) = {c:.3g} at delta_f = {delta_f}")
    return speed * math.sin(delta_f - delta_r) / (wheelbase * c)


def global_rhs(psi, delta_f, delta_r, speed, wheelbase):
    """Float-level version of :func:`global_derivatives` used inside the integrator."""
    heading = psi + delta_r
    return (
        speed * math.cos(heading),
        speed * math.sin(heading),
        yaw_rate(delta_f, delta_r, speed, wheelbase),
    )


def global_derivatives(
    state: GlobalState, inp: SteeringInput, params: VehicleParams, speed: float
) -> GlobalDerivative:
    """Time derivatives of (x_R, y_R, psi) for constant speed of point R."""
    if not speed > 0:
        raise ValueError(f"speed must be positive, got {speed}")
    check_guard(inp.delta_f)
    return GlobalDerivative(
        *global_rhs(state.psi, inp.delta_f, inp.delta_r, speed, params.wheelbase_f)
    )


def constraint_residuals(
    state: GlobalState,
    deriv: GlobalDerivative,
    inp: SteeringInput,
    speed: float,
    params: VehicleParams,
) -> tuple[float, float, float]:
    """Residuals of the front/rear no-slip constraints and the speed constraint.

    Returns ``(r1, r2, r3)``: front-wheel lateral velocity, rear-wheel lateral
    velocity and the excess of rear longitudinal velocity over ``speed``.
    All vanish for an admissible motion.
    """
    f = params.wheelbase_f
    psi, xd, yd, wd = state.psi, deriv.dx_R, deriv.dy_R, deriv.dpsi
    front = psi + inp.delta_f
    rear = psi + inp.delta_r
    r1 = (xd - f * wd * math.sin(psi)) * math.sin(front) - (
        yd + f * wd * math.cos(psi)
    ) * math.cos(front)
    r2 = xd * math.sin(rear) - yd * math.cos(rear)
    r3 = xd * math.cos(rear) + yd * math.sin(rear) - speed
    return r1, r2, r3


def lateral_acceleration(
    psi_dot: float,
    psi_ddot: float,
    delta_r: float,
    delta_r_dot: float,
    speed: float,
    params: VehicleParams,
) -> float:
    """Lateral (body-frame) acceleration of the center of gravity G.

    Accepts scalars or equally shaped arrays.
    """
    return speed * (psi_dot + delta_r_dot) * np.cos(delta_r) + params.cg_offset_d * psi_ddot
