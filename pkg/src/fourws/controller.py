"""Curvature feedforward plus proportional feedback steering law.

The rear feedback angle is the front feedback angle scaled by ``a``; with
``a = 0`` the law reduces to front-wheel steering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .path import PathFrameState
from .vehicle_model import SteeringInput, VehicleParams, check_guard


@dataclass(frozen=True)
class ControlGains:
    k1: float  # lateral error gain [rad/m]
    k2: float  # yaw error gain [rad/rad]
    a: float = 0.0  # rear/front coupling

    def __post_init__(self):
        for name in ("k1", "k2", "a"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def k3(self) -> float:
        return self.a * self.k1

    @property
    def k4(self) -> float:
        return self.a * self.k2


@dataclass(frozen=True)
class ControllerConfig:
    gains: ControlGains
    feedforward_enabled: bool = True


def feedforward(kappa_C: float, params: VehicleParams) -> SteeringInput:
    """Steering that holds the rear axle exactly on a path of curvature ``kappa_C``."""
    return SteeringInput(math.atan(kappa_C * params.wheelbase_f), 0.0)


def feedback(e: float, theta: float, gains: ControlGains) -> SteeringInput:
    front = -gains.k1 * e - gains.k2 * theta
    return SteeringInput(front, gains.a * front)


def steer(e, theta, kappa, k1, k2, a, ff, wheelbase):
    """Float-level :func:`command`, used inside the integrator."""
    front = -k1 * e - k2 * theta
    delta_f = front + math.atan(kappa * wheelbase) if ff else front
    check_guard(delta_f)
    return delta_f, a * front


def command(
    pf: PathFrameState,
    kappa_C: float,
    config: ControllerConfig,
    params: VehicleParams,
) -> SteeringInput:
    """Total steering command; raises :class:`GuardError` instead of clamping."""
    g = config.gains
    return SteeringInput(
        *steer(
            pf.e_C,
            pf.theta_C,
            kappa_C,
            g.k1,
            g.k2,
            g.a,
            config.feedforward_enabled,
            params.wheelbase_f,
        )
    )
