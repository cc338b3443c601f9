"""Fixed-step closed-loop simulation, trace recording and summary metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .controller import ControllerConfig, steer
from .errors import FourWSError
from .path import (
    Piecewise,
    PathFrameState,
    ReferencePath,
    error_function,
    lateral_error,
    path_frame_rhs,
    pose_at,
    project,
    to_path_frame,
    wrap_angle,
)
from .vehicle_model import (
    GlobalState,
    SteeringInput,
    VehicleParams,
    check_guard,
    global_rhs,
    lateral_acceleration,
)

TRACE_COLUMNS = (
    "t",
    "x_R",
    "y_R",
    "psi",
    "s_C",
    "e_C",
    "theta_C",
    "kappa_C",
    "delta_f",
    "delta_r",
    "psi_dot",
    "psi_ddot",
    "delta_r_dot",
    "a_lat",
)


class SimulationAborted(FourWSError):
    def __init__(self, t: float, cause: Exception):
        self.t = t
        self.cause = cause
        super().__init__(f"aborted at t = {t:.6g} s: {cause}")


@dataclass
class Scenario:
    params: VehicleParams
    path: ReferencePath
    speed: float
    controller: ControllerConfig
    initial: GlobalState
    dt: float = 1e-3
    duration: float = 30.0
    frame: str = "global"
    # constant steering in place of the controller (open-loop maneuvers)
    open_loop: Optional[SteeringInput] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.duration >= self.dt:
            raise ValueError(f"duration must be at least dt, got {self.duration}")
        if not self.speed > 0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if self.frame not in ("global", "path"):
            raise ValueError(f"frame must be 'global' or 'path', got {self.frame!r}")

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9)) + 1


@dataclass(frozen=True)
class TraceSample:
    t: float
    global_state: GlobalState
    pf: PathFrameState
    kappa_C: float
    input: SteeringInput
    psi_dot: float
    psi_ddot: float
    delta_r_dot: float
    a_lat: float


@dataclass
class Trace:
    t: np.ndarray
    x_R: np.ndarray
    y_R: np.ndarray
    psi: np.ndarray
    s_C: np.ndarray
    e_C: np.ndarray
    theta_C: np.ndarray
    kappa_C: np.ndarray
    delta_f: np.ndarray
    delta_r: np.ndarray
    psi_dot: np.ndarray
    psi_ddot: np.ndarray
    delta_r_dot: np.ndarray
    a_lat: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def columns(self):
        return {name: getattr(self, name) for name in TRACE_COLUMNS}

    def sample(self, i: int) -> TraceSample:
        return TraceSample(
            float(self.t[i]),
            GlobalState(float(self.x_R[i]), float(self.y_R[i]), float(self.psi[i])),
            PathFrameState(float(self.s_C[i]), float(self.e_C[i]), float(self.theta_C[i])),
            float(self.kappa_C[i]),
            SteeringInput(float(self.delta_f[i]), float(self.delta_r[i])),
            float(self.psi_dot[i]),
            float(self.psi_ddot[i]),
            float(self.delta_r_dot[i]),
            float(self.a_lat[i]),
        )


@dataclass(frozen=True)
class Metrics:
    max_abs_lat_accel: float
    max_abs_lat_error: float
    steady_state_error: float
    settle_time_5cm: Optional[float]  # None: never settles within the run
    turning_radius: Optional[float]  # None: motion is not a steady circle


def rk4_step(derivative_fn: Callable, state: Sequence[float], dt: float) -> tuple:
    """Classical fourth-order Runge-Kutta step for an autonomous system."""
    h = 0.5 * dt
    k1 = derivative_fn(state)
    k2 = derivative_fn(tuple(y + h * k for y, k in zip(state, k1)))
    k3 = derivative_fn(tuple(y + h * k for y, k in zip(state, k2)))
    k4 = derivative_fn(tuple(y + dt * k for y, k in zip(state, k3)))
    return tuple(
        y + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for y, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def _curvature_fn(path):
    if isinstance(path, Piecewise):
        return lambda s: pose_at(path, s).kappa_C
    kappa = path.curvature
    return lambda s: kappa


class _Loop:
    """Closed-loop vector fields for both frames, sharing the steering law."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.f = sc.params.wheelbase_f
        self.v = sc.speed
        g = sc.controller.gains
        self.k1, self.k2, self.a = g.k1, g.k2, g.a
        self.ff = sc.controller.feedforward_enabled
        self.kappa_at = _curvature_fn(sc.path)
        self.errors = error_function(sc.path)
        self.s_hint = None

    def steering(self, e, theta, kappa):
        if self.sc.open_loop is not None:
            check_guard(self.sc.open_loop.delta_f)
            return self.sc.open_loop.delta_f, self.sc.open_loop.delta_r
        return steer(e, theta, kappa, self.k1, self.k2, self.a, self.ff, self.f)

    def global_fn(self, y):
        x, yy, psi = y
        e, theta, kappa = self.errors(x, yy, psi)
        df, dr = self.steering(e, theta, kappa)
        return global_rhs(psi, df, dr, self.v, self.f)

    def path_fn(self, y):
        s, e, theta = y
        kappa = self.kappa_at(s)
        df, dr = self.steering(e, theta, kappa)
        return path_frame_rhs(e, theta, kappa, df, dr, self.v, self.f)

    def record_global(self, y):
        x, yy, psi = y
        c = project(self.sc.path, x, yy, s_hint=self.s_hint)
        e = lateral_error(c, x, yy)
        theta = wrap_angle(psi - c.psi_C)
        df, dr = self.steering(e, theta, c.kappa_C)
        return (x, yy, psi, c.s, e, theta, c.kappa_C, df, dr)

    def record_path(self, y):
        s, e, theta = y
        kappa = self.kappa_at(s)
        df, dr = self.steering(e, theta, kappa)
        c = pose_at(self.sc.path, s)
        x = c.x - e * math.sin(c.psi_C)
        yy = c.y + e * math.cos(c.psi_C)
        return (x, yy, c.psi_C + theta, s, e, wrap_angle(theta), kappa, df, dr)


def _second_derivative(y, dt):
    out = np.zeros_like(y)
    if len(y) < 4:
        return out
    out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / dt**2
    out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / dt**2
    out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / dt**2
    return out


def _first_derivative(y, dt):
    return np.gradient(y, dt, edge_order=2 if len(y) >= 3 else 1)


def run(scenario: Scenario) -> Trace:
    """Integrate the closed loop and return the sampled trace.

    Raises :class:`SimulationAborted` carrying the failing time when the
    projection, model or steering guard rejects a state.
    """
    sc = scenario
    loop = _Loop(sc)
    n = sc.n_samples
    rows = np.empty((n, 9))

    t = 0.0
    try:
        if sc.frame == "global":
            y = (sc.initial.x_R, sc.initial.y_R, sc.initial.psi)
            fn, record = loop.global_fn, loop.record_global
        else:
            pf, _ = to_path_frame(sc.initial, sc.path)
            y = (pf.s_C, pf.e_C, pf.theta_C)
            fn, record = loop.path_fn, loop.record_path
        for i in range(n):
            t = i * sc.dt
            rows[i] = record(y)
            loop.s_hint = rows[i, 3]
            if i + 1 < n:
                y = rk4_step(fn, y, sc.dt)
    except FourWSError as exc:
        raise SimulationAborted(t, exc) from exc

    time = np.arange(n) * sc.dt
    psi = rows[:, 2] if sc.frame == "global" else np.unwrap(rows[:, 2])
    delta_r = rows[:, 8]
    psi_dot = _first_derivative(psi, sc.dt)
    psi_ddot = _second_derivative(psi, sc.dt)
    delta_r_dot = _first_derivative(delta_r, sc.dt)
    a_lat = lateral_acceleration(psi_dot, psi_ddot, delta_r, delta_r_dot, sc.speed, sc.params)
    g = sc.controller.gains
    meta = {
        "a": g.a,
        "k1": g.k1,
        "k2": g.k2,
        "V": sc.speed,
        "f": sc.params.wheelbase_f,
        "d": sc.params.cg_offset_d,
        "dt": sc.dt,
        "frame": sc.frame,
        "feedforward": sc.controller.feedforward_enabled,
    }
    return Trace(
        time,
        rows[:, 0].copy(),
        rows[:, 1].copy(),
        psi,
        rows[:, 3].copy(),
        rows[:, 4].copy(),
        rows[:, 5].copy(),
        rows[:, 6].copy(),
        rows[:, 7].copy(),
        delta_r.copy(),
        psi_dot,
        psi_ddot,
        delta_r_dot,
        a_lat,
        meta,
    )


def compute_metrics(trace: Trace, band: float = 0.05) -> Metrics:
    if len(trace) == 0:
        raise ValueError("empty trace")
    n = len(trace)
    tail = slice(n - max(1, math.ceil(0.1 * n)), n)
    abs_e = np.abs(trace.e_C)

    outside = np.flatnonzero(abs_e >= band)
    if outside.size == 0:
        settle = float(trace.t[0])
    elif outside[-1] == n - 1:
        settle = None
    else:
        settle = float(trace.t[outside[-1] + 1])

    radius = None
    rate = trace.psi_dot[tail]
    mean_rate = float(np.mean(np.abs(rate)))
    same_sign = np.all(rate > 0) or np.all(rate < 0)
    if same_sign and mean_rate > 1e-9 and np.ptp(rate) < 0.01 * mean_rate:
        radius = float(trace.meta["V"]) / mean_rate

    return Metrics(
        max_abs_lat_accel=float(np.max(np.abs(trace.a_lat))),
        max_abs_lat_error=float(np.max(abs_e)),
        steady_state_error=float(np.mean(abs_e[tail])),
        settle_time_5cm=settle,
        turning_radius=radius,
    )


METRIC_FIELDS = tuple(f.name for f in fields(Metrics))
