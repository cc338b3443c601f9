"""Reference paths and the path-relative (Frenet) form of the vehicle model.

Sign conventions: a positive lateral error means the vehicle is left of the
path, and a positive curvature means the path turns left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import PathRangeError, ProjectionError, SingularityError
from .vehicle_model import COS_EPS, GlobalState, SteeringInput, VehicleParams

TWO_PI = 2.0 * math.pi
JOIN_TOL = 1e-9


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(angle, TWO_PI)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class Straight:
    origin: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0
    length: Optional[float] = None  # None: unbounded in both directions

    @property
    def curvature(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float]
    radius: float
    start_angle: float  # polar angle of the start point about the center
    turn: str = "left"
    length: Optional[float] = None  # None: full circle, arclength extends freely

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"arc radius must be positive, got {self.radius}")
        if self.turn not in ("left", "right"):
            raise ValueError(f"turn must be 'left' or 'right', got {self.turn!r}")

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius if self.turn == "left" else -1.0 / self.radius

    @property
    def sign(self) -> float:
        return 1.0 if self.turn == "left" else -1.0

    @classmethod
    def from_start(cls, start, heading, curvature, length=None):
        """Arc leaving ``start`` along ``heading`` with signed ``curvature``."""
        if curvature == 0:
            raise ValueError("zero curvature is a straight line")
        radius = 1.0 / abs(curvature)
        sgn = 1.0 if curvature > 0 else -1.0
        # center lies on the left normal for a left turn
        cx = start[0] - sgn * radius * math.sin(heading)
        cy = start[1] + sgn * radius * math.cos(heading)
        return cls(
            center=(cx, cy),
            radius=radius,
            start_angle=math.atan2(start[1] - cy, start[0] - cx),
            turn="left" if sgn > 0 else "right",
            length=length,
        )


Segment = Union[Straight, Arc]


@dataclass(frozen=True)
class Piecewise:
    segments: tuple[Segment, ...]
    offsets: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("piecewise path needs at least one segment")
        offsets = [0.0]
        for i, seg in enumerate(segs):
            if seg.length is None or not seg.length > 0:
                raise ValueError(f"segment {i} needs a finite positive length")
            offsets.append(offsets[-1] + seg.length)
        for i in range(len(segs) - 1):
            end = _segment_pose(segs[i], segs[i].length)
            start = _segment_pose(segs[i + 1], 0.0)
            gap = math.hypot(end[0] - start[0], end[1] - start[1])
            turn = abs(wrap_angle(end[2] - start[2]))
            if gap > JOIN_TOL or turn > JOIN_TOL:
                raise ValueError(
                    f"segments {i} and {i + 1} are not joined "
                    f"(gap {gap:.3g} m, heading jump {turn:.3g} rad)"
                )
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "offsets", tuple(offsets))

    @property
    def length(self) -> float:
        return self.offsets[-1]

    @property
    def kappa_max(self) -> float:
        return max(abs(seg.curvature) for seg in self.segments)


ReferencePath = Union[Straight, Arc, Piecewise]


@dataclass(frozen=True)
class PathPoint:
    s: float
    x: float
    y: float
    psi_C: float
    kappa_C: float
    clamped: bool = False


@dataclass(frozen=True)
class PathFrameState:
    s_C: float
    e_C: float
    theta_C: float


def _segment_pose(seg: Segment, s: float) -> tuple[float, float, float]:
    """(x, y, unwrapped heading) at local arclength ``s``."""
    if isinstance(seg, Straight):
        h = seg.heading
        return seg.origin[0] + s * math.cos(h), seg.origin[1] + s * math.sin(h), h
    phi = seg.start_angle + seg.sign * s / seg.radius
    return (
        seg.center[0] + seg.radius * math.cos(phi),
        seg.center[1] + seg.radius * math.sin(phi),
        phi + seg.sign * 0.5 * math.pi,
    )


def _segment_project(seg: Segment, x: float, y: float, bounded: bool, s_hint=None):
    """Local arclength of the closest point and whether it was clamped to an end."""
    if isinstance(seg, Straight):
        s = (x - seg.origin[0]) * math.cos(seg.heading) + (y - seg.origin[1]) * math.sin(
            seg.heading
        )
        if bounded:
            if s < 0.0:
                return 0.0, True
            if s > seg.length:
                return seg.length, True
        return s, False

    dx, dy = x - seg.center[0], y - seg.center[1]
    if math.hypot(dx, dy) <= 1e-12 * seg.radius:
        raise ProjectionError(
            f"point ({x}, {y}) is the arc center; every arc point is equidistant"
        )
    sweep = (seg.sign * (math.atan2(dy, dx) - seg.start_angle)) % TWO_PI
    s = seg.radius * sweep
    circumference = TWO_PI * seg.radius
    if not bounded:
        if s_hint is not None:
            s += circumference * round((s_hint - s) / circumference)
        return s, False
    if s <= seg.length:
        return s, False
    # outside the arc: nearer endpoint, the start being reached by wrapping back
    if circumference - s < s - seg.length:
        return 0.0, True
    return seg.length, True


def _point(seg: Segment, s_local: float, s_global: float, clamped=False) -> PathPoint:
    x, y, h = _segment_pose(seg, s_local)
    return PathPoint(s_global, x, y, wrap_angle(h), seg.curvature, clamped)


def pose_at(path: ReferencePath, s: float) -> PathPoint:
    """Position, tangent heading and curvature at arclength ``s``."""
    if not isinstance(path, Piecewise):
        return _point(path, s, s)
    total = path.length
    if s < -JOIN_TOL or s > total + JOIN_TOL:
        raise PathRangeError(f"arclength {s} outside [0, {total}]")
    s = min(max(s, 0.0), total)
    last = len(path.segments) - 1
    for i, seg in enumerate(path.segments):
        if s < path.offsets[i + 1] or i == last:
            return _point(seg, s - path.offsets[i], s)
    raise AssertionError("unreachable")


def project(path: ReferencePath, x: float, y: float, s_hint=None) -> PathPoint:
    """Closest point of the path to (x, y).

    ``s_hint`` selects the revolution on an unbounded arc so that arclength
    stays continuous along a trajectory. On piecewise paths the result is
    flagged ``clamped`` when the point lies beyond either end.
    """
    if not isinstance(path, Piecewise):
        s, _ = _segment_project(path, x, y, bounded=False, s_hint=s_hint)
        return _point(path, s, s)

    best = None
    n = len(path.segments)
    for i, seg in enumerate(path.segments):
        s_loc, clamped = _segment_project(seg, x, y, bounded=True)
        px, py, _ = _segment_pose(seg, s_loc)
        dist = math.hypot(x - px, y - py)
        # strict comparison keeps the smaller s on ties
        if best is None or dist < best[0] - 1e-12:
            at_end = clamped and (
                (i == 0 and s_loc == 0.0) or (i == n - 1 and s_loc == seg.length)
            )
            best = (dist, i, s_loc, at_end)
    _, i, s_loc, at_end = best
    return _point(path.segments[i], s_loc, path.offsets[i] + s_loc, at_end)


def lateral_error(point: PathPoint, x: float, y: float) -> float:
    return -(x - point.x) * math.sin(point.psi_C) + (y - point.y) * math.cos(point.psi_C)


def to_path_frame(state: GlobalState, path: ReferencePath, s_hint=None):
    """Convert a global pose to ``(PathFrameState, kappa_C)``."""
    c = project(path, state.x_R, state.y_R, s_hint=s_hint)
    e = lateral_error(c, state.x_R, state.y_R)
    return PathFrameState(c.s, e, wrap_angle(state.psi - c.psi_C)), c.kappa_C


def from_path_frame(pf: PathFrameState, path: ReferencePath) -> GlobalState:
    """Inverse of :func:`to_path_frame` (yaw returned in (-pi, pi])."""
    c = pose_at(path, pf.s_C)
    return GlobalState(
        c.x - pf.e_C * math.sin(c.psi_C),
        c.y + pf.e_C * math.cos(c.psi_C),
        wrap_angle(c.psi_C + pf.theta_C),
    )


def path_frame_rhs(e, theta, kappa, delta_f, delta_r, speed, wheelbase):
    shrink = 1.0 - kappa * e
    if shrink <= 1e-9:
        raise SingularityError(
            f"1 - kappa*e = {shrink:.3g}: point is at or beyond the curvature center"
        )
    c = math.cos(delta_f)
    if abs(c) < COS_EPS:
        raise SingularityError(f"cos(delta_f) = {c:.3g} at delta_f = {delta_f}")
    heading = theta + delta_r
    ds = speed * math.cos(heading) / shrink
    return (
        ds,
        speed * math.sin(heading),
        -kappa * ds + speed * math.sin(delta_f - delta_r) / (wheelbase * c),
    )


def path_frame_derivatives(
    pf: PathFrameState,
    kappa_C: float,
    inp: SteeringInput,
    params: VehicleParams,
    speed: float,
) -> tuple[float, float, float]:
    """Time derivatives of (s_C, e_C, theta_C)."""
    return path_frame_rhs(
        pf.e_C, pf.theta_C, kappa_C, inp.delta_f, inp.delta_r, speed, params.wheelbase_f
    )


def error_function(path: ReferencePath):
    """``(x, y, psi) -> (e_C, theta_C, kappa_C)`` specialised to the path type.

    Same result as :func:`to_path_frame` without building intermediate
    objects; the integrator calls this at every stage.
    """
    if isinstance(path, Straight):
        ox, oy = path.origin
        c, s, h = math.cos(path.heading), math.sin(path.heading), path.heading

        def straight(x, y, psi):
            return -(x - ox) * s + (y - oy) * c, wrap_angle(psi - h), 0.0

        return straight

    if isinstance(path, Arc) and path.length is None:
        cx, cy, r, sgn, kappa = *path.center, path.radius, path.sign, path.curvature
        quarter = sgn * 0.5 * math.pi

        def arc(x, y, psi):
            dx, dy = x - cx, y - cy
            d = math.hypot(dx, dy)
            if d <= 1e-12 * r:
                raise ProjectionError(f"point ({x}, {y}) is the arc center")
            return sgn * (r - d), wrap_angle(psi - math.atan2(dy, dx) - quarter), kappa

        return arc

    def generic(x, y, psi):
        c = project(path, x, y)
        return lateral_error(c, x, y), wrap_angle(psi - c.psi_C), c.kappa_C

    return generic
