"""Scenario configuration: a flat ``section.key = value`` text format.

Example::

    # fig7, a = -0.5
    vehicle.wheelbase = 2.7
    path.kind = arc
    path.curvature = 0.1
    run.speed = 5
    controller.a = -0.5
    controller.lambda0 = -1
    initial.e = -5

Blank lines and ``#`` comments are ignored; unknown keys are rejected.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path

from .controller import ControlGains, ControllerConfig
from .errors import ConfigError, FourWSError
from .path import Arc, PathFrameState, Piecewise, Straight, from_path_frame, pose_at
from .sim import Scenario
from .stability import PolePlacementSpec, crab_gains, place_double_pole
from .vehicle_model import GlobalState, SteeringInput, VehicleParams

log = logging.getLogger(__name__)

_BOOL = {"true": True, "on": True, "yes": True, "false": False, "off": False, "no": False}

# key -> (kind, default); kind is "float", "bool" or a tuple of allowed words
SCHEMA = {
    "vehicle.wheelbase": ("float", 2.7),
    "vehicle.cg_offset": ("float", 1.35),
    "path.kind": (("straight", "arc", "piecewise"), "straight"),
    "path.curvature": ("float", None),
    "path.heading": ("float", 0.0),
    "path.origin_x": ("float", 0.0),
    "path.origin_y": ("float", 0.0),
    "path.segments": ("str", None),
    "run.speed": ("float", None),
    "run.dt": ("float", 1e-3),
    "run.duration": ("float", 30.0),
    "run.frame": (("global", "path"), "global"),
    "controller.a": ("float", 0.0),
    "controller.lambda0": ("float", None),
    "controller.k1": ("float", None),
    "controller.k2": ("float", None),
    "controller.feedforward": ("bool", True),
    "controller.design_curvature": ("float", None),
    "controller.open_loop_delta_f": ("float", None),
    "initial.x": ("float", None),
    "initial.y": ("float", None),
    "initial.psi": ("float", None),
    "initial.e": ("float", None),
    "initial.theta": ("float", None),
}


class Config(dict):
    """Parsed key/value pairs that remember the source line of each key."""

    def __init__(self, values=None, lines=None, source="<config>"):
        super().__init__(values or {})
        self.lines = dict(lines or {})
        self.source = source

    def get_value(self, key):
        return self.get(key, SCHEMA[key][1])

    def line_of(self, key):
        return self.lines.get(key)

    def error(self, key, message):
        return ConfigError(message, line=self.line_of(key), key=key)

    def merged(self, overrides):
        out = Config(self, self.lines, self.source)
        for key, value in overrides.items():
            out[key] = coerce(key, value)
            out.lines.pop(key, None)
        return out


def coerce(key, raw, line=None):
    if key not in SCHEMA:
        raise ConfigError("unknown key", line=line, key=key)
    kind = SCHEMA[key][0]
    if not isinstance(raw, str):
        if kind == "float" and isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return float(raw)
        if kind == "bool" and isinstance(raw, bool):
            return raw
        raw = str(raw)
    text = raw.strip().strip('"').strip("'")
    if kind == "float":
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"expected a number, got {text!r}", line=line, key=key) from None
        if not math.isfinite(value):
            raise ConfigError(f"expected a finite number, got {text!r}", line=line, key=key)
        return value
    if kind == "bool":
        if text.lower() not in _BOOL:
            raise ConfigError(f"expected true/false, got {text!r}", line=line, key=key)
        return _BOOL[text.lower()]
    if kind == "str":
        return text
    if text not in kind:
        raise ConfigError(f"expected one of {', '.join(kind)}, got {text!r}", line=line, key=key)
    return text


def parse_config(text: str, source="<config>") -> Config:
    values, lines = {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"duplicate key (first on line {lines[key]})", line=number, key=key)
        values[key] = coerce(key, value, line=number)
        lines[key] = number
    return Config(values, lines, source)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def format_config(cfg) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in cfg.items())


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def _parse_segments(cfg, start, heading):
    """``straight:LENGTH`` and ``arc:CURVATURE:LENGTH`` items separated by ';'."""
    spec = cfg.get_value("path.segments")
    if not spec:
        raise cfg.error("path.segments", "piecewise path needs segments")
    segments = []
    for item in filter(None, (s.strip() for s in spec.split(";"))):
        parts = item.split(":")
        try:
            if parts[0] == "straight" and len(parts) == 2:
                seg = Straight(start, heading, float(parts[1]))
            elif parts[0] == "arc" and len(parts) == 3:
                seg = Arc.from_start(start, heading, float(parts[1]), float(parts[2]))
            else:
                raise ValueError(f"cannot read segment {item!r}")
        except ValueError as exc:
            raise cfg.error("path.segments", str(exc)) from None
        segments.append(seg)
        end = pose_at(seg, seg.length)
        start, heading = (end.x, end.y), heading + seg.curvature * seg.length
    try:
        return Piecewise(tuple(segments))
    except ValueError as exc:
        raise cfg.error("path.segments", str(exc)) from None


def build_path(cfg: Config):
    kind = cfg.get_value("path.kind")
    start = (cfg.get_value("path.origin_x"), cfg.get_value("path.origin_y"))
    heading = cfg.get_value("path.heading")
    if kind == "straight":
        return Straight(start, heading)
    if kind == "arc":
        kappa = cfg.get_value("path.curvature")
        if kappa is None or kappa == 0:
            raise cfg.error("path.curvature", "arc needs a nonzero curvature")
        return Arc.from_start(start, heading, kappa)
    return _parse_segments(cfg, start, heading)


def design_curvature(cfg: Config, path) -> float:
    value = cfg.get_value("controller.design_curvature")
    if value is not None:
        return value
    if isinstance(path, Arc):
        return path.curvature
    return 0.0


def build_gains(cfg: Config, speed, params, kappa) -> tuple[ControlGains, dict]:
    a = cfg.get_value("controller.a")
    lam = cfg.get_value("controller.lambda0")
    k1, k2 = cfg.get_value("controller.k1"), cfg.get_value("controller.k2")
    if lam is not None and (k1 is not None or k2 is not None):
        raise cfg.error("controller.lambda0", "give either lambda0 or k1/k2, not both")
    if lam is None:
        if k1 is None or k2 is None:
            if cfg.get_value("controller.open_loop_delta_f") is not None:
                return ControlGains(0.0, 0.0, a), {"gain_rule": "open_loop"}
            raise cfg.error("controller.k1", "need controller.lambda0 or both k1 and k2")
        return ControlGains(k1, k2, a), {"gain_rule": "explicit"}
    try:
        spec = PolePlacementSpec(lam)
    except ValueError as exc:
        raise cfg.error("controller.lambda0", str(exc)) from None
    if a == 1 and kappa == 0:
        log.warning(
            "a = 1 on a straight path has a structural root at 0; "
            "using k1 = -2*lambda0/V, k2 = 0"
        )
        return crab_gains(lam, speed), {"gain_rule": "crab", "lambda0": lam}
    try:
        gains = place_double_pole(spec, a, speed, params, kappa)
    except FourWSError as exc:
        raise cfg.error("controller.lambda0", str(exc)) from None
    return gains, {"gain_rule": "double_pole", "lambda0": lam}


def build_initial(cfg: Config, path) -> GlobalState:
    glob = [cfg.get_value(k) for k in ("initial.x", "initial.y", "initial.psi")]
    rel = [cfg.get_value(k) for k in ("initial.e", "initial.theta")]
    if any(v is not None for v in glob) and any(v is not None for v in rel):
        key = "initial.e" if rel[0] is not None else "initial.theta"
        raise cfg.error(key, "give either x/y/psi or e/theta, not both")
    if any(v is not None for v in rel):
        e, theta = (v if v is not None else 0.0 for v in rel)
        return from_path_frame(PathFrameState(0.0, e, theta), path)
    x, y, psi = (v if v is not None else 0.0 for v in glob)
    return GlobalState(x, y, psi)


def build_scenario(cfg: Config) -> tuple[Scenario, dict]:
    """Validated :class:`Scenario` plus run metadata (gain rule, lambda0, kappa)."""
    speed = cfg.get_value("run.speed")
    if speed is None:
        raise cfg.error("run.speed", "required")
    try:
        params = VehicleParams(cfg.get_value("vehicle.wheelbase"), cfg.get_value("vehicle.cg_offset"))
    except ValueError as exc:
        raise cfg.error("vehicle.wheelbase", str(exc)) from None
    path = build_path(cfg)
    kappa = design_curvature(cfg, path)
    if not speed > 0:
        raise cfg.error("run.speed", f"must be positive, got {speed}")
    gains, info = build_gains(cfg, speed, params, kappa)
    open_delta = cfg.get_value("controller.open_loop_delta_f")
    open_loop = None
    if open_delta is not None:
        open_loop = SteeringInput(open_delta, gains.a * open_delta)
    controller = ControllerConfig(gains, cfg.get_value("controller.feedforward"))
    dt, duration = cfg.get_value("run.dt"), cfg.get_value("run.duration")
    if not dt > 0:
        raise cfg.error("run.dt", f"must be positive, got {dt}")
    if not duration >= dt:
        raise cfg.error("run.duration", f"must be at least dt ({dt}), got {duration}")
    scenario = Scenario(
        params=params,
        path=path,
        speed=speed,
        controller=controller,
        initial=build_initial(cfg, path),
        dt=dt,
        duration=duration,
        frame=cfg.get_value("run.frame"),
        open_loop=open_loop,
    )
    info = dict(info, kappa=kappa)
    info.setdefault("lambda0", None)
    return scenario, info
