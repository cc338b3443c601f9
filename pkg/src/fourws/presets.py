"""Scenarios reproducing the published figures.

Vehicle: wheelbase 2.7 m, CG 1.35 m ahead of the rear axle. Low speed is
5 m/s on a 10 m radius, high speed 20 m/s on a 100 m radius.
"""
from __future__ import annotations

from dataclasses import dataclass, field

SIM_A_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0)
CHART_A_VALUES = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5)
CHART_KAPPAS = (0.0, 0.01, 0.1)
K_RANGE = (-1.0, 1.0)
RESOLUTION = 401

LOW = {"speed": 5.0, "kappa": 0.1, "offset": -5.0, "duration": 30.0}
HIGH = {"speed": 20.0, "kappa": 0.01, "offset": -10.0, "duration": 20.0}


@dataclass(frozen=True)
class ChartJob:
    label: str
    a: float
    speed: float
    kappa: float
    k1_range: tuple = K_RANGE
    k2_range: tuple = K_RANGE
    resolution: int = RESOLUTION
    lambda0s: tuple = (-1.0,)


@dataclass(frozen=True)
class SimPreset:
    name: str
    runs: tuple  # (label, config dict) pairs
    curved: bool
    title: str


@dataclass(frozen=True)
class SweepPreset:
    name: str
    base: dict
    a_values: tuple
    lambda0s: tuple
    feedforward: tuple = (True,)
    title: str = ""
    extra: dict = field(default_factory=dict)


def straight_config(speed, a, lambda0=-1.0, duration=None, **extra):
    cfg = {
        "path.kind": "straight",
        "run.speed": speed,
        "run.duration": duration or (LOW if speed <= 5 else HIGH)["duration"],
        "controller.a": a,
        "controller.lambda0": lambda0,
        "controller.feedforward": False,
        "initial.x": 0.0,
        "initial.y": 2.0,
        "initial.psi": 0.0,
    }
    cfg.update(extra)
    return cfg


def curved_config(regime, a, lambda0=-1.0, feedforward=True, **extra):
    cfg = {
        "path.kind": "arc",
        "path.curvature": regime["kappa"],
        "run.speed": regime["speed"],
        "run.duration": regime["duration"],
        "controller.a": a,
        "controller.lambda0": lambda0,
        "controller.feedforward": feedforward,
        "initial.e": regime["offset"],
        "initial.theta": 0.0,
    }
    cfg.update(extra)
    return cfg


def _tag(value):
    return f"{value:g}"


def chart_jobs(name):
    if name == "fig2":
        panels = (
            ("a", 5.0, (-1.5, -1.0, -0.5, 0.0)),
            ("b", 20.0, (-1.5, -1.0, -0.5)),
            ("c", 20.0, (0.0, 0.5, 1.0, 1.5)),
        )
        return [
            ChartJob(f"fig2{p}_a{_tag(a)}_V{_tag(v)}_k0", a, v, 0.0)
            for p, v, a_values in panels
            for a in a_values
        ]
    if name in ("fig3", "fig4"):
        v = 5.0 if name == "fig3" else 20.0
        return [
            ChartJob(f"{name}_a{_tag(a)}_V{_tag(v)}_k{_tag(k)}", a, v, k)
            for a in CHART_A_VALUES
            for k in CHART_KAPPAS
        ]
    raise KeyError(name)


def sim_preset(name) -> SimPreset:
    if name in ("fig6", "fig8"):
        v = 5.0 if name == "fig6" else 20.0
        runs = tuple((f"{name}_a{_tag(a)}", straight_config(v, a)) for a in SIM_A_VALUES)
        return SimPreset(name, runs, False, f"straight road, V = {v:g} m/s, λ0 = -1")
    if name in ("fig7", "fig9"):
        regime = LOW if name == "fig7" else HIGH
        runs = tuple((f"{name}_a{_tag(a)}", curved_config(regime, a)) for a in SIM_A_VALUES)
        return SimPreset(
            name,
            runs,
            True,
            f"curved road κ = {regime['kappa']:g} 1/m, V = {regime['speed']:g} m/s, FB+FF",
        )
    raise KeyError(name)


def sweep_presets(name):
    if name != "fig5":
        raise KeyError(name)
    return [
        SweepPreset("fig5a", straight_config(5.0, 0.0), SIM_A_VALUES, (-1.0, -2.0), (False,),
                    "V = 5 m/s, straight, FB"),
        SweepPreset("fig5b", curved_config(LOW, 0.0), SIM_A_VALUES, (-1.0, -2.0), (True,),
                    "V = 5 m/s, κ = 0.1, FB+FF"),
        SweepPreset("fig5c", straight_config(20.0, 0.0), SIM_A_VALUES, (-1.0, -2.0, -3.0), (False,),
                    "V = 20 m/s, straight, FB"),
        SweepPreset("fig5d", curved_config(HIGH, 0.0), SIM_A_VALUES, (-1.0, -2.0, -3.0), (True,),
                    "V = 20 m/s, κ = 0.01, FB+FF"),
    ]


CHART_PRESETS = ("fig2", "fig3", "fig4")
SIM_PRESETS = ("fig6", "fig7", "fig8", "fig9")
SWEEP_PRESETS = ("fig5",)
ALL_PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")
