"""Command-line entry point: ``fourws chart | gains | simulate | sweep | reproduce``.

Exit codes: 0 success, 2 invalid input, 3 runtime abort (a simulation hit the
steering guard or a model singularity, or output could not be written).
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import export, presets
from .config import SCHEMA, Config, build_scenario, load_config
from .errors import ConfigError, FourWSError, PlacementError
from .path import Piecewise, pose_at
from .sim import SimulationAborted, compute_metrics, run
from .stability import (
    PolePlacementSpec,
    boundary_curves,
    char_coeffs,
    closed_loop_matrix,
    eigenvalues,
    place_double_pole,
    sample_region,
)
from .vehicle_model import VehicleParams

log = logging.getLogger("fourws")

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3


class Aborted(Exception):
    """At least one work item failed at run time; outputs for the rest were written."""


# ---------------------------------------------------------------- chart


def chart(job: presets.ChartJob, params: VehicleParams, out_dir: Path, svg=False, workers=1):
    grid = sample_region(
        (*job.k1_range, job.resolution),
        (*job.k2_range, job.resolution),
        job.a,
        job.speed,
        params,
        job.kappa,
        workers=workers,
    )
    curves = boundary_curves(job.a, params, job.kappa, (job.k1_range, job.k2_range))
    points = []
    for lam in job.lambda0s:
        try:
            g = place_double_pole(PolePlacementSpec(lam), job.a, job.speed, params, job.kappa)
            points.append((lam, g.k1, g.k2, "ok"))
        except PlacementError:
            points.append((lam, None, None, "unplaceable"))
    meta = {
        "a": job.a,
        "V": job.speed,
        "f": params.wheelbase_f,
        "d": params.cg_offset_d,
        "kappa": job.kappa,
        "lambda0": ";".join(f"{lam:g}" for lam in job.lambda0s),
    }
    outputs = {
        out_dir / f"{job.label}.csv": export.chart_csv(grid, meta),
        out_dir / f"{job.label}_boundaries.csv": export.boundary_csv(curves, meta),
        out_dir / f"{job.label}_gains.csv": export.gain_points_csv(points, meta),
    }
    for path, text in outputs.items():
        export.write_text_atomic(path, text)
    if svg:
        from .plotting import plot_chart

        title = f"a = {job.a:g}, V = {job.speed:g} m/s, κ = {job.kappa:g} 1/m"
        plot_chart(grid, curves, points, out_dir / f"{job.label}.svg", title)
    return grid


def cmd_chart(args):
    params = VehicleParams(args.wheelbase, args.cg_offset)
    if args.preset:
        jobs = presets.chart_jobs(args.preset)
    else:
        jobs = [
            presets.ChartJob(
                args.label or f"chart_a{args.a:g}_V{args.speed:g}_k{args.kappa:g}",
                args.a,
                args.speed,
                args.kappa,
                tuple(args.k1_range),
                tuple(args.k2_range),
                args.resolution,
                tuple(args.lambda0 or (-1.0,)),
            )
        ]
    for job in jobs:
        if job.resolution < 2 or not job.speed > 0:
            raise ConfigError("resolution must be >= 2 and speed positive")
        chart(job, params, args.out, svg=args.svg, workers=args.workers)
        print(f"{job.label}: written to {args.out}")


# ---------------------------------------------------------------- gains


def gains_report(a, speed, kappa, lambda0, params):
    g = place_double_pole(PolePlacementSpec(lambda0), a, speed, params, kappa)
    p = char_coeffs(g, speed, params, kappa)
    ev = eigenvalues(closed_loop_matrix(g, speed, params, kappa))
    residual = abs(p.c1 + 2 * lambda0) + abs(p.c0 - lambda0**2)
    lines = [
        f"a = {a:g}, V = {speed:g} m/s, kappa = {kappa:g} 1/m, lambda0 = {lambda0:g} 1/s",
        f"k1 = {g.k1!r}",
        f"k2 = {g.k2!r}",
        f"k3 = {g.k3!r}",
        f"k4 = {g.k4!r}",
        "eigenvalues = " + ", ".join(f"{z.real:.12g}{z.imag:+.3g}j" for z in ev),
        f"residual |c1 + 2*lambda0| + |c0 - lambda0^2| = {residual:.3g}",
    ]
    return g, "\n".join(lines)


def cmd_gains(args):
    params = VehicleParams(args.wheelbase, args.cg_offset)
    _, text = gains_report(args.a, args.speed, args.kappa, args.lambda0, params)
    print(text)


# ---------------------------------------------------------------- simulate / sweep


def simulate_one(label, cfg):
    """Run one configuration; returns ``(metrics_row, trace_or_None)``.

    Invalid configurations raise; run-time aborts come back as a flagged row.
    """
    if not isinstance(cfg, Config):
        cfg = Config().merged(cfg)
    scenario, info = build_scenario(cfg)
    g = scenario.controller.gains
    info = dict(
        info,
        a=g.a,
        k1=g.k1,
        k2=g.k2,
        speed=scenario.speed,
        feedforward=scenario.controller.feedforward_enabled,
    )
    try:
        trace = run(scenario)
    except SimulationAborted as exc:
        log.warning("%s: %s", label, exc)
        return export.metrics_row(label, info, None, "aborted", str(exc)), None
    trace.meta.update(kappa=info["kappa"], lambda0=info["lambda0"], gain_rule=info["gain_rule"])
    return export.metrics_row(label, info, compute_metrics(trace)), trace


def _sweep_item(item):
    label, cfg = item
    try:
        row, _ = simulate_one(label, cfg)
    except ConfigError as exc:
        row = export.metrics_row(label, {"a": cfg.get("controller.a")}, None, "invalid", str(exc))
    return row


def _reference_polyline(path, traces):
    s_max = max(float(np.max(tr.s_C)) for tr in traces)
    if isinstance(path, Piecewise):
        s_max = min(s_max, path.length)
    pts = [pose_at(path, s) for s in np.linspace(0.0, max(s_max, 1.0), 400)]
    return [p.x for p in pts], [p.y for p in pts]


def simulate_many(name, runs, out_dir: Path, svg=False, curved=None, title=None):
    rows, done = [], []
    for label, cfg in runs:
        row, trace = simulate_one(label, cfg)
        rows.append(row)
        if trace is not None:
            done.append((label, trace))
    # all computation is finished before any file is written
    for label, trace in done:
        export.write_text_atomic(out_dir / f"{label}_trace.csv", export.trace_csv(trace))
    export.write_text_atomic(out_dir / f"{name}_metrics.csv", export.metrics_csv(rows))
    if svg and done:
        from .plotting import plot_traces

        scenario, _ = build_scenario(Config().merged(runs[0][1]))
        if curved is None:
            curved = not all(np.all(tr.kappa_C == 0) for _, tr in done)
        ref = _reference_polyline(scenario.path, [tr for _, tr in done]) if curved else None
        plot_traces(
            [tr for _, tr in done],
            [f"a = {tr.meta['a']:g}" for _, tr in done],
            out_dir / f"{name}.svg",
            curved=curved,
            reference=ref,
            title=title,
        )
    failed = [r for r in rows if r[8] != "ok"]
    if failed:
        raise Aborted(f"{len(failed)} of {len(rows)} runs aborted: " + "; ".join(r[0] for r in failed))
    return rows


def _overrides(args):
    out = {}
    for key in SCHEMA:
        value = getattr(args, _dest(key), None)
        if value is not None:
            out[key] = value
    return out


def _base_config(args):
    cfg = load_config(args.config) if args.config else Config()
    return cfg.merged(_overrides(args))


def cmd_simulate(args):
    if args.preset:
        preset = presets.sim_preset(args.preset)
        overrides = _overrides(args)
        runs = [(label, Config().merged({**cfg, **overrides})) for label, cfg in preset.runs]
        simulate_many(preset.name, runs, args.out, args.svg, preset.curved, preset.title)
    else:
        if not args.config:
            raise ConfigError("simulate needs a config file or --preset")
        cfg = _base_config(args)
        label = args.label or Path(args.config).stem
        # validate before running so bad configs exit with 2, not 3
        build_scenario(cfg)
        simulate_many(label, [(label, cfg)], args.out, args.svg)
    print(f"outputs written to {args.out}")


def sweep_rows(base, a_values, lambda0s, feedforward=(True,), workers=1, label="sweep"):
    """One metrics row per (a, lambda0, feedforward), in that nesting order."""
    items = []
    for a in a_values:
        for lam in lambda0s:
            for ff in feedforward:
                cfg = dict(base)
                cfg.update({"controller.a": a, "controller.lambda0": lam, "controller.feedforward": ff})
                cfg.pop("controller.k1", None)
                cfg.pop("controller.k2", None)
                tag = f"{label}_a{a:g}_l{lam:g}" + ("" if len(feedforward) == 1 else f"_ff{int(ff)}")
                items.append((tag, cfg))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_item, items))
    return [_sweep_item(item) for item in items]


def _parse_ff(text):
    return {"on": (True,), "off": (False,), "both": (True, False)}[text]


def cmd_sweep(args):
    jobs = []
    if args.preset:
        overrides = _overrides(args)
        for p in presets.sweep_presets(args.preset):
            jobs.append((p.name, {**p.base, **overrides}, p.a_values, p.lambda0s, p.feedforward, p.title))
    else:
        if not args.config:
            raise ConfigError("sweep needs a config file or --preset")
        base = dict(_base_config(args))
        if not args.a_list or not args.lambda0_list:
            raise ConfigError("sweep needs nonempty --a-list and --lambda0-list")
        label = args.label or Path(args.config).stem
        jobs.append((label, base, tuple(args.a_list), tuple(args.lambda0_list), _parse_ff(args.ff), label))

    results = []
    for name, base, a_values, lambda0s, ff, title in jobs:
        if args.preset and args.a_list:
            a_values = tuple(args.a_list)
        if args.preset and args.lambda0_list:
            lambda0s = tuple(args.lambda0_list)
        rows = sweep_rows(base, a_values, lambda0s, ff, workers=args.workers, label=name)
        results.append((name, rows, title))
    for name, rows, title in results:
        path = export.write_text_atomic(args.out / f"{name}_sweep.csv", export.metrics_csv(rows))
        if args.svg:
            from .plotting import plot_sweep

            plot_sweep(export.read_metrics(path), args.out / f"{name}_sweep.svg", title)
    print(f"outputs written to {args.out}")
    bad = [r[0] for _, rows, _ in results for r in rows if r[8] != "ok"]
    if bad:
        raise Aborted(f"{len(bad)} sweep rows flagged: " + ", ".join(bad))


def cmd_reproduce(args):
    names = presets.ALL_PRESETS if args.figure == "all" else (args.figure,)
    aborted = []
    for name in names:
        sub = argparse.Namespace(**vars(args))
        sub.preset, sub.config, sub.label = name, None, None
        sub.a_list = sub.lambda0_list = None
        try:
            if name in presets.CHART_PRESETS:
                cmd_chart(sub)
            elif name in presets.SWEEP_PRESETS:
                cmd_sweep(sub)
            else:
                cmd_simulate(sub)
        except Aborted as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            aborted.append(name)
    if aborted:
        raise Aborted("runtime aborts in " + ", ".join(aborted))


# ---------------------------------------------------------------- parser


def _dest(key):
    return "cfg__" + key.replace(".", "__")


def _add_config_flags(p):
    group = p.add_argument_group("scenario overrides (same keys as the config file)")
    for key in SCHEMA:
        group.add_argument(f"--{key}", dest=_dest(key), metavar="VALUE")


def _add_vehicle_flags(p):
    p.add_argument("--wheelbase", type=float, default=2.7)
    p.add_argument("--cg-offset", type=float, default=1.35)


def _add_output_flags(p):
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--svg", action="store_true", help="also render SVG figures")


def build_parser():
    parser = argparse.ArgumentParser(prog="fourws", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chart", help="stability chart in the (k1, k2) plane")
    p.add_argument("--preset", choices=presets.CHART_PRESETS)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--speed", type=float, default=5.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--k1-range", type=float, nargs=2, default=list(presets.K_RANGE), metavar=("MIN", "MAX"))
    p.add_argument("--k2-range", type=float, nargs=2, default=list(presets.K_RANGE), metavar=("MIN", "MAX"))
    p.add_argument("--resolution", type=int, default=presets.RESOLUTION)
    p.add_argument("--lambda0", type=float, action="append", help="repeat for several points")
    p.add_argument("--label")
    p.add_argument("--workers", type=int, default=1)
    _add_vehicle_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("gains", help="double-pole gains with verification")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--speed", type=float, required=True)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--lambda0", type=float, default=-1.0)
    _add_vehicle_flags(p)
    p.set_defaults(func=cmd_gains)

    p = sub.add_parser("simulate", help="closed-loop simulation")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset", choices=presets.SIM_PRESETS)
    p.add_argument("--label")
    _add_output_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="metrics over a grid of a and lambda0")
    p.add_argument("config", nargs="?")
    p.add_argument("--preset", choices=presets.SWEEP_PRESETS)
    p.add_argument("--a-list", type=float, nargs="+")
    p.add_argument("--lambda0-list", type=float, nargs="+")
    p.add_argument("--ff", choices=("on", "off", "both"), default="on")
    p.add_argument("--label")
    p.add_argument("--workers", type=int, default=1)
    _add_output_flags(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="run a figure preset through its subcommand")
    p.add_argument("figure", choices=presets.ALL_PRESETS + ("all",))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ff", default="on")
    _add_vehicle_flags(p)
    _add_output_flags(p)
    for key in SCHEMA:
        p.set_defaults(**{_dest(key): None})
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (ConfigError, PlacementError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Aborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (FourWSError, OSError) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
