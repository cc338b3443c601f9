"""SVG figures rendered from the same data written to CSV."""
from __future__ import annotations

import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

log = logging.getLogger(__name__)

# fixed salt and no date stamp keep repeated renders byte-identical
plt.rcParams["svg.hashsalt"] = "fourws"
_SVG_META = {"Date": None}

_REGION_CMAP = ListedColormap(["#ffffff", "#9ecae1", "#636363"])


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    plt.close(fig)
    log.info("wrote %s", path)
    return path


def plot_chart(grid, curves, gain_points, path, title=None):
    """Stable region raster with boundary lines and placed-gain markers."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    extent = [grid.k1[0], grid.k1[-1], grid.k2[0], grid.k2[-1]]
    ax.imshow(
        grid.cells.T,
        origin="lower",
        extent=extent,
        aspect="auto",
        cmap=_REGION_CMAP,
        vmin=0,
        vmax=2,
        interpolation="nearest",
    )
    styles = {"c1": ("tab:red", "-"), "c0": ("tab:green", "--")}
    for name, pts in curves.items():
        color, ls = styles.get(name, ("k", ":"))
        ax.plot(pts[:, 0], pts[:, 1], color=color, ls=ls, lw=1.2, label=f"{name} = 0")
    for lam, k1, k2, status in gain_points:
        if status == "ok":
            ax.plot(k1, k2, "o", ms=6, mfc="none", mec="k")
            ax.annotate(f"λ0={lam:g}", (k1, k2), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlim(extent[:2])
    ax.set_ylim(extent[2:])
    ax.set_xlabel("$k_1$ [rad/m]")
    ax.set_ylabel("$k_2$ [-]")
    if title:
        ax.set_title(title, fontsize=10)
    if curves:
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


_STRAIGHT_PANELS = (
    ("y_R", "lateral position [m]"),
    ("a_lat", "lateral acceleration [m/s²]"),
    ("delta_f", "front steering [rad]"),
    ("delta_r", "rear steering [rad]"),
)
_CURVED_PANELS = (
    ("e_C", "lateral error [m]"),
    ("theta_C", "yaw angle error [rad]"),
    (None, "trajectory"),
    ("delta_f", "front steering [rad]"),
    ("delta_r", "rear steering [rad]"),
    ("a_lat", "lateral acceleration [m/s²]"),
)


def plot_traces(traces, labels, path, curved=False, reference=None, title=None):
    """Overlay traces panel by panel; ``reference`` is an (x, y) polyline."""
    panels = _CURVED_PANELS if curved else _STRAIGHT_PANELS
    ncols = 3 if curved else 2
    nrows = int(np.ceil(len(panels) / ncols))
    fig, axes = plt.subplots(nrows, ncols, figsize=(4 * ncols, 3 * nrows))
    for ax, (column, ylabel) in zip(axes.flat, panels):
        for tr, label in zip(traces, labels):
            if column is None:
                ax.plot(tr.x_R, tr.y_R, lw=1, label=label)
            else:
                ax.plot(tr.t, getattr(tr, column), lw=1, label=label)
        if column is None:
            if reference is not None:
                ax.plot(*reference, "k--", lw=0.8)
            ax.set_aspect("equal", adjustable="datalim")
            ax.set_xlabel("x [m]")
            ax.set_ylabel("y [m]")
        else:
            ax.set_xlabel("t [s]")
            ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3)
    axes.flat[0].legend(fontsize=7)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(rows, path, title=None):
    """Max lateral acceleration against a, one line per (lambda0, feedforward)."""
    series = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        key = (float(row["lambda0"]), row["feedforward"])
        series.setdefault(key, []).append((float(row["a"]), float(row["max_abs_lat_accel"])))
    fig, ax = plt.subplots(figsize=(5, 4))
    for (lam, ff), pts in sorted(series.items()):
        pts.sort()
        tag = "FB+FF" if ff == "true" else "FB"
        ax.plot(*zip(*pts), "o-", label=f"λ0={lam:g} ({tag})")
    ax.set_xlabel("a [-]")
    ax.set_ylabel("max |a_lat| [m/s²]")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    if series:
        ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    return _save(fig, path)
