"""Non-interactive figure export (SVG) from harness CSV artifacts."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_heatmap(heatmap_csv, out_svg, value: str = "success_rate") -> Path:
    """Render grid-spawn statistics as a colored scatter per (env, policy)."""
    rows = _read_csv(heatmap_csv)
    if not rows:
        raise ValueError(f"no rows in {heatmap_csv}")
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r.get("env", ""), r.get("policy", "")), []).append(r)

    fig, axes = plt.subplots(1, len(groups), squeeze=False,
                             figsize=(6 * len(groups), 3.2))
    for ax, ((env, policy), rs) in zip(axes[0], sorted(groups.items())):
        x = np.array([float(r["x"]) for r in rs])
        y = np.array([float(r["y"]) for r in rs])
        v = np.array([float(r[value]) for r in rs])
        sc = ax.scatter(x, y, c=v, s=60, cmap="viridis", marker="s")
        ax.set_title(f"{env} / {policy}")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.colorbar(sc, ax=ax, label=value)
    fig.tight_layout()
    out_svg = Path(out_svg)
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    return out_svg


def plot_trajectory(trajectory_csv, out_svg, env=None, color_by: str = "energy_cum") -> Path:
    """Render one episode trajectory, optionally over the flow at t=0."""
    rows = _read_csv(trajectory_csv)
    if not rows:
        raise ValueError(f"no rows in {trajectory_csv}")
    x = np.array([float(r["x"]) for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    c = np.array([float(r[color_by]) for r in rows])

    fig, ax = plt.subplots(figsize=(7, 3.2))
    if env is not None:
        from .presets import get_preset

        preset = get_preset(env) if isinstance(env, str) else env
        field = preset.make_field()
        b = field.bounds()
        xs = np.linspace(b.x0, b.x1, 30)
        ys = np.linspace(b.y0, b.y1, 12)
        grid = np.stack(np.meshgrid(xs, ys), axis=-1)
        vel = field.velocity(grid.reshape(-1, 2), 0.0).reshape(grid.shape)
        if np.abs(vel).max() > 0:
            ax.quiver(grid[..., 0], grid[..., 1], vel[..., 0], vel[..., 1],
                      color="0.7", width=0.002)
        ax.set_xlim(b.x0, b.x1)
        ax.set_ylim(b.y0, b.y1)
    sc = ax.scatter(x, y, c=c, s=6, cmap="plasma")
    ax.plot(x[0], y[0], "g^", label="start")
    ax.plot(x[-1], y[-1], "r*", label="end")
    ax.legend(loc="upper right", fontsize=8)
    fig.colorbar(sc, ax=ax, label=color_by)
    fig.tight_layout()
    out_svg = Path(out_svg)
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    return out_svg
