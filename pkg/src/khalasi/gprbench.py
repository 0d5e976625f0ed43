"""Reconstruction-quality benchmark: sweep the measurement-window size and
score the reconstructed maps against the true field along a scripted
sensor track.

The track is a drifting loop: the sensor circles at a radius of a few
spatial length scales while its center crawls across the domain.  Loops
make history length matter both ways: a short window sees only an arc of
the loop (poor coverage), while a very long one keeps samples from earlier
laps at the same places but stale times, which bias the fit once the flow
has moved on.  For each window size the benchmark replays the same track,
reconstructs at several late eval steps, and reports the mean and standard
deviation of the map MAE.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .presets import EnvPreset, get_preset
from .recon import FlowSampleWindow, mae_vs_truth, reconstruct


@dataclass(frozen=True)
class SweepPoint:
    window_size: int
    mae_mean: float
    mae_std: float


LOOP_PERIOD = 45        # steps per sensor lap
DRIFT_PER_LAP = 0.5     # lap-center advance as a fraction of the loop radius


def dummy_trajectory(preset: EnvPreset, n_steps: int, seed: int = 0) -> np.ndarray:
    """(n_steps, 2) scripted sensor positions inside the preset's bounds.

    Consecutive laps overlap (the center advances half a radius per lap), so
    a long window holds stale measurements at places the grid still covers.
    """
    b = preset.bounds()
    rng = np.random.default_rng(seed)
    radius = 1.5 * preset.gpr.space_scale
    margin = radius * 1.4
    k = np.arange(n_steps)
    drift = DRIFT_PER_LAP * radius / LOOP_PERIOD
    cx = b.x0 + margin + drift * k
    cy = np.full(n_steps, b.y0 + b.height * rng.uniform(0.42, 0.58))
    phase = rng.uniform(0.0, 2.0 * np.pi)
    x = cx + radius * np.cos(2.0 * np.pi * k / LOOP_PERIOD + phase)
    y = cy + radius * np.sin(2.0 * np.pi * k / LOOP_PERIOD + phase)
    return np.stack([np.clip(x, b.x0, b.x1), np.clip(y, b.y0, b.y1)], axis=-1)


def window_sweep_mae(env: str | EnvPreset, windows=(5, 15, 25, 35, 45, 55, 65, 75),
                     n_eval: int = 10, eval_stride: int = 12,
                     seed: int = 0) -> dict[int, tuple[float, float]]:
    """MAE stats per window size on the shared dummy track.

    Every window size sees the same measurements and the same eval steps, so
    differences isolate the history length.
    """
    preset = get_preset(env) if isinstance(env, str) else env
    field = preset.make_field()
    horizon = max(windows) + n_eval * eval_stride + 1
    track = dummy_trajectory(preset, horizon, seed=seed)
    measurements = [np.asarray(field.velocity(track[k], float(k)), dtype=float)
                    for k in range(horizon)]
    eval_steps = [max(windows) + (i + 1) * eval_stride for i in range(n_eval)]

    out: dict[int, tuple[float, float]] = {}
    for w in windows:
        window = FlowSampleWindow(int(w))
        maes = []
        next_eval = 0
        for k in range(horizon):
            window.push(track[k], float(k), measurements[k])
            if next_eval < len(eval_steps) and k == eval_steps[next_eval]:
                grid = reconstruct(window, preset.gpr, track[k], float(k),
                                   extent=preset.recon_extent)
                mae, _ = mae_vs_truth(grid, field, float(k))
                maes.append(mae)
                next_eval += 1
        out[int(w)] = (float(np.mean(maes)), float(np.std(maes)))
    return out


def write_sweep_csv(path, result: dict[int, tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("window_size", "mae_mean", "mae_std"))
        for w in sorted(result):
            mean, std = result[w]
            writer.writerow((w, repr(mean), repr(std)))
