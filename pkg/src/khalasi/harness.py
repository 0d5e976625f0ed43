"""Batch experiment runner: cells of (environment, spawn layout, policy),
seeded deterministically, with CSV/JSON artifacts and paired energy
comparisons.

Seeds derive from a stable hash of (base, cell, repeat), so adding cells
never perturbs existing ones, and aggregation sorts by key so worker
scheduling cannot change an artifact byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .episodes import EpisodeConfig, EpisodeRecord, derive_seed, grid_points, run_episode
from .errors import KhalasiError
from .policies import make_builtin_policy
from .presets import get_preset


@dataclass(frozen=True)
class CellSpec:
    env: str
    layout: str
    policy: str                      # "builtin:<name>" or "exec:<command>"

    @property
    def key(self) -> str:
        return f"{self.env}|{self.layout}|{self.policy}"


@dataclass
class ExperimentSpec:
    cells: list[CellSpec]
    episodes_per_cell: int = 20
    grid_repeats: int = 5            # repeats per grid spawn point
    seed_base: int = 0
    out_dir: str | Path = "out"
    workers: int = 1
    step_limit: int = 1500
    write_episode_csvs: bool = True
    policy_timeout: float = 10.0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        cells = [CellSpec(**c) for c in d["cells"]]
        rest = {k: v for k, v in d.items() if k != "cells"}
        unknown = set(rest) - {f for f in cls.__dataclass_fields__ if f != "cells"}
        if unknown:
            raise KhalasiError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(cells=cells, **rest)


@dataclass
class CellStats:
    cell: CellSpec
    episodes: int = 0
    successes: int = 0
    timeouts: int = 0
    out_of_bounds: int = 0
    aborted: int = 0
    energy_mean: float = float("nan")
    energy_std: float = float("nan")
    records: list = field(default_factory=list, repr=False)

    @property
    def counted(self) -> int:
        """Episodes that entered the success-rate denominator."""
        return self.episodes - self.aborted

    @property
    def success_rate(self) -> float:
        return self.successes / self.counted if self.counted else float("nan")

    def summary(self) -> dict:
        return {
            "env": self.cell.env,
            "layout": self.cell.layout,
            "policy": self.cell.policy,
            "episodes": self.episodes,
            "successes": self.successes,
            "timeouts": self.timeouts,
            "out_of_bounds": self.out_of_bounds,
            "aborted": self.aborted,
            "success_rate": self.success_rate,
            "energy_mean": self.energy_mean,
            "energy_std": self.energy_std,
        }


def _make_policy(spec: str, preset, timeout: float):
    if spec.startswith("builtin:"):
        return make_builtin_policy(spec[len("builtin:"):], preset)
    if spec.startswith("exec:"):
        from .bridge import ExternalPolicy
        return ExternalPolicy(command=spec[len("exec:"):], timeout=timeout)
    raise KhalasiError(f"unknown policy spec {spec!r}; use builtin:<name> or exec:<cmd>")


def _episode_jobs(spec: ExperimentSpec):
    """Yield (cell, label, seed, start, goal) for every episode, in stable order."""
    for cell in spec.cells:
        preset = get_preset(cell.env)
        layout = preset.layouts.get(cell.layout)
        if layout is None:
            raise KhalasiError(f"preset {cell.env!r} has no layout {cell.layout!r}")
        if cell.layout == "grid10":
            for idx, point in enumerate(grid_points(layout)):
                for rep in range(spec.grid_repeats):
                    seed = derive_seed(spec.seed_base, cell.key, idx, rep)
                    yield cell, f"g{idx:03d}r{rep}", seed, point, layout.goal_point
        else:
            for rep in range(spec.episodes_per_cell):
                seed = derive_seed(spec.seed_base, cell.key, rep)
                yield cell, f"e{rep:04d}", seed, None, None


def _run_one(args) -> tuple[str, str, EpisodeRecord]:
    cell, label, seed, start, goal, step_limit, timeout = args
    preset = get_preset(cell.env)
    cfg = EpisodeConfig(env=preset, layout=cell.layout, seed=seed,
                        step_limit=step_limit, start=start, goal=goal)
    policy = _make_policy(cell.policy, preset, timeout)
    try:
        record = run_episode(cfg, policy)
    finally:
        policy.close()
    return cell.key, label, record


def run_experiment(spec: ExperimentSpec) -> dict[str, CellStats]:
    """Run every cell and write summary.json, cells.csv, heatmap.csv, and
    per-episode trajectory CSVs under spec.out_dir."""
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(cell, label, seed, start, goal, spec.step_limit, spec.policy_timeout)
            for cell, label, seed, start, goal in _episode_jobs(spec)]

    results: dict[tuple[str, str], tuple[CellSpec, EpisodeRecord]] = {}
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for (key, label, record), job in zip(pool.map(_run_one, jobs), jobs):
                results[(key, label)] = (job[0], record)
    else:
        for job in jobs:
            key, label, record = _run_one(job)
            results[(key, label)] = (job[0], record)

    stats: dict[str, CellStats] = {}
    for (key, label) in sorted(results):
        cell, record = results[(key, label)]
        cs = stats.setdefault(key, CellStats(cell=cell))
        cs.episodes += 1
        if record.outcome == "success":
            cs.successes += 1
        elif record.outcome == "timeout":
            cs.timeouts += 1
        elif record.outcome == "out_of_bounds":
            cs.out_of_bounds += 1
        else:
            cs.aborted += 1
        cs.records.append((label, record))

    for cs in stats.values():
        energies = [r.total_energy for _, r in cs.records if r.outcome == "success"]
        if energies:
            cs.energy_mean = float(np.mean(energies))
            cs.energy_std = float(np.std(energies))

    total = sum(cs.episodes for cs in stats.values())
    aborted = sum(cs.aborted for cs in stats.values())
    if total and aborted / total > 0.10:
        raise KhalasiError(f"{aborted}/{total} episodes aborted; experiment unusable")

    _write_artifacts(spec, stats, out_dir)
    return stats


def _write_artifacts(spec: ExperimentSpec, stats: dict[str, CellStats], out_dir: Path) -> None:
    summary = {
        "seed_base": spec.seed_base,
        "episodes_per_cell": spec.episodes_per_cell,
        "grid_repeats": spec.grid_repeats,
        "cells": [stats[k].summary() for k in sorted(stats)],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    lines = ["env,layout,policy,episodes,successes,timeouts,out_of_bounds,aborted,"
             "success_rate,energy_mean,energy_std"]
    for key in sorted(stats):
        s = stats[key].summary()
        lines.append(",".join(repr(s[c]) if isinstance(s[c], float) else str(s[c])
                              for c in ("env", "layout", "policy", "episodes", "successes",
                                        "timeouts", "out_of_bounds", "aborted",
                                        "success_rate", "energy_mean", "energy_std")))
    (out_dir / "cells.csv").write_text("\n".join(lines) + "\n")

    heat_lines = ["env,policy,x,y,success_rate,mean_energy"]
    for key in sorted(stats):
        cs = stats[key]
        if cs.cell.layout != "grid10":
            continue
        by_point: dict[tuple[float, float], list[EpisodeRecord]] = {}
        for _, rec in cs.records:
            by_point.setdefault((float(rec.start[0]), float(rec.start[1])), []).append(rec)
        for (x, y) in sorted(by_point):
            recs = by_point[(x, y)]
            wins = [r for r in recs if r.outcome == "success"]
            rate = len(wins) / len(recs)
            mean_e = float(np.mean([r.total_energy for r in wins])) if wins else float("nan")
            heat_lines.append(f"{cs.cell.env},{cs.cell.policy},{x!r},{y!r},{rate!r},{mean_e!r}")
    if len(heat_lines) > 1:
        (out_dir / "heatmap.csv").write_text("\n".join(heat_lines) + "\n")

    if spec.write_episode_csvs:
        ep_dir = out_dir / "episodes"
        ep_dir.mkdir(exist_ok=True)
        for key in sorted(stats):
            cs = stats[key]
            tag = key.replace("|", "_").replace(":", "-").replace("/", "-")
            for label, rec in cs.records:
                rec.write_csv(ep_dir / f"{tag}_{label}.csv")
                rec.write_summary(ep_dir / f"{tag}_{label}.json")


@dataclass
class PairedComparison:
    n_pairs: int
    mean_a: float
    mean_b: float
    mean_efficiency: float           # (mean_b - mean_a) / mean_b
    per_seed_delta: dict

    def summary(self) -> dict:
        return {"n_pairs": self.n_pairs, "mean_a": self.mean_a, "mean_b": self.mean_b,
                "mean_efficiency": self.mean_efficiency}


def compare_energy(records_a, records_b) -> PairedComparison:
    """Paired energy comparison over seeds where both runs succeeded.

    ``mean_efficiency`` is the fraction of B's mean energy that A saves,
    (mean_b - mean_a) / mean_b.
    """
    a_by_seed = {r.seed: r for r in records_a if r.outcome == "success"}
    b_by_seed = {r.seed: r for r in records_b if r.outcome == "success"}
    shared = sorted(set(a_by_seed) & set(b_by_seed))
    if not shared:
        raise KhalasiError("no seeds where both record sets succeeded")
    ea = np.array([a_by_seed[s].total_energy for s in shared])
    eb = np.array([b_by_seed[s].total_energy for s in shared])
    mean_a, mean_b = float(ea.mean()), float(eb.mean())
    return PairedComparison(
        n_pairs=len(shared),
        mean_a=mean_a,
        mean_b=mean_b,
        mean_efficiency=(mean_b - mean_a) / mean_b,
        per_seed_delta={int(s): float(b_by_seed[s].total_energy - a_by_seed[s].total_energy)
                        for s in shared},
    )
