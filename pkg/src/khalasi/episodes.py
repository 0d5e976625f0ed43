"""Episode lifecycle: spawn sampling, the flow -> window -> reconstruction ->
observation -> policy -> vehicle -> reward loop, termination, and records.

Episodes are pure functions of (config, policy behavior): the seed fixes the
flow initialization (street spin-up phase or gyre time offset) and the
start/goal draw, so identical inputs give bit-identical records.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import ProtocolError, SpawnError
from .flows.base import FlowField, Rect
from .observations import build_observation
from .presets import EnvPreset, SpawnLayout, get_preset
from .recon import FlowSampleWindow, reconstruct, zero_recon_grid
from .rewards import reward_step
from .vehicle import VehicleState, clamp_action, step_vehicle

OUTCOMES = ("success", "timeout", "out_of_bounds", "aborted")

TRAJECTORY_COLUMNS = ("t", "x", "y", "theta", "u_x", "u_y", "a_l", "a_r",
                      "energy_cum", "energy_sq_cum")
REWARD_COLUMNS = ("r_target", "r_dist", "r_thrust", "r_surf", "r_jitter", "reward_total")


def derive_seed(base: int, *parts) -> int:
    """Stable 64-bit seed from a base seed and arbitrary labels."""
    h = hashlib.sha256(repr((int(base),) + tuple(str(p) for p in parts)).encode())
    return int.from_bytes(h.digest()[:8], "little")


class TimeShiftedField(FlowField):
    """View of a field with its clock offset; used for seeded gyre phases."""

    def __init__(self, inner: FlowField, t0: float):
        self.inner = inner
        self.t0 = float(t0)

    @property
    def is_static(self) -> bool:  # type: ignore[override]
        return self.inner.is_static

    def velocity(self, pos, t: float) -> np.ndarray:
        return self.inner.velocity(pos, t + self.t0)

    def bounds(self) -> Rect:
        return self.inner.bounds()

    def max_speed(self) -> float:
        return self.inner.max_speed()


# ---------------------------------------------------------------------------
# spawning

def grid_points(layout: SpawnLayout) -> list[tuple[float, float]]:
    """Cell-center lattice of a grid layout (row-major, y fastest)."""
    if layout.kind != "grid10":
        raise ValueError("grid_points applies to grid layouts only")
    region = layout.agent_regions[0]
    gx, gy = layout.grid_shape
    pts = []
    for i in range(gx):
        for j in range(gy):
            pts.append((region.x0 + (i + 0.5) * region.width / gx,
                        region.y0 + (j + 0.5) * region.height / gy))
    return pts


def _sample_regions(regions: tuple[Rect, ...], rng) -> np.ndarray:
    areas = np.array([r.width * r.height for r in regions])
    idx = int(rng.choice(len(regions), p=areas / areas.sum())) if len(regions) > 1 else 0
    r = regions[idx]
    return np.array([rng.uniform(r.x0, r.x1), rng.uniform(r.y0, r.y1)])


def spawn(layout: SpawnLayout, rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw (start, goal) for a layout; uniform within its regions."""
    if layout.kind in ("vertical", "l_shaped"):
        return _sample_regions(layout.agent_regions, rng), _sample_regions(layout.goal_regions, rng)
    if layout.kind == "grid10":
        pts = grid_points(layout)
        start = np.array(pts[int(rng.integers(0, len(pts)))])
        return start, np.array(layout.goal_point, dtype=float)
    if layout.kind == "pair_min_dist":
        for _ in range(10_000):
            a = _sample_regions(layout.agent_regions, rng)
            g = _sample_regions(layout.goal_regions, rng)
            if np.linalg.norm(a - g) >= layout.min_separation:
                return a, g
        raise SpawnError(
            f"no pair at separation >= {layout.min_separation} within 10^4 draws")
    raise SpawnError(f"unknown spawn layout kind {layout.kind!r}")


# ---------------------------------------------------------------------------
# records

@dataclass
class EpisodeConfig:
    env: str | EnvPreset
    layout: str = "vertical"
    seed: int = 0
    step_limit: int = 1500
    window_capacity: int = 55
    start: tuple[float, float] | None = None   # explicit spawn overrides layout
    goal: tuple[float, float] | None = None

    def preset(self) -> EnvPreset:
        return get_preset(self.env) if isinstance(self.env, str) else self.env


@dataclass
class EpisodeRecord:
    seed: int
    env: str
    layout: str
    start: np.ndarray
    goal: np.ndarray
    flow_offset: float
    outcome: str
    steps: int
    total_energy: float
    total_energy_sq: float
    total_reward: float
    rows: np.ndarray = dc_field(repr=False, default=None)      # (steps, 10)
    reward_rows: np.ndarray = dc_field(repr=False, default=None)  # (steps, 6)

    @property
    def actions(self) -> np.ndarray:
        return self.rows[:, 6:8] if len(self.rows) else np.zeros((0, 2))

    def identical(self, other: "EpisodeRecord") -> bool:
        """Bit-exact comparison (used by the determinism contract)."""
        return (
            (self.seed, self.env, self.layout, self.outcome, self.steps) ==
            (other.seed, other.env, other.layout, other.outcome, other.steps)
            and self.flow_offset == other.flow_offset
            and self.total_energy == other.total_energy
            and self.total_energy_sq == other.total_energy_sq
            and self.total_reward == other.total_reward
            and np.array_equal(self.start, other.start)
            and np.array_equal(self.goal, other.goal)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.reward_rows, other.reward_rows)
        )

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "env": self.env,
            "layout": self.layout,
            "start": [float(v) for v in self.start],
            "goal": [float(v) for v in self.goal],
            "flow_offset": self.flow_offset,
            "outcome": self.outcome,
            "steps": self.steps,
            "total_energy": self.total_energy,
            "total_energy_sq": self.total_energy_sq,
            "total_reward": self.total_reward,
        }

    def write_csv(self, path, include_rewards: bool = True) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            cols = TRAJECTORY_COLUMNS + (REWARD_COLUMNS if include_rewards else ())
            writer.writerow(cols)
            for i in range(self.steps):
                row = [repr(float(x)) for x in self.rows[i]]
                if include_rewards:
                    row += [repr(float(x)) for x in self.reward_rows[i]]
                writer.writerow(row)

    def write_summary(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# the loop

def _episode_context(cfg: EpisodeConfig):
    """Field, start, goal, and flow offset for a config (seeded)."""
    preset = cfg.preset()
    rng = np.random.default_rng(cfg.seed)
    if preset.kind == "vortex":
        phase = int(rng.integers(0, 2 * preset.flow_params.shed_period))
        field = preset.make_field(extra_warmup=phase)
        offset = float(phase)
    elif preset.kind == "gyre":
        offset = float(rng.uniform(0.0, preset.flow_params.time_scale))
        field = TimeShiftedField(preset.make_field(), offset)
    else:
        offset = 0.0
        field = preset.make_field()
    if cfg.start is not None and cfg.goal is not None:
        start, goal = np.asarray(cfg.start, dtype=float), np.asarray(cfg.goal, dtype=float)
    else:
        layout = preset.layouts.get(cfg.layout)
        if layout is None:
            raise SpawnError(f"preset {preset.name!r} has no layout {cfg.layout!r}")
        start, goal = spawn(layout, rng)
    return preset, field, start, goal, offset


def run_episode(cfg: EpisodeConfig, policy) -> EpisodeRecord:
    preset, field, start, goal, offset = _episode_context(cfg)
    bounds = field.bounds()
    eps = preset.reward.target_radius

    policy.reset(cfg.seed)
    if hasattr(policy, "bind_episode"):
        policy.bind_episode(field, start, goal, 0.0)

    state = VehicleState(x=float(start[0]), y=float(start[1]))
    window = FlowSampleWindow(cfg.window_capacity)
    a_prev = (0.0, 0.0)
    rows, reward_rows = [], []
    total_reward = 0.0
    outcome = "timeout"
    is_external = hasattr(policy, "push_reward")

    if float(np.linalg.norm(start - goal)) < eps:
        outcome = "success"
        steps = 0
    else:
        steps = 0
        for k in range(cfg.step_limit):
            t = float(k)
            v_meas = np.asarray(field.velocity(state.p, t), dtype=float)
            window.push(state.p, t, v_meas)
            if policy.needs_maps:
                recon = reconstruct(window, preset.gpr, state.p, t,
                                    extent=preset.recon_extent)
            else:
                recon = zero_recon_grid(state.p, t, extent=preset.recon_extent)
            obs = build_observation(recon, state, goal, v_meas)
            try:
                action = clamp_action(policy.act(obs))
            except ProtocolError:
                outcome = "aborted"
                break
            new_state = step_vehicle(state, action, field, t, preset.vehicle)
            ground_speed = float(np.linalg.norm(new_state.p - state.p)) / preset.vehicle.dt
            rb = reward_step(preset.reward, state.p, new_state.p, goal,
                             action, a_prev, ground_speed,
                             float(np.linalg.norm(v_meas)))
            if is_external:
                policy.push_reward(rb.total)
            total_reward += rb.total
            steps += 1
            rows.append((t + preset.vehicle.dt, new_state.x, new_state.y,
                         new_state.theta, new_state.ux, new_state.uy,
                         action[0], action[1], new_state.energy, new_state.energy_sq))
            reward_rows.append(rb.as_tuple())
            state = new_state
            a_prev = action
            if float(np.linalg.norm(state.p - goal)) < eps:
                outcome = "success"
                break
            if not bool(bounds.contains(state.p)):
                outcome = "out_of_bounds"
                break

    record = EpisodeRecord(
        seed=cfg.seed,
        env=preset.name,
        layout=cfg.layout,
        start=np.asarray(start, dtype=float),
        goal=np.asarray(goal, dtype=float),
        flow_offset=offset,
        outcome=outcome,
        steps=steps,
        total_energy=state.energy,
        total_energy_sq=state.energy_sq,
        total_reward=total_reward,
        rows=np.array(rows) if rows else np.zeros((0, len(TRAJECTORY_COLUMNS))),
        reward_rows=np.array(reward_rows) if reward_rows else np.zeros((0, len(REWARD_COLUMNS))),
    )
    if hasattr(policy, "end_episode"):
        policy.end_episode(outcome, steps, state.energy, total_reward)
    return record


def replay_record(cfg: EpisodeConfig, record: EpisodeRecord) -> np.ndarray:
    """Re-run a record's actions through the dynamics; returns (steps, 2)
    positions for trajectory audits."""
    preset, field, start, _, _ = _episode_context(cfg)
    state = VehicleState(x=float(start[0]), y=float(start[1]))
    out = []
    for k in range(record.steps):
        state = step_vehicle(state, record.actions[k], field, float(k), preset.vehicle)
        out.append((state.x, state.y))
    return np.array(out) if out else np.zeros((0, 2))
