"""Built-in baseline policies behind the uniform act/reset interface.

Policies that don't consume the reconstructed maps advertise
``needs_maps = False`` so the episode loop can skip the GP solve.  Baselines
with privileged access (the plan-tracking controller knows the whole flow
field) receive it through ``bind_episode``, which the episode loop calls
when present.
"""

from __future__ import annotations

import math

import numpy as np

from .observations import Observation
from .planning import PlanGrid, astar_dynamic, dijkstra_oracle
from .presets import EnvPreset
from .vehicle import wrap_angle


class Policy:
    """Interface: act(Observation) -> (a_l, a_r) in [-1, 1]^2."""

    needs_maps: bool = True

    def reset(self, seed: int) -> None:  # noqa: ARG002 - stateless default
        return None

    def act(self, obs: Observation) -> tuple[float, float]:
        raise NotImplementedError

    def close(self) -> None:
        return None


class DriftPolicy(Policy):
    """Zero thrust; the energy floor and protocol smoke baseline."""

    needs_maps = False

    def act(self, obs: Observation) -> tuple[float, float]:
        return (0.0, 0.0)


class GreedyPolicy(Policy):
    """Proportional controller steering straight for the goal.

    Common-mode command scales with distance (saturating at full thrust far
    out), differential command with heading error; both thrusters clamp to
    [-1, 1], so a heading error of pi commands a full turn in place.
    """

    needs_maps = False

    def __init__(self, k_v: float = 1.0, k_theta: float = 1.0, d_slow: float = 20.0):
        self.k_v = k_v
        self.k_theta = k_theta
        self.d_slow = d_slow

    def act(self, obs: Observation) -> tuple[float, float]:
        dx, dy = obs.state[0], obs.state[1]
        theta = obs.state[8]
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            return (0.0, 0.0)
        a_common = self.k_v * min(dist / self.d_slow, 1.0)
        heading_err = wrap_angle(math.atan2(dy, dx) - theta)
        a_diff = self.k_theta * heading_err
        a_l = min(max(a_common - a_diff, -1.0), 1.0)
        a_r = min(max(a_common + a_diff, -1.0), 1.0)
        return (a_l, a_r)


class PlanTrackPolicy(Policy):
    """Flow-aware baseline: plan an energy-minimal lattice path once per
    episode, then track its waypoints with a throttled controller.

    Privileged (it sees the true flow field), which is the point of the
    baseline: it bounds what full knowledge buys.
    """

    needs_maps = False

    def __init__(self, params, algo: str = "dijkstra", resolution: float = 10.0,
                 k_theta: float = 1.0, cruise_cmd: float = 0.3,
                 waypoint_radius: float = 10.0, d_slow: float = 20.0):
        if algo not in ("dijkstra", "astar"):
            raise ValueError("algo must be dijkstra or astar")
        self.params = params  # vehicle params fixing the edge-cost scale
        self.algo = algo
        self.resolution = resolution
        self.k_theta = k_theta
        self.cruise_cmd = cruise_cmd
        self.waypoint_radius = waypoint_radius
        self.d_slow = d_slow
        self._waypoints: list[np.ndarray] = []
        self._goal: np.ndarray | None = None
        self._wp_index = 0

    def bind_episode(self, field, start, goal, t0: float) -> None:
        grid = PlanGrid.for_field(field, self.resolution)
        s = grid.snap(start)
        g = grid.snap(goal)
        self._goal = np.asarray(goal, dtype=float)
        self._wp_index = 0
        if s == g:
            self._waypoints = [np.asarray(goal, dtype=float)]
            return
        if self.algo == "dijkstra":
            result = dijkstra_oracle(grid, s, g, field, self.params, t0=t0)
        else:
            result = astar_dynamic(grid, s, g, field, self.params, t0=t0)
        pts = [np.asarray(p, dtype=float) for p in result.waypoints] if result.reached else []
        pts.append(np.asarray(goal, dtype=float))
        self._waypoints = pts

    def reset(self, seed: int) -> None:
        self._wp_index = 0

    def act(self, obs: Observation) -> tuple[float, float]:
        if self._goal is None or not self._waypoints:
            return (0.0, 0.0)
        dx, dy = obs.state[0], obs.state[1]
        theta = obs.state[8]
        pos = self._goal - np.array([dx, dy])
        wps = self._waypoints
        # re-anchor on the nearest not-yet-passed waypoint (never backtrack
        # to one a vortex kick swept us past), then aim one ahead of it
        dists = [float(np.linalg.norm(w - pos)) for w in wps[self._wp_index:]]
        self._wp_index += int(np.argmin(dists))
        if dists[int(np.argmin(dists))] < self.waypoint_radius:
            self._wp_index = min(self._wp_index + 1, len(wps) - 1)
        target = wps[min(self._wp_index, len(wps) - 1)]

        dist_goal = math.hypot(dx, dy)
        endgame = self._wp_index >= len(wps) - 1
        if endgame:
            # full authority for the final capture; taper only inside the
            # target ball so an upwind goal stays reachable
            target = self._goal
            a_common = min(dist_goal / max(self.d_slow / 4.0, 1e-12), 1.0)
        else:
            a_common = self.cruise_cmd
        rel = target - pos
        if float(np.linalg.norm(rel)) == 0.0:
            return (0.0, 0.0)
        heading_err = wrap_angle(math.atan2(rel[1], rel[0]) - theta)
        a_diff = self.k_theta * heading_err
        a_l = min(max(a_common - a_diff, -1.0), 1.0)
        a_r = min(max(a_common + a_diff, -1.0), 1.0)
        return (a_l, a_r)


def make_builtin_policy(name: str, preset: EnvPreset) -> Policy:
    """Instantiate a builtin policy sized to the preset's domain."""
    g = preset.gains
    if name == "drift":
        return DriftPolicy()
    if name == "greedy":
        return GreedyPolicy(k_v=g.k_v, k_theta=g.k_theta, d_slow=g.d_slow)
    if name in ("plan-dijkstra", "plan-astar"):
        return PlanTrackPolicy(
            params=preset.vehicle,
            algo=name.split("-", 1)[1],
            resolution=max(preset.plan_resolution * 5.0, preset.bounds().width / 60.0),
            k_theta=g.k_theta,
            cruise_cmd=0.3,
            waypoint_radius=g.waypoint_radius,
            d_slow=g.d_slow,
        )
    raise ValueError(f"unknown builtin policy {name!r}; "
                     "choose drift, greedy, plan-dijkstra, or plan-astar")
