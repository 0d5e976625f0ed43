"""Energy-aware search on a time-varying 8-connected lattice.

Edge costs model the command effort a straight-line traversal needs under
the vehicle's drag model: traverse at the terminal speed v_ref, subtract
the local current, convert the required through-water speed to a command-L1
value, clamp to the two-thruster envelope, and scale by the traverse time.
Edges the vehicle cannot make progress on at any speed get a large finite
penalty so the lattice stays connected.

Both searches run on the time-expanded graph (one time tick per edge, so
diagonal edges cost more but take the same tick).  ``astar_dynamic`` takes
a heuristic (Euclidean by default, which is not admissible for energy
costs); ``dijkstra_oracle`` is an independent uniform-cost implementation
used to audit it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .flows.base import FlowField
from .vehicle import VehicleParams

# neighbor offsets: 4 axis moves then 4 diagonals
_DIRS = np.array([(1, 0), (-1, 0), (0, 1), (0, -1),
                  (1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=int)
_PENALTY_FACTOR = 10.0  # times the clamped per-edge maximum
_ENVELOPE = 2.0         # max command L1 with both thrusters forward


@dataclass(frozen=True)
class PlanGrid:
    """Lattice over a field's bounds with the given cell size."""

    x0: float
    y0: float
    resolution: float
    nx: int
    ny: int

    @classmethod
    def for_field(cls, flow: FlowField, resolution: float) -> "PlanGrid":
        b = flow.bounds()
        nx = int(round(b.width / resolution)) + 1
        ny = int(round(b.height / resolution)) + 1
        return cls(b.x0, b.y0, resolution, nx, ny)

    def node_pos(self, node: tuple[int, int]) -> np.ndarray:
        return np.array([self.x0 + node[0] * self.resolution,
                         self.y0 + node[1] * self.resolution])

    def snap(self, pos) -> tuple[int, int]:
        i = int(round((float(pos[0]) - self.x0) / self.resolution))
        j = int(round((float(pos[1]) - self.y0) / self.resolution))
        return (min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1))

    def in_grid(self, i: int, j: int) -> bool:
        return 0 <= i < self.nx and 0 <= j < self.ny


@dataclass
class PlanResult:
    waypoints: list          # node positions from start to goal
    total_energy: float
    steps: int               # traversed edges
    expanded: int            # nodes popped during search
    reached: bool


def edge_energy(p_from, p_to, t: float, flow: FlowField, params: VehicleParams) -> float:
    """Command-effort cost of one straight edge departing at time t."""
    p_from = np.asarray(p_from, dtype=float)
    p_to = np.asarray(p_to, dtype=float)
    delta = p_to - p_from
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        return 0.0
    v_ref = params.terminal_speed
    tau = length / v_ref
    unit = delta / length
    vflow = np.asarray(flow.velocity((p_from + p_to) / 2.0, t), dtype=float)

    u_req = v_ref * unit - vflow
    raw = float(np.linalg.norm(u_req)) * params.drag / params.thrust

    # feasible iff some traverse speed keeps the required thrust inside the
    # envelope; the closest approach of the ray {s*unit, s>0} to vflow decides
    v_par = float(vflow @ unit)
    miss = float(np.linalg.norm(vflow - v_par * unit)) if v_par >= 0 else float(np.linalg.norm(vflow))
    if miss > v_ref + 1e-12:
        return _PENALTY_FACTOR * _ENVELOPE * tau
    return max(0.0, min(raw, _ENVELOPE)) * tau


class _SliceCostCache:
    """Vectorized per-time-slice edge costs for a whole lattice."""

    def __init__(self, grid: PlanGrid, flow: FlowField, params: VehicleParams, t0: float):
        self.grid = grid
        self.flow = flow
        self.params = params
        self.t0 = t0
        self._slices: dict[int, np.ndarray] = {}

        ii, jj = np.meshgrid(np.arange(grid.nx), np.arange(grid.ny), indexing="ij")
        self._pos = np.stack([grid.x0 + ii * grid.resolution,
                              grid.y0 + jj * grid.resolution], axis=-1)
        self._valid = np.zeros((grid.nx, grid.ny, len(_DIRS)), dtype=bool)
        self._mid = np.zeros((grid.nx, grid.ny, len(_DIRS), 2))
        self._unit = np.zeros((len(_DIRS), 2))
        self._len = np.zeros(len(_DIRS))
        for d, (di, dj) in enumerate(_DIRS):
            ti, tj = ii + di, jj + dj
            ok = (ti >= 0) & (ti < grid.nx) & (tj >= 0) & (tj < grid.ny)
            self._valid[:, :, d] = ok
            step = np.array([di, dj], dtype=float) * grid.resolution
            self._len[d] = np.linalg.norm(step)
            self._unit[d] = step / self._len[d]
            self._mid[:, :, d, :] = self._pos + step / 2.0

    def costs(self, k: int) -> np.ndarray:
        """(nx, ny, 8) edge costs departing at tick k (inf marks off-grid)."""
        key = 0 if self.flow.is_static else int(k)
        got = self._slices.get(key)
        if got is not None:
            return got
        p = self.params
        v_ref = p.terminal_speed
        mids = self._mid[self._valid]
        vflow = np.asarray(self.flow.velocity(mids, self.t0 + key), dtype=float)

        dir_idx = np.broadcast_to(np.arange(len(_DIRS)), self._valid.shape)[self._valid]
        unit = self._unit[dir_idx]
        tau = self._len[dir_idx] / v_ref

        u_req = v_ref * unit - vflow
        raw = np.linalg.norm(u_req, axis=-1) * p.drag / p.thrust
        v_par = np.einsum("ij,ij->i", vflow, unit)
        perp = np.linalg.norm(vflow - v_par[:, None] * unit, axis=-1)
        miss = np.where(v_par >= 0, perp, np.linalg.norm(vflow, axis=-1))
        feasible = miss <= v_ref + 1e-12
        cost = np.where(feasible, np.clip(raw, 0.0, _ENVELOPE),
                        _PENALTY_FACTOR * _ENVELOPE) * tau

        out = np.full(self._valid.shape, np.inf)
        out[self._valid] = cost
        self._slices[key] = out
        return out


def _search(grid: PlanGrid, start: tuple[int, int], goal: tuple[int, int],
            flow: FlowField, params: VehicleParams, heuristic, t0: float,
            max_steps: int | None) -> PlanResult:
    if start == goal:
        raise ValueError("start and goal snap to the same node")
    if max_steps is None:
        max_steps = 4 * (grid.nx + grid.ny)
    cache = _SliceCostCache(grid, flow, params, t0)
    goal_pos = grid.node_pos(goal)

    def h(node) -> float:
        if heuristic is None:
            return 0.0
        return heuristic(grid.node_pos(node), goal_pos)

    def key_of(i, j, k):
        return (i, j) if flow.is_static else (i, j, k)

    best = {key_of(start[0], start[1], 0): 0.0}
    parent: dict = {}
    counter = 0
    open_heap = [(h(start), counter, 0.0, start[0], start[1], 0)]
    expanded = 0

    while open_heap:
        f, _, g, i, j, k = heapq.heappop(open_heap)
        if g > best.get(key_of(i, j, k), math.inf) + 1e-15:
            continue  # stale entry
        expanded += 1
        if (i, j) == goal:
            waypoints = []
            node = key_of(i, j, k)
            while node is not None:
                waypoints.append(node)
                node = parent.get(node)
            waypoints.reverse()
            pts = [grid.node_pos((n[0], n[1])) for n in waypoints]
            return PlanResult(waypoints=pts, total_energy=g, steps=len(pts) - 1,
                              expanded=expanded, reached=True)
        if k >= max_steps:
            continue
        costs = cache.costs(k)
        for d, (di, dj) in enumerate(_DIRS):
            c = costs[i, j, d]
            if not np.isfinite(c):
                continue
            ni, nj, nk = i + di, j + dj, k + 1
            nkey = key_of(ni, nj, nk)
            ng = g + float(c)
            if ng < best.get(nkey, math.inf) - 1e-15:
                best[nkey] = ng
                parent[nkey] = key_of(i, j, k)
                counter += 1
                heapq.heappush(open_heap, (ng + h((ni, nj)), counter, ng, ni, nj, nk))

    return PlanResult(waypoints=[], total_energy=math.inf, steps=0,
                      expanded=expanded, reached=False)


def euclidean_heuristic(pos, goal_pos) -> float:
    return float(np.linalg.norm(np.asarray(pos) - np.asarray(goal_pos)))


def astar_dynamic(grid: PlanGrid, start, goal, flow: FlowField, params: VehicleParams,
                  heuristic=euclidean_heuristic, t0: float = 0.0,
                  max_steps: int | None = None) -> PlanResult:
    """Time-expanded A*; the default Euclidean heuristic follows the baseline
    convention and is not admissible for energy costs."""
    return _search(grid, tuple(start), tuple(goal), flow, params, heuristic, t0, max_steps)


def dijkstra_oracle(grid: PlanGrid, start, goal, flow: FlowField, params: VehicleParams,
                    t0: float = 0.0, max_steps: int | None = None) -> PlanResult:
    """Independent uniform-cost search; optimal for the time-expanded model."""
    start = tuple(start)
    goal = tuple(goal)
    if start == goal:
        raise ValueError("start and goal snap to the same node")
    if max_steps is None:
        max_steps = 4 * (grid.nx + grid.ny)
    cache = _SliceCostCache(grid, flow, params, t0)

    def key_of(i, j, k):
        return (i, j) if flow.is_static else (i, j, k)

    dist = {key_of(start[0], start[1], 0): 0.0}
    parent: dict = {}
    counter = 0
    heap = [(0.0, counter, start[0], start[1], 0)]
    expanded = 0
    while heap:
        g, _, i, j, k = heapq.heappop(heap)
        if g > dist.get(key_of(i, j, k), math.inf) + 1e-15:
            continue
        expanded += 1
        if (i, j) == goal:
            waypoints = []
            node = key_of(i, j, k)
            while node is not None:
                waypoints.append(node)
                node = parent.get(node)
            waypoints.reverse()
            pts = [grid.node_pos((n[0], n[1])) for n in waypoints]
            return PlanResult(waypoints=pts, total_energy=g, steps=len(pts) - 1,
                              expanded=expanded, reached=True)
        if k >= max_steps:
            continue
        costs = cache.costs(k)
        for d, (di, dj) in enumerate(_DIRS):
            c = costs[i, j, d]
            if not np.isfinite(c):
                continue
            ni, nj, nk = i + di, j + dj, k + 1
            nkey = key_of(ni, nj, nk)
            ng = g + float(c)
            if ng < dist.get(nkey, math.inf) - 1e-15:
                dist[nkey] = ng
                parent[nkey] = key_of(i, j, k)
                counter += 1
                heapq.heappush(heap, (ng, counter, ni, nj, nk))
    return PlanResult(waypoints=[], total_energy=math.inf, steps=0,
                      expanded=expanded, reached=False)
