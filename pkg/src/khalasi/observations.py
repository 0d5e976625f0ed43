"""Policy observation assembly: reconstructed map stack plus a 9-float
state vector [dx, dy, u_x, u_y, v_x, v_y, g_x, g_y, theta]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recon import ReconGrid
from .vehicle import VehicleState

STATE_DIM = 9


@dataclass
class Observation:
    maps: ReconGrid
    state: np.ndarray  # (9,)

    @property
    def goal_offset(self) -> np.ndarray:
        return self.state[0:2]


def recon_center_gradients(grid: ReconGrid) -> tuple[float, float]:
    """(dvx/dx, dvy/dy) by central differences at the grid's middle cell."""
    c = grid.side // 2 - 1  # one of the two central cells
    h = grid.spacing
    gx = float(grid.vx[c, c + 1] - grid.vx[c, c - 1]) / (2.0 * h)
    gy = float(grid.vy[c + 1, c] - grid.vy[c - 1, c]) / (2.0 * h)
    return gx, gy


def build_observation(recon: ReconGrid, state: VehicleState, goal, flow_meas,
                      grads: tuple[float, float] | None = None) -> Observation:
    """Assemble the observation; grads default to central differences on the
    reconstructed mean maps (the agent has no ground-truth gradients)."""
    goal = np.asarray(goal, dtype=float)
    if grads is None:
        grads = recon_center_gradients(recon)
    vec = np.array([
        goal[0] - state.x,
        goal[1] - state.y,
        state.ux,
        state.uy,
        float(flow_meas[0]),
        float(flow_meas[1]),
        grads[0],
        grads[1],
        state.theta,
    ])
    if not np.isfinite(vec).all():
        raise ValueError("non-finite values in observation state vector")
    return Observation(maps=recon, state=vec)
