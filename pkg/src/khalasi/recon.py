"""Local flow reconstruction from single-point history via Gaussian process
regression.

Each velocity component gets an independent GP over inputs (x, y, t) with a
separable squared-exponential kernel

    k = sv * exp(-|dp|^2 / (2 ls^2) - dt^2 / (2 lt^2)) + sn * [same sample]

fit to the sliding measurement window and evaluated on a square
agent-centric grid at the current time.  Since both components share inputs
and kernel, one Cholesky factorization serves both posteriors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import ReconstructionError
from .flows.base import FlowField

JITTER_FLOOR = 1e-10
JITTER_CEILING = 1e-4


@dataclass(frozen=True)
class GprHyperparams:
    signal_var: float          # sv, velocity^2
    space_scale: float         # ls, length units
    time_scale: float          # lt, steps
    noise_var: float           # sn, velocity^2; floored for Cholesky stability

    def __post_init__(self):
        if min(self.signal_var, self.space_scale, self.time_scale) <= 0:
            raise ValueError("GPR hyperparameters must be positive")
        if self.noise_var < JITTER_FLOOR:
            object.__setattr__(self, "noise_var", JITTER_FLOOR)

    def to_dict(self) -> dict:
        return {"signal_var": self.signal_var, "space_scale": self.space_scale,
                "time_scale": self.time_scale, "noise_var": self.noise_var}

    @classmethod
    def from_dict(cls, d: dict) -> "GprHyperparams":
        return cls(**d)


class FlowSampleWindow:
    """Ring buffer of timestamped point measurements, oldest evicted first."""

    def __init__(self, capacity: int = 55):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buf: deque = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def newest_time(self) -> float | None:
        return self._buf[-1][2] if self._buf else None

    def push(self, pos, t: float, v) -> None:
        if self._buf and t <= self._buf[-1][2]:
            raise ValueError(f"timestamps must strictly increase (got {t} after {self._buf[-1][2]})")
        self._buf.append((float(pos[0]), float(pos[1]), float(t), float(v[0]), float(v[1])))

    def arrays(self):
        """Return (positions (n,2), times (n,), velocities (n,2))."""
        a = np.array(self._buf, dtype=float).reshape(len(self._buf), 5)
        return a[:, 0:2], a[:, 2], a[:, 3:5]

    def copy(self) -> "FlowSampleWindow":
        w = FlowSampleWindow(self.capacity)
        w._buf = deque(self._buf, maxlen=self.capacity)
        return w


@dataclass
class ReconGrid:
    """Agent-centric stacked maps: mean velocity and per-component sigma."""

    center: np.ndarray         # agent position at query time
    t: float
    extent: float              # full side length in length units
    vx: np.ndarray             # (side, side), row index = y, col index = x
    vy: np.ndarray
    sx: np.ndarray
    sy: np.ndarray

    @property
    def side(self) -> int:
        return self.vx.shape[0]

    @property
    def spacing(self) -> float:
        return self.extent / self.side

    def offsets(self) -> np.ndarray:
        """Cell-center offsets from the grid center along one axis."""
        return (np.arange(self.side) - (self.side - 1) / 2.0) * self.spacing

    def node_positions(self) -> np.ndarray:
        """(side, side, 2) absolute cell-center positions."""
        off = self.offsets()
        xs = self.center[0] + off
        ys = self.center[1] + off
        gx, gy = np.meshgrid(xs, ys)  # row = y, col = x
        return np.stack([gx, gy], axis=-1)

    def stack(self) -> np.ndarray:
        """(side, side, 4) tensor in map order vx, vy, sx, sy."""
        return np.stack([self.vx, self.vy, self.sx, self.sy], axis=-1)


def zero_recon_grid(center, t: float, side: int = 64, extent: float = 32.0) -> ReconGrid:
    z = np.zeros((side, side))
    return ReconGrid(center=np.asarray(center, dtype=float), t=t, extent=extent,
                     vx=z.copy(), vy=z.copy(), sx=z.copy(), sy=z.copy())


def _kernel(hp: GprHyperparams, pa, ta, pb, tb) -> np.ndarray:
    d2 = ((pa[:, None, 0] - pb[None, :, 0]) ** 2
          + (pa[:, None, 1] - pb[None, :, 1]) ** 2)
    dt2 = (ta[:, None] - tb[None, :]) ** 2
    return hp.signal_var * np.exp(-d2 / (2.0 * hp.space_scale ** 2)
                                  - dt2 / (2.0 * hp.time_scale ** 2))


def _factor_with_jitter(gram: np.ndarray, noise_var: float):
    jitter = max(noise_var, JITTER_FLOOR)
    while True:
        try:
            return cho_factor(gram + jitter * np.eye(len(gram)), lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > JITTER_CEILING:
                raise ReconstructionError(
                    f"Gram factorization failed up to jitter {JITTER_CEILING}") from None


def reconstruct(window: FlowSampleWindow, hp: GprHyperparams, center, t_now: float,
                side: int = 64, extent: float = 32.0) -> ReconGrid:
    """Posterior mean and sigma maps on a side x side grid centered on the agent."""
    if len(window) == 0:
        raise ReconstructionError("cannot reconstruct from an empty window")
    pos, times, vals = window.arrays()
    grid = zero_recon_grid(center, t_now, side, extent)
    nodes = grid.node_positions().reshape(-1, 2)
    node_t = np.full(len(nodes), float(t_now))

    gram = _kernel(hp, pos, times, pos, times)
    factor, _ = _factor_with_jitter(gram, hp.noise_var)
    kstar = _kernel(hp, pos, times, nodes, node_t)           # (n, side*side)

    mean_x = kstar.T @ cho_solve(factor, vals[:, 0])
    mean_y = kstar.T @ cho_solve(factor, vals[:, 1])

    half = solve_triangular(factor[0], kstar, lower=True)    # L^-1 kstar
    var = hp.signal_var - np.einsum("ij,ij->j", half, half)
    sigma = np.sqrt(np.clip(var, 0.0, None))

    shape = (side, side)
    grid.vx = mean_x.reshape(shape)
    grid.vy = mean_y.reshape(shape)
    grid.sx = sigma.reshape(shape)
    grid.sy = sigma.reshape(shape).copy()
    return grid


def posterior_at_inputs(window: FlowSampleWindow, hp: GprHyperparams) -> np.ndarray:
    """Posterior mean evaluated back at the training inputs, shape (n, 2)."""
    pos, times, vals = window.arrays()
    gram = _kernel(hp, pos, times, pos, times)
    factor, _ = _factor_with_jitter(gram, hp.noise_var)
    kstar = _kernel(hp, pos, times, pos, times)
    mx = kstar.T @ cho_solve(factor, vals[:, 0])
    my = kstar.T @ cho_solve(factor, vals[:, 1])
    return np.stack([mx, my], axis=-1)


def mae_vs_truth(grid: ReconGrid, truth: FlowField, t: float) -> tuple[float, int]:
    """Mean |predicted - true| over in-bounds cells and both components.

    Returns (mae, excluded_cell_count); raises if every cell falls outside
    the truth field's bounds.
    """
    nodes = grid.node_positions().reshape(-1, 2)
    inside = truth.bounds().contains(nodes)
    excluded = int(np.sum(~inside))
    if excluded == len(nodes):
        raise ValueError("reconstruction grid lies entirely outside the truth field")
    true_v = truth.velocity(nodes[inside], t)
    pred = np.stack([grid.vx.reshape(-1)[inside], grid.vy.reshape(-1)[inside]], axis=-1)
    mae = float(np.mean(np.abs(pred - true_v)))
    return mae, excluded
