"""Point-mass surface vehicle with two imbalanced thrusters.

The commanded fractions a in [-1, 1] map to forces in [-T/2, T] per
thruster (zero-preserving, piecewise linear).  Heading is driven only by
the thrust differential; translation only by the thrust sum, first-order
drag, and flow advection.  One call advances one unit step with
semi-implicit Euler: angular rate, then heading, then through-water
velocity along the new heading, then position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationError
from .flows.base import FlowField


@dataclass(frozen=True)
class VehicleParams:
    thrust: float              # max forward force T; reverse limit is T/2
    mass: float = 1.0
    inertia: float = 1.0
    arm: float = 0.5           # thruster half-separation d/2
    drag: float = 0.2          # linear translational drag
    rot_drag: float = 0.5
    dt: float = 1.0

    def __post_init__(self):
        for name in ("thrust", "mass", "inertia", "arm", "drag", "rot_drag", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def terminal_speed(self) -> float:
        """Steady through-water speed under full symmetric thrust, 2T/c_d."""
        return 2.0 * self.thrust / self.drag

    def to_dict(self) -> dict:
        return {"thrust": self.thrust, "mass": self.mass, "inertia": self.inertia,
                "arm": self.arm, "drag": self.drag, "rot_drag": self.rot_drag, "dt": self.dt}

    @classmethod
    def from_dict(cls, d: dict) -> "VehicleParams":
        return cls(**d)


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    ux: float = 0.0            # propulsion-induced velocity, not ground speed
    uy: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    energy: float = 0.0        # cumulative |a_l| + |a_r|
    energy_sq: float = 0.0     # cumulative a_l^2 + a_r^2 (secondary metric)

    @property
    def p(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def u(self) -> np.ndarray:
        return np.array([self.ux, self.uy])


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(theta + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def clamp_action(action) -> tuple[float, float]:
    al, ar = float(action[0]), float(action[1])
    return min(max(al, -1.0), 1.0), min(max(ar, -1.0), 1.0)


def map_action_to_thrust(action, params: VehicleParams) -> tuple[float, float]:
    """Zero-preserving map: a*T for a >= 0, a*T/2 for a < 0."""
    al, ar = clamp_action(action)
    tl = al * params.thrust if al >= 0 else al * params.thrust / 2.0
    tr = ar * params.thrust if ar >= 0 else ar * params.thrust / 2.0
    return tl, tr


def step_vehicle(state: VehicleState, action, flow: FlowField, t: float,
                 params: VehicleParams) -> VehicleState:
    al, ar = clamp_action(action)
    tl, tr = map_action_to_thrust((al, ar), params)
    dt = params.dt

    torque = (tr - tl) * params.arm
    theta_dot = state.theta_dot + (torque - params.rot_drag * state.theta_dot) / params.inertia * dt
    theta = wrap_angle(state.theta + theta_dot * dt)

    force = tl + tr
    hx, hy = math.cos(theta), math.sin(theta)
    ux = state.ux + (force * hx - params.drag * state.ux) / params.mass * dt
    uy = state.uy + (force * hy - params.drag * state.uy) / params.mass * dt

    vflow = np.asarray(flow.velocity(state.p, t), dtype=float)
    x = state.x + (ux + float(vflow[0])) * dt
    y = state.y + (uy + float(vflow[1])) * dt

    return VehicleState(
        x=x, y=y, ux=ux, uy=uy, theta=theta, theta_dot=theta_dot,
        energy=state.energy + abs(al) + abs(ar),
        energy_sq=state.energy_sq + al * al + ar * ar,
    )


def drift_crossing_steps(flow: FlowField, params: VehicleParams, start_y: float,
                         start_x: float = 5.0, margin: float = 5.0,
                         max_steps: int = 12000) -> int:
    """Steps for a zero-thrust release at (start_x, start_y) to reach the
    right edge minus margin."""
    goal_x = flow.bounds().x1 - margin
    state = VehicleState(x=start_x, y=start_y)
    for step in range(1, max_steps + 1):
        state = step_vehicle(state, (0.0, 0.0), flow, float(step - 1), params)
        if state.x >= goal_x:
            return step
    raise CalibrationError(
        f"no crossing within {max_steps} steps (reached x={state.x:.1f})")


def calibrate_drift(params: VehicleParams, flow: FlowField,
                    start_heights=None) -> float:
    """Mean crossing steps over the given release heights (default: mid-height)."""
    b = flow.bounds()
    if start_heights is None:
        start_heights = [b.y0 + b.height / 2.0]
    steps = [drift_crossing_steps(flow, params, float(y)) for y in start_heights]
    return float(np.mean(steps))


def replay_actions(start: VehicleState, actions, flow: FlowField,
                   params: VehicleParams, t0: float = 0.0) -> list[VehicleState]:
    """Re-run a logged action sequence; used to audit recorded trajectories."""
    states = []
    state = start
    for k, a in enumerate(actions):
        state = step_vehicle(state, a, flow, t0 + k * params.dt, params)
        states.append(state)
    return states
