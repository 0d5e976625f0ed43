"""Time-periodic recirculating gyre fields defined by a stream function.

The field is the perpendicular gradient of

    psi(x, y, t) = A sin(nx * pi * f(x, t)) sin(ny * pi * yhat)

with a time-dependent horizontal distortion

    f(x, t) = e(t) x^2 + (1 - e(t) * L) x,      e(t) = eps * sin(omega * t / T)

where x is measured from the left wall, L is the domain width and yhat the
height-normalized vertical coordinate.  The linear coefficient is chosen so
f(0) = 0 and f(L) = L, which closes the side walls for any domain width
(for L = 2 it reduces to the familiar 1 - 2 e(t) coefficient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import DomainError
from .base import FlowField, Rect


@dataclass(frozen=True)
class GyreParams:
    """Parameters of a generalized gyre lattice."""

    amplitude: float
    nx: int = 2
    ny: int = 1
    omega: float = 2.0 * math.pi
    eps: float = 0.25
    domain: Rect = field(default_factory=lambda: Rect(0.0, 2.0, 0.0, 1.0))
    #: steps per stream-function time unit; omega = 2*pi then gives one
    #: oscillation per ``time_scale`` steps
    time_scale: float = 500.0

    def __post_init__(self):
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("gyre counts must be >= 1")
        if not 0.0 <= self.eps < 0.5:
            raise ValueError("eps must lie in [0, 0.5)")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")
        # side walls close only when nx * f(L) = nx * L is a whole number
        if abs(self.nx * self.domain.width - round(self.nx * self.domain.width)) > 1e-12:
            raise ValueError("nx * domain width must be an integer for closed walls")

    def to_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "nx": self.nx,
            "ny": self.ny,
            "omega": self.omega,
            "eps": self.eps,
            "domain": self.domain.to_dict(),
            "time_scale": self.time_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GyreParams":
        d = dict(d)
        d["domain"] = Rect.from_dict(d["domain"])
        return cls(**d)


def double_gyre(amplitude: float, time_scale: float = 500.0) -> GyreParams:
    """Two-cell preset on [0,2] x [0,1]."""
    return GyreParams(amplitude=amplitude, nx=2, ny=1,
                      domain=Rect(0.0, 2.0, 0.0, 1.0), time_scale=time_scale)


def quad_gyre(amplitude: float, time_scale: float = 500.0) -> GyreParams:
    """2 x 2 preset on the unit square."""
    return GyreParams(amplitude=amplitude, nx=2, ny=2,
                      domain=Rect(0.0, 1.0, 0.0, 1.0), time_scale=time_scale)


def _distortion(params: GyreParams, x, t):
    """Return (f, df/dx) at wall-relative coordinate x."""
    tau = t / params.time_scale
    e = params.eps * np.sin(params.omega * tau)
    L = params.domain.width
    f = e * x * x + (1.0 - e * L) * x
    dfdx = 2.0 * e * x + (1.0 - e * L)
    return f, dfdx


def stream_function(params: GyreParams, pos, t: float):
    """Evaluate psi; primarily used to cross-check velocities."""
    p = np.asarray(pos, dtype=float)
    x = p[..., 0] - params.domain.x0
    yhat = (p[..., 1] - params.domain.y0) / params.domain.height
    f, _ = _distortion(params, x, t)
    return params.amplitude * np.sin(params.nx * np.pi * f) * np.sin(params.ny * np.pi * yhat)


def gyre_velocity(params: GyreParams, pos, t: float) -> np.ndarray:
    """Closed-form velocity (-dpsi/dy, dpsi/dx) at pos and time t.

    Raises DomainError for positions outside the (closed) domain.
    """
    p = np.asarray(pos, dtype=float)
    if not np.all(params.domain.contains(p, tol=1e-9)):
        raise DomainError(f"position outside gyre domain {params.domain}")
    x = p[..., 0] - params.domain.x0
    yhat = (p[..., 1] - params.domain.y0) / params.domain.height
    f, dfdx = _distortion(params, x, t)
    a, nx, ny = params.amplitude, params.nx, params.ny
    vx = -a * ny * np.pi / params.domain.height * np.sin(nx * np.pi * f) * np.cos(ny * np.pi * yhat)
    vy = a * nx * np.pi * np.cos(nx * np.pi * f) * dfdx * np.sin(ny * np.pi * yhat)
    return np.stack([vx, vy], axis=-1)


class GyreField(FlowField):
    """FlowField adapter over GyreParams."""

    def __init__(self, params: GyreParams, max_speed_hint: float | None = None):
        self.params = params
        self._max_speed_hint = max_speed_hint

    def velocity(self, pos, t: float) -> np.ndarray:
        return gyre_velocity(self.params, pos, t)

    def bounds(self) -> Rect:
        return self.params.domain

    @cached_property
    def _sampled_max(self) -> float:
        return sampled_max_speed(self.params)

    def max_speed(self) -> float:
        if self._max_speed_hint is not None:
            return self._max_speed_hint
        return self._sampled_max


def sampled_max_speed(params: GyreParams, n_space: int = 101, n_time: int = 50) -> float:
    """Max |v| over an n_space^2 x n_time space-time sample."""
    d = params.domain
    xs = np.linspace(d.x0, d.x1, n_space)
    ys = np.linspace(d.y0, d.y1, n_space)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    best = 0.0
    for t in np.linspace(0.0, params.time_scale, n_time, endpoint=False):
        v = gyre_velocity(params, grid, float(t))
        best = max(best, float(np.max(np.hypot(v[:, 0], v[:, 1]))))
    return best
