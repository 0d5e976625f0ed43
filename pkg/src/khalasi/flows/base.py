"""Flow-field interface and trivial fields (still water, uniform stream)."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, closed on all sides."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    def contains(self, pos, tol: float = 0.0):
        """True where pos lies inside (boundary counts as inside)."""
        p = np.asarray(pos, dtype=float)
        x, y = p[..., 0], p[..., 1]
        return (
            (x >= self.x0 - tol)
            & (x <= self.x1 + tol)
            & (y >= self.y0 - tol)
            & (y <= self.y1 + tol)
        )

    def grown(self, margin: float) -> "Rect":
        return Rect(self.x0 - margin, self.x1 + margin, self.y0 - margin, self.y1 + margin)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1}

    @classmethod
    def from_dict(cls, d: dict) -> "Rect":
        return cls(float(d["x0"]), float(d["x1"]), float(d["y0"]), float(d["y1"]))


class FlowField(ABC):
    """Queryable 2D velocity field.

    Implementations must be deterministic: identical (position, time)
    queries return identical values. ``velocity`` accepts a single
    position of shape (2,) or a batch of shape (..., 2) and returns an
    array of the same shape.
    """

    #: True when the field has no time dependence (lets planners collapse
    #: the time dimension).
    is_static: bool = False

    @abstractmethod
    def velocity(self, pos, t: float) -> np.ndarray: ...

    @abstractmethod
    def bounds(self) -> Rect: ...

    @abstractmethod
    def max_speed(self) -> float:
        """Upper bound on |velocity| over the bounded domain."""


class StillWater(FlowField):
    """Zero flow everywhere; max_speed reports a caller-supplied reference."""

    is_static = True

    def __init__(self, bounds: Rect, speed_ref: float = 0.0):
        self._bounds = bounds
        self._speed_ref = float(speed_ref)

    def velocity(self, pos, t: float) -> np.ndarray:
        return np.zeros_like(np.asarray(pos, dtype=float))

    def bounds(self) -> Rect:
        return self._bounds

    def max_speed(self) -> float:
        return self._speed_ref


class UniformFlow(FlowField):
    """Constant velocity everywhere (test and calibration helper)."""

    is_static = True

    def __init__(self, bounds: Rect, v):
        self._bounds = bounds
        self._v = np.asarray(v, dtype=float)
        if self._v.shape != (2,):
            raise ValueError("uniform flow velocity must be a 2-vector")

    def velocity(self, pos, t: float) -> np.ndarray:
        p = np.asarray(pos, dtype=float)
        return np.broadcast_to(self._v, p.shape).copy()

    def bounds(self) -> Rect:
        return self._bounds

    def max_speed(self) -> float:
        return float(np.hypot(*self._v))
