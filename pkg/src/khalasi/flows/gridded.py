"""File-backed gridded velocity series with bilinear space / linear time
interpolation, plus integer-factor refinement.

UVGRID layout (little endian):

    bytes 0..3    magic "UVG1"
    bytes 4..15   u32 nx, ny, nt
    bytes 16..55  f64 x0, y0, dx, dy, dt
    then nt frames of ny*nx f32 u values (row major, y outer),
    then nt frames of ny*nx f32 v values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ..errors import DomainError, GridLoadError
from .base import FlowField, Rect

MAGIC = b"UVG1"
_HEADER = struct.Struct("<4sIII5d")


@dataclass
class GridFieldSeries:
    """In-memory gridded (u, v) series; arrays stay f32 so files round-trip
    byte-exactly."""

    x0: float
    y0: float
    dx: float
    dy: float
    dt: float
    u: np.ndarray  # (nt, ny, nx) float32
    v: np.ndarray

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.u, dtype=np.float32)
        self.v = np.ascontiguousarray(self.v, dtype=np.float32)
        if self.u.ndim != 3 or self.u.shape != self.v.shape:
            raise ValueError("u and v must share a (nt, ny, nx) shape")
        nt, ny, nx = self.u.shape
        if nx < 2 or ny < 2 or nt < 2:
            raise ValueError("need at least 2 nodes per axis and 2 frames")
        if not (self.dx > 0 and self.dy > 0 and self.dt > 0):
            raise ValueError("spacings must be positive")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ValueError("velocity samples must be finite")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.u.shape

    @property
    def nt(self) -> int:
        return self.u.shape[0]

    @property
    def ny(self) -> int:
        return self.u.shape[1]

    @property
    def nx(self) -> int:
        return self.u.shape[2]

    def extent(self) -> Rect:
        return Rect(self.x0, self.x0 + (self.nx - 1) * self.dx,
                    self.y0, self.y0 + (self.ny - 1) * self.dy)

    @property
    def duration(self) -> float:
        return (self.nt - 1) * self.dt


def save_uvgrid(series: GridFieldSeries, path) -> None:
    nt, ny, nx = series.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, nx, ny, nt,
                              series.x0, series.y0, series.dx, series.dy, series.dt))
        fh.write(series.u.astype("<f4", copy=False).tobytes())
        fh.write(series.v.astype("<f4", copy=False).tobytes())


def load_uvgrid(path) -> GridFieldSeries:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise GridLoadError(f"truncated header: {len(raw)} bytes < {_HEADER.size}")
    magic, nx, ny, nt, x0, y0, dx, dy, dt = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise GridLoadError(f"bad magic {magic!r} at offset 0")
    if nx < 2 or ny < 2:
        raise GridLoadError(f"grid too small ({nx} x {ny}) at offset 4")
    if nt < 2:
        raise GridLoadError(f"need nt >= 2 frames for temporal interpolation, got {nt} (offset 12)")
    if not (dx > 0 and dy > 0 and dt > 0):
        raise GridLoadError("non-positive spacing in header at offset 16")
    n = nt * ny * nx
    expect = _HEADER.size + 2 * 4 * n
    if len(raw) != expect:
        raise GridLoadError(f"payload size {len(raw)} != expected {expect} (truncated at offset {len(raw)})")
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=2 * n)
    u = flat[:n].reshape(nt, ny, nx).copy()
    v = flat[n:].reshape(nt, ny, nx).copy()
    if not np.isfinite(u).all():
        bad = int(np.flatnonzero(~np.isfinite(u.ravel()))[0])
        raise GridLoadError(f"non-finite u sample at offset {_HEADER.size + 4 * bad}")
    if not np.isfinite(v).all():
        bad = int(np.flatnonzero(~np.isfinite(v.ravel()))[0])
        raise GridLoadError(f"non-finite v sample at offset {_HEADER.size + 4 * n + 4 * bad}")
    return GridFieldSeries(x0, y0, dx, dy, dt, u, v)


def _axis_fractions(coord, origin, spacing, count):
    s = (np.asarray(coord, dtype=float) - origin) / spacing
    idx = np.clip(np.floor(s).astype(int), 0, count - 2)
    return idx, s - idx


def sample_grid(series: GridFieldSeries, pos, t: float) -> np.ndarray:
    """Bilinear-in-space, linear-in-time velocity at pos; exact at nodes."""
    p = np.asarray(pos, dtype=float)
    ext = series.extent()
    if not np.all(ext.contains(p, tol=1e-9)):
        raise DomainError(f"position outside grid extent {ext}")
    if not (-1e-9 <= t <= series.duration + 1e-9):
        raise DomainError(f"time {t} outside [0, {series.duration}]")

    ix, wx = _axis_fractions(p[..., 0], series.x0, series.dx, series.nx)
    iy, wy = _axis_fractions(p[..., 1], series.y0, series.dy, series.ny)
    it, wt = _axis_fractions(min(max(t, 0.0), series.duration), 0.0, series.dt, series.nt)

    out = []
    for arr in (series.u, series.v):
        a = arr.astype(float)
        comp = 0.0
        for dt_, w_t in ((0, 1.0 - wt), (1, wt)):
            frame = a[it + dt_]
            plane = ((1.0 - wy) * ((1.0 - wx) * frame[iy, ix] + wx * frame[iy, ix + 1])
                     + wy * ((1.0 - wx) * frame[iy + 1, ix] + wx * frame[iy + 1, ix + 1]))
            comp = comp + w_t * plane
        out.append(comp)
    return np.stack(out, axis=-1)


def _refine_axis(a: np.ndarray, axis: int, factor: int) -> np.ndarray:
    n = a.shape[axis]
    m = (n - 1) * factor + 1
    a = np.moveaxis(a, axis, 0)
    out = np.empty((m,) + a.shape[1:], dtype=float)
    for i in range(m):
        j, r = divmod(i, factor)
        if r == 0:
            out[i] = a[j]
        else:
            w = r / factor
            out[i] = (1.0 - w) * a[j] + w * a[j + 1]
    return np.moveaxis(out, 0, axis)


def refine_grid(series: GridFieldSeries, factor: int) -> GridFieldSeries:
    """Piecewise-linear refinement; original node values are kept exactly."""
    if factor < 2:
        raise ValueError("refinement factor must be >= 2")
    f = int(factor)
    u = series.u.astype(float)
    v = series.v.astype(float)
    for axis in (0, 1, 2):
        u = _refine_axis(u, axis, f)
        v = _refine_axis(v, axis, f)
    return GridFieldSeries(series.x0, series.y0, series.dx / f, series.dy / f,
                           series.dt / f, u.astype(np.float32), v.astype(np.float32))


class GriddedField(FlowField):
    """FlowField adapter; immutable after construction."""

    def __init__(self, series: GridFieldSeries):
        self.series = series

    def velocity(self, pos, t: float) -> np.ndarray:
        return sample_grid(self.series, pos, t)

    def bounds(self) -> Rect:
        return self.series.extent()

    @cached_property
    def _node_max(self) -> float:
        return float(np.max(np.hypot(self.series.u.astype(float),
                                     self.series.v.astype(float))))

    def max_speed(self) -> float:
        # interpolated values are convex combinations of node vectors,
        # so the node-wise max modulus bounds every query
        return self._node_max
