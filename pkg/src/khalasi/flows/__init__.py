from .base import FlowField, Rect, StillWater, UniformFlow
from .gridded import GriddedField, GridFieldSeries, load_uvgrid, refine_grid, sample_grid, save_uvgrid
from .gyre import GyreField, GyreParams, double_gyre, gyre_velocity, quad_gyre, stream_function
from .vortex import (
    CylinderSpec,
    ShedVortex,
    VortexStreetField,
    VortexStreetParams,
    advance_vortices,
    vortex_street_velocity,
)

__all__ = [
    "FlowField", "Rect", "StillWater", "UniformFlow",
    "GriddedField", "GridFieldSeries", "load_uvgrid", "refine_grid", "sample_grid", "save_uvgrid",
    "GyreField", "GyreParams", "double_gyre", "gyre_velocity", "quad_gyre", "stream_function",
    "CylinderSpec", "ShedVortex", "VortexStreetField", "VortexStreetParams",
    "advance_vortices", "vortex_street_velocity",
]
