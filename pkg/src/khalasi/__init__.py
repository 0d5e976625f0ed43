"""khalasi: benchmark simulator for energy-aware surface-vehicle navigation
in time-varying 2D vortical flows."""

__version__ = "0.1.0"
