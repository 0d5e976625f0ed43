"""Re-derivation of the tuned constants stored in the presets: drift
crossing, peak field speeds, matched gyre amplitudes, and thrust sizing."""

from __future__ import annotations

import numpy as np

from .presets import get_preset
from .vehicle import calibrate_drift


def calibration_report(env: str, what: str = "all", releases: int = 10) -> dict:
    preset = get_preset(env)
    report: dict = {"env": preset.name}

    if what in ("drift", "all") and preset.kind == "vortex":
        field = preset.make_field()
        b = field.bounds()
        heights = np.linspace(b.y0 + 0.1 * b.height, b.y1 - 0.1 * b.height, releases)
        mean_steps = calibrate_drift(preset.vehicle, field, heights)
        report["drift"] = {
            "releases": releases,
            "mean_crossing_steps": mean_steps,
            "target": 1200,
            "tolerance": 120,
            "within_target": bool(abs(mean_steps - 1200) <= 120),
            "free_stream": list(preset.flow_params.free_stream),
        }

    if what in ("speed", "all"):
        if preset.kind == "vortex":
            from .flows.vortex import sampled_max_speed

            measured = sampled_max_speed(preset.flow_params)
        elif preset.kind == "gyre":
            from .flows.gyre import sampled_max_speed

            measured = sampled_max_speed(preset.flow_params)
        else:
            measured = preset.max_speed
        report["speed"] = {
            "measured_max_speed": measured,
            "stored_max_speed": preset.max_speed,
            "suggested_thrust": 0.75 * preset.vehicle.drag * measured,
            "stored_thrust": preset.vehicle.thrust,
        }

    if what in ("gyre", "all") and preset.kind == "gyre":
        from .flows.gyre import sampled_max_speed

        import dataclasses

        unit = dataclasses.replace(preset.flow_params, amplitude=1.0)
        per_unit = sampled_max_speed(unit)
        wake = get_preset("cyl-static")
        target = wake.max_speed * preset.bounds().height / wake.bounds().height
        report["gyre_amplitude"] = {
            "peak_speed_at_unit_amplitude": per_unit,
            "target_max_speed": target,
            "suggested_amplitude": target / per_unit,
            "stored_amplitude": preset.flow_params.amplitude,
        }

    return report
