"""Homogeneous leader-follower consensus with non-overshooting guarantees."""

from ._core import (
    HomoconError,
    canonical_norm,
    generator_weights,
    linear_gain,
    norm_gradient,
    preset_scenario_json,
    run_presets,
    run_scenario,
    simulate,
    solve_lmi_P,
    solve_lmi_XY,
    verify_lmi_P,
    verify_lmi_XY,
)

__all__ = [
    "HomoconError",
    "canonical_norm",
    "generator_weights",
    "linear_gain",
    "norm_gradient",
    "preset_scenario_json",
    "run_presets",
    "run_scenario",
    "simulate",
    "solve_lmi_P",
    "solve_lmi_XY",
    "verify_lmi_P",
    "verify_lmi_XY",
]
