"""Motion retargeting toolkit: keypoint trajectories to feasible robot motion.

Thin wrapper over the C++ core. Arrays are numpy; quaternions are
scalar-first (w, x, y, z); keypoint trajectories are (T, m, 3).
"""

from retargetkit._core import (
    DimensionError,
    InvariantError,
    Model,
    ParseError,
    check_feasibility,
    combined_distance,
    default_config,
    estimate_contacts,
    fixture,
    fk,
    geometric_retarget,
    plot,
    report,
    run_pipeline,
    validate_trajectory,
)

__all__ = [
    "DimensionError",
    "InvariantError",
    "Model",
    "ParseError",
    "check_feasibility",
    "combined_distance",
    "default_config",
    "estimate_contacts",
    "fixture",
    "fk",
    "geometric_retarget",
    "plot",
    "report",
    "run_pipeline",
    "validate_trajectory",
]

__version__ = "0.1.0"
