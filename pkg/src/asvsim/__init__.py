"""Deterministic multi-agent surface-vessel simulator and evaluation harness.

Subsystems: MMG ship dynamics (mmg), ILOS waypoint guidance and PD heading
control (guidance), potential-field reactive guidance (apf), a velocity
obstacle baseline (vo), the simulation engine (engine), a Monte Carlo batch
harness (montecarlo), and file/plot/CLI surfaces (serialize, plots, cli).
"""

__version__ = "0.1.0"

from .frames import BodyVelocity, Pose, Vec2, body_to_global, rk4_step, rotation_matrix, wrap_angle
from .mmg import (
    ActuatorLimits,
    DynamicState,
    HydroCoeffs,
    MassParams,
    ShipModel,
    ShipParams,
)

__all__ = [
    "ActuatorLimits",
    "BodyVelocity",
    "DynamicState",
    "HydroCoeffs",
    "MassParams",
    "Pose",
    "ShipModel",
    "ShipParams",
    "Vec2",
    "body_to_global",
    "rk4_step",
    "rotation_matrix",
    "wrap_angle",
    "__version__",
]
