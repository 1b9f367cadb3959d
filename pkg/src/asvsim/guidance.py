"""ILOS waypoint guidance with anti-windup integrator and PD heading control.

The guidance law steers toward a point a look-ahead distance Delta ahead of
the cross-track foot point, with a slowly-varying integral state that keeps
the straight-line path globally asymptotically stable.  The PD law maps the
wrapped heading error to a commanded rudder angle, clamped at 35 degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

from .frames import Vec2, wrap_angle
from .mmg import DELTA_MAX, ActuatorLimits


@dataclass(frozen=True)
class ILOSParams:
    """Guidance parameters; defaults reproduce the reference tuning."""

    Delta: float = 2.0
    k_factor: float = 0.05
    R_tol: float = 3.0

    def __post_init__(self):
        if self.Delta <= 0.0 or self.R_tol <= 0.0:
            raise ValueError("Delta and R_tol must be > 0")

    @property
    def Kp_g(self) -> float:
        return 1.0 / self.Delta

    @property
    def Ki_g(self) -> float:
        return self.k_factor * self.Kp_g


@dataclass(frozen=True)
class PDGains:
    Kp_c: float = 3.5
    Kd_c: float = 4.0

    def __post_init__(self):
        if self.Kp_c <= 0.0 or self.Kd_c <= 0.0:
            raise ValueError("PD gains must be > 0")


@dataclass
class WaypointPath:
    """Ordered waypoints (first entry is the start point of the first segment).

    ``k`` indexes the active segment joining waypoints[k] -> waypoints[k+1];
    the mission is complete once the final waypoint has been captured.
    """

    waypoints: List[Vec2]
    k: int = 0

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least 2 waypoints")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if math.hypot(b[0] - a[0], b[1] - a[1]) < 1e-9:
                raise ValueError("consecutive waypoints must not coincide")

    @property
    def active_target(self) -> Vec2:
        return self.waypoints[self.k + 1]

    @property
    def active_segment(self) -> tuple:
        return self.waypoints[self.k], self.waypoints[self.k + 1]

    @property
    def on_final_segment(self) -> bool:
        return self.k + 2 >= len(self.waypoints)


@dataclass
class ILOSState:
    """Per-agent integrator state; reset to zero at every waypoint switch."""

    y_int: float = 0.0


def path_tangential_angle(wp_k: Vec2, wp_k1: Vec2) -> float:
    """Four-quadrant angle of the segment wp_k -> wp_k1."""
    dx = wp_k1[0] - wp_k[0]
    dy = wp_k1[1] - wp_k[1]
    if math.hypot(dx, dy) < 1e-9:
        raise ValueError("coincident waypoints")
    return math.atan2(dy, dx)


def track_errors(pos: Vec2, wp_k: Vec2, wp_k1: Vec2) -> tuple:
    """Along-track and cross-track errors (x_e, y_e) of pos w.r.t. the segment."""
    pi_p = path_tangential_angle(wp_k, wp_k1)
    rx = pos[0] - wp_k[0]
    ry = pos[1] - wp_k[1]
    c, s = math.cos(pi_p), math.sin(pi_p)
    return (c * rx + s * ry, -s * rx + c * ry)


def ilos_desired_heading(pi_p: float, y_e: float, y_int: float, p: ILOSParams) -> float:
    """psi_d = pi_p - atan(Kp*y_e + Ki*y_int), wrapped to (-pi, pi]."""
    return wrap_angle(pi_p - math.atan(p.Kp_g * y_e + p.Ki_g * y_int))


def ilos_integrator_derivative(y_e: float, y_int: float, p: ILOSParams) -> float:
    """Anti-windup integrator dynamics for the cross-track integral state."""
    D = p.Delta
    s = y_e + p.k_factor * y_int
    return D * y_e / (D * D + s * s)


def should_switch_waypoint(pos: Vec2, wp_k1: Vec2, R_tol: float) -> bool:
    """True once the vessel is within (<=) the switching radius of the target."""
    if R_tol <= 0.0:
        raise ValueError("R_tol must be > 0")
    return math.hypot(wp_k1[0] - pos[0], wp_k1[1] - pos[1]) <= R_tol


def pd_rudder_command(psi: float, psi_d: float, r: float, g: PDGains,
                      limits: ActuatorLimits | None = None) -> float:
    """Commanded rudder from wrapped heading error; clamped at delta_max."""
    cap = limits.delta_max if limits is not None else DELTA_MAX
    e = wrap_angle(psi - psi_d)
    delta_c = -g.Kp_c * e - g.Kd_c * r
    if delta_c > cap:
        return cap
    if delta_c < -cap:
        return -cap
    return delta_c
