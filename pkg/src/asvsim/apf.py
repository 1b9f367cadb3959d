"""Reactive guidance from artificial potential fields.

Three field families:

* inverse-square: quadratic attraction to the goal plus the classical
  inverse-square repulsion inside an influence distance d0;
* sink-vortex: a harmonic sink at the goal and a harmonic vortex of fixed
  strength at each detected obstacle;
* modified sink-vortex: as above, but the vortex strength is gated by the
  relative bearing gamma and the radial/tangential relative velocity and
  scaled up with collision risk, which yields COLREGS-consistent behavior.

The vortex Cartesian form is v = (K / (2 pi r^2)) * (-dy, dx) in the z-down
global frame, so the default negative vortex strength deflects a head-on
approacher to starboard.  Channel walls are modeled as line sources active
within a threshold distance of the wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .frames import Vec2, wrap_angle
from .mmg import DynamicState

TWO_PI = 2.0 * math.pi

# Gradient/velocity magnitudes below this are treated as stagnation.
STAGNATION_EPS = 1e-9


class FieldSingularity(ValueError):
    """Raised when a field is evaluated at its singular point."""


@dataclass(frozen=True)
class StaticObstacle:
    center: Vec2
    R_obs: float

    def __post_init__(self):
        if self.R_obs <= 0.0:
            raise ValueError("R_obs must be > 0")


#: encounter classes assigned when a dynamic target first enters the
#: detection radius; the class persists until the pair separates again
ENCOUNTER_ACTIVE = "active"
ENCOUNTER_OVERTAKEN = "overtaken"
ENCOUNTER_STAND_ON = "stand_on"

#: bearing margin around dead-ahead treated as a head-on (both vessels keep
#: their vortex; no stand-on exemption), per the nearly-reciprocal-course rule
HEAD_ON_BEARING_MARGIN = math.radians(6.0)


@dataclass(frozen=True)
class ObstacleView:
    """Snapshot of an obstacle as seen by the guidance: position, global
    velocity (zero for static), an effective radius (zero for vessels), and
    the encounter class assigned when the pair came into detection range."""

    position: Vec2
    velocity_global: Vec2
    is_dynamic: bool
    radius: float = 0.0
    encounter_class: str = ENCOUNTER_ACTIVE


@dataclass(frozen=True)
class InverseSquareParams:
    k_att: float = 50.0
    k_rep: float = 200000.0
    d0: float = 15.0

    def __post_init__(self):
        if self.k_att <= 0.0 or self.k_rep <= 0.0 or self.d0 <= 0.0:
            raise ValueError("inverse-square parameters must be > 0")


@dataclass(frozen=True)
class HarmonicParams:
    Lambda_sink: float = -100.0
    K_vor0: float = -10.0
    R_safe: float = 15.0
    R_tol_vortex: float = 3.0
    # range inside which a stand-on/overtaken vessel abandons its passive
    # duty when the give-way ship has evidently failed to act
    in_extremis_range: float = 10.0

    def __post_init__(self):
        if self.Lambda_sink >= 0.0:
            raise ValueError("Lambda_sink must be < 0 (sink)")
        if self.R_safe <= 0.0:
            raise ValueError("R_safe must be > 0")


@dataclass(frozen=True)
class ChannelBoundary:
    """Two parallel channel walls, each given as a line segment.

    Line sources on the walls repel the vessel toward the channel interior
    whenever it is within ``activation_distance`` of a wall.
    """

    boundary_a: Tuple[Vec2, Vec2]
    boundary_b: Tuple[Vec2, Vec2]
    activation_distance: float = 2.0
    Lambda_src: float = 10.0

    def __post_init__(self):
        if self.activation_distance <= 0.0 or self.Lambda_src <= 0.0:
            raise ValueError("activation distance and source strength must be > 0")

    def _line_frame(self, seg: Tuple[Vec2, Vec2]) -> Tuple[Vec2, Vec2]:
        (x0, y0), (x1, y1) = seg
        dx, dy = x1 - x0, y1 - y0
        L = math.hypot(dx, dy)
        if L < 1e-9:
            raise ValueError("degenerate boundary segment")
        return (x0, y0), (dx / L, dy / L)

    def signed_offsets(self, pos: Vec2) -> Tuple[float, float]:
        """Perpendicular distances from pos to wall lines a and b (unsigned),
        plus a sign convention check that pos lies between the walls."""
        da = self._perp_distance(pos, self.boundary_a)
        db = self._perp_distance(pos, self.boundary_b)
        return da, db

    def _perp_distance(self, pos: Vec2, seg: Tuple[Vec2, Vec2]) -> float:
        origin, t = self._line_frame(seg)
        rx, ry = pos[0] - origin[0], pos[1] - origin[1]
        return abs(-t[1] * rx + t[0] * ry)

    def width(self) -> float:
        # distance between the (parallel) wall lines
        return self._perp_distance(self.boundary_b[0], self.boundary_a)

    def contains(self, pos: Vec2) -> bool:
        da, db = self.signed_offsets(pos)
        w = self.width()
        return da <= w + 1e-9 and db <= w + 1e-9


def obstacle_clearance(pos: Vec2, obs: StaticObstacle) -> float:
    """Center distance minus obstacle radius; raises if non-positive."""
    rho = math.hypot(pos[0] - obs.center[0], pos[1] - obs.center[1]) - obs.R_obs
    if rho <= 0.0:
        raise FieldSingularity(f"vessel inside obstacle disc (clearance {rho:.3g})")
    return rho


def inverse_square_gradient(
    pos: Vec2,
    goal: Vec2,
    obstacles: Sequence[ObstacleView],
    p: InverseSquareParams,
) -> Vec2:
    """Steepest-descent direction -grad(phi) of the inverse-square field.

    The attractive term is -k_att * (pos - goal); each obstacle with
    clearance rho <= d0 adds
    2 k_rep (pos - X_o) / (rho^2 (rho + R_obs)) * (1/rho - 1/d0).
    Obstacles farther than d0 contribute nothing.
    """
    gx = -p.k_att * (pos[0] - goal[0])
    gy = -p.k_att * (pos[1] - goal[1])
    for ob in obstacles:
        dx = pos[0] - ob.position[0]
        dy = pos[1] - ob.position[1]
        dist = math.hypot(dx, dy)
        rho = dist - ob.radius
        if rho <= 0.0:
            raise FieldSingularity("vessel inside obstacle disc")
        if rho > p.d0:
            continue
        coef = 2.0 * p.k_rep * (1.0 / rho - 1.0 / p.d0) / (rho * rho * dist)
        gx += coef * dx
        gy += coef * dy
    return (gx, gy)


def sink_velocity(pos: Vec2, goal: Vec2, Lambda: float) -> Vec2:
    """Radial harmonic flow of strength Lambda centered at the goal."""
    dx = pos[0] - goal[0]
    dy = pos[1] - goal[1]
    r_sq = dx * dx + dy * dy
    if r_sq < STAGNATION_EPS * STAGNATION_EPS:
        raise FieldSingularity("sink evaluated at its center")
    coef = Lambda / (TWO_PI * r_sq)
    return (coef * dx, coef * dy)


def vortex_velocity(pos: Vec2, center: Vec2, K: float) -> Vec2:
    """Tangential harmonic flow of strength K centered at the obstacle."""
    dx = pos[0] - center[0]
    dy = pos[1] - center[1]
    r_sq = dx * dx + dy * dy
    if r_sq < STAGNATION_EPS * STAGNATION_EPS:
        raise FieldSingularity("vortex evaluated at its center")
    coef = K / (TWO_PI * r_sq)
    return (-coef * dy, coef * dx)


def bearing_gamma(own_pose, obs_pos: Vec2) -> float:
    """Bearing of the obstacle relative to the vessel's bow, in (-pi, pi]."""
    dx = obs_pos[0] - own_pose.x
    dy = obs_pos[1] - own_pose.y
    if math.hypot(dx, dy) < 1e-12:
        raise FieldSingularity("coincident vessel and obstacle positions")
    return wrap_angle(math.atan2(dy, dx) - own_pose.psi)


def relative_velocity(own: DynamicState, obs: ObstacleView) -> Vec2:
    """Obstacle velocity relative to the vessel, in the global frame.

    Static obstacles: -R(psi) nu.  Dynamic obstacles: V_obs - R(psi) nu,
    where V_obs is the obstacle's global-frame velocity.
    """
    c, s = math.cos(own.pose.psi), math.sin(own.pose.psi)
    own_vx = c * own.nu.u - s * own.nu.v
    own_vy = s * own.nu.u + c * own.nu.v
    if obs.is_dynamic:
        return (obs.velocity_global[0] - own_vx, obs.velocity_global[1] - own_vy)
    return (-own_vx, -own_vy)


def radial_tangential(V_rel: Vec2, gamma: float, own_psi: float) -> Tuple[float, float]:
    """Radial and tangential components of the relative velocity.

    V_rel (global frame) is expressed in the body frame (rotation by -psi)
    and then rotated by the bearing gamma, so the components align with the
    line of sight: v_r < 0 means the obstacle is closing, and v_theta is
    the transversal rate (positive when the target drifts toward larger
    bearings, i.e. starboard-abaft).
    """
    c, s = math.cos(own_psi), math.sin(own_psi)
    bx = c * V_rel[0] + s * V_rel[1]
    by = -s * V_rel[0] + c * V_rel[1]
    cg, sg = math.cos(gamma), math.sin(gamma)
    v_r = cg * bx + sg * by
    v_theta = -sg * bx + cg * by
    return v_r, v_theta


def vortex_scale_factor(separation: float, v_r: float, R_safe: float) -> float:
    """Risk scaling f >= 1; grows as separation shrinks or closing speed rises."""
    if separation <= 0.0:
        raise ValueError("separation must be > 0")
    return max(1.0, 2.0 - separation / R_safe - v_r)


def classify_encounter(own: DynamicState, obs: ObstacleView) -> str:
    """Assign the COLREGS encounter class when a dynamic target is first
    detected; the caller keeps the class until the pair is past and clear.

    * target abaft the 5 pi / 8 bearing: it is overtaking us, we stand on;
    * target on the port bow while we sit on its starboard bow: a crossing
      in which the other ship gives way, so we stand on;
    * anything else (head-on sector, give-way crossing, us overtaking):
      the vortex gate stays armed.
    """
    gamma = bearing_gamma(own.pose, obs.position)
    if abs(gamma) > 5.0 * math.pi / 8.0:
        return ENCOUNTER_OVERTAKEN
    if obs.is_dynamic and -5.0 * math.pi / 8.0 < gamma < -HEAD_ON_BEARING_MARGIN:
        vx, vy = obs.velocity_global
        if math.hypot(vx, vy) > 1e-6:
            target_course = math.atan2(vy, vx)
            gamma_t = wrap_angle(
                math.atan2(own.pose.y - obs.position[1],
                           own.pose.x - obs.position[0]) - target_course)
            if HEAD_ON_BEARING_MARGIN < gamma_t < 5.0 * math.pi / 8.0:
                return ENCOUNTER_STAND_ON
    return ENCOUNTER_ACTIVE


def _in_extremis(sep: float, v_r: float, v_theta: float, p: HarmonicParams) -> bool:
    """True when a passive vessel must act after all: the closing is real,
    the range is short, and the straight-line pass prediction is inside the
    collision radius (the give-way ship has evidently not resolved it)."""
    if v_r >= 0.0 or sep > p.in_extremis_range:
        return False
    return abs(v_theta) * sep / -v_r < p.R_tol_vortex


def modified_vortex_strength(own: DynamicState, obs: ObstacleView, p: HarmonicParams) -> float:
    """Gated vortex strength for one obstacle.

    Passive encounter classes (stand-on, being overtaken) keep the vortex
    at zero unless the in-extremis test fires.  For armed encounters the
    vortex is zero when the obstacle is already passing clear
    (v_theta > -2 R_tol / separation * v_r) or lies abaft the 5 pi / 8
    bearing; otherwise f * K_vor0.
    """
    gamma = bearing_gamma(own.pose, obs.position)
    sep = math.hypot(obs.position[0] - own.pose.x, obs.position[1] - own.pose.y)
    v_r, v_theta = radial_tangential(relative_velocity(own, obs), gamma, own.pose.psi)
    if obs.encounter_class != ENCOUNTER_ACTIVE:
        if not _in_extremis(sep, v_r, v_theta, p):
            return 0.0
    elif abs(gamma) > 5.0 * math.pi / 8.0:
        return 0.0
    elif v_theta > (-2.0 * p.R_tol_vortex / sep) * v_r:
        return 0.0
    return vortex_scale_factor(sep, v_r, p.R_safe) * p.K_vor0


def boundary_source_velocity(pos: Vec2, ch: ChannelBoundary) -> Vec2:
    """Summed line-source flow from channel walls within activation distance.

    Each active wall contributes magnitude Lambda_src / (2 pi dist) directed
    perpendicular to the wall, toward the channel centerline.
    """
    if not ch.contains(pos):
        raise FieldSingularity("position outside the channel")
    vx = vy = 0.0
    for seg, other in ((ch.boundary_a, ch.boundary_b), (ch.boundary_b, ch.boundary_a)):
        origin, t = ch._line_frame(seg)
        rx, ry = pos[0] - origin[0], pos[1] - origin[1]
        off = -t[1] * rx + t[0] * ry
        dist = abs(off)
        if dist > ch.activation_distance:
            continue
        dist = max(dist, 1e-9)
        # normal pointing from this wall toward the other wall
        ox, oy = other[0][0] - origin[0], other[0][1] - origin[1]
        side = -t[1] * ox + t[0] * oy
        sign = 1.0 if side >= 0.0 else -1.0
        mag = ch.Lambda_src / (TWO_PI * dist)
        vx += mag * sign * (-t[1])
        vy += mag * sign * t[0]
    return (vx, vy)


def reactive_active(own_pos: Vec2, obstacles: Sequence[ObstacleView], R_safe: float) -> bool:
    """True when any obstacle center is within the detection radius."""
    for ob in obstacles:
        if math.hypot(ob.position[0] - own_pos[0], ob.position[1] - own_pos[1]) <= R_safe:
            return True
    return False


def desired_heading_harmonic(
    own: DynamicState,
    goal: Vec2,
    obstacles: Sequence[ObstacleView],
    boundaries: Optional[ChannelBoundary],
    p: HarmonicParams,
    modified: bool = True,
    prev_psi_d: Optional[float] = None,
) -> float:
    """Heading of the composed sink + vortex (+ wall source) flow field.

    With ``modified`` the per-obstacle vortex strength passes through the
    COLREGS gate; otherwise every detected obstacle gets K_vor0.  Falls back
    to ``prev_psi_d`` (or the current heading) at stagnation points.
    """
    pos = (own.pose.x, own.pose.y)
    vx, vy = sink_velocity(pos, goal, p.Lambda_sink)
    for ob in obstacles:
        sep = math.hypot(ob.position[0] - pos[0], ob.position[1] - pos[1])
        if sep > p.R_safe:
            continue
        K = modified_vortex_strength(own, ob, p) if modified else p.K_vor0
        if K == 0.0:
            continue
        wx, wy = vortex_velocity(pos, ob.position, K)
        vx += wx
        vy += wy
    if boundaries is not None:
        bx, by = boundary_source_velocity(pos, boundaries)
        vx += bx
        vy += by
    if math.hypot(vx, vy) < STAGNATION_EPS:
        return prev_psi_d if prev_psi_d is not None else own.pose.psi
    return math.atan2(vy, vx)


def desired_heading_inverse_square(
    own: DynamicState,
    goal: Vec2,
    obstacles: Sequence[ObstacleView],
    p: InverseSquareParams,
    prev_psi_d: Optional[float] = None,
) -> float:
    """Heading of the inverse-square steepest-descent direction."""
    pos = (own.pose.x, own.pose.y)
    gx, gy = inverse_square_gradient(pos, goal, obstacles, p)
    if math.hypot(gx, gy) < STAGNATION_EPS:
        return prev_psi_d if prev_psi_d is not None else own.pose.psi
    return math.atan2(gy, gx)
