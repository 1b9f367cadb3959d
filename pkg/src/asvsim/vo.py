"""Linear velocity-obstacle baseline with a constant-speed constraint.

Candidate own-ship velocities are constant-speed headings enumerated
outward from the goal bearing; a candidate is forbidden for a target when
the velocity relative to that target points into the collision cone (apex
at the target velocity, half-angle asin(cone_radius / separation)).  The
first admissible candidate in the enumeration wins, which makes the search
deterministic and biases ties toward small deviations and starboard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .frames import Vec2


@dataclass(frozen=True)
class VOParams:
    # cone disc calibrated so that mutual VO encounters pass at about six
    # ship lengths, matching the reference head-on/crossing behavior
    cone_radius: float = 6.0
    heading_resolution: float = math.radians(1.0)
    max_course_change: float = math.radians(90.0)
    R_safe: float = 15.0

    def __post_init__(self):
        if self.heading_resolution <= 0.0 or self.cone_radius <= 0.0:
            raise ValueError("resolution and cone_radius must be > 0")


@dataclass(frozen=True)
class CollisionCone:
    """Forbidden relative-velocity cone for one target.

    ``whole_plane`` marks targets already inside the combined radius, for
    which every candidate is counted as violating.
    """

    apex_velocity: Vec2
    axis: Vec2  # unit vector from own position toward the target
    half_angle: float
    whole_plane: bool = False

    def forbids(self, w: Vec2) -> bool:
        """True when own velocity w leads to collision with this target."""
        if self.whole_plane:
            return True
        rx = w[0] - self.apex_velocity[0]
        ry = w[1] - self.apex_velocity[1]
        dot = rx * self.axis[0] + ry * self.axis[1]
        if dot <= 0.0:
            return False
        norm = math.hypot(rx, ry)
        # inside iff angle(w_rel, axis) < half_angle
        return dot > norm * math.cos(self.half_angle)


def collision_cone(own_pos: Vec2, target_pos: Vec2, target_vel: Vec2,
                   cone_radius: float) -> CollisionCone:
    """Construct the linear velocity-obstacle cone for one target."""
    dx = target_pos[0] - own_pos[0]
    dy = target_pos[1] - own_pos[1]
    sep = math.hypot(dx, dy)
    if sep <= cone_radius:
        return CollisionCone(target_vel, (1.0, 0.0), math.pi, whole_plane=True)
    return CollisionCone(
        apex_velocity=target_vel,
        axis=(dx / sep, dy / sep),
        half_angle=math.asin(cone_radius / sep),
    )


def heading_admissible(own_pos: Vec2, own_speed: float, heading: float,
                       targets: Sequence[Tuple[Vec2, Vec2, float]],
                       p: VOParams) -> bool:
    """True when sailing `heading` at the current speed clears every cone."""
    w = (own_speed * math.cos(heading), own_speed * math.sin(heading))
    for pos, vel, radius in targets:
        if math.hypot(pos[0] - own_pos[0], pos[1] - own_pos[1]) > p.R_safe:
            continue
        if collision_cone(own_pos, pos, vel, p.cone_radius + radius).forbids(w):
            return False
    return True


def vo_desired_heading(
    own_pos: Vec2,
    own_speed: float,
    goal: Vec2,
    targets: Sequence[Tuple[Vec2, Vec2, float]],
    p: VOParams,
) -> float:
    """Heading choice at constant (current) speed clearing all cones.

    ``targets`` are (position, global velocity, effective radius) triples;
    targets beyond R_safe are ignored.  Candidates are goal bearing
    +/- i*resolution with +i checked first, so exact ties resolve to
    starboard.  If no candidate clears every cone, the candidate violating
    the fewest cones (first in enumeration order) is returned.
    """
    if own_speed <= 0.0:
        raise ValueError("own speed must be > 0 for the constant-speed search")
    goal_bearing = math.atan2(goal[1] - own_pos[1], goal[0] - own_pos[0])
    cones = []
    for pos, vel, radius in targets:
        if math.hypot(pos[0] - own_pos[0], pos[1] - own_pos[1]) > p.R_safe:
            continue
        cones.append(collision_cone(own_pos, pos, vel, p.cone_radius + radius))
    if not cones:
        return goal_bearing

    n_steps = int(round(p.max_course_change / p.heading_resolution))
    best_heading = goal_bearing
    best_violations = None
    for i in range(0, n_steps + 1):
        offsets = (i * p.heading_resolution,) if i == 0 else (
            i * p.heading_resolution, -i * p.heading_resolution)
        for off in offsets:
            heading = goal_bearing + off
            w = (own_speed * math.cos(heading), own_speed * math.sin(heading))
            violations = sum(1 for cone in cones if cone.forbids(w))
            if violations == 0:
                return heading
            if best_violations is None or violations < best_violations:
                best_violations = violations
                best_heading = heading
    return best_heading
