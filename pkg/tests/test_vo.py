import math

import pytest

from asvsim.vo import VOParams, collision_cone, heading_admissible, vo_desired_heading


class TestCollisionCone:
    def test_half_angle(self):
        cone = collision_cone((0, 0), (10, 0), (0, 0), 2.0)
        assert math.degrees(cone.half_angle) == pytest.approx(11.537, abs=1e-3)

    def test_direct_course_forbidden(self):
        cone = collision_cone((0, 0), (10, 0), (0.0, 0.0), 2.0)
        assert cone.forbids((1.0, 0.0))

    def test_perpendicular_course_allowed(self):
        cone = collision_cone((0, 0), (10, 0), (0.0, 0.0), 2.0)
        assert not cone.forbids((0.0, 1.0))

    def test_moving_target_apex_shift(self):
        # matching the target's velocity exactly can never collide
        cone = collision_cone((0, 0), (10, 0), (0.5, 0.5), 2.0)
        assert not cone.forbids((0.5, 0.5))

    def test_overlap_forbids_everything(self):
        cone = collision_cone((0, 0), (1.0, 0), (0, 0), 2.0)
        assert cone.whole_plane
        assert cone.forbids((0.0, 0.0))
        assert cone.forbids((5.0, -3.0))


class TestDesiredHeading:
    def test_no_targets_returns_goal_bearing(self):
        p = VOParams()
        out = vo_desired_heading((0, 0), 1.0, (10, 10), [], p)
        assert out == pytest.approx(math.pi / 4)

    def test_far_targets_ignored(self):
        p = VOParams(R_safe=15.0)
        out = vo_desired_heading((0, 0), 1.0, (10, 0), [((40.0, 0.0), (-1.0, 0.0), 0.0)], p)
        assert out == pytest.approx(0.0)

    def test_head_on_deviation_matches_cone_clearance(self):
        # static target dead ahead: the deviation must clear the cone
        # half-angle within one resolution step
        p = VOParams(cone_radius=2.0)
        sep = 10.0
        out = vo_desired_heading((0, 0), 1.0, (30, 0), [((sep, 0.0), (0.0, 0.0), 0.0)], p)
        half = math.asin(p.cone_radius / sep)
        assert abs(out) == pytest.approx(half, abs=p.heading_resolution + 1e-9)

    def test_starboard_preferred_on_tie(self):
        p = VOParams(cone_radius=2.0)
        out = vo_desired_heading((0, 0), 1.0, (30, 0), [((10.0, 0.0), (0.0, 0.0), 0.0)], p)
        assert out > 0.0

    def test_deviation_bounded(self):
        p = VOParams(cone_radius=6.0, max_course_change=math.radians(90.0))
        targets = [((6.5, 0.0), (0.0, 0.0), 0.0), ((8.0, 3.0), (0.0, 0.0), 0.0),
                   ((8.0, -3.0), (0.0, 0.0), 0.0)]
        out = vo_desired_heading((0, 0), 1.0, (30, 0), targets, p)
        assert abs(out) <= math.radians(90.0) + 1e-12

    def test_solution_outside_cone(self):
        p = VOParams(cone_radius=2.0)
        targets = [((10.0, 1.0), (0.0, 0.0), 0.0)]
        out = vo_desired_heading((0, 0), 1.0, (30, 0), targets, p)
        w = (math.cos(out), math.sin(out))
        cone = collision_cone((0, 0), (10.0, 1.0), (0.0, 0.0), 2.0)
        assert not cone.forbids(w)

    def test_deterministic(self):
        p = VOParams()
        targets = [((12.0, 2.0), (-0.7, 0.1), 0.0), ((9.0, -4.0), (0.2, 0.6), 0.5)]
        outs = {vo_desired_heading((0, 0), 1.0, (30, 5), targets, p) for _ in range(5)}
        assert len(outs) == 1

    def test_requires_positive_speed(self):
        with pytest.raises(ValueError):
            vo_desired_heading((0, 0), 0.0, (10, 0), [], VOParams())


class TestHeadingAdmissible:
    def test_consistent_with_search(self):
        p = VOParams(cone_radius=2.0)
        targets = [((10.0, 0.0), (0.0, 0.0), 0.0)]
        chosen = vo_desired_heading((0, 0), 1.0, (30, 0), targets, p)
        assert heading_admissible((0, 0), 1.0, chosen, targets, p)
        assert not heading_admissible((0, 0), 1.0, 0.0, targets, p)
