import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from asvsim.frames import BodyVelocity, Pose, body_to_global, rk4_step, rotation_matrix, wrap_angle


class TestRotationMatrix:
    def test_identity_at_zero(self):
        assert np.allclose(rotation_matrix(0.0), np.eye(3))

    def test_quarter_turn(self):
        out = rotation_matrix(math.pi / 2) @ np.array([1.0, 0.0, 0.0])
        assert np.allclose(out, [0.0, 1.0, 0.0], atol=1e-15)

    def test_orthogonality(self):
        R = rotation_matrix(0.7)
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-12

    @given(st.floats(-50.0, 50.0))
    def test_orthogonal_unit_determinant(self, psi):
        R = rotation_matrix(psi)
        assert np.max(np.abs(R.T @ R - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12
        assert R[2, 2] == 1.0


class TestWrapAngle:
    @pytest.mark.parametrize("a,expected", [
        (0.0, 0.0),
        (3 * math.pi, math.pi),
        (-3 * math.pi / 2, math.pi / 2),
        (math.pi, math.pi),
        (-math.pi, math.pi),
    ])
    def test_cases(self, a, expected):
        assert wrap_angle(a) == pytest.approx(expected, abs=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        for a in rng.uniform(-100.0, 100.0, size=1000):
            w = wrap_angle(a)
            assert -math.pi < w <= math.pi
            assert wrap_angle(w) == w
            # result is congruent to the input modulo 2*pi
            assert abs((a - w) / (2 * math.pi) - round((a - w) / (2 * math.pi))) < 1e-9


class TestBodyToGlobal:
    def test_aligned(self):
        out = body_to_global(Pose(0, 0, 0.0), BodyVelocity(1.0, 0.0, 0.0))
        assert out == pytest.approx((1.0, 0.0, 0.0))

    def test_quarter_turn(self):
        out = body_to_global(Pose(0, 0, math.pi / 2), BodyVelocity(1.0, 0.0, 0.0))
        assert out == pytest.approx((0.0, 1.0, 0.0), abs=1e-15)

    def test_diagonal(self):
        out = body_to_global(Pose(0, 0, math.pi / 4), BodyVelocity(1.0, 1.0, 0.0))
        assert out == pytest.approx((0.0, math.sqrt(2.0), 0.0), abs=1e-15)


class TestRK4:
    def test_zero_derivative(self):
        s = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(rk4_step(lambda _: np.zeros(3), s, 0.1), s)

    def test_exact_for_constant(self):
        c = np.array([2.0, -1.0])
        out = rk4_step(lambda _: c, np.array([0.0, 0.0]), 0.25)
        assert np.array_equal(out, c * 0.25)

    def _oscillator_error(self, dt, t_end=10.0):
        f = lambda s: np.array([s[1], -s[0]])
        s = np.array([1.0, 0.0])
        n = int(round(t_end / dt))
        for _ in range(n):
            s = rk4_step(f, s, dt)
        exact = np.array([math.cos(t_end), -math.sin(t_end)])
        return np.linalg.norm(s - exact), abs(np.linalg.norm(s) - 1.0)

    def test_oscillator_amplitude(self):
        _, amp_err = self._oscillator_error(0.01)
        assert amp_err < 1e-8

    def test_fourth_order_convergence(self):
        coarse, _ = self._oscillator_error(0.02)
        fine, _ = self._oscillator_error(0.01)
        assert coarse / fine >= 15.0

    def test_nonfinite_derivative_reported(self):
        with pytest.raises(ValueError):
            rk4_step(lambda s: np.array([math.inf]), np.array([0.0]), 0.1)

    def test_nonpositive_dt_rejected(self):
        with pytest.raises(ValueError):
            rk4_step(lambda s: s, np.array([1.0]), 0.0)


def test_pose_normalizes_heading():
    assert Pose(0.0, 0.0, 3 * math.pi).psi == pytest.approx(math.pi)
