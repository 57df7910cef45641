import numpy as np
import pytest

from weavetouch.poses import (Pose, Twist, integrate_pose, interpolate_poses,
                              quat_angle, quat_exp, quat_multiply,
                              quat_normalize, quat_slerp, quat_to_matrix)


class TestQuaternionOps:
    def test_exp_of_zero_is_identity(self):
        np.testing.assert_allclose(quat_exp(np.zeros(3)), [1, 0, 0, 0])

    def test_exp_quarter_turn_z(self):
        q = quat_exp(np.array([0.0, 0.0, np.pi / 2]))
        np.testing.assert_allclose(q, [np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)],
                                   atol=1e-12)

    def test_multiply_matches_matrix_composition(self, rng):
        for _ in range(20):
            a = quat_normalize(rng.normal(size=4))
            b = quat_normalize(rng.normal(size=4))
            lhs = quat_to_matrix(quat_multiply(a, b))
            rhs = quat_to_matrix(a) @ quat_to_matrix(b)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_slerp_endpoints_exact(self, rng):
        a = quat_normalize(rng.normal(size=4))
        b = quat_normalize(rng.normal(size=4))
        np.testing.assert_array_equal(quat_slerp(a, b, 0.0), a)
        got = quat_slerp(a, b, 1.0)
        assert np.array_equal(got, b) or np.array_equal(got, -b)

    def test_slerp_constant_angular_rate(self, rng):
        a = quat_normalize(np.array([1.0, 0, 0, 0]))
        b = quat_exp(np.array([0.0, 0.9, 0.0]))
        angles = [quat_angle(a, quat_slerp(a, b, t)) for t in np.linspace(0, 1, 11)]
        np.testing.assert_allclose(np.diff(angles), 0.09, atol=1e-9)


class TestIntegratePose:
    def test_zero_twist_is_identity(self):
        pose = Pose(position=(1, 2, 3))
        out = integrate_pose(pose, Twist(), 0.005)
        assert out == pose

    def test_linear_motion_accumulates_exactly(self):
        pose = Pose()
        twist = Twist(linear=(0.0, 0.0, 0.05))
        for _ in range(200):
            pose = integrate_pose(pose, twist, 1.0 / 200.0)
        assert pose.position[2] == pytest.approx(0.05, abs=1e-9)
        assert pose.position[0] == 0.0 and pose.position[1] == 0.0

    def test_quarter_turn_about_z(self):
        pose = Pose()
        twist = Twist(angular=(0.0, 0.0, np.pi / 2))
        for _ in range(200):
            pose = integrate_pose(pose, twist, 1.0 / 200.0)
        expect = (np.cos(np.pi / 4), 0.0, 0.0, np.sin(np.pi / 4))
        np.testing.assert_allclose(pose.orientation, expect, atol=1e-6)

    def test_body_frame_linear_follows_orientation(self):
        # rotate 90 degrees about z, then body-x motion goes along world-y
        pose = Pose(orientation=tuple(quat_exp(np.array([0, 0, np.pi / 2]))))
        pose = integrate_pose(pose, Twist(linear=(1.0, 0.0, 0.0)), 1.0)
        np.testing.assert_allclose(pose.position, [0.0, 1.0, 0.0], atol=1e-12)

    def test_norm_drift_under_1e9_over_1e5_steps(self):
        pose = Pose()
        twist = Twist(angular=(0.3, -0.2, 0.1))
        for _ in range(100_000):
            pose = integrate_pose(pose, twist, 1.0 / 200.0)
        norm = np.linalg.norm(pose.orientation)
        assert abs(norm - 1.0) < 1e-9

    def test_four_quarter_turns_return_to_identity(self):
        pose = Pose()
        twist = Twist(angular=(0.0, 0.0, np.pi / 2))
        for _ in range(4 * 200):
            pose = integrate_pose(pose, twist, 1.0 / 200.0)
        q = np.array(pose.orientation)
        identity = np.array([1.0, 0, 0, 0])
        # a full turn may land on -q which is the same rotation
        assert min(np.linalg.norm(q - identity),
                   np.linalg.norm(q + identity)) < 1e-6
        np.testing.assert_allclose(pose.position, [0, 0, 0], atol=1e-12)


class TestInterpolatePoses:
    def test_reaches_target_exactly(self):
        start = Pose()
        target = Pose(position=(0.2, -0.1, 0.4),
                      orientation=tuple(quat_exp(np.array([0.1, 0.2, -0.3]))))
        traj = interpolate_poses(start, target, 57)
        assert len(traj) == 57
        assert traj[-1] == target

    def test_positions_linear(self):
        start = Pose(position=(0.0, 0.0, 0.0))
        target = Pose(position=(1.0, 0.0, 0.0))
        traj = interpolate_poses(start, target, 4)
        xs = [p.position[0] for p in traj]
        np.testing.assert_allclose(xs, [0.25, 0.5, 0.75, 1.0])

    def test_zero_steps_empty(self):
        assert interpolate_poses(Pose(), Pose(), 0) == ()
