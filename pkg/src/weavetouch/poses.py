"""Task-space pose state: quaternions, twists and velocity integration.

Quaternions are float64 arrays ordered [w, x, y, z] and kept unit-norm.
Twists are expressed in the end-effector (body) frame, so integration maps
linear velocity through the current orientation and composes the angular
part on the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    return q / np.linalg.norm(q)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_exp(rotvec: np.ndarray) -> np.ndarray:
    """Exponential map: rotation vector (axis * angle) -> unit quaternion."""
    rotvec = np.asarray(rotvec, dtype=np.float64)
    angle = np.linalg.norm(rotvec)
    half = 0.5 * angle
    if angle < 1e-12:
        # second-order series keeps the map smooth through zero
        return quat_normalize(np.array([1.0 - half * half / 2.0,
                                        *(0.5 * rotvec)]))
    axis = rotvec / angle
    return np.array([np.cos(half), *(np.sin(half) * axis)])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Geodesic rotation angle between two orientations (shortest arc)."""
    dot = min(1.0, abs(float(np.dot(a, b))))
    return 2.0 * float(np.arccos(dot))


def quat_slerp(a: np.ndarray, b: np.ndarray, tau: float) -> np.ndarray:
    """Shortest-arc spherical interpolation; exact at the endpoints."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if tau <= 0.0:
        return a.copy()
    if tau >= 1.0:
        return b.copy()
    if dot > 1.0 - 1e-12:
        return quat_normalize(a + tau * (b - a))
    theta = np.arccos(min(1.0, dot))
    s = np.sin(theta)
    return quat_normalize((np.sin((1.0 - tau) * theta) / s) * a +
                          (np.sin(tau * theta) / s) * b)


@dataclass(frozen=True)
class Twist:
    """Body-frame velocity command: linear in m/s, angular in rad/s."""

    linear: tuple[float, float, float] = (0.0, 0.0, 0.0)
    angular: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def is_zero(self) -> bool:
        return not any(self.linear) and not any(self.angular)


@dataclass(frozen=True)
class Pose:
    """Position (m) plus unit-quaternion orientation."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    def position_array(self) -> np.ndarray:
        return np.array(self.position, dtype=np.float64)

    def orientation_array(self) -> np.ndarray:
        return np.array(self.orientation, dtype=np.float64)

    def distance_to(self, other: "Pose") -> float:
        return float(np.linalg.norm(self.position_array() - other.position_array()))

    def angle_to(self, other: "Pose") -> float:
        return quat_angle(self.orientation_array(), other.orientation_array())

    def is_close(self, other: "Pose", lin_tol: float = 1e-9,
                 ang_tol: float = 1e-9) -> bool:
        return self.distance_to(other) <= lin_tol and self.angle_to(other) <= ang_tol


def integrate_pose(pose: Pose, twist: Twist, dt: float) -> Pose:
    """Advance a pose by one tick of a body-frame twist.

    position += R(q) * linear * dt; orientation composes with the
    exponential of angular * dt and is renormalized every step.
    """
    q = pose.orientation_array()
    p = pose.position_array()
    v = np.array(twist.linear, dtype=np.float64)
    w = np.array(twist.angular, dtype=np.float64)
    p = p + quat_to_matrix(q) @ (v * dt)
    q = quat_normalize(quat_multiply(q, quat_exp(w * dt)))
    return Pose(position=tuple(p), orientation=tuple(q))


def interpolate_poses(start: Pose, target: Pose, n_steps: int) -> tuple[Pose, ...]:
    """n_steps poses from just after start to exactly target (lerp + slerp)."""
    if n_steps <= 0:
        return ()
    p0 = start.position_array()
    p1 = target.position_array()
    q0 = start.orientation_array()
    q1 = target.orientation_array()
    poses = []
    for k in range(1, n_steps):
        tau = k / n_steps
        poses.append(Pose(position=tuple(p0 + tau * (p1 - p0)),
                          orientation=tuple(quat_slerp(q0, q1, tau))))
    poses.append(target)
    return tuple(poses)
