"""Gesture vocabulary and the gesture -> action state machine.

Execution semantics: a candidate class must persist for a dwell period
(default 20 ticks = 0.1 s at 200 Hz) before activating; active motion
gestures emit their velocity profile every tick; contact lift-off ends a
gesture in the same tick; a sustained run of invalid detections ends it
too; a newly dwell-qualified gesture preempts the current one atomically;
the two five-finger gestures trigger pose recovery during which all
detections are ignored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .poses import Pose, Twist, integrate_pose, interpolate_poses


class GestureClass(enum.IntEnum):
    TRANSLATE_X_POS = 0   # two-finger pinch-in
    TRANSLATE_X_NEG = 1   # single-finger push (rising pressure)
    TRANSLATE_Y_POS = 2   # single-finger rightward swipe
    TRANSLATE_Y_NEG = 3   # single-finger leftward swipe
    TRANSLATE_Z_POS = 4   # single-finger upward swipe
    TRANSLATE_Z_NEG = 5   # single-finger downward swipe
    ROTATE_X_POS = 6      # two-finger clockwise circular stroke
    ROTATE_X_NEG = 7      # two-finger anti-clockwise circular stroke
    ROTATE_Y_POS = 8      # two-finger upward swipe
    ROTATE_Y_NEG = 9      # two-finger downward swipe
    ROTATE_Z_POS = 10     # two-finger rightward swipe
    ROTATE_Z_NEG = 11     # two-finger leftward swipe
    AUX_INIT_POSE = 12    # five-finger pinch-in
    AUX_HOME = 13         # five-finger pinch-out
    INVALID = 14

    @property
    def short_name(self) -> str:
        return self.name.lower()

    @staticmethod
    def from_name(name: str) -> "GestureClass":
        return GestureClass[name.upper()]


N_CLASSES = len(GestureClass)

MOTION_CLASSES = tuple(g for g in GestureClass if g < GestureClass.AUX_INIT_POSE)
AUX_CLASSES = (GestureClass.AUX_INIT_POSE, GestureClass.AUX_HOME)

FINGER_COUNT = {
    GestureClass.TRANSLATE_X_POS: 2,
    GestureClass.TRANSLATE_X_NEG: 1,
    GestureClass.TRANSLATE_Y_POS: 1,
    GestureClass.TRANSLATE_Y_NEG: 1,
    GestureClass.TRANSLATE_Z_POS: 1,
    GestureClass.TRANSLATE_Z_NEG: 1,
    GestureClass.ROTATE_X_POS: 2,
    GestureClass.ROTATE_X_NEG: 2,
    GestureClass.ROTATE_Y_POS: 2,
    GestureClass.ROTATE_Y_NEG: 2,
    GestureClass.ROTATE_Z_POS: 2,
    GestureClass.ROTATE_Z_NEG: 2,
    GestureClass.AUX_INIT_POSE: 5,
    GestureClass.AUX_HOME: 5,
}


class NoVelocityProfileError(ValueError):
    """Requested a velocity profile for a non-motion class."""


class RecoveryTargetError(ValueError):
    """Auxiliary recovery requested but the target pose is unset."""


@dataclass(frozen=True)
class ControlConfig:
    dt: float = 1.0 / 200.0
    dwell_ticks: int = 20             # 0.1 s at 200 Hz
    invalid_release_ticks: int = 5    # sustained-invalid deactivation
    linear_speed: float = 0.05        # m/s per translation gesture
    angular_speed: float = 0.2        # rad/s per rotation gesture
    recover_linear_speed: float = 0.2
    recover_angular_speed: float = 0.5
    initial_pose: Pose | None = None
    home_pose: Pose | None = None


_AXIS = {0: (1.0, 0.0, 0.0), 1: (-1.0, 0.0, 0.0),
         2: (0.0, 1.0, 0.0), 3: (0.0, -1.0, 0.0),
         4: (0.0, 0.0, 1.0), 5: (0.0, 0.0, -1.0)}


def velocity_profile(gesture: GestureClass,
                     cfg: ControlConfig = ControlConfig()) -> Twist:
    """Map a motion gesture to its fixed body-frame twist."""
    if gesture not in MOTION_CLASSES:
        raise NoVelocityProfileError(f"{gesture.name} has no velocity profile")
    idx = int(gesture)
    if idx < 6:
        ax = _AXIS[idx]
        return Twist(linear=tuple(cfg.linear_speed * a for a in ax))
    ax = _AXIS[idx - 6]
    return Twist(angular=tuple(cfg.angular_speed * a for a in ax))


@dataclass(frozen=True)
class AuxAction:
    """Recovery command emitted when a five-finger gesture activates."""

    target: str                  # "initial" | "home"
    target_pose: Pose
    n_ticks: int                 # length of the recovery trajectory


@dataclass(frozen=True)
class SessionState:
    """Full state of the gesture session at one tick."""

    pose: Pose
    initial_pose: Pose
    home_pose: Pose
    active: GestureClass | None = None
    candidate: GestureClass | None = None
    dwell_count: int = 0
    invalid_count: int = 0
    aux_in_progress: bool = False
    recovery: tuple[Pose, ...] = field(default=())
    recovery_idx: int = 0


def initial_state(cfg: ControlConfig) -> SessionState:
    if cfg.initial_pose is None or cfg.home_pose is None:
        raise RecoveryTargetError("initial_pose and home_pose must be configured")
    return SessionState(pose=cfg.initial_pose, initial_pose=cfg.initial_pose,
                        home_pose=cfg.home_pose)


def aux_recover(state: SessionState, target: str,
                cfg: ControlConfig = ControlConfig()) -> tuple[Pose, ...]:
    """Plan a straight-line + shortest-arc trajectory to a recovery target.

    The trajectory is sampled at cfg.dt and ends exactly on the target; an
    empty tuple means the pose is already there.
    """
    if target == "initial":
        goal = state.initial_pose
    elif target == "home":
        goal = state.home_pose
    else:
        raise RecoveryTargetError(f"unknown recovery target {target!r}")
    if goal is None:
        raise RecoveryTargetError(f"{target} pose is not configured")
    dist = state.pose.distance_to(goal)
    angle = state.pose.angle_to(goal)
    duration = max(dist / cfg.recover_linear_speed,
                   angle / cfg.recover_angular_speed)
    if duration <= 0.0:
        return ()
    n_steps = max(1, math.ceil(duration / cfg.dt - 1e-12))
    return interpolate_poses(state.pose, goal, n_steps)


StepOutput = Twist | AuxAction | None


def _emit_active(state: SessionState, cfg: ControlConfig) -> tuple[SessionState, Twist]:
    twist = velocity_profile(state.active, cfg)
    return replace(state, pose=integrate_pose(state.pose, twist, cfg.dt)), twist


def step(state: SessionState, detected: GestureClass, contact_present: bool,
         cfg: ControlConfig = ControlConfig()) -> tuple[SessionState, StepOutput]:
    """Advance the state machine by one frame tick.

    Total function: every (state, detection, contact) combination yields a
    successor state plus at most one emission for this tick.
    """
    # auxiliary recovery overrides everything until its trajectory finishes
    if state.aux_in_progress:
        idx = state.recovery_idx
        if idx < len(state.recovery):
            pose = state.recovery[idx]
            idx += 1
        else:
            pose = state.pose
        done = idx >= len(state.recovery)
        return replace(state, pose=pose,
                       recovery=() if done else state.recovery,
                       recovery_idx=0 if done else idx,
                       aux_in_progress=not done,
                       active=None, candidate=None,
                       dwell_count=0, invalid_count=0), None

    if not contact_present:
        return replace(state, active=None, candidate=None,
                       dwell_count=0, invalid_count=0), None

    if detected == GestureClass.INVALID:
        state = replace(state, candidate=None, dwell_count=0)
        if state.active is None:
            return state, None
        inv = state.invalid_count + 1
        if inv >= cfg.invalid_release_ticks:
            return replace(state, active=None, invalid_count=0), None
        state = replace(state, invalid_count=inv)
        return _emit_active(state, cfg)

    state = replace(state, invalid_count=0)

    if detected == state.active:
        state = replace(state, candidate=None, dwell_count=0)
        return _emit_active(state, cfg)

    # a different (non-invalid) class: accumulate dwell toward activation
    if detected == state.candidate:
        dwell = state.dwell_count + 1
    else:
        dwell = 1
    state = replace(state, candidate=detected, dwell_count=dwell)

    if dwell < cfg.dwell_ticks:
        if state.active is not None:
            return _emit_active(state, cfg)
        return state, None

    # dwell satisfied: atomic activation (preempts any current gesture)
    state = replace(state, candidate=None, dwell_count=0)
    if detected in AUX_CLASSES:
        target = "initial" if detected == GestureClass.AUX_INIT_POSE else "home"
        traj = aux_recover(state, target, cfg)
        goal = state.initial_pose if target == "initial" else state.home_pose
        action = AuxAction(target=target, target_pose=goal, n_ticks=len(traj))
        state = replace(state, active=None, aux_in_progress=len(traj) > 0,
                        recovery=traj, recovery_idx=0)
        return state, action
    state = replace(state, active=detected)
    return _emit_active(state, cfg)
