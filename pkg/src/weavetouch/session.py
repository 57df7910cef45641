"""Streaming session runtime: frames in, classified state events out.

Per 200 Hz tick: baseline-subtract, moving-average filter, slide the
30-frame window, classify (stride 1), feed the state machine, emit one
StateEvent.  The first 100 frames of a stream are consumed for baseline
calibration and produce no events.  Identical input streams and configs
produce identical event logs.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from . import control
from .control import AuxAction, ControlConfig, GestureClass, SessionState
from .grid import (CALIBRATION_FRAMES, FILTER_WINDOW, MovingAverageFilter,
                   RawFrame, calibrate, subtract_baseline)
from .poses import Pose, Twist

EVENT_SCHEMA_VERSION = 1
WINDOW_FRAMES = 30
DEFAULT_CONTACT_THRESHOLD = 0.05


@dataclass
class SessionConfig:
    frame_rate: float = 200.0
    window: int = WINDOW_FRAMES
    calibration_frames: int = CALIBRATION_FRAMES
    filter_window: int = FILTER_WINDOW
    contact_threshold: float = DEFAULT_CONTACT_THRESHOLD
    control: ControlConfig = field(default_factory=lambda: ControlConfig(
        initial_pose=Pose(), home_pose=Pose()))

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError("frame rate must be positive")


@dataclass
class StateEvent:
    """One tick of session output (line-delimited JSON on the wire)."""

    tick: int
    detected: GestureClass
    probs: np.ndarray               # (15,) class probabilities
    active: GestureClass | None
    twist: Twist | None
    aux: str | None
    pose: Pose

    def to_json(self) -> str:
        rec = {
            "v": EVENT_SCHEMA_VERSION,
            "tick": self.tick,
            "detected": self.detected.short_name,
            "probs": [round(float(p), 6) for p in self.probs],
            "active": self.active.short_name if self.active is not None else None,
            "twist": ({"linear": list(self.twist.linear),
                       "angular": list(self.twist.angular)}
                      if self.twist is not None else None),
            "aux": self.aux,
            "pose": {"position": [round(float(x), 9) for x in self.pose.position],
                     "orientation": [round(float(x), 9)
                                     for x in self.pose.orientation]},
        }
        return json.dumps(rec, separators=(",", ":"))


class SessionRunner:
    """Incremental pipeline; push raw frames, pull state events."""

    def __init__(self, model, cfg: SessionConfig):
        self.model = model
        self.cfg = cfg
        self._cal_buffer: list[RawFrame] = []
        self._baseline = None
        self._filter = MovingAverageFilter(cfg.filter_window)
        self._window: deque[np.ndarray] = deque(maxlen=cfg.window)
        self._state = control.initial_state(cfg.control)
        self._tick = -1
        self._uniform = np.full(self.model.cfg.n_classes,
                                1.0 / self.model.cfg.n_classes, dtype=np.float32)

    @property
    def state(self) -> SessionState:
        return self._state

    @property
    def calibrated(self) -> bool:
        return self._baseline is not None

    def halt(self) -> None:
        """Safety stop: clear any active gesture immediately."""
        self._state = control.SessionState(
            pose=self._state.pose, initial_pose=self._state.initial_pose,
            home_pose=self._state.home_pose)

    def push(self, raw: RawFrame) -> StateEvent | None:
        """Process one raw frame; returns an event once calibrated."""
        if self._baseline is None:
            self._cal_buffer.append(raw)
            if len(self._cal_buffer) >= self.cfg.calibration_frames:
                self._baseline = calibrate(self._cal_buffer)
                self._cal_buffer = []
            return None
        frame = subtract_baseline(raw, self._baseline)
        filtered = self._filter.push(frame)
        self._window.append(filtered.values.astype(np.float32))
        self._tick += 1
        if len(self._window) < self.cfg.window:
            probs = self._uniform
            detected = GestureClass.INVALID
        else:
            window = np.stack(self._window)[None, ...]
            probs = self.model.predict_proba(window)[0]
            detected = GestureClass(int(probs.argmax()))
        contact = bool(filtered.values.max() > self.cfg.contact_threshold)
        self._state, output = control.step(self._state, detected, contact,
                                           self.cfg.control)
        twist = output if isinstance(output, Twist) else None
        aux = output.target if isinstance(output, AuxAction) else None
        return StateEvent(tick=self._tick, detected=detected, probs=probs,
                          active=self._state.active, twist=twist, aux=aux,
                          pose=self._state.pose)


def run_session(frames: Iterable[RawFrame], model,
                cfg: SessionConfig | None = None) -> Iterator[StateEvent]:
    """Run a full stream through the pipeline, yielding one event per tick."""
    runner = SessionRunner(model, cfg or SessionConfig())
    for raw in frames:
        event = runner.push(raw)
        if event is not None:
            yield event


class StreamResampler:
    """Sample-and-hold rate converter onto the 200 Hz session grid.

    Each input frame is repeated ceil(k*r) - ceil((k-1)*r) times with
    r = f_out/f_in, so the long-run output/input ratio is exactly r
    (e.g. 60 -> 200 Hz repeats frames in the pattern 4,3,3,...).
    """

    def __init__(self, f_in: float, f_out: float = 200.0):
        if f_in <= 0 or f_out <= 0:
            raise ValueError("rates must be positive")
        self.ratio = Fraction(f_out).limit_denominator(10**6) / \
            Fraction(f_in).limit_denominator(10**6)
        self._k_in = 0
        self._k_out = 0
        self.period_us = Fraction(1_000_000) / Fraction(f_out).limit_denominator(10**6)

    def push(self, frame: RawFrame) -> list[RawFrame]:
        self._k_in += 1
        target = -((-self._k_in * self.ratio) // 1)  # ceil
        out = []
        while self._k_out < target:
            ts = int(self._k_out * self.period_us)
            out.append(RawFrame(counts=frame.counts.copy(), seq=self._k_out,
                                timestamp_us=ts))
            self._k_out += 1
        return out


def resample(frames: Iterable[RawFrame], f_in: float,
             f_out: float = 200.0) -> list[RawFrame]:
    """Resample a whole stream; timestamps rewritten on the output grid."""
    rs = StreamResampler(f_in, f_out)
    out: list[RawFrame] = []
    for frame in frames:
        out.extend(rs.push(frame))
    return out
