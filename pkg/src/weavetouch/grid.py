"""Frame data model and the calibration/filtering signal chain.

Conventions used throughout the package:

* grids are 10x10 arrays indexed ``[v, u]`` where ``u`` is the column index
  increasing rightward and ``v`` is the row index increasing upward;
* raw capacitance readings are unsigned 16-bit counts;
* normalized frames express the baseline-subtracted response where 1.0 is
  the saturating response of the skin (full scale at 100 kPa).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GRID_SHAPE = (10, 10)
N_CHANNELS = 100
FRAME_RATE_HZ = 200
CALIBRATION_FRAMES = 100  # 500 ms static rest at 200 Hz
FILTER_WINDOW = 20        # 100 ms of history at 200 Hz
CLAMP_MIN = -0.25
CLAMP_MAX = 1.25
COUNTS_BASELINE = 500.0
COUNTS_PER_UNIT = 1000.0


class CalibrationError(ValueError):
    """Too few frames supplied to establish a baseline."""


def _as_grid(values, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != GRID_SHAPE:
        raise ValueError(f"expected {GRID_SHAPE} grid, got shape {arr.shape}")
    return arr


@dataclass
class RawFrame:
    """One 10x10 grid of raw capacitance counts straight off the readout."""

    counts: np.ndarray
    seq: int
    timestamp_us: int

    def __post_init__(self):
        self.counts = _as_grid(self.counts, np.uint16)


@dataclass
class Baseline:
    """Per-channel rest level, averaged over the calibration window."""

    mean_counts: np.ndarray
    n_frames: int

    def __post_init__(self):
        self.mean_counts = _as_grid(self.mean_counts, np.float64)


@dataclass
class TactileFrame:
    """Baseline-subtracted, normalized frame; 1.0 = full-scale response."""

    values: np.ndarray
    timestamp_us: int

    def __post_init__(self):
        self.values = _as_grid(self.values, np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("tactile frame contains non-finite values")


def calibrate(frames: Sequence[RawFrame]) -> Baseline:
    """Average the first 100 frames of a static rest period into a Baseline.

    Raises CalibrationError when fewer than 100 frames are available.
    """
    if len(frames) < CALIBRATION_FRAMES:
        raise CalibrationError(
            f"calibration needs {CALIBRATION_FRAMES} frames, got {len(frames)}"
        )
    stack = np.stack([f.counts for f in frames[:CALIBRATION_FRAMES]]).astype(np.float64)
    return Baseline(mean_counts=stack.mean(axis=0), n_frames=CALIBRATION_FRAMES)


def subtract_baseline(raw: RawFrame, base: Baseline,
                      scale: float = COUNTS_PER_UNIT) -> TactileFrame:
    """Convert raw counts to normalized deltas, clamped to [-0.25, 1.25]."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    values = (raw.counts.astype(np.float64) - base.mean_counts) / scale
    np.clip(values, CLAMP_MIN, CLAMP_MAX, out=values)
    return TactileFrame(values=values, timestamp_us=raw.timestamp_us)


class MovingAverageFilter:
    """Causal per-channel moving average with explicit caller-held state.

    Output at each step is the mean of the last min(window, seen) frames,
    so a constant stream is a fixed point and a step input settles exactly
    after `window` frames.
    """

    def __init__(self, window: int = FILTER_WINDOW):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._history: deque[np.ndarray] = deque()
        self._sum = np.zeros(GRID_SHAPE, dtype=np.float64)

    def reset(self) -> None:
        self._history.clear()
        self._sum = np.zeros(GRID_SHAPE, dtype=np.float64)

    def push(self, frame: TactileFrame) -> TactileFrame:
        if len(self._history) == self.window:
            self._sum -= self._history.popleft()
        self._history.append(frame.values)
        self._sum += frame.values
        return TactileFrame(values=self._sum / len(self._history),
                            timestamp_us=frame.timestamp_us)


def moving_average(stream: Iterable[TactileFrame],
                   window: int = FILTER_WINDOW) -> list[TactileFrame]:
    """Filter a whole frame sequence; output length equals input length."""
    filt = MovingAverageFilter(window)
    return [filt.push(frame) for frame in stream]
