"""Synthetic capacitive skin: contact models, gesture scripts, rendering.

Grid orientation: u is the column index increasing rightward (+y of the
end-effector), v is the row index increasing upward (+z).  Cell centers sit
on integer coordinates of [0, 9]^2 (physical pitch 10.0 mm x 14.0 mm).

Scripts are piecewise-linear finger trajectories; rendering samples them at
the readout rate, converts summed contact stress to normalized response,
adds Gaussian noise plus slow common-mode drift, and re-expresses the
result as raw counts around the nominal rest level.  Everything is
deterministic under fixed seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import FINGER_COUNT, GestureClass
from .grid import COUNTS_BASELINE, COUNTS_PER_UNIT, GRID_SHAPE, RawFrame, TactileFrame

CELL_PITCH_MM = (10.0, 14.0)   # (u, v) pitch of one sensing channel
SATURATION_KPA = 100.0
DEFAULT_FPS = 200.0

# randomization ranges for generated gestures (kept inside the aperture)
PEAK_RANGE_KPA = (20.0, 90.0)
SIGMA_RANGE = (0.6, 1.1)
SWIPE_LENGTH_RANGE = (4.0, 8.0)
SWIPE_SPEED_RANGE = (6.0, 25.0)    # cells per second
DURATION_RANGE_MS = (200.0, 600.0)
SPACING_RANGE = (2.0, 4.0)

_VS, _US = np.mgrid[0:GRID_SHAPE[0], 0:GRID_SHAPE[1]].astype(np.float64)


class StressDomainError(ValueError):
    """Negative stress passed to the pressure response map."""


def pressure_to_response(stress):
    """Normalized capacitance response: linear up to saturation at 100 kPa."""
    arr = np.asarray(stress, dtype=np.float64)
    if np.any(arr < 0):
        raise StressDomainError("stress must be non-negative")
    out = np.minimum(arr, SATURATION_KPA) / SATURATION_KPA
    return float(out) if np.isscalar(stress) or arr.ndim == 0 else out


@dataclass
class ContactPoint:
    """One fingertip pressing the grid with a Gaussian footprint."""

    center: tuple[float, float]   # (u, v) in cells
    peak_stress: float            # kPa, <= 100
    sigma: float                  # footprint radius in cells

    def __post_init__(self):
        if not 0.0 < self.peak_stress <= SATURATION_KPA:
            raise ValueError(f"peak_stress must be in (0, {SATURATION_KPA}]")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def contact_footprint(points: list[ContactPoint],
                      timestamp_us: int = 0) -> TactileFrame:
    """Render the instantaneous normalized frame for a set of contacts."""
    stress = np.zeros(GRID_SHAPE, dtype=np.float64)
    for pt in points:
        cu, cv = pt.center
        d2 = (_US - cu) ** 2 + (_VS - cv) ** 2
        stress += pt.peak_stress * np.exp(-d2 / (2.0 * pt.sigma ** 2))
    return TactileFrame(values=pressure_to_response(stress),
                        timestamp_us=timestamp_us)


@dataclass
class FingerPath:
    """Piecewise-linear trajectory of one finger within a script timeline.

    The finger is in contact only between its first and last waypoint
    times; peaks are interpolated alongside positions.
    """

    times_ms: np.ndarray    # (K,) increasing
    centers: np.ndarray     # (K, 2) of (u, v)
    peaks: np.ndarray       # (K,) kPa
    sigma: float

    def __post_init__(self):
        self.times_ms = np.asarray(self.times_ms, dtype=np.float64)
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.peaks = np.asarray(self.peaks, dtype=np.float64)

    def shifted(self, offset_ms: float) -> "FingerPath":
        return FingerPath(self.times_ms + offset_ms, self.centers.copy(),
                          self.peaks.copy(), self.sigma)

    def at(self, t_ms: float) -> ContactPoint | None:
        if t_ms < self.times_ms[0] or t_ms > self.times_ms[-1]:
            return None
        u = float(np.interp(t_ms, self.times_ms, self.centers[:, 0]))
        v = float(np.interp(t_ms, self.times_ms, self.centers[:, 1]))
        p = float(np.interp(t_ms, self.times_ms, self.peaks))
        if p <= 1e-9:
            return None
        return ContactPoint(center=(u, v), peak_stress=min(p, SATURATION_KPA),
                            sigma=self.sigma)


@dataclass
class GestureScript:
    """A scripted gesture: per-finger trajectories over a timeline."""

    gesture: GestureClass
    fingers: list[FingerPath]
    duration_ms: float
    variant: str | None = None   # set for invalid scripts (branch tag)

    def __post_init__(self):
        if self.gesture != GestureClass.INVALID:
            expected = FINGER_COUNT[self.gesture]
            if len(self.fingers) != expected:
                raise ValueError(
                    f"{self.gesture.name} needs {expected} fingers, "
                    f"got {len(self.fingers)}")
            if self.duration_ms < 150.0:
                raise ValueError("gesture scripts must span at least 150 ms")


@dataclass(frozen=True)
class NoiseModel:
    gaussian_sigma: float = 0.02   # per-frame white noise, normalized units
    drift_rate: float = 0.01       # common-mode units per second
    rng_seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma < 0 or self.drift_rate < 0:
            raise ValueError("noise magnitudes must be non-negative")


def _uniform(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def _press_envelope(duration_ms: float, peak: float):
    """Times/peaks with a soft attack and release around a sustained press."""
    t = np.array([0.0, 0.12 * duration_ms, 0.88 * duration_ms, duration_ms])
    p = np.array([0.4 * peak, peak, peak, 0.4 * peak])
    return t, p


def _line_centers(start, end, fractions) -> np.ndarray:
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    return start[None, :] + fractions[:, None] * (end - start)[None, :]


def _swipe_paths(rng, direction: tuple[float, float], n_fingers: int) -> tuple[list[FingerPath], float]:
    """Straight swipe along a unit direction; fingers ride side by side."""
    length = _uniform(rng, *SWIPE_LENGTH_RANGE)
    # brisk strokes: duration follows speed so short windows still see motion
    speed = _uniform(rng, *SWIPE_SPEED_RANGE)
    duration = float(np.clip(1000.0 * length / speed, *DURATION_RANGE_MS))
    sigma = _uniform(rng, *SIGMA_RANGE)
    peak = _uniform(rng, *PEAK_RANGE_KPA)
    offsets = [0.0]
    if n_fingers == 2:
        spacing = _uniform(rng, *SPACING_RANGE)
        offsets = [-spacing / 2.0, spacing / 2.0]
    elif n_fingers == 3:
        spacing = _uniform(rng, 1.5, 2.2)
        offsets = [-spacing, 0.0, spacing]
    reach = max(abs(o) for o in offsets)
    du, dv = direction
    # moving axis spans [lon0, lon0+length]; the lateral axis leaves room
    # for the widest finger offset so every center stays inside [0, 9]
    lat = _uniform(rng, reach + 0.2, 8.8 - reach)
    lon0 = _uniform(rng, 0.2, 8.8 - length)
    if du == 0.0:
        start = (lat, lon0 if dv > 0 else lon0 + length)
        end = (lat, lon0 + length if dv > 0 else lon0)
        perp = (1.0, 0.0)
    else:
        start = (lon0 if du > 0 else lon0 + length, lat)
        end = (lon0 + length if du > 0 else lon0, lat)
        perp = (0.0, 1.0)
    times, peaks = _press_envelope(duration, peak)
    fractions = times / duration
    paths = []
    for off in offsets:
        o = np.array(perp) * off
        centers = _line_centers(np.array(start) + o, np.array(end) + o, fractions)
        paths.append(FingerPath(times, centers, peaks, sigma))
    return paths, duration


def _pinch_paths(rng, n_fingers: int, inward: bool) -> tuple[list[FingerPath], float]:
    """Fingers on a shrinking (inward) or growing (outward) ring."""
    duration = _uniform(rng, *DURATION_RANGE_MS)
    sigma = _uniform(rng, *SIGMA_RANGE)
    peak = _uniform(rng, *PEAK_RANGE_KPA)
    if n_fingers == 2:
        spacing = _uniform(rng, *SPACING_RANGE)
        r0, r1 = spacing / 2.0, (spacing / 2.0) * _uniform(rng, 0.15, 0.35)
        center = np.array([_uniform(rng, 3.0, 6.0), _uniform(rng, 3.0, 6.0)])
        angles = [_uniform(rng, 0.0, math.pi)]
        angles.append(angles[0] + math.pi)
    else:
        r0 = _uniform(rng, 2.6, 3.4)
        r1 = _uniform(rng, 0.6, 1.0)
        center = np.array([4.5, 4.5]) + rng.uniform(-0.5, 0.5, size=2)
        base = _uniform(rng, 0.0, 2.0 * math.pi)
        angles = [base + k * 2.0 * math.pi / n_fingers for k in range(n_fingers)]
    if not inward:
        r0, r1 = r1, r0
    times, peaks = _press_envelope(duration, peak)
    fractions = times / duration
    radii = r0 + fractions * (r1 - r0)
    paths = []
    for ang in angles:
        scale = _uniform(rng, 0.9, 1.1)
        direction = np.array([math.cos(ang), math.sin(ang)])
        centers = center[None, :] + (radii * scale)[:, None] * direction[None, :]
        paths.append(FingerPath(times, centers, peaks, sigma))
    return paths, duration


def _push_path(rng) -> tuple[list[FingerPath], float]:
    """Stationary single-finger press with steadily rising pressure."""
    duration = _uniform(rng, 300.0, DURATION_RANGE_MS[1])
    sigma = _uniform(rng, *SIGMA_RANGE)
    top = _uniform(rng, 60.0, 90.0)
    center = np.array([_uniform(rng, 2.0, 7.0), _uniform(rng, 2.0, 7.0)])
    times = np.array([0.0, duration])
    centers = np.stack([center, center])
    peaks = np.array([15.0, top])
    return [FingerPath(times, centers, peaks, sigma)], duration


def _circle_paths(rng, clockwise: bool) -> tuple[list[FingerPath], float]:
    """Two fingers opposed on a circle, sweeping about one revolution."""
    duration = _uniform(rng, 350.0, DURATION_RANGE_MS[1])
    sigma = _uniform(rng, *SIGMA_RANGE)
    peak = _uniform(rng, *PEAK_RANGE_KPA)
    radius = _uniform(rng, 1.5, 2.8)
    center = np.array([_uniform(rng, radius + 0.4, 8.6 - radius),
                       _uniform(rng, radius + 0.4, 8.6 - radius)])
    sweep = _uniform(rng, 0.8, 1.2) * 2.0 * math.pi
    theta0 = _uniform(rng, 0.0, 2.0 * math.pi)
    n_pts = 33
    fractions = np.linspace(0.0, 1.0, n_pts)
    # clockwise when viewed facing the skin (u right, v up) = decreasing angle
    theta = theta0 + (-1.0 if clockwise else 1.0) * sweep * fractions
    times = fractions * duration
    peaks = np.interp(times, *_press_envelope(duration, peak))
    paths = []
    for phase in (0.0, math.pi):
        scale = _uniform(rng, 0.95, 1.05)
        centers = np.stack([center[0] + radius * scale * np.cos(theta + phase),
                            center[1] + radius * scale * np.sin(theta + phase)],
                           axis=1)
        paths.append(FingerPath(times, centers, peaks, sigma))
    return paths, duration


def script_for(gesture: GestureClass, rng_seed: int) -> GestureScript:
    """Canonical randomized trajectory family for one of the 14 gestures."""
    if gesture == GestureClass.INVALID:
        raise ValueError("use invalid_script for the invalid class")
    rng = np.random.default_rng(rng_seed)
    g = GestureClass
    if gesture == g.TRANSLATE_Z_POS:
        paths, dur = _swipe_paths(rng, (0.0, 1.0), 1)
    elif gesture == g.TRANSLATE_Z_NEG:
        paths, dur = _swipe_paths(rng, (0.0, -1.0), 1)
    elif gesture == g.TRANSLATE_Y_POS:
        paths, dur = _swipe_paths(rng, (1.0, 0.0), 1)
    elif gesture == g.TRANSLATE_Y_NEG:
        paths, dur = _swipe_paths(rng, (-1.0, 0.0), 1)
    elif gesture == g.TRANSLATE_X_POS:
        paths, dur = _pinch_paths(rng, 2, inward=True)
    elif gesture == g.TRANSLATE_X_NEG:
        paths, dur = _push_path(rng)
    elif gesture == g.ROTATE_Y_POS:
        paths, dur = _swipe_paths(rng, (0.0, 1.0), 2)
    elif gesture == g.ROTATE_Y_NEG:
        paths, dur = _swipe_paths(rng, (0.0, -1.0), 2)
    elif gesture == g.ROTATE_Z_POS:
        paths, dur = _swipe_paths(rng, (1.0, 0.0), 2)
    elif gesture == g.ROTATE_Z_NEG:
        paths, dur = _swipe_paths(rng, (-1.0, 0.0), 2)
    elif gesture == g.ROTATE_X_POS:
        paths, dur = _circle_paths(rng, clockwise=True)
    elif gesture == g.ROTATE_X_NEG:
        paths, dur = _circle_paths(rng, clockwise=False)
    elif gesture == g.AUX_INIT_POSE:
        paths, dur = _pinch_paths(rng, 5, inward=True)
    elif gesture == g.AUX_HOME:
        paths, dur = _pinch_paths(rng, 5, inward=False)
    else:  # pragma: no cover
        raise ValueError(f"unhandled gesture {gesture}")
    return GestureScript(gesture=gesture, fingers=paths, duration_ms=dur)


INVALID_VARIANTS = ("no_contact", "tap", "three_finger_swipe",
                    "scribble", "static_rest")


def _scribble_path(rng) -> tuple[list[FingerPath], float]:
    """Zigzag single-finger path: every turn exceeds 100 degrees."""
    duration = _uniform(rng, 300.0, 700.0)
    sigma = _uniform(rng, *SIGMA_RANGE)
    peak = _uniform(rng, *PEAK_RANGE_KPA)
    n_segments = int(rng.integers(4, 7))
    pos = np.array([_uniform(rng, 2.0, 7.0), _uniform(rng, 2.0, 7.0)])
    heading = _uniform(rng, 0.0, 2.0 * math.pi)
    pts = [pos.copy()]
    for _ in range(n_segments):
        heading += float(rng.choice([-1.0, 1.0])) * _uniform(rng, 1.8, 4.5)
        seg = _uniform(rng, 1.5, 3.0)
        nxt = pts[-1] + seg * np.array([math.cos(heading), math.sin(heading)])
        # bounce off the aperture walls instead of clipping into a corner
        for axis in range(2):
            while nxt[axis] < 0.5 or nxt[axis] > 8.5:
                if nxt[axis] < 0.5:
                    nxt[axis] = 1.0 - nxt[axis]
                else:
                    nxt[axis] = 17.0 - nxt[axis]
        pts.append(nxt)
    centers = np.stack(pts)
    times = np.linspace(0.0, duration, len(pts))
    peaks = np.full(len(pts), peak)
    return [FingerPath(times, centers, peaks, sigma)], duration


def invalid_script(rng_seed: int) -> GestureScript:
    """Sample one of the invalid-contact families (no robot action)."""
    rng = np.random.default_rng(rng_seed)
    variant = INVALID_VARIANTS[int(rng.integers(len(INVALID_VARIANTS)))]
    if variant == "no_contact":
        fingers: list[FingerPath] = []
        duration = _uniform(rng, *DURATION_RANGE_MS)
    elif variant == "tap":
        duration = _uniform(rng, 40.0, 90.0)
        sigma = _uniform(rng, *SIGMA_RANGE)
        peak = _uniform(rng, *PEAK_RANGE_KPA)
        center = np.array([_uniform(rng, 1.5, 7.5), _uniform(rng, 1.5, 7.5)])
        times, peaks = _press_envelope(duration, peak)
        fingers = [FingerPath(times, np.tile(center, (4, 1)), peaks, sigma)]
    elif variant == "three_finger_swipe":
        direction = [(0.0, 1.0), (0.0, -1.0), (1.0, 0.0), (-1.0, 0.0)][
            int(rng.integers(4))]
        fingers, duration = _swipe_paths(rng, direction, 3)
    elif variant == "scribble":
        fingers, duration = _scribble_path(rng)
    else:  # static_rest
        duration = _uniform(rng, 300.0, 800.0)
        sigma = _uniform(rng, *SIGMA_RANGE)
        n = int(rng.integers(2, 6))
        times = np.array([0.0, duration])
        fingers = []
        placed: list[np.ndarray] = []
        while len(placed) < n:
            cand = rng.uniform(1.0, 8.0, size=2)
            if all(np.linalg.norm(cand - p) >= 1.2 for p in placed):
                placed.append(cand)
        for pos in placed:
            peak = _uniform(rng, 20.0, 60.0)
            fingers.append(FingerPath(times, np.stack([pos, pos]),
                                      np.array([peak, peak]), sigma))
    return GestureScript(gesture=GestureClass.INVALID, fingers=fingers,
                         duration_ms=duration, variant=variant)


def with_padding(script: GestureScript, lead_ms: float,
                 tail_ms: float) -> GestureScript:
    """Embed a script in a longer idle timeline (contact-free lead/tail)."""
    fingers = [fp.shifted(lead_ms) for fp in script.fingers]
    return GestureScript(gesture=script.gesture, fingers=fingers,
                         duration_ms=script.duration_ms + lead_ms + tail_ms,
                         variant=script.variant)


def render(script: GestureScript, noise: NoiseModel = NoiseModel(),
           fps: float = DEFAULT_FPS) -> list[RawFrame]:
    """Sample a script into raw count frames at the readout rate.

    Deterministic: identical (script, noise, fps) yields a bit-identical
    stream.  Counts are baseline 500 + 1000 counts per normalized unit.
    """
    if fps <= 0:
        raise ValueError("fps must be positive")
    n_frames = round(script.duration_ms * fps / 1000.0)
    rng = np.random.default_rng(noise.rng_seed)
    if noise.gaussian_sigma > 0:
        gauss = rng.normal(0.0, noise.gaussian_sigma, size=(n_frames,) + GRID_SHAPE)
    else:
        gauss = np.zeros((n_frames,) + GRID_SHAPE)
    frames = []
    for k in range(n_frames):
        t_ms = k * 1000.0 / fps
        points = [pt for fp in script.fingers if (pt := fp.at(t_ms)) is not None]
        values = contact_footprint(points).values + gauss[k] + \
            noise.drift_rate * (t_ms / 1000.0)
        counts = np.clip(np.rint(COUNTS_BASELINE + COUNTS_PER_UNIT * values),
                         0, 65535).astype(np.uint16)
        frames.append(RawFrame(counts=counts, seq=k,
                               timestamp_us=round(k * 1_000_000 / fps)))
    return frames
