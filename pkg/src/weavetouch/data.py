"""Recording synthesis, window augmentation and dataset persistence.

Augmentation recipe: every 30-frame training window is a canvas of
filtered background noise with a contiguous random-length slice of the
recording's core contact segment added on top at a random temporal
offset.  Datasets are stored as packed little-endian float32 tensors in
``.tds`` files with a trailing SHA-256 integrity digest.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from . import sim
from .control import N_CLASSES, GestureClass
from .grid import (CALIBRATION_FRAMES, CLAMP_MAX, CLAMP_MIN, FILTER_WINDOW,
                   GRID_SHAPE, calibrate, moving_average, subtract_baseline)

WINDOW_FRAMES = 30          # 150 ms at 200 Hz
MIN_SLICE = 10
TRAIN_FRACTION = 0.85
TRAIN, VAL = 0, 1


class AugmentationError(ValueError):
    """Recording core segment too short to slice."""


class DatasetFormatError(ValueError):
    """File is not a dataset or has a corrupt header."""


class DatasetVersionError(DatasetFormatError):
    """Dataset file written by an incompatible format version."""


class DatasetTruncatedError(DatasetFormatError):
    """Dataset file ends before its declared payload."""


class DatasetChecksumError(DatasetFormatError):
    """Dataset payload does not match its integrity digest."""


@dataclass
class Recording:
    """One processed gesture recording (post baseline/filter)."""

    gesture: GestureClass
    frames: np.ndarray            # (n, 10, 10) normalized values
    core_span: tuple[int, int]    # [start, end) indices of actual contact

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[1:] != GRID_SHAPE:
            raise ValueError(f"frames must be (n, 10, 10), got {self.frames.shape}")
        if len(self.frames) == 0:
            raise ValueError("recording has no frames")
        start, end = self.core_span
        if not (0 <= start < end <= len(self.frames)):
            raise ValueError(f"core span {self.core_span} out of bounds")

    @property
    def core_length(self) -> int:
        return self.core_span[1] - self.core_span[0]


@dataclass
class Sample:
    window: np.ndarray    # (30, 10, 10) float32
    label: GestureClass


@dataclass
class Dataset:
    """Packed sample store: windows, labels and train/val split tags."""

    windows: np.ndarray   # (n, 30, 10, 10) float32
    labels: np.ndarray    # (n,) uint8
    split: np.ndarray     # (n,) uint8: 0 train, 1 validation
    seed: int

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        self.split = np.asarray(self.split, dtype=np.uint8)
        if len(self.windows) != len(self.labels) or len(self.labels) != len(self.split):
            raise ValueError("windows/labels/split length mismatch")

    def __len__(self) -> int:
        return len(self.windows)

    def sample(self, i: int) -> Sample:
        return Sample(window=self.windows[i], label=GestureClass(int(self.labels[i])))

    def indices(self, which: int) -> np.ndarray:
        return np.nonzero(self.split == which)[0]

    def subset_arrays(self, which: int) -> tuple[np.ndarray, np.ndarray]:
        idx = self.indices(which)
        return self.windows[idx], self.labels[idx].astype(np.int64)


def noise_canvas(rng: np.random.Generator, n_windows: int,
                 sigma: float = 0.02, window: int = FILTER_WINDOW) -> np.ndarray:
    """Steady-state filtered background noise, (n_windows, 30, 10, 10).

    Matches what the moving-average filter emits for pure sensor noise:
    each canvas frame is a full-window mean of white noise.
    """
    raw = rng.normal(0.0, sigma,
                     size=(n_windows, WINDOW_FRAMES + window - 1) + GRID_SHAPE)
    view = np.lib.stride_tricks.sliding_window_view(raw, window, axis=1)
    return view.mean(axis=-1)


def augment_recording(rec: Recording, n: int, seed: int) -> list[Sample]:
    """Slice-and-overlay augmentation: n 30-frame windows from one recording."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if rec.core_length < 5:
        raise AugmentationError(
            f"core span of {rec.core_length} frames is too short to augment")
    rng = np.random.default_rng(seed)
    windows = _augment_windows(rec, n, rng)
    return [Sample(window=windows[i], label=rec.gesture) for i in range(n)]


def _augment_windows(rec: Recording, n: int, rng: np.random.Generator) -> np.ndarray:
    canvases = noise_canvas(rng, n)
    core_start, core_end = rec.core_span
    core_len = core_end - core_start
    lengths = np.minimum(rng.integers(MIN_SLICE, WINDOW_FRAMES + 1, size=n),
                         core_len)
    out = np.empty((n, WINDOW_FRAMES) + GRID_SHAPE, dtype=np.float32)
    for i in range(n):
        length = int(lengths[i])
        s = int(rng.integers(core_start, core_end - length + 1))
        offset = int(rng.integers(0, WINDOW_FRAMES - length + 1))
        window = canvases[i]
        window[offset:offset + length] += rec.frames[s:s + length]
        np.clip(window, CLAMP_MIN, CLAMP_MAX, out=window)
        out[i] = window
    return out


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def build_dataset(recordings: list[Recording], n_per_rec: int,
                  seed: int) -> Dataset:
    """Augment every recording, shuffle, and split 85/15 stratified by class.

    Deterministic and order-stable: each recording draws from its own
    derived seed, so results do not depend on evaluation order.
    """
    if not recordings:
        raise ValueError("need at least one recording")
    n_total = n_per_rec * len(recordings)
    windows = np.empty((n_total, WINDOW_FRAMES) + GRID_SHAPE, dtype=np.float32)
    labels = np.empty(n_total, dtype=np.uint8)
    for i, rec in enumerate(recordings):
        rng = np.random.default_rng([seed, i])
        windows[i * n_per_rec:(i + 1) * n_per_rec] = _augment_windows(rec, n_per_rec, rng)
        labels[i * n_per_rec:(i + 1) * n_per_rec] = int(rec.gesture)
    shuffle_rng = np.random.default_rng([seed, n_total, 0x5ff1e])
    perm = shuffle_rng.permutation(n_total)
    windows = windows[perm]
    labels = labels[perm]
    split = np.full(n_total, VAL, dtype=np.uint8)
    split_rng = np.random.default_rng([seed, n_total, 0x511f7])
    for cls in range(N_CLASSES):
        idx = np.nonzero(labels == cls)[0]
        if len(idx) == 0:
            continue
        n_train = _round_half_up(TRAIN_FRACTION * len(idx))
        chosen = split_rng.permutation(len(idx))[:n_train]
        split[idx[chosen]] = TRAIN
    return Dataset(windows=windows, labels=labels, split=split, seed=seed)


_TDS_MAGIC = b"WTDS"
_TDS_VERSION = 1
_TDS_HEADER = struct.Struct("<4sHQIHBB")  # magic, ver, seed, n, T, H, W


def save_dataset(ds: Dataset, path) -> None:
    header = _TDS_HEADER.pack(_TDS_MAGIC, _TDS_VERSION, ds.seed & (2**64 - 1),
                              len(ds), WINDOW_FRAMES, *GRID_SHAPE)
    digest = hashlib.sha256()
    with open(path, "wb") as fh:
        for chunk in (header, ds.labels.tobytes(), ds.split.tobytes(),
                      ds.windows.astype("<f4").tobytes()):
            digest.update(chunk)
            fh.write(chunk)
        fh.write(digest.digest())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _TDS_HEADER.size + 32:
        raise DatasetTruncatedError("file shorter than dataset header")
    magic, version, seed, n, t, h, w = _TDS_HEADER.unpack_from(blob)
    if magic != _TDS_MAGIC:
        raise DatasetFormatError("not a .tds dataset file")
    if version != _TDS_VERSION:
        raise DatasetVersionError(f"unsupported dataset version {version}")
    expect = _TDS_HEADER.size + n * 2 + n * t * h * w * 4 + 32
    if len(blob) < expect:
        raise DatasetTruncatedError(
            f"dataset payload truncated: {len(blob)} < {expect} bytes")
    body, digest = blob[:expect - 32], blob[expect - 32:expect]
    if hashlib.sha256(body).digest() != digest:
        raise DatasetChecksumError("dataset integrity digest mismatch")
    off = _TDS_HEADER.size
    labels = np.frombuffer(blob, dtype=np.uint8, count=n, offset=off).copy()
    off += n
    split = np.frombuffer(blob, dtype=np.uint8, count=n, offset=off).copy()
    off += n
    windows = np.frombuffer(blob, dtype="<f4", count=n * t * h * w,
                            offset=off).reshape(n, t, h, w).copy()
    return Dataset(windows=windows, labels=labels, split=split, seed=seed)


def synthesize_capture(gesture: GestureClass, seed: int,
                       noise: sim.NoiseModel | None = None,
                       lead_ms: float = 600.0, tail_ms: float = 300.0,
                       fps: float = sim.DEFAULT_FPS):
    """Render one gesture as a raw capture with an idle lead-in and tail.

    Returns (raw frames, core span in frame indices).  The lead-in covers
    the calibration window plus filter settling.
    """
    if noise is None:
        noise = sim.NoiseModel(rng_seed=seed)
    if gesture == GestureClass.INVALID:
        script = sim.invalid_script(seed)
    else:
        script = sim.script_for(gesture, seed)
    padded = sim.with_padding(script, lead_ms, tail_ms)
    raw = sim.render(padded, noise, fps)
    lead_frames = round(lead_ms * fps / 1000.0)
    dur_frames = max(5, round(script.duration_ms * fps / 1000.0))
    core = (lead_frames, min(len(raw), lead_frames + dur_frames))
    return raw, core


def recording_from_frames(gesture: GestureClass, raw_frames,
                          core_span: tuple[int, int]) -> Recording:
    """Calibrate on the stream head, subtract, filter; pack a Recording."""
    base = calibrate(raw_frames[:CALIBRATION_FRAMES])
    processed = moving_average([subtract_baseline(f, base) for f in raw_frames])
    values = np.stack([f.values for f in processed])
    return Recording(gesture=gesture, frames=values, core_span=core_span)


def synthesize_recording(gesture: GestureClass, seed: int,
                         noise: sim.NoiseModel | None = None,
                         lead_ms: float = 600.0, tail_ms: float = 300.0,
                         fps: float = sim.DEFAULT_FPS) -> Recording:
    """Script -> raw render -> calibrate -> subtract -> filter pipeline."""
    raw, core = synthesize_capture(gesture, seed, noise, lead_ms, tail_ms, fps)
    return recording_from_frames(gesture, raw, core)


def default_recording_set(per_class: int, seed: int,
                          include_invalid: bool = True) -> list[Recording]:
    """per_class recordings for each of the 14 gestures (+ invalid)."""
    classes = [g for g in GestureClass if g != GestureClass.INVALID]
    if include_invalid:
        classes.append(GestureClass.INVALID)
    recs = []
    for cls in classes:
        for k in range(per_class):
            recs.append(synthesize_recording(cls, seed + 1000 * int(cls) + k))
    return recs
