#!/usr/bin/env python3
"""Regenerate the committed replay fixtures.

Produces tests/fixtures/replay_model.twt (a classifier trained on a
15-class synthetic dataset), golden_capture.skn (idle -> swipe-up 1 s ->
pinch-in 1 s -> five-finger pinch-out -> idle) and golden_events.jsonl
(the StateEvent log of replaying the capture with the committed model).

The script verifies the replay honors the gesture->action semantics
(swipe activates +z motion, pinch-in activates +x, pinch-out recovers to
the home pose) before writing anything.  Run from the repo root:

    python scripts/make_fixtures.py [--quick]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from weavetouch import data, nn, wire   # noqa: E402
from weavetouch.control import ControlConfig, GestureClass   # noqa: E402
from weavetouch.poses import Pose   # noqa: E402
from weavetouch.session import SessionConfig, run_session   # noqa: E402
from weavetouch.sim import (FingerPath, GestureScript, NoiseModel,   # noqa: E402
                            render)

FIXTURES = ROOT / "tests" / "fixtures"

MODEL_CONFIG = dict(d_model=32, n_layers=2, n_heads=4, ffn_dim=64,
                    conv_channels=(8, 16))


def train_fixture_model(per_class: int, n_aug: int, epochs: int):
    recs = []
    for cls in GestureClass:
        for k in range(per_class):
            recs.append(data.synthesize_recording(
                cls, seed=5000 + 1000 * int(cls) + k))
    ds = data.build_dataset(recs, n_per_rec=n_aug, seed=77)
    print(f"fixture dataset: {len(ds)} samples")
    cfg = nn.TrainConfig(seed=1, max_epochs=epochs, batch_size=64,
                         stop_accuracy=0.999)
    model, reports = nn.train(ds, cfg, arch="hybrid",
                              model_config=MODEL_CONFIG,
                              log=lambda m: print("  " + m))
    best = max(r.val_accuracy for r in reports)
    print(f"fixture model val accuracy {best:.4f}")
    return model, best


def _static_envelope(t0, t1, peak):
    times = np.array([t0, t0 + 0.1 * (t1 - t0), t1 - 0.1 * (t1 - t0), t1])
    peaks = np.array([0.5 * peak, peak, peak, 0.5 * peak])
    return times, peaks


def golden_script() -> GestureScript:
    fingers = []
    # swipe up: 700..1700 ms, v from 1.8 to 7.8 at u = 4.3
    times, peaks = _static_envelope(700.0, 1700.0, 60.0)
    frac = (times - 700.0) / 1000.0
    centers = np.stack([np.full(4, 4.3), 1.8 + 6.0 * frac], axis=1)
    fingers.append(FingerPath(times, centers, peaks, sigma=0.8))
    # two-finger pinch-in: 2100..3100 ms around (4.5, 4.5), horizontal
    times, peaks = _static_envelope(2100.0, 3100.0, 55.0)
    frac = (times - 2100.0) / 1000.0
    radius = 1.8 - 1.35 * frac
    for sign in (-1.0, 1.0):
        centers = np.stack([4.5 + sign * radius, np.full(4, 4.5)], axis=1)
        fingers.append(FingerPath(times, centers, peaks, sigma=0.8))
    # five-finger pinch-out: 3500..4100 ms around (4.5, 4.5)
    times, peaks = _static_envelope(3500.0, 4100.0, 50.0)
    frac = (times - 3500.0) / 600.0
    radius = 0.8 + 2.4 * frac
    for k in range(5):
        ang = 2.0 * np.pi * k / 5.0 + 0.3
        centers = np.stack([4.5 + radius * np.cos(ang),
                            4.5 + radius * np.sin(ang)], axis=1)
        fingers.append(FingerPath(times, centers, peaks, sigma=0.8))
    return GestureScript(gesture=GestureClass.INVALID, fingers=fingers,
                         duration_ms=6000.0, variant="golden_composite")


def session_config() -> SessionConfig:
    return SessionConfig(control=ControlConfig(initial_pose=Pose(),
                                               home_pose=Pose()))


def verify_replay(events) -> dict:
    actives = [e.active for e in events]
    summary = {
        "z_active_ticks": sum(a == GestureClass.TRANSLATE_Z_POS for a in actives),
        "x_active_ticks": sum(a == GestureClass.TRANSLATE_X_POS for a in actives),
        "aux_ticks": sum(e.aux is not None for e in events),
    }
    final = events[-1].pose
    summary["final_pose_is_home"] = final == Pose()
    z_peak = max(e.pose.position[2] for e in events)
    x_peak = max(e.pose.position[0] for e in events)
    summary["z_peak"] = round(z_peak, 4)
    summary["x_peak"] = round(x_peak, 4)
    ok = (summary["z_active_ticks"] > 100 and summary["x_active_ticks"] > 100
          and summary["aux_ticks"] >= 1 and summary["final_pose_is_home"]
          and z_peak > 0.01 and x_peak > 0.01)
    return ok, summary


def print_timeline(events):
    """Compressed (tick range, detected, active, aux) transition dump."""
    last = None
    start = 0
    for event in events + [None]:
        key = None if event is None else (event.detected, event.active,
                                          event.aux)
        if key != last:
            if last is not None:
                det, act, aux = last
                print(f"  ticks {start:4d}-{event.tick - 1 if event else 'end':>4}: "
                      f"detected={det.short_name:16s} "
                      f"active={act.short_name if act else '-':16s}"
                      f"{' aux=' + aux if aux else ''}")
            last = key
            start = event.tick if event else 0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller training run (for trying things out)")
    parser.add_argument("--retrain", action="store_true",
                        help="retrain even if a cached model exists")
    parser.add_argument("--timeline", action="store_true",
                        help="print the replay transition timeline")
    args = parser.parse_args()
    FIXTURES.mkdir(parents=True, exist_ok=True)

    model_path = FIXTURES / "replay_model.twt"
    if model_path.exists() and not args.retrain:
        print(f"reusing cached model {model_path}")
        model = nn.load_params(model_path)
    else:
        if args.quick:
            model, acc = train_fixture_model(per_class=4, n_aug=60, epochs=6)
        else:
            model, acc = train_fixture_model(per_class=8, n_aug=100, epochs=12)
        nn.save_params(model_path, model)
        print(f"saved model to {model_path}")

    capture = render(golden_script(), NoiseModel(rng_seed=2024), fps=200.0)
    print(f"golden capture: {len(capture)} frames")

    events = list(run_session(capture, model, session_config()))
    ok, summary = verify_replay(events)
    print("replay summary:", summary)
    if args.timeline or not ok:
        print_timeline(events)
    if not ok:
        print("FIXTURE REJECTED: replay does not satisfy the gesture "
              "semantics; not writing capture/log")
        return 1

    wire.write_capture(FIXTURES / "golden_capture.skn", capture)
    with open(FIXTURES / "golden_events.jsonl", "w") as fh:
        for event in events:
            fh.write(event.to_json() + "\n")
    print(f"wrote fixtures to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
