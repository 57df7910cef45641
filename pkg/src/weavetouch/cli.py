"""Command-line entry points for the gesture control stack.

Subcommands: generate (synthetic captures), augment (captures -> .tds
dataset), train, eval, bench, replay and serve.  A JSON config file named
by the WEAVETOUCH_CONFIG environment variable supplies session defaults
(poses, thresholds, speeds); explicit flags win over it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import data, nn, sim, wire
from .control import ControlConfig, GestureClass
from .poses import Pose
from .session import SessionConfig, run_session

CONFIG_ENV = "WEAVETOUCH_CONFIG"


class CliError(RuntimeError):
    pass


def _load_default_config() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc


def _session_config(defaults: dict) -> SessionConfig:
    def pose(key, fallback):
        spec = defaults.get(key)
        if spec is None:
            return fallback
        return Pose(position=tuple(spec["position"]),
                    orientation=tuple(spec.get("orientation", (1, 0, 0, 0))))

    ctrl = ControlConfig(
        dwell_ticks=int(defaults.get("dwell_ticks", 20)),
        invalid_release_ticks=int(defaults.get("invalid_release_ticks", 5)),
        linear_speed=float(defaults.get("linear_speed", 0.05)),
        angular_speed=float(defaults.get("angular_speed", 0.2)),
        recover_linear_speed=float(defaults.get("recover_linear_speed", 0.2)),
        recover_angular_speed=float(defaults.get("recover_angular_speed", 0.5)),
        initial_pose=pose("initial_pose", Pose()),
        home_pose=pose("home_pose", Pose()),
    )
    return SessionConfig(
        contact_threshold=float(defaults.get("contact_threshold", 0.05)),
        control=ctrl)


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    classes = [g for g in GestureClass if g != GestureClass.INVALID]
    if args.include_invalid:
        classes.append(GestureClass.INVALID)
    entries = []
    for cls in classes:
        for k in range(args.per_class):
            seed = args.seed + 1000 * int(cls) + k
            noise = sim.NoiseModel(gaussian_sigma=args.noise_sigma,
                                   drift_rate=args.drift_rate, rng_seed=seed)
            frames, core = data.synthesize_capture(cls, seed, noise)
            name = f"rec_{cls.short_name}_{k:03d}.skn"
            wire.write_capture(out / name, frames)
            entries.append({"file": name, "gesture": cls.short_name,
                            "seed": seed, "core": list(core)})
    manifest = {"version": 1, "fps": 200, "entries": entries}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    print(f"wrote {len(entries)} captures to {out}")
    return 0


def _load_recordings(captures: Path) -> list[data.Recording]:
    with open(captures / "manifest.json") as fh:
        manifest = json.load(fh)
    recordings = []
    for entry in manifest["entries"]:
        frames, stats = wire.read_capture(captures / entry["file"])
        if stats.crc_dropped or stats.truncated_tail:
            print(f"warning: {entry['file']}: {stats}", file=sys.stderr)
        recordings.append(data.recording_from_frames(
            GestureClass.from_name(entry["gesture"]), frames,
            tuple(entry["core"])))
    return recordings


def cmd_augment(args) -> int:
    recordings = _load_recordings(Path(args.captures))
    ds = data.build_dataset(recordings, args.per_recording, args.seed)
    data.save_dataset(ds, args.out)
    n_train = int((ds.split == data.TRAIN).sum())
    print(f"dataset: {len(ds)} samples ({n_train} train / "
          f"{len(ds) - n_train} val) -> {args.out}")
    return 0


def cmd_train(args) -> int:
    ds = data.load_dataset(args.dataset)
    cfg = nn.TrainConfig(learning_rate=args.lr, batch_size=args.batch_size,
                         max_epochs=args.epochs, seed=args.seed,
                         patience=args.patience,
                         stop_accuracy=args.stop_accuracy)
    sink = None
    metrics_fh = None
    if args.metrics:
        metrics_fh = open(args.metrics, "w")

        def sink(rec):
            metrics_fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            metrics_fh.flush()

    try:
        model, reports = nn.train(ds, cfg, arch=args.arch, metrics_sink=sink,
                                  log=lambda msg: print(msg, flush=True))
    finally:
        if metrics_fh:
            metrics_fh.close()
    nn.save_params(args.out, model)
    best = max(r.val_accuracy for r in reports)
    print(f"best val accuracy {best:.4f}; weights -> {args.out}")
    return 0


def _format_confusion(confusion: np.ndarray) -> str:
    names = [g.short_name for g in GestureClass]
    width = max(len(n) for n in names)
    lines = [" " * width + " " + " ".join(f"{i:>5d}" for i in range(len(names)))]
    for i, row in enumerate(confusion):
        lines.append(f"{names[i]:>{width}} " +
                     " ".join(f"{int(c):>5d}" for c in row))
    return "\n".join(lines)


def cmd_eval(args) -> int:
    ds = data.load_dataset(args.dataset)
    model = nn.load_params(args.weights)
    which = data.TRAIN if args.split == "train" else data.VAL
    windows, labels = ds.subset_arrays(which)
    report = nn.evaluate(model, windows, labels)
    print(_format_confusion(report.confusion))
    print(f"accuracy: {report.accuracy:.4f} on {len(windows)} "
          f"{args.split} windows ({model.arch})")
    return 0


def cmd_bench(args) -> int:
    model = nn.load_params(args.weights)
    rng = np.random.default_rng(0)
    windows = rng.normal(0.0, 0.1, size=(64, model.cfg.window, 10, 10)) \
        .astype(np.float32)
    lat = nn.measure_latency(model, windows, n=args.windows)
    print(f"mean classify latency: {lat:.3f} ms/window "
          f"over {args.windows} windows ({model.arch})")
    print("pipeline buffering: 20-frame filter history + "
          f"{model.cfg.window}-frame window + 1 tick")
    if lat > args.budget_ms:
        print(f"FAIL: exceeds {args.budget_ms} ms budget")
        return 1
    return 0


def cmd_replay(args) -> int:
    frames, stats = wire.read_capture(args.capture)
    if stats.crc_dropped:
        print(f"warning: {stats.crc_dropped} frames dropped (CRC)",
              file=sys.stderr)
    model = nn.load_params(args.weights)
    cfg = _session_config(_load_default_config())
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for event in run_session(frames, model, cfg):
            out.write(event.to_json() + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    model = nn.load_params(args.weights)
    cfg = _session_config(_load_default_config())
    app = create_app(model, cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weavetouch",
        description="gesture-driven robot control on a simulated tactile skin")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize gesture captures (.skn)")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.02)
    p.add_argument("--drift-rate", type=float, default=0.01)
    p.add_argument("--include-invalid", action="store_true", default=True)
    p.add_argument("--no-invalid", dest="include_invalid", action="store_false")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("augment", help="build a .tds dataset from captures")
    p.add_argument("--captures", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--per-recording", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train a classifier on a .tds dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--arch", choices=("hybrid", "lstm"), default="hybrid")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--stop-accuracy", type=float, default=None)
    p.add_argument("--metrics", help="write per-epoch JSONL metrics here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="confusion matrix + accuracy")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--split", choices=("train", "val"), default="val")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="single-window inference latency")
    p.add_argument("--weights", required=True)
    p.add_argument("--windows", type=int, default=1000)
    p.add_argument("--budget-ms", type=float, default=50.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="capture -> StateEvent log")
    p.add_argument("--capture", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="WebSocket session endpoint")
    p.add_argument("--weights", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, OSError, ValueError, RuntimeError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
