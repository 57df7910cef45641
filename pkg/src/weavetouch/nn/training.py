"""Training loop (adaptive-moment optimizer), evaluation and reports."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..data import TRAIN, VAL, Dataset
from .core import cross_entropy
from .models import build_model


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; training aborted."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 20
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 3                 # epochs without val improvement
    stop_accuracy: float | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


class Adam:
    """First-order adaptive-moment optimizer; updates params in place."""

    def __init__(self, model, cfg: TrainConfig):
        self.model = model
        self.lr = cfg.learning_rate
        self.b1, self.b2, self.eps = cfg.beta1, cfg.beta2, cfg.eps
        self.t = 0
        self.m = {name: np.zeros_like(owner.params[key])
                  for name, owner, key in model.named_params()}
        self.v = {name: np.zeros_like(owner.params[key])
                  for name, owner, key in model.named_params()}

    def step(self) -> None:
        self.t += 1
        bias1 = 1.0 - self.b1 ** self.t
        bias2 = 1.0 - self.b2 ** self.t
        for name, owner, key in self.model.named_params():
            g = owner.grads[key]
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            owner.params[key] -= (self.lr / bias1) * m / (
                np.sqrt(v / bias2) + self.eps)


@dataclass
class EvalReport:
    """Accuracy, per-class confusion counts and per-window latency."""

    accuracy: float
    confusion: np.ndarray          # (n_classes, n_classes), rows = true
    mean_latency_ms: float

    def row_sums(self) -> np.ndarray:
        return self.confusion.sum(axis=1)


@dataclass
class EpochReport:
    epoch: int
    train_loss: float
    val_accuracy: float
    seconds: float
    best_so_far: bool


def evaluate(model, windows: np.ndarray, labels: np.ndarray,
             batch_size: int = 512, latency_windows: int = 50) -> EvalReport:
    """Confusion matrix + accuracy (batched) and single-window latency."""
    n_classes = model.cfg.n_classes
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for start in range(0, len(windows), batch_size):
        chunk = windows[start:start + batch_size]
        preds = model.forward(chunk, ctx=None).argmax(axis=1)
        true = labels[start:start + batch_size]
        np.add.at(confusion, (true, preds), 1)
    accuracy = float(np.trace(confusion)) / max(1, len(windows))
    lat = measure_latency(model, windows, min(latency_windows, len(windows)))
    return EvalReport(accuracy=accuracy, confusion=confusion,
                      mean_latency_ms=lat)


def measure_latency(model, windows: np.ndarray, n: int = 1000) -> float:
    """Mean single-window classify latency in milliseconds."""
    if n <= 0 or len(windows) == 0:
        return 0.0
    idx = np.arange(n) % len(windows)
    t0 = time.perf_counter()
    for i in idx:
        model.predict_proba(windows[i:i + 1])
    return (time.perf_counter() - t0) * 1000.0 / n


def train(ds: Dataset, cfg: TrainConfig, arch: str = "hybrid",
          model_config: dict | None = None, metrics_sink=None,
          log=None) -> tuple[object, list[EpochReport]]:
    """Mini-batch training with early stopping on validation accuracy.

    Deterministic for a fixed (dataset, config, arch) in single-worker
    mode.  Returns the best-validation model and per-epoch reports.
    Raises TrainingDiverged as soon as a batch loss goes non-finite.
    """
    x_train, y_train = ds.subset_arrays(TRAIN)
    x_val, y_val = ds.subset_arrays(VAL)
    if len(x_train) == 0 or len(x_val) == 0:
        raise ValueError("dataset must contain both train and val samples")
    model = build_model(arch, model_config, seed=cfg.seed)
    shuffle_rng = np.random.default_rng(cfg.seed + 0x7a11)
    optimizer = Adam(model, cfg)
    best_state = model.state_dict()
    best_acc = -1.0
    stall = 0
    reports: list[EpochReport] = []
    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(len(x_train))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            ctx = {}
            logits = model.forward(x_train[batch], ctx)
            loss, dlogits = cross_entropy(logits, y_train[batch])
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, "
                    f"batch {start // cfg.batch_size}: {loss}")
            model.zero_grads()
            model.backward(dlogits, ctx)
            optimizer.step()
            losses.append(loss)
        val = evaluate(model, x_val, y_val, latency_windows=0)
        improved = val.accuracy > best_acc
        if improved:
            best_acc = val.accuracy
            best_state = model.state_dict()
            stall = 0
        else:
            stall += 1
        rep = EpochReport(epoch=epoch, train_loss=float(np.mean(losses)),
                          val_accuracy=val.accuracy,
                          seconds=time.perf_counter() - t0,
                          best_so_far=improved)
        reports.append(rep)
        if metrics_sink is not None:
            metrics_sink({"epoch": rep.epoch, "train_loss": rep.train_loss,
                          "val_accuracy": rep.val_accuracy,
                          "seconds": rep.seconds, "arch": arch})
        if log is not None:
            log(f"epoch {rep.epoch:3d}  loss {rep.train_loss:.4f}  "
                f"val_acc {rep.val_accuracy:.4f}  ({rep.seconds:.1f}s)")
        if cfg.stop_accuracy is not None and val.accuracy >= cfg.stop_accuracy:
            break
        if stall > cfg.patience:
            break
    model.load_state_dict(best_state)
    return model, reports
