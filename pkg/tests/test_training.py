import numpy as np
import pytest

from weavetouch import data
from weavetouch.control import GestureClass
from weavetouch.nn import TrainConfig, TrainingDiverged, evaluate, train

G = GestureClass

# downsized hybrid that still separates the 2-class toy task quickly
SMOKE_MODEL = dict(d_model=32, n_layers=2, n_heads=4, ffn_dim=64,
                   conv_channels=(8, 16))


@pytest.fixture(scope="module")
def toy_dataset():
    """Swipe-up vs swipe-down toy subset, high augmentation density."""
    recs = []
    for k in range(10):
        recs.append(data.synthesize_recording(G.TRANSLATE_Z_POS, 100 + k))
        recs.append(data.synthesize_recording(G.TRANSLATE_Z_NEG, 200 + k))
    return data.build_dataset(recs, n_per_rec=150, seed=42)


@pytest.mark.slow
def test_toy_two_class_training_reaches_99(toy_dataset):
    cfg = TrainConfig(seed=0, max_epochs=5, batch_size=16)
    model, reports = train(toy_dataset, cfg, arch="hybrid",
                           model_config=SMOKE_MODEL)
    best = max(r.val_accuracy for r in reports)
    assert best >= 0.99, f"best val accuracy {best:.4f}"
    assert len(reports) <= 5


def test_training_deterministic_single_worker(toy_dataset):
    # tiny slice of the toy set keeps this fast; bit-identical weights
    small = data.Dataset(windows=toy_dataset.windows[:300],
                         labels=toy_dataset.labels[:300],
                         split=toy_dataset.split[:300], seed=1)
    cfg = TrainConfig(seed=3, max_epochs=2, batch_size=32)
    model_a, _ = train(small, cfg, arch="hybrid", model_config=SMOKE_MODEL)
    model_b, _ = train(small, cfg, arch="hybrid", model_config=SMOKE_MODEL)
    state_a = model_a.state_dict()
    state_b = model_b.state_dict()
    for key in state_a:
        np.testing.assert_array_equal(state_a[key], state_b[key])


def test_divergence_aborts_with_diagnostic(toy_dataset):
    # bounded cross-entropy gradients plus pre-norm layer norms keep the
    # loss finite up to astonishing step sizes; 1e7 reliably overflows the
    # logits and must abort with the divergence diagnostic
    small = data.Dataset(windows=toy_dataset.windows[:300],
                         labels=toy_dataset.labels[:300],
                         split=toy_dataset.split[:300], seed=1)
    cfg = TrainConfig(seed=0, max_epochs=3, batch_size=32, learning_rate=1e7)
    with pytest.raises(TrainingDiverged, match="non-finite loss"):
        with np.errstate(all="ignore"):
            train(small, cfg, arch="hybrid", model_config=SMOKE_MODEL)


def test_metrics_sink_receives_epoch_records(toy_dataset):
    small = data.Dataset(windows=toy_dataset.windows[:300],
                         labels=toy_dataset.labels[:300],
                         split=toy_dataset.split[:300], seed=1)
    records = []
    cfg = TrainConfig(seed=0, max_epochs=2, batch_size=32)
    train(small, cfg, arch="hybrid", model_config=SMOKE_MODEL,
          metrics_sink=records.append)
    assert len(records) == 2
    assert all({"epoch", "train_loss", "val_accuracy"} <= set(r) for r in records)


def test_empty_split_rejected(toy_dataset):
    broken = data.Dataset(windows=toy_dataset.windows[:10],
                          labels=toy_dataset.labels[:10],
                          split=np.zeros(10, dtype=np.uint8), seed=1)
    with pytest.raises(ValueError):
        train(broken, TrainConfig(max_epochs=1), arch="hybrid",
              model_config=SMOKE_MODEL)


def test_evaluate_confusion_properties(toy_dataset):
    from weavetouch.nn import build_model
    model = build_model("hybrid", SMOKE_MODEL, seed=0)
    x, y = toy_dataset.subset_arrays(data.VAL)
    x, y = x[:100], y[:100]
    report = evaluate(model, x, y, latency_windows=5)
    assert report.confusion.shape == (15, 15)
    # row sums equal per-class counts; accuracy equals trace/total
    for cls in range(15):
        assert report.confusion[cls].sum() == int((y == cls).sum())
    assert report.accuracy == pytest.approx(
        np.trace(report.confusion) / len(y))
    assert report.mean_latency_ms > 0.0


class _Memorizer:
    """Perfect lookup classifier: upper-bound sanity for evaluate()."""

    class cfg:
        n_classes = 15

    def __init__(self, windows, labels):
        self.table = {w.tobytes(): int(l) for w, l in zip(windows, labels)}

    def forward(self, chunk, ctx=None):
        logits = np.zeros((len(chunk), 15), dtype=np.float32)
        for i, window in enumerate(chunk):
            logits[i, self.table[window.tobytes()]] = 1.0
        return logits

    def predict_proba(self, chunk):
        return self.forward(chunk)


def test_memorizing_model_perfect_on_train_data(toy_dataset):
    x, y = toy_dataset.subset_arrays(data.TRAIN)
    x, y = x[:200], y[:200]
    report = evaluate(_Memorizer(x, y), x, y, latency_windows=0)
    assert report.accuracy == 1.0
    assert np.all(report.confusion == np.diag(np.diag(report.confusion)))
    for cls in range(15):
        assert report.confusion[cls].sum() == int((y == cls).sum())
