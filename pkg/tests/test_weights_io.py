import numpy as np
import pytest

from weavetouch.nn import (ArchitectureMismatchError, WeightChecksumError,
                           WeightFormatError, build_model, load_params,
                           save_params)


@pytest.fixture(scope="module")
def small_hybrid():
    cfg = dict(d_model=8, n_layers=1, n_heads=2, ffn_dim=16,
               conv_channels=(2, 4), window=5)
    return build_model("hybrid", cfg, seed=9)


def test_roundtrip_bit_exact(small_hybrid, tmp_path):
    path = tmp_path / "m.twt"
    save_params(path, small_hybrid)
    loaded = load_params(path)
    assert loaded.arch == "hybrid"
    assert loaded.cfg == small_hybrid.cfg
    for (n1, o1, k1), (n2, o2, k2) in zip(small_hybrid.named_params(),
                                          loaded.named_params()):
        assert n1 == n2
        np.testing.assert_array_equal(o1.params[k1], o2.params[k2])


def test_lstm_roundtrip(tmp_path):
    model = build_model("lstm", dict(hidden=4, window=5), seed=1)
    path = tmp_path / "l.twt"
    save_params(path, model)
    loaded = load_params(path)
    assert loaded.arch == "lstm"
    state_a = model.state_dict()
    state_b = loaded.state_dict()
    for key in state_a:
        np.testing.assert_array_equal(state_a[key], state_b[key])


def test_architecture_mismatch_rejected(small_hybrid, tmp_path):
    path = tmp_path / "m.twt"
    save_params(path, small_hybrid)
    with pytest.raises(ArchitectureMismatchError):
        load_params(path, expect_arch="lstm")


def test_checksum_corruption_rejected(small_hybrid, tmp_path):
    path = tmp_path / "m.twt"
    save_params(path, small_hybrid)
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0x40
    path.write_bytes(bytes(blob))
    with pytest.raises(WeightChecksumError):
        load_params(path)


def test_not_a_weight_file(tmp_path):
    path = tmp_path / "junk.twt"
    path.write_bytes(b"this is not weights")
    with pytest.raises(WeightFormatError):
        load_params(path)


def test_inference_identical_after_reload(small_hybrid, tmp_path):
    path = tmp_path / "m.twt"
    save_params(path, small_hybrid)
    loaded = load_params(path)
    x = np.random.default_rng(5).normal(size=(3, 5, 10, 10)).astype(np.float32)
    np.testing.assert_array_equal(small_hybrid.predict_proba(x),
                                  loaded.predict_proba(x))
