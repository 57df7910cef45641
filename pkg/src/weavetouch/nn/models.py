"""Gesture classifier architectures: conv-transformer hybrid and BiLSTM.

The hybrid encodes each 10x10 frame with a small convolutional stem into a
64-d embedding, adds sinusoidal positional encodings over the 30-frame
window, runs 4 pre-norm transformer encoder layers, mean-pools over time
and classifies with a two-layer MLP head.  The recurrent baseline flattens
each frame to a 100-d vector and runs a bidirectional LSTM, concatenating
the two final hidden states.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import (Conv2d, EncoderLayer, GlobalAvgPool, Linear, MaxPool2x2,
                   Module, ReLU, positional_encoding, softmax)


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 64
    n_layers: int = 4
    n_heads: int = 4
    ffn_dim: int = 128
    conv_channels: tuple[int, int] = (16, 32)
    window: int = 30
    n_classes: int = 15
    grid: tuple[int, int] = (10, 10)
    # "flatten" keeps per-frame contact position in the embedding; "gap"
    # (global average pooling) is position-invariant and cannot separate
    # direction pairs such as swipe-up vs swipe-down
    stem_pool: str = "flatten"

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("conv_channels", "grid"):
            if key in d:
                d[key] = tuple(d[key])
        return ModelConfig(**d)


@dataclass(frozen=True)
class LstmConfig:
    hidden: int = 128
    window: int = 30
    n_classes: int = 15
    input_dim: int = 100

    @staticmethod
    def from_dict(d: dict) -> "LstmConfig":
        return LstmConfig(**d)


class Flatten(Module):
    def forward(self, x, ctx):
        if ctx is not None:
            ctx["shape"] = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy, ctx):
        return dy.reshape(ctx["shape"])


class ConvStem(Module):
    """Per-frame encoder: conv-relu-pool-conv-relu-(flatten|GAP)-linear."""

    def __init__(self, cfg: ModelConfig, rng, dtype=np.float32):
        super().__init__()
        c1, c2 = cfg.conv_channels
        self.add_child("conv1", Conv2d(1, c1, rng, dtype))
        self.add_child("relu1", ReLU())
        self.add_child("pool", MaxPool2x2())
        self.add_child("conv2", Conv2d(c1, c2, rng, dtype))
        self.add_child("relu2", ReLU())
        if cfg.stem_pool == "gap":
            self.add_child("reduce", GlobalAvgPool())
            proj_in = c2
        else:
            self.add_child("reduce", Flatten())
            proj_in = c2 * (cfg.grid[0] // 2) * (cfg.grid[1] // 2)
        self.add_child("proj", Linear(proj_in, cfg.d_model, rng, dtype,
                                      init="xavier"))
        self._order = ("conv1", "relu1", "pool", "conv2", "relu2", "reduce", "proj")

    def forward(self, x, ctx):
        sub = {n: {} for n in self._order} if ctx is not None else None
        if ctx is not None:
            ctx["sub"] = sub
        for name in self._order:
            x = self._children[name].forward(x, sub and sub[name])
        return x

    def backward(self, dy, ctx):
        sub = ctx["sub"]
        for name in reversed(self._order):
            dy = self._children[name].backward(dy, sub[name])
        return dy


class HybridClassifier(Module):
    """Conv stem + positional encoding + transformer encoder + MLP head."""

    arch = "hybrid"

    def __init__(self, cfg: ModelConfig = ModelConfig(), seed: int = 0,
                 dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        self.add_child("stem", ConvStem(cfg, rng, dtype))
        for i in range(cfg.n_layers):
            self.add_child(f"enc{i}", EncoderLayer(cfg.d_model, cfg.n_heads,
                                                   cfg.ffn_dim, rng, dtype))
        self.add_child("head1", Linear(cfg.d_model, cfg.d_model, rng, dtype))
        self.add_child("head_act", ReLU())
        self.add_child("head2", Linear(cfg.d_model, cfg.n_classes, rng, dtype,
                                       init="xavier"))
        self.pe = positional_encoding(cfg.window, cfg.d_model, dtype)
        # canonical embedding scale keeps the contact signal comparable to
        # the positional encodings at init
        self.embed_scale = float(np.sqrt(cfg.d_model))

    @property
    def config_dict(self) -> dict:
        return asdict(self.cfg)

    def stem_embed(self, frames: np.ndarray, ctx=None) -> np.ndarray:
        """(N, 10, 10) frames -> (N, d_model) embeddings."""
        return self._children["stem"].forward(frames[:, None, :, :], ctx)

    def encode(self, z: np.ndarray, ctx=None) -> np.ndarray:
        """Run the encoder stack on (B, T, d) embeddings (already + PE)."""
        subs = None
        if ctx is not None:
            subs = [{} for _ in range(self.cfg.n_layers)]
            ctx["enc"] = subs
        for i in range(self.cfg.n_layers):
            z = self._children[f"enc{i}"].forward(z, subs and subs[i])
        return z

    def forward(self, windows: np.ndarray, ctx=None) -> np.ndarray:
        """(B, T, 10, 10) windows -> (B, n_classes) logits."""
        b, t, h, w = windows.shape
        if t != self.cfg.window or (h, w) != self.cfg.grid:
            raise ValueError(f"expected (B, {self.cfg.window}, "
                             f"{self.cfg.grid[0]}, {self.cfg.grid[1]}) input, "
                             f"got {windows.shape}")
        sub = {n: {} for n in ("stem", "head1", "head_act", "head2")} \
            if ctx is not None else None
        if ctx is not None:
            ctx["sub"] = sub
            ctx["bt"] = (b, t)
        frames = windows.reshape(b * t, h, w).astype(self.dtype, copy=False)
        z = self.stem_embed(frames, sub and sub["stem"]).reshape(b, t, -1)
        z = z * self.embed_scale + self.pe
        z = self.encode(z, ctx)
        pooled = z.mean(axis=1)
        y = self._children["head1"].forward(pooled, sub and sub["head1"])
        y = self._children["head_act"].forward(y, sub and sub["head_act"])
        return self._children["head2"].forward(y, sub and sub["head2"])

    def backward(self, dlogits: np.ndarray, ctx) -> None:
        sub = ctx["sub"]
        b, t = ctx["bt"]
        dy = self._children["head2"].backward(dlogits, sub["head2"])
        dy = self._children["head_act"].backward(dy, sub["head_act"])
        dpooled = self._children["head1"].backward(dy, sub["head1"])
        dz = np.broadcast_to(dpooled[:, None, :] / t,
                             (b, t, self.cfg.d_model)).astype(dpooled.dtype)
        for i in reversed(range(self.cfg.n_layers)):
            dz = self._children[f"enc{i}"].backward(dz, ctx["enc"][i])
        self._children["stem"].backward(
            dz.reshape(b * t, -1) * self.embed_scale, sub["stem"])

    def predict_proba(self, windows: np.ndarray) -> np.ndarray:
        return softmax(self.forward(windows, ctx=None), axis=1)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class _LstmDirection(Module):
    """One LSTM direction over (B, T, input_dim); returns the final h."""

    def __init__(self, cfg: LstmConfig, rng, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        h, d = cfg.hidden, cfg.input_dim
        a_x = np.sqrt(6.0 / (d + 4 * h))
        a_h = np.sqrt(6.0 / (h + 4 * h))
        self.add_param("Wx", rng.uniform(-a_x, a_x, size=(d, 4 * h)).astype(dtype))
        self.add_param("Wh", rng.uniform(-a_h, a_h, size=(h, 4 * h)).astype(dtype))
        bias = np.zeros(4 * h, dtype=dtype)
        bias[h:2 * h] = 1.0  # forget-gate bias keeps early memory alive
        self.add_param("b", bias)

    def forward(self, x: np.ndarray, ctx: dict | None) -> np.ndarray:
        b, t, d = x.shape
        hsz = self.cfg.hidden
        xproj = x.reshape(b * t, d) @ self.params["Wx"] + self.params["b"]
        xproj = xproj.reshape(b, t, 4 * hsz)
        h = np.zeros((b, hsz), dtype=x.dtype)
        c = np.zeros((b, hsz), dtype=x.dtype)
        steps = []
        for k in range(t):
            gates = xproj[:, k] + h @ self.params["Wh"]
            i = _sigmoid(gates[:, :hsz])
            f = _sigmoid(gates[:, hsz:2 * hsz])
            g = np.tanh(gates[:, 2 * hsz:3 * hsz])
            o = _sigmoid(gates[:, 3 * hsz:])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            if ctx is not None:
                steps.append((h, c, i, f, g, o, tanh_c))
            h = o * tanh_c
            c = c_new
        if ctx is not None:
            ctx["steps"] = steps
            ctx["x"] = x
        return h

    def backward(self, dh_final: np.ndarray, ctx: dict) -> None:
        x = ctx["x"]
        b, t, d = x.shape
        hsz = self.cfg.hidden
        steps = ctx["steps"]
        dh = dh_final
        dc = np.zeros_like(dh_final)
        dxproj = np.zeros((b, t, 4 * hsz), dtype=x.dtype)
        d_wh = self.grads["Wh"]
        for k in range(t - 1, -1, -1):
            h_prev, c_prev, i, f, g, o, tanh_c = steps[k]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c ** 2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dgates = np.concatenate([di * i * (1 - i), df * f * (1 - f),
                                     dg * (1 - g ** 2), do * o * (1 - o)], axis=1)
            dxproj[:, k] = dgates
            d_wh += h_prev.T @ dgates
            dh = dgates @ self.params["Wh"].T
            dc = dc * f
        flat = dxproj.reshape(b * t, 4 * hsz)
        self.grads["Wx"] += x.reshape(b * t, d).T @ flat
        self.grads["b"] += flat.sum(axis=0)


class BiLstmClassifier(Module):
    """Bidirectional LSTM over flattened frames; concat final states."""

    arch = "lstm"

    def __init__(self, cfg: LstmConfig = LstmConfig(), seed: int = 0,
                 dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        self.add_child("fwd", _LstmDirection(cfg, rng, dtype))
        self.add_child("bwd", _LstmDirection(cfg, rng, dtype))
        self.add_child("head", Linear(2 * cfg.hidden, cfg.n_classes, rng, dtype,
                                      init="xavier"))

    @property
    def config_dict(self) -> dict:
        return asdict(self.cfg)

    def forward(self, windows: np.ndarray, ctx=None) -> np.ndarray:
        b, t = windows.shape[:2]
        if t != self.cfg.window:
            raise ValueError(f"expected {self.cfg.window}-frame windows, got {t}")
        x = windows.reshape(b, t, -1).astype(self.dtype, copy=False)
        sub = {n: {} for n in ("fwd", "bwd", "head")} if ctx is not None else None
        if ctx is not None:
            ctx["sub"] = sub
        h_f = self._children["fwd"].forward(x, sub and sub["fwd"])
        h_b = self._children["bwd"].forward(x[:, ::-1], sub and sub["bwd"])
        concat = np.concatenate([h_f, h_b], axis=1)
        return self._children["head"].forward(concat, sub and sub["head"])

    def backward(self, dlogits: np.ndarray, ctx) -> None:
        sub = ctx["sub"]
        dconcat = self._children["head"].backward(dlogits, sub["head"])
        hsz = self.cfg.hidden
        self._children["fwd"].backward(dconcat[:, :hsz], sub["fwd"])
        self._children["bwd"].backward(dconcat[:, hsz:], sub["bwd"])

    def predict_proba(self, windows: np.ndarray) -> np.ndarray:
        return softmax(self.forward(windows, ctx=None), axis=1)


def build_model(arch: str, config: dict | None = None, seed: int = 0,
                dtype=np.float32):
    if arch == "hybrid":
        cfg = ModelConfig.from_dict(config) if config else ModelConfig()
        return HybridClassifier(cfg, seed=seed, dtype=dtype)
    if arch == "lstm":
        cfg = LstmConfig.from_dict(config) if config else LstmConfig()
        return BiLstmClassifier(cfg, seed=seed, dtype=dtype)
    raise ValueError(f"unknown architecture {arch!r}")
