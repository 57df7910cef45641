"""Minimal from-scratch neural network layers on numpy.

Every layer implements forward(x, ctx) / backward(dy, ctx) with exact
analytic gradients accumulated into per-parameter grad buffers.  ctx is a
per-call cache dict: pass one during training, pass None for cache-free
(and therefore thread-safe, read-only) inference.  Parameters are updated
strictly in place so optimizer and checkpoint code can hold references.
"""

from __future__ import annotations

import numpy as np


class Module:
    """Base: owns named parameters/grad buffers and child modules."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._children: dict[str, "Module"] = {}

    def add_param(self, name: str, array: np.ndarray) -> np.ndarray:
        self.params[name] = array
        self.grads[name] = np.zeros_like(array)
        return array

    def add_child(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def named_params(self, prefix: str = ""):
        """Yield (full_name, owner_module, key) in deterministic order."""
        for key in self.params:
            yield (prefix + key, self, key)
        for cname, child in self._children.items():
            yield from child.named_params(prefix + cname + ".")

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: owner.params[key].copy()
                for name, owner, key in self.named_params()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, owner, key in self.named_params():
            src = state[name]
            if src.shape != owner.params[key].shape:
                raise ValueError(f"shape mismatch for {name}: "
                                 f"{src.shape} vs {owner.params[key].shape}")
            np.copyto(owner.params[key], src)

    def zero_grads(self) -> None:
        for _, owner, key in self.named_params():
            owner.grads[key][...] = 0

    def n_params(self) -> int:
        return sum(owner.params[key].size for _, owner, key in self.named_params())


class Linear(Module):
    """y = x @ W + b over the last axis; any leading shape."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator,
                 dtype=np.float32, init: str = "he"):
        super().__init__()
        if init == "he":
            std = np.sqrt(2.0 / n_in)
            w = rng.normal(0.0, std, size=(n_in, n_out))
        else:  # xavier uniform
            a = np.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-a, a, size=(n_in, n_out))
        self.add_param("W", w.astype(dtype))
        self.add_param("b", np.zeros(n_out, dtype=dtype))

    def forward(self, x: np.ndarray, ctx: dict | None) -> np.ndarray:
        if ctx is not None:
            ctx["x"] = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy: np.ndarray, ctx: dict) -> np.ndarray:
        x = ctx["x"]
        x2 = x.reshape(-1, x.shape[-1])
        dy2 = dy.reshape(-1, dy.shape[-1])
        self.grads["W"] += x2.T @ dy2
        self.grads["b"] += dy2.sum(axis=0)
        return dy @ self.params["W"].T


class ReLU(Module):
    def forward(self, x, ctx):
        if ctx is not None:
            ctx["mask"] = x > 0
        return np.maximum(x, 0)

    def backward(self, dy, ctx):
        return dy * ctx["mask"]


def _im2col(x: np.ndarray, k: int, pad: int) -> np.ndarray:
    """(N, C, H, W) -> (N*H*W, C*k*k) patch matrix for stride-1 conv."""
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(2, 3))
    # (N, C, H, W, k, k) -> (N, H, W, C, k, k)
    return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(
        n * h * w, c * k * k)


class Conv2d(Module):
    """3x3 same-padding convolution, stride 1, via im2col matmuls."""

    def __init__(self, c_in: int, c_out: int, rng: np.random.Generator,
                 dtype=np.float32, k: int = 3):
        super().__init__()
        self.c_in, self.c_out, self.k = c_in, c_out, k
        std = np.sqrt(2.0 / (c_in * k * k))
        self.add_param("W", rng.normal(0.0, std, size=(c_out, c_in, k, k)).astype(dtype))
        self.add_param("b", np.zeros(c_out, dtype=dtype))

    @staticmethod
    def _matmul_form(w4: np.ndarray) -> np.ndarray:
        c_out = w4.shape[0]
        return w4.transpose(1, 2, 3, 0).reshape(-1, c_out)

    def forward(self, x: np.ndarray, ctx: dict | None) -> np.ndarray:
        n, _, h, w = x.shape
        cols = _im2col(x, self.k, self.k // 2)
        y = cols @ self._matmul_form(self.params["W"]) + self.params["b"]
        if ctx is not None:
            ctx["cols"] = cols
            ctx["x_shape"] = x.shape
        return y.reshape(n, h, w, self.c_out).transpose(0, 3, 1, 2)

    def backward(self, dy: np.ndarray, ctx: dict) -> np.ndarray:
        n, _, h, w = ctx["x_shape"]
        dy_m = np.ascontiguousarray(dy.transpose(0, 2, 3, 1)).reshape(-1, self.c_out)
        dw_m = ctx["cols"].T @ dy_m                     # (Ci*k*k, Co)
        self.grads["W"] += dw_m.reshape(self.c_in, self.k, self.k,
                                        self.c_out).transpose(3, 0, 1, 2)
        self.grads["b"] += dy_m.sum(axis=0)
        # input gradient = convolution of dy with the flipped, transposed kernel
        w_t = self.params["W"][:, :, ::-1, ::-1].transpose(1, 0, 2, 3)
        cols_dy = _im2col(dy, self.k, self.k // 2)
        dx = cols_dy @ self._matmul_form(w_t)
        return dx.reshape(n, h, w, self.c_in).transpose(0, 3, 1, 2)


class MaxPool2x2(Module):
    def forward(self, x, ctx):
        n, c, h, w = x.shape
        xr = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
        xr = np.ascontiguousarray(xr).reshape(n, c, h // 2, w // 2, 4)
        idx = xr.argmax(axis=-1)
        y = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
        if ctx is not None:
            ctx["idx"] = idx
            ctx["x_shape"] = x.shape
        return y

    def backward(self, dy, ctx):
        n, c, h, w = ctx["x_shape"]
        flat = np.zeros((n, c, h // 2, w // 2, 4), dtype=dy.dtype)
        np.put_along_axis(flat, ctx["idx"][..., None], dy[..., None], axis=-1)
        return flat.reshape(n, c, h // 2, w // 2, 2, 2).transpose(
            0, 1, 2, 4, 3, 5).reshape(n, c, h, w)


class GlobalAvgPool(Module):
    def forward(self, x, ctx):
        if ctx is not None:
            ctx["hw"] = x.shape[2] * x.shape[3]
            ctx["x_shape"] = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, dy, ctx):
        n, c, h, w = ctx["x_shape"]
        return np.broadcast_to(dy[:, :, None, None] / ctx["hw"], (n, c, h, w)).copy()


class LayerNorm(Module):
    def __init__(self, dim: int, dtype=np.float32, eps: float = 1e-5):
        super().__init__()
        self.eps = eps
        self.add_param("gamma", np.ones(dim, dtype=dtype))
        self.add_param("beta", np.zeros(dim, dtype=dtype))

    def forward(self, x, ctx):
        mu = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu) * inv
        if ctx is not None:
            ctx["xhat"] = xhat
            ctx["inv"] = inv
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, dy, ctx):
        xhat, inv = ctx["xhat"], ctx["inv"]
        lead = tuple(range(dy.ndim - 1))
        self.grads["gamma"] += (dy * xhat).sum(axis=lead)
        self.grads["beta"] += dy.sum(axis=lead)
        dxhat = dy * self.params["gamma"]
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        return inv * (dxhat - m1 - xhat * m2)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


class MultiHeadSelfAttention(Module):
    """Full bidirectional self-attention; per-head softmax rows sum to 1."""

    def __init__(self, d_model: int, n_heads: int, rng, dtype=np.float32):
        super().__init__()
        if d_model % n_heads:
            raise ValueError("d_model must be divisible by n_heads")
        self.h = n_heads
        self.dk = d_model // n_heads
        self.scale = 1.0 / np.sqrt(self.dk)
        for name in ("q", "k", "v", "o"):
            self.add_child(name, Linear(d_model, d_model, rng, dtype, init="xavier"))

    def _split(self, x):
        b, t, d = x.shape
        return x.reshape(b, t, self.h, self.dk).transpose(0, 2, 1, 3)

    def forward(self, x, ctx):
        b, t, d = x.shape
        sub = {n: {} for n in ("q", "k", "v", "o")} if ctx is not None else None
        q = self._split(self._children["q"].forward(x, sub and sub["q"]))
        k = self._split(self._children["k"].forward(x, sub and sub["k"]))
        v = self._split(self._children["v"].forward(x, sub and sub["v"]))
        attn = softmax(q @ k.transpose(0, 1, 3, 2) * self.scale)
        ctxv = (attn @ v).transpose(0, 2, 1, 3).reshape(b, t, d)
        if ctx is not None:
            ctx.update(sub=sub, q=q, k=k, v=v, attn=attn, shape=(b, t, d))
        return self._children["o"].forward(ctxv, sub and sub["o"])

    def attention_weights(self, x) -> np.ndarray:
        """(B, heads, T, T) attention map, inference only."""
        q = self._split(self._children["q"].forward(x, None))
        k = self._split(self._children["k"].forward(x, None))
        return softmax(q @ k.transpose(0, 1, 3, 2) * self.scale)

    def backward(self, dy, ctx):
        b, t, d = ctx["shape"]
        sub, q, k, v, attn = ctx["sub"], ctx["q"], ctx["k"], ctx["v"], ctx["attn"]
        dctxv = self._children["o"].backward(dy, sub["o"])
        dctx4 = dctxv.reshape(b, t, self.h, self.dk).transpose(0, 2, 1, 3)
        dattn = dctx4 @ v.transpose(0, 1, 3, 2)
        dv = attn.transpose(0, 1, 3, 2) @ dctx4
        # softmax jacobian applied row-wise
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dscores *= self.scale
        dq = dscores @ k
        dk = dscores.transpose(0, 1, 3, 2) @ q

        def merge(g):
            return g.transpose(0, 2, 1, 3).reshape(b, t, d)

        dx = self._children["q"].backward(merge(dq), sub["q"])
        dx += self._children["k"].backward(merge(dk), sub["k"])
        dx += self._children["v"].backward(merge(dv), sub["v"])
        return dx


class FeedForward(Module):
    def __init__(self, d_model: int, hidden: int, rng, dtype=np.float32):
        super().__init__()
        self.add_child("w1", Linear(d_model, hidden, rng, dtype, init="he"))
        self.add_child("act", ReLU())
        self.add_child("w2", Linear(hidden, d_model, rng, dtype, init="xavier"))

    def forward(self, x, ctx):
        sub = {n: {} for n in ("w1", "act", "w2")} if ctx is not None else None
        if ctx is not None:
            ctx["sub"] = sub
        h = self._children["w1"].forward(x, sub and sub["w1"])
        h = self._children["act"].forward(h, sub and sub["act"])
        return self._children["w2"].forward(h, sub and sub["w2"])

    def backward(self, dy, ctx):
        sub = ctx["sub"]
        dh = self._children["w2"].backward(dy, sub["w2"])
        dh = self._children["act"].backward(dh, sub["act"])
        return self._children["w1"].backward(dh, sub["w1"])


class EncoderLayer(Module):
    """Pre-norm transformer encoder block with residual connections."""

    def __init__(self, d_model: int, n_heads: int, ffn_dim: int, rng,
                 dtype=np.float32):
        super().__init__()
        self.add_child("ln1", LayerNorm(d_model, dtype))
        self.add_child("attn", MultiHeadSelfAttention(d_model, n_heads, rng, dtype))
        self.add_child("ln2", LayerNorm(d_model, dtype))
        self.add_child("ffn", FeedForward(d_model, ffn_dim, rng, dtype))

    def forward(self, x, ctx):
        sub = {n: {} for n in ("ln1", "attn", "ln2", "ffn")} if ctx is not None else None
        if ctx is not None:
            ctx["sub"] = sub
        a = x + self._children["attn"].forward(
            self._children["ln1"].forward(x, sub and sub["ln1"]),
            sub and sub["attn"])
        return a + self._children["ffn"].forward(
            self._children["ln2"].forward(a, sub and sub["ln2"]),
            sub and sub["ffn"])

    def backward(self, dy, ctx):
        sub = ctx["sub"]
        dffn = self._children["ffn"].backward(dy, sub["ffn"])
        da = dy + self._children["ln2"].backward(dffn, sub["ln2"])
        dattn = self._children["attn"].backward(da, sub["attn"])
        return da + self._children["ln1"].backward(dattn, sub["ln1"])


def positional_encoding(n_steps: int, d_model: int, dtype=np.float32) -> np.ndarray:
    """Sinusoidal positional encodings; PE[0, even] = 0, PE[0, odd] = 1."""
    pos = np.arange(n_steps, dtype=np.float64)[:, None]
    i = np.arange(0, d_model, 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, i / d_model)
    pe = np.zeros((n_steps, d_model), dtype=np.float64)
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, :pe[:, 1::2].shape[1]])
    return pe.astype(dtype)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and its gradient w.r.t. logits."""
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    nll = lse - shifted[np.arange(n), labels]
    probs = softmax(logits, axis=1)
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return float(nll.mean()), dlogits.astype(logits.dtype)


def nll(probs: np.ndarray, label: int) -> float:
    """Cross-entropy of one probability vector: -ln p[label]."""
    p = float(probs[label])
    if p <= 0.0:
        return float("inf")
    return -float(np.log(p))
