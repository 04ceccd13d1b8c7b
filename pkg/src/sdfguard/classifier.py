"""A small convolutional classifier with exact reverse-mode gradients.

Architecture: conv3x3 (C->8) + bias, leaky ReLU, 2x2 average pool,
conv3x3 (8->16) + bias, leaky ReLU, 2x2 average pool, flatten (row-major
H, W, C), dense -> K logits.  Convolutions use zero padding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ops import (
    avgpool2,
    avgpool2_backward,
    conv3x3,
    conv3x3_backward,
    im2col,
    leaky_relu,
    leaky_relu_backward,
)

CHECKPOINT_MAGIC = b"SPK1"


class CheckpointError(ValueError):
    """Malformed or truncated checkpoint bytes."""

TENSOR_NAMES = ("conv1_w", "conv1_b", "conv2_w", "conv2_b", "dense_w", "dense_b")


@dataclass(frozen=True)
class ModelConfig:
    conv1_channels: int = 8
    conv2_channels: int = 16
    leaky_slope: float = 0.01

    def __post_init__(self):
        if self.conv1_channels < 1 or self.conv2_channels < 1:
            raise ValueError("channel counts must be positive")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError("leaky_slope must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class ModelParams:
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    dense_w: np.ndarray
    dense_b: np.ndarray
    leaky_slope: float = 0.01

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in TENSOR_NAMES}

    def map(self, fn, *others: "ModelParams") -> "ModelParams":
        """Apply ``fn`` tensor-wise across this and other same-shaped params."""
        return replace(self, **{
            name: fn(getattr(self, name), *(getattr(o, name) for o in others))
            for name in TENSOR_NAMES
        })

    @property
    def num_classes(self) -> int:
        return self.dense_b.shape[0]

    def flat(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tensors().values()])

    def equals(self, other: "ModelParams") -> bool:
        return self.leaky_slope == other.leaky_slope and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.tensors().values(), other.tensors().values())
        )


@dataclass(frozen=True, eq=False)
class Gradients:
    params: ModelParams | None
    input_grad: np.ndarray | None
    per_sample_loss: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Batch:
    images: np.ndarray  # (N, H, W, C)
    labels: np.ndarray  # (N,) int

    def __post_init__(self):
        if self.images.ndim != 4:
            raise ValueError("batch images must be NxHxWxC")
        if len(self.images) != len(self.labels):
            raise ValueError("images and labels differ in length")

    def __len__(self) -> int:
        return len(self.labels)


def init_params(height: int, width: int, channels: int, classes: int, seed: int,
                conv1_channels: int = 8, conv2_channels: int = 16,
                leaky_slope: float = 0.01) -> ModelParams:
    """He-scaled normal weights and zero biases from a seeded generator."""
    if height % 4 or width % 4:
        raise ValueError("height and width must be divisible by 4")
    rng = np.random.default_rng(seed)
    gain = np.sqrt(2.0 / (1.0 + leaky_slope ** 2))
    conv1_w = rng.standard_normal((3, 3, channels, conv1_channels)) * gain / np.sqrt(9 * channels)
    conv2_w = rng.standard_normal((3, 3, conv1_channels, conv2_channels)) * gain / np.sqrt(9 * conv1_channels)
    n_flat = conv2_channels * (height // 4) * (width // 4)
    dense_w = rng.standard_normal((n_flat, classes)) / np.sqrt(n_flat)
    return ModelParams(
        conv1_w=conv1_w,
        conv1_b=np.zeros(conv1_channels),
        conv2_w=conv2_w,
        conv2_b=np.zeros(conv2_channels),
        dense_w=dense_w,
        dense_b=np.zeros(classes),
        leaky_slope=leaky_slope,
    )


def zeros_like(params: ModelParams) -> ModelParams:
    return params.map(np.zeros_like)


def _check_input(params: ModelParams, x: np.ndarray) -> None:
    if x.ndim != 4:
        raise ValueError(f"expected an NxHxWxC batch, got shape {x.shape}")
    n, h, w, c = x.shape
    if c != params.conv1_w.shape[2]:
        raise ValueError(f"model expects {params.conv1_w.shape[2]} channels, got {c}")
    if h % 4 or w % 4 or params.conv2_w.shape[3] * (h // 4) * (w // 4) != params.dense_w.shape[0]:
        raise ValueError(f"input spatial shape {h}x{w} does not match the dense layer")


def _forward(params: ModelParams, x: np.ndarray):
    slope = params.leaky_slope
    cols1 = im2col(x)
    z1 = conv3x3(x, params.conv1_w, cols=cols1) + params.conv1_b
    p1 = avgpool2(leaky_relu(z1, slope))
    cols2 = im2col(p1)
    z2 = conv3x3(p1, params.conv2_w, cols=cols2) + params.conv2_b
    p2 = avgpool2(leaky_relu(z2, slope))
    flat = p2.reshape(len(x), -1)
    logits = flat @ params.dense_w + params.dense_b
    return logits, (z1, p1, z2, p2, flat, cols1, cols2)


def forward(params: ModelParams, images) -> np.ndarray:
    """Logits ``(N, K)`` for a batch (or a single ``(H, W, C)`` image)."""
    x = np.asarray(images, dtype=np.float64)
    if x.ndim == 3:
        return forward(params, x[None])[0]
    _check_input(params, x)
    return _forward(params, x)[0]


def preactivations(params: ModelParams, images) -> tuple[np.ndarray, np.ndarray]:
    """Inputs to both leaky ReLUs, for locating activation kinks."""
    x = np.asarray(images, dtype=np.float64)
    _check_input(params, x)
    _, (z1, _, z2, *_) = _forward(params, x)
    return z1, z2


def per_sample_cross_entropy(logits, labels) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    shifted = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    return lse - shifted[np.arange(len(y)), y]


def cross_entropy(logits, labels) -> float:
    """Mean negative log-softmax of the labelled class."""
    return float(per_sample_cross_entropy(logits, labels).mean())


def loss_and_grads(params: ModelParams, images, labels, weights=None,
                   need_input_grad: bool = True,
                   need_param_grads: bool = True) -> tuple[float, Gradients]:
    """Weighted cross-entropy ``sum_i w_i CE_i`` and its exact gradients.

    ``weights`` defaults to ``1/N`` each, i.e. the batch mean.  With
    ``need_param_grads=False`` the parameter gradients in the result are
    ``None`` and only the input gradient is computed.
    """
    x = np.asarray(images, dtype=np.float64)
    _check_input(params, x)
    y = np.asarray(labels, dtype=np.int64)
    n = len(x)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
    slope = params.leaky_slope

    logits, (z1, p1, z2, p2, flat, cols1, cols2) = _forward(params, x)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    sums = exp.sum(axis=1)
    ce = np.log(sums) - shifted[np.arange(n), y]
    loss = float(np.dot(w, ce))

    g_logits = exp / sums[:, None]
    g_logits[np.arange(n), y] -= 1.0
    g_logits *= w[:, None]

    g_p2 = (g_logits @ params.dense_w.T).reshape(p2.shape)
    g_z2 = leaky_relu_backward(avgpool2_backward(g_p2), z2, slope)
    g_p1, g_conv2_w = conv3x3_backward(g_z2, p1, params.conv2_w, cols=cols2,
                                       need_weight_grad=need_param_grads)
    g_z1 = leaky_relu_backward(avgpool2_backward(g_p1), z1, slope)
    g_x, g_conv1_w = conv3x3_backward(g_z1, x, params.conv1_w, cols=cols1,
                                      need_input_grad=need_input_grad,
                                      need_weight_grad=need_param_grads)
    grads = None
    if need_param_grads:
        grads = ModelParams(
            conv1_w=g_conv1_w,
            conv1_b=g_z1.sum(axis=(0, 1, 2)),
            conv2_w=g_conv2_w,
            conv2_b=g_z2.sum(axis=(0, 1, 2)),
            dense_w=flat.T @ g_logits,
            dense_b=g_logits.sum(axis=0),
            leaky_slope=slope,
        )
    return loss, Gradients(grads, g_x, ce)


def backward(params: ModelParams, batch: Batch) -> tuple[float, Gradients]:
    """Mean cross-entropy over ``batch`` and gradients w.r.t. parameters and inputs."""
    return loss_and_grads(params, batch.images, batch.labels)


def input_gradient(params: ModelParams, image, label: int, target: int | None = None) -> np.ndarray:
    """Gradient of the cross-entropy at ``label`` (or ``target`` if given) w.r.t. pixels."""
    cls = label if target is None else target
    _, grads = loss_and_grads(params, np.asarray(image)[None], [cls], weights=[1.0],
                              need_param_grads=False)
    return grads.input_grad[0]


def sgd_update(params: ModelParams, grads: ModelParams, lr: float) -> ModelParams:
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    return params.map(lambda p, g: p - lr * g, grads)


@dataclass(frozen=True, eq=False)
class AdamState:
    m: ModelParams
    v: ModelParams
    t: int = 0


class Adam:
    """Adam with bias correction.  State is passed in and returned, never mutated."""

    name = "adam"

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def init(self, params: ModelParams) -> AdamState:
        return AdamState(zeros_like(params), zeros_like(params), 0)

    def update(self, params: ModelParams, grads: ModelParams, lr: float,
               state: AdamState) -> tuple[ModelParams, AdamState]:
        b1, b2, eps = self.beta1, self.beta2, self.eps
        t = state.t + 1
        m = state.m.map(lambda m, g: b1 * m + (1 - b1) * g, grads)
        v = state.v.map(lambda v, g: b2 * v + (1 - b2) * g * g, grads)
        c1 = 1 - b1 ** t
        c2 = 1 - b2 ** t
        new = params.map(lambda p, m, v: p - lr * (m / c1) / (np.sqrt(v / c2) + eps), m, v)
        return new, AdamState(m, v, t)


class SGD:
    name = "sgd"

    def init(self, params: ModelParams) -> None:
        return None

    def update(self, params: ModelParams, grads: ModelParams, lr: float, state=None):
        return sgd_update(params, grads, lr), None


OPTIMIZERS = ("sgd", "adam")


def make_optimizer(name: str):
    if name == "sgd":
        return SGD()
    if name == "adam":
        return Adam()
    raise ValueError(f"unknown optimizer {name!r}; expected one of {OPTIMIZERS}")


# -- checkpoints -------------------------------------------------------------
# Layout (little-endian): magic "SPK1", uint32 tensor count, then per tensor:
# uint32 name length, UTF-8 name, uint32 ndim, ndim x uint32 dims, float64 data.

def checkpoint_bytes(params: ModelParams) -> bytes:
    named = list(params.tensors().items()) + [("leaky_slope", np.array(params.leaky_slope))]
    parts = [CHECKPOINT_MAGIC, struct.pack("<I", len(named))]
    for name, arr in named:
        raw = name.encode("utf-8")
        arr = np.asarray(arr, dtype="<f8")
        parts.append(struct.pack("<I", len(raw)) + raw)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def params_from_bytes(data: bytes) -> ModelParams:
    if data[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("not an SPK1 checkpoint")
    pos = 4

    def take(fmt):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(data):
            raise CheckpointError("truncated checkpoint")
        out = struct.unpack_from(fmt, data, pos)
        pos += size
        return out

    (count,) = take("<I")
    tensors = {}
    for _ in range(count):
        (name_len,) = take("<I")
        if pos + name_len > len(data):
            raise CheckpointError("truncated checkpoint")
        name = data[pos:pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = take("<I")
        shape = take(f"<{ndim}I") if ndim else ()
        n = int(np.prod(shape)) if shape else 1
        if pos + 8 * n > len(data):
            raise CheckpointError("truncated checkpoint")
        tensors[name] = np.frombuffer(data, dtype="<f8", count=n, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * n
    missing = [n for n in TENSOR_NAMES if n not in tensors]
    if missing:
        raise CheckpointError(f"checkpoint lacks tensors {missing}")
    slope = float(tensors.get("leaky_slope", 0.01))
    return ModelParams(**{n: tensors[n] for n in TENSOR_NAMES}, leaky_slope=slope)


def save_checkpoint(params: ModelParams, path) -> None:
    Path(path).write_bytes(checkpoint_bytes(params))


def load_checkpoint(path) -> ModelParams:
    return params_from_bytes(Path(path).read_bytes())

