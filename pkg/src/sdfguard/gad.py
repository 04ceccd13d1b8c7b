"""Stochastic shallow appearance transforms with Frobenius renormalization.

A :class:`GadParams` is one random draw of a bias-free two-layer network.
:func:`apply_gad` mixes the network output with its input using the drawn
``alpha`` and rescales the mixture back to the input's Frobenius norm.  The
weights are never trained; a fresh draw is made per optimizer step.

Every function accepts a single ``(H, W, C)`` image or an ``(N, H, W, C)``
batch; with a batch the same draw is applied to every sample and the norm
matching is done per sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import conv3x3, conv3x3_backward, leaky_relu, leaky_relu_backward

VARIANTS = ("convolution", "resnet2", "attention", "linear")
HIDDEN_CHANNELS = {"convolution": 2, "resnet2": 3}


class DegenerateNormalizationError(ValueError):
    """The interpolated image has zero norm while the input does not."""


@dataclass(frozen=True)
class GadConfig:
    variant: str = "convolution"
    leaky_slope: float = 0.01

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown GAD variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.leaky_slope > 0:
            raise ValueError("leaky_slope must be positive")


@dataclass(frozen=True, eq=False)
class GadParams:
    """One sampled network.

    Weight layouts per variant:

    * convolution / resnet2: ``layer1`` (3, 3, C, hidden), ``layer2`` (3, 3, hidden, C)
    * attention: ``layer1`` (3, C) per-channel query/key/value scalars,
      ``layer2`` (C, C) output channel mixing
    * linear: ``layer1`` (W, W) width projection, ``layer2`` (H, H) height projection
    """

    variant: str
    layer1: np.ndarray
    layer2: np.ndarray
    alpha: float
    leaky_slope: float
    seed: int

    @property
    def channels(self) -> int:
        if self.variant == "linear":
            return -1
        return self.layer2.shape[-1]


def sample_gad(seed: int, channels: int, variant: str = "convolution",
               height: int | None = None, width: int | None = None,
               leaky_slope: float = 0.01) -> GadParams:
    """Draw standard-normal weights then ``alpha ~ U(0, 1)`` from one seeded stream.

    ``height`` and ``width`` are required by the ``linear`` variant only.
    """
    if channels < 1:
        raise ValueError("channels must be >= 1")
    if variant not in VARIANTS:
        raise ValueError(f"unknown GAD variant {variant!r}")
    rng = np.random.default_rng(seed)
    if variant in HIDDEN_CHANNELS:
        hidden = HIDDEN_CHANNELS[variant]
        w1 = rng.standard_normal((3, 3, channels, hidden))
        w2 = rng.standard_normal((3, 3, hidden, channels))
    elif variant == "attention":
        w1 = rng.standard_normal((3, channels))
        w2 = rng.standard_normal((channels, channels))
    else:
        if height is None or width is None:
            raise ValueError("the linear variant needs the image height and width")
        w1 = rng.standard_normal((width, width))
        w2 = rng.standard_normal((height, height))
    alpha = float(rng.uniform(0.0, 1.0))
    return GadParams(variant, w1, w2, alpha, leaky_slope, seed)


def _as_batch(image) -> tuple[np.ndarray, bool]:
    x = np.asarray(image, dtype=np.float64)
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ValueError(f"expected an HxWxC image or NxHxWxC batch, got shape {x.shape}")


def _check_channels(x: np.ndarray, params: GadParams) -> None:
    n, h, w, c = x.shape
    if params.variant == "linear":
        if params.layer1.shape[0] != w or params.layer2.shape[0] != h:
            raise ValueError("linear GAD weights do not match the image height/width")
    elif params.channels != c:
        raise ValueError(f"GAD params built for {params.channels} channels, image has {c}")


def _attention_forward(x, wqkv):
    n, h, w, c = x.shape
    p = h * w
    s = x.reshape(n, p, c).transpose(0, 2, 1)  # (N, C, P)
    kappa = (wqkv[0] * wqkv[1] / np.sqrt(p))[None, :, None, None]
    logits = kappa * s[:, :, :, None] * s[:, :, None, :]
    logits -= logits.max(axis=-1, keepdims=True)
    attn = np.exp(logits)
    attn /= attn.sum(axis=-1, keepdims=True)
    v = wqkv[2][None, :, None] * s
    hidden = np.einsum("ncij,ncj->nci", attn, v)
    return hidden.transpose(0, 2, 1).reshape(n, h, w, c), (s, kappa, attn, v)


def _attention_backward(grad_hidden, wqkv, cache):
    s, kappa, attn, v = cache
    n, h, w, c = grad_hidden.shape
    gh = grad_hidden.reshape(n, h * w, c).transpose(0, 2, 1)
    gs = wqkv[2][None, :, None] * np.einsum("ncij,nci->ncj", attn, gh)
    g_attn = gh[:, :, :, None] * v[:, :, None, :]
    g_logits = attn * (g_attn - np.sum(g_attn * attn, axis=-1, keepdims=True))
    k = kappa[:, :, :, 0]
    gs += k * (np.einsum("ncij,ncj->nci", g_logits, s) + np.einsum("ncij,nci->ncj", g_logits, s))
    return gs.transpose(0, 2, 1).reshape(n, h, w, c)


def _net_forward(x: np.ndarray, params: GadParams):
    slope = params.leaky_slope
    if params.variant in HIDDEN_CHANNELS:
        z = conv3x3(x, params.layer1, "edge")
        out = conv3x3(leaky_relu(z, slope), params.layer2, "edge")
        if params.variant == "resnet2":
            out = out + x
        return out, z
    if params.variant == "attention":
        hidden, cache = _attention_forward(x, params.layer1)
        return leaky_relu(hidden, slope) @ params.layer2, (hidden, cache)
    return np.einsum("nhwc,wv,hu->nuvc", x, params.layer1, params.layer2), None


def _net_backward(grad: np.ndarray, x: np.ndarray, params: GadParams, cache) -> np.ndarray:
    slope = params.leaky_slope
    if params.variant in HIDDEN_CHANNELS:
        z = cache
        a = leaky_relu(z, slope)
        ga, _ = conv3x3_backward(grad, a, params.layer2, "edge")
        gz = leaky_relu_backward(ga, z, slope)
        gx, _ = conv3x3_backward(gz, x, params.layer1, "edge")
        if params.variant == "resnet2":
            gx = gx + grad
        return gx
    if params.variant == "attention":
        hidden, att_cache = cache
        g_hidden = leaky_relu_backward(grad @ params.layer2.T, hidden, slope)
        return _attention_backward(g_hidden, params.layer1, att_cache)
    return np.einsum("nuvc,wv,hu->nhwc", grad, params.layer1, params.layer2)


def gad_net(image, params: GadParams) -> np.ndarray:
    """Raw network output, same shape as the input."""
    x, single = _as_batch(image)
    _check_channels(x, params)
    out, _ = _net_forward(x, params)
    return out[0] if single else out


def gad_net_vjp(image, params: GadParams, grad_out) -> np.ndarray:
    x, single = _as_batch(image)
    _check_channels(x, params)
    g = np.asarray(grad_out, dtype=np.float64).reshape(x.shape)
    _, cache = _net_forward(x, params)
    gx = _net_backward(g, x, params, cache)
    return gx[0] if single else gx


def _sample_norms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=(1, 2, 3)))


def _mix(x: np.ndarray, params: GadParams):
    net, cache = _net_forward(x, params)
    return params.alpha * net + (1.0 - params.alpha) * x, cache


def apply_gad(image, params: GadParams) -> np.ndarray:
    """``alpha * net(I) + (1 - alpha) * I`` rescaled to ``||I||_F``.

    A zero image comes back unchanged.
    """
    x, single = _as_batch(image)
    _check_channels(x, params)
    if params.alpha == 0.0:
        out = x.copy()
        return out[0] if single else out
    mixed, _ = _mix(x, params)
    norm_in = _sample_norms(x)
    norm_mix = _sample_norms(mixed)
    if np.any((norm_mix == 0.0) & (norm_in > 0.0)):
        raise DegenerateNormalizationError("interpolated image has zero Frobenius norm")
    scale = np.divide(norm_in, norm_mix, out=np.zeros_like(norm_in), where=norm_in > 0.0)
    out = mixed * scale[:, None, None, None]
    return out[0] if single else out


def apply_gad_vjp(image, params: GadParams, grad_out) -> np.ndarray:
    """Input gradient of ``<grad_out, apply_gad(image)>``."""
    x, single = _as_batch(image)
    _check_channels(x, params)
    g = np.asarray(grad_out, dtype=np.float64).reshape(x.shape)
    if params.alpha == 0.0:
        gx = g.copy()
        return gx[0] if single else gx
    mixed, cache = _mix(x, params)
    nx = _sample_norms(x)[:, None, None, None]
    ny = _sample_norms(mixed)[:, None, None, None]
    safe_nx = np.where(nx > 0, nx, 1.0)
    safe_ny = np.where(ny > 0, ny, 1.0)
    g_dot_y = np.sum(g * mixed, axis=(1, 2, 3), keepdims=True)
    grad_mixed = (nx / safe_ny) * g - g_dot_y * nx * mixed / safe_ny ** 3
    # d||x|| / dx term
    gx = g_dot_y * x / (safe_nx * safe_ny)
    gx = gx + (1.0 - params.alpha) * grad_mixed
    gx = gx + params.alpha * _net_backward(grad_mixed, x, params, cache)
    gx = np.where(nx > 0, gx, 0.0)
    return gx[0] if single else gx
