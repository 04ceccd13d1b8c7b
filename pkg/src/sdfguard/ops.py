"""Batched NHWC primitives with hand-written vector-Jacobian products."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _pad(x: np.ndarray, mode: str) -> np.ndarray:
    width = ((0, 0), (1, 1), (1, 1), (0, 0))
    if mode == "zero":
        return np.pad(x, width, mode="constant")
    if mode == "edge":
        return np.pad(x, width, mode="edge")
    raise ValueError(f"unknown padding mode {mode!r}")


def _unpad_grad(gp: np.ndarray, mode: str) -> np.ndarray:
    """Adjoint of :func:`_pad`."""
    if mode == "zero":
        return gp[:, 1:-1, 1:-1, :].copy()
    g = gp.copy()
    g[:, 1] += g[:, 0]
    g[:, -2] += g[:, -1]
    g = g[:, 1:-1]
    g[:, :, 1] += g[:, :, 0]
    g[:, :, -2] += g[:, :, -1]
    return g[:, :, 1:-1].copy()


def im2col(x: np.ndarray, mode: str = "zero") -> np.ndarray:
    """``(N*H*W, 9*C)`` matrix of 3x3 neighbourhoods, ordered (di, dj, c)."""
    n, h, w, c = x.shape
    windows = sliding_window_view(_pad(x, mode), (3, 3), axis=(1, 2))  # n,h,w,c,3,3
    return windows.transpose(0, 1, 2, 4, 5, 3).reshape(n * h * w, 9 * c)


def conv3x3(x: np.ndarray, w: np.ndarray, mode: str = "zero", cols: np.ndarray | None = None) -> np.ndarray:
    """Same-size 3x3 cross-correlation. ``x``: (N,H,W,Ci), ``w``: (3,3,Ci,Co)."""
    n, h, wd, _ = x.shape
    if cols is None:
        cols = im2col(x, mode)
    return (cols @ w.reshape(-1, w.shape[3])).reshape(n, h, wd, w.shape[3])


def conv3x3_backward(grad_out: np.ndarray, x: np.ndarray, w: np.ndarray, mode: str = "zero",
                     need_input_grad: bool = True, need_weight_grad: bool = True,
                     cols: np.ndarray | None = None):
    """Return ``(grad_x, grad_w)`` for :func:`conv3x3`; unrequested entries are ``None``."""
    n, h, wd, ci = x.shape
    co = w.shape[3]
    grad_w = None
    if need_weight_grad:
        if cols is None:
            cols = im2col(x, mode)
        grad_w = (cols.T @ grad_out.reshape(-1, co)).reshape(w.shape)
    grad_x = None
    if need_input_grad:
        # scatter-add in channels-first layout; contiguous slices are much faster
        gcols = (w.reshape(-1, co) @ grad_out.reshape(-1, co).T).reshape(3, 3, ci, n, h, wd)
        gxp = np.zeros((ci, n, h + 2, wd + 2))
        for di in range(3):
            for dj in range(3):
                gxp[:, :, di:di + h, dj:dj + wd] += gcols[di, dj]
        gxp = gxp.transpose(1, 2, 3, 0)
        grad_x = _unpad_grad(gxp, mode)
    return grad_x, grad_w


def leaky_relu(z: np.ndarray, slope: float) -> np.ndarray:
    # max(z, slope*z) equals the leaky ReLU for 0 < slope < 1
    return np.maximum(z, slope * z)


def leaky_relu_backward(grad: np.ndarray, z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, grad, slope * grad)


def avgpool2(x: np.ndarray) -> np.ndarray:
    return 0.25 * ((x[:, 0::2, 0::2] + x[:, 1::2, 0::2]) + (x[:, 0::2, 1::2] + x[:, 1::2, 1::2]))


def avgpool2_backward(grad: np.ndarray) -> np.ndarray:
    n, h, w, c = grad.shape
    g = np.broadcast_to((grad * 0.25)[:, :, None, :, None, :], (n, h, 2, w, 2, c))
    return g.reshape(n, 2 * h, 2 * w, c)
