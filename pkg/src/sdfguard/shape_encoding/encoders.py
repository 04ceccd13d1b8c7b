"""Alternative shape encodings: Canny edges, mask contours, thinned skeletons.

Each returns a ``float64`` field holding only 0 and 1.
"""

from __future__ import annotations

import numpy as np

from ..tensor_core import as_image, as_mask, to_grayscale
from .filters import DegenerateHistogramError, otsu_threshold
from .refine import connected_components

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


def _correlate3(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(field, 1, mode="edge")
    h, w = field.shape
    out = np.zeros_like(field)
    for di in range(3):
        for dj in range(3):
            if kernel[di, dj] != 0.0:
                out += kernel[di, dj] * padded[di:di + h, dj:dj + w]
    return out


def sobel_gradients(field: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return _correlate3(field, _SOBEL_X), _correlate3(field, _SOBEL_Y)


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    # (dy, dx) of the neighbour along the gradient, one per quantized direction
    sector = np.digitize(angle, [22.5, 67.5, 112.5, 157.5]) % 4
    offsets = [(0, 1), (1, 1), (1, 0), (1, -1)]
    out = np.zeros_like(mag)
    for s, (dy, dx) in enumerate(offsets):
        sel = sector == s
        fwd = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        bwd = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        # strict on one side so a two-pixel plateau keeps exactly one pixel
        keep = sel & (mag > bwd) & (mag >= fwd)
        out[keep] = mag[keep]
    return out


def normalized_gradient(image) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sobel ``gx``, ``gy`` and the gradient magnitude scaled to peak 1 (or all 0)."""
    gray = to_grayscale(image)
    gx, gy = sobel_gradients(gray)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak > 0.0:
        mag = mag / peak
    return gx, gy, mag


def canny_thresholds(mag: np.ndarray) -> tuple[float, float] | None:
    """``(0.5 t, t)`` with ``t`` the Otsu threshold of ``mag``; ``None`` when flat."""
    if mag.max() == 0.0:
        return None
    try:
        high = otsu_threshold(mag)
    except DegenerateHistogramError:
        return None
    return 0.5 * high, high


def encode_edge(image) -> np.ndarray:
    """Canny edge map: Sobel magnitude, non-maximum suppression, hysteresis."""
    gx, gy, mag = normalized_gradient(as_image(image))
    thresholds = canny_thresholds(mag)
    if thresholds is None:
        return np.zeros(mag.shape)
    low, high = thresholds
    thin = _non_maximum_suppression(mag, gx, gy)
    weak = thin > low
    strong = thin >= high
    labels = connected_components(weak.astype(np.uint8)).labels
    linked = np.unique(labels[strong & weak])
    linked = linked[linked > 0]
    return np.isin(labels, linked).astype(np.float64)


def encode_contour(mask) -> np.ndarray:
    """Foreground pixels with at least one background 4-neighbour.

    Pixels outside the raster count as background.
    """
    m = as_mask(mask)
    p = np.pad(m, 1, mode="constant")
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return ((m == 1) & (interior == 0)).astype(np.float64)


def _neighbourhood(img: np.ndarray) -> list[np.ndarray]:
    """P2..P9 clockwise from north, as in the usual thinning notation."""
    p = np.pad(img, 1, mode="constant")
    h, w = img.shape

    def at(dy, dx):
        return p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    return [at(-1, 0), at(-1, 1), at(0, 1), at(1, 1), at(1, 0), at(1, -1), at(0, -1), at(-1, -1)]


def encode_skeleton(mask) -> np.ndarray:
    """Two-subiteration parallel thinning down to a one-pixel-wide skeleton."""
    img = as_mask(mask).astype(np.int64)
    while True:
        changed = False
        for step in (0, 1):
            n = _neighbourhood(img)
            p2, p3, p4, p5, p6, p7, p8, p9 = n
            b = sum(n)
            ring = n + [p2]
            a = sum(((ring[i] == 0) & (ring[i + 1] == 1)).astype(np.int64) for i in range(8))
            if step == 0:
                c1 = p2 * p4 * p6
                c2 = p4 * p6 * p8
            else:
                c1 = p2 * p4 * p8
                c2 = p2 * p6 * p8
            delete = (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & (c1 == 0) & (c2 == 0)
            if delete.any():
                img[delete] = 0
                changed = True
        if not changed:
            return img.astype(np.float64)
