from __future__ import annotations

import math

import numpy as np

from ..tensor_core import as_field

OTSU_BINS = 256


class DegenerateHistogramError(ValueError):
    """All samples fall in one histogram bin, so no threshold separates classes."""


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian truncated at radius ``ceil(3 * sigma)``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(field: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(field, pad, mode="edge")
    n = field.shape[axis]
    out = np.zeros_like(field)
    for i, weight in enumerate(kernel):
        if axis == 0:
            out += weight * padded[i:i + n, :]
        else:
            out += weight * padded[:, i:i + n]
    return out


def gaussian_blur(field, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with edge-replicated borders."""
    arr = as_field(field)
    kernel = gaussian_kernel(sigma)
    return _convolve_axis(_convolve_axis(arr, kernel, 0), kernel, 1)


def histogram_bins(field: np.ndarray) -> np.ndarray:
    """Bin index in ``0..255`` of every value of a field on ``[0, 1]``."""
    return np.minimum((field * OTSU_BINS).astype(np.int64), OTSU_BINS - 1)


def bin_center(k: int) -> float:
    return (k + 0.5) / OTSU_BINS


def otsu_threshold(field) -> float:
    """Otsu threshold over a 256-bin histogram of ``[0, 1]``.

    Candidate ``k`` splits bins ``0..k`` from ``k+1..255`` and the returned
    threshold is the center of bin ``k``.  The class means use bin-center
    intensities.  Among maximizers the lowest ``k`` wins.
    """
    arr = as_field(field)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("otsu_threshold expects values in [0, 1]")
    counts = np.bincount(histogram_bins(arr).ravel(), minlength=OTSU_BINS).astype(np.float64)
    if np.count_nonzero(counts) < 2:
        raise DegenerateHistogramError("all values fall in a single histogram bin")
    centers = (np.arange(OTSU_BINS) + 0.5) / OTSU_BINS
    total = counts.sum()
    w0 = np.cumsum(counts)
    s0 = np.cumsum(counts * centers)
    w1 = total - w0
    s1 = s0[-1] - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = s0 / w0
        mu1 = s1 / w1
        between = (w0 / total) * (w1 / total) * (mu0 - mu1) ** 2
    between[(w0 == 0) | (w1 == 0)] = -1.0
    k = int(np.argmax(between))
    return bin_center(k)


def binarize(field, t: float) -> np.ndarray:
    arr = np.asarray(field, dtype=np.float64)
    return (arr > t).astype(np.uint8)
