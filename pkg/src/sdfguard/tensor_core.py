"""Raster containers and norms.

Images are ``float64`` arrays shaped ``(H, W, C)`` with ``C`` in {1, 3};
scalar fields are ``(H, W)`` float arrays and binary masks ``(H, W)``
``uint8`` arrays holding only 0 and 1.  The helpers below validate and
normalize inputs into those conventions; everything else in the package
works on plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def as_image(data, copy: bool = False) -> np.ndarray:
    """Return ``data`` as a validated ``(H, W, C)`` float64 image.

    A 2-D array is promoted to a single-channel image.
    """
    arr = np.array(data, dtype=np.float64) if copy else np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"image must be HxWxC with C in {{1,3}}, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must have positive height and width")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def as_field(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"field must be a non-empty HxW array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite values")
    return arr


def as_mask(data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"mask must be a non-empty HxW array, got shape {arr.shape}")
    if arr.dtype != np.bool_ and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("mask must be strictly binary")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class LabelMap:
    """8-connected component labelling; 0 is background."""

    labels: np.ndarray
    component_count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def frobenius_norm(image) -> float:
    arr = np.asarray(image, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


def to_grayscale(image) -> np.ndarray:
    """Collapse an image to an ``(H, W)`` field using BT.601 luma weights."""
    img = as_image(image)
    if img.shape[2] == 1:
        return img[:, :, 0].copy()
    return img @ LUMA_WEIGHTS


def linf_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))
