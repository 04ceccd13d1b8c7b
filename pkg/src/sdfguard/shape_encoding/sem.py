from __future__ import annotations

import numpy as np

from ..tensor_core import as_field, as_image, to_grayscale
from .config import SemConfig
from .distance import compute_sdf
from .filters import binarize, gaussian_blur, otsu_threshold
from .refine import refine_mask


def normalize_sdf(field) -> np.ndarray:
    """Scale a field by its largest magnitude so it spans at most ``[-1, 1]``."""
    arr = as_field(field)
    peak = float(np.max(np.abs(arr)))
    if peak == 0.0:
        raise ValueError("cannot normalize an all-zero field")
    return arr / peak


def fuse(image, sdf, beta: float) -> np.ndarray:
    """Modulate pixel intensities by ``1 + beta * sdf``, broadcast over channels.

    Works on a single ``(H, W, C)`` image or a batch ``(N, H, W, C)`` with
    matching ``(N, H, W)`` fields.  No clipping is applied.
    """
    img = np.asarray(image, dtype=np.float64)
    field = np.asarray(sdf, dtype=np.float64)
    if img.shape[:-1] != field.shape:
        raise ValueError(f"spatial shape mismatch: image {img.shape}, sdf {field.shape}")
    return img * (1.0 + beta * field)[..., None]


def sem_pipeline(image, cfg: SemConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Image to (refined mask, normalized SDF).

    grayscale -> Gaussian blur -> Otsu binarization -> refinement ->
    signed distance -> max-abs normalization.
    """
    img = as_image(image)
    cfg = (cfg or SemConfig()).resolve(img.shape[0], img.shape[1])
    gray = to_grayscale(img)
    blurred = gaussian_blur(gray, cfg.sigma)
    # luma weights sum to 1, but blur may drift by an ulp past the unit interval
    blurred = np.clip(blurred, 0.0, 1.0)
    mask = binarize(blurred, otsu_threshold(blurred))
    refined = refine_mask(mask, cfg)
    sdf = normalize_sdf(compute_sdf(refined))
    return refined, sdf
