"""Shape encoding: masks, signed distance fields, fusion and alternative encoders."""

from .config import SemConfig
from .distance import compute_sdf, euclidean_distance_transform, squared_edt
from .encoders import encode_contour, encode_edge, encode_skeleton
from .filters import DegenerateHistogramError, binarize, gaussian_blur, otsu_threshold
from .refine import (
    ComponentScore,
    EmptyForegroundError,
    connected_components,
    fill_holes,
    refine_mask,
    score_components,
)
from .sem import fuse, normalize_sdf, sem_pipeline

__all__ = [
    "ComponentScore",
    "DegenerateHistogramError",
    "EmptyForegroundError",
    "SemConfig",
    "binarize",
    "compute_sdf",
    "connected_components",
    "encode_contour",
    "encode_edge",
    "encode_skeleton",
    "euclidean_distance_transform",
    "fill_holes",
    "fuse",
    "gaussian_blur",
    "normalize_sdf",
    "otsu_threshold",
    "refine_mask",
    "score_components",
    "sem_pipeline",
    "squared_edt",
]
