"""Connected components and foreground-consistency refinement of binary masks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..tensor_core import LabelMap, as_mask
from .config import SemConfig
from .distance import euclidean_distance_transform

_NEIGHBORS_8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_NEIGHBORS_4 = [(-1, 0), (1, 0), (0, -1), (0, 1)]


class EmptyForegroundError(ValueError):
    """The mask has no foreground left to refine."""


@dataclass(frozen=True)
class ComponentScore:
    label: int
    area: int
    mean_inner_distance: float

    @property
    def score(self) -> float:
        return self.area * self.mean_inner_distance ** 2


def connected_components(mask) -> LabelMap:
    """Label 8-connected foreground regions in raster-scan first-touch order."""
    m = as_mask(mask)
    h, w = m.shape
    fg = m.tolist()
    labels = [[0] * w for _ in range(h)]
    count = 0
    for i in range(h):
        for j in range(w):
            if not fg[i][j] or labels[i][j]:
                continue
            count += 1
            labels[i][j] = count
            queue = deque([(i, j)])
            while queue:
                y, x = queue.popleft()
                for dy, dx in _NEIGHBORS_8:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and fg[ny][nx] and not labels[ny][nx]:
                        labels[ny][nx] = count
                        queue.append((ny, nx))
    return LabelMap(np.array(labels, dtype=np.int64), count)


def score_components(mask, label_map: LabelMap | None = None) -> list[ComponentScore]:
    """Area and mean inner distance of each component.

    The inner distance is the EDT of the whole mask (distance to the
    nearest background pixel), averaged over the component's pixels.
    """
    m = as_mask(mask)
    if label_map is None:
        label_map = connected_components(m)
    if label_map.component_count == 0:
        return []
    inner = euclidean_distance_transform(m)
    flat = label_map.labels.ravel()
    areas = np.bincount(flat, minlength=label_map.component_count + 1)
    sums = np.bincount(flat, weights=inner.ravel(), minlength=label_map.component_count + 1)
    return [
        ComponentScore(k, int(areas[k]), float(sums[k] / areas[k]))
        for k in range(1, label_map.component_count + 1)
    ]


def fill_holes(mask) -> np.ndarray:
    """Turn every background region not 4-connected to the image border into foreground."""
    m = as_mask(mask)
    h, w = m.shape
    bg = (m == 0).tolist()
    reached = [[False] * w for _ in range(h)]
    queue: deque[tuple[int, int]] = deque()
    for i in range(h):
        for j in (0, w - 1):
            if bg[i][j] and not reached[i][j]:
                reached[i][j] = True
                queue.append((i, j))
    for j in range(w):
        for i in (0, h - 1):
            if bg[i][j] and not reached[i][j]:
                reached[i][j] = True
                queue.append((i, j))
    while queue:
        y, x = queue.popleft()
        for dy, dx in _NEIGHBORS_4:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and bg[ny][nx] and not reached[ny][nx]:
                reached[ny][nx] = True
                queue.append((ny, nx))
    return (~np.array(reached, dtype=bool)).astype(np.uint8)


def refine_mask(mask, cfg: SemConfig | None = None) -> np.ndarray:
    """Invert if foreground dominates, keep the best-scoring component plus
    neighbours within ``delta`` pixels of it, then fill holes."""
    m = as_mask(mask)
    cfg = (cfg or SemConfig()).resolve(*m.shape)
    delta = cfg.delta
    if m.mean() > cfg.tau:
        m = 1 - m
    label_map = connected_components(m)
    if label_map.component_count == 0:
        raise EmptyForegroundError("no foreground pixels after the inversion check")
    scores = score_components(m, label_map)
    # max() keeps the first maximal element, i.e. the lowest label on ties
    best = max(scores, key=lambda c: c.score).label
    labels = label_map.labels
    selected = labels == best
    keep = selected.copy()
    if label_map.component_count > 1:
        dist_to_best = euclidean_distance_transform((~selected).astype(np.uint8))
        flat = labels.ravel()
        nearest = np.full(label_map.component_count + 1, np.inf)
        np.minimum.at(nearest, flat, dist_to_best.ravel())
        for k in range(1, label_map.component_count + 1):
            if k != best and nearest[k] <= delta:
                keep |= labels == k
    return fill_holes(keep.astype(np.uint8))
