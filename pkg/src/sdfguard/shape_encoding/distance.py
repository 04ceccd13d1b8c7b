"""Exact Euclidean distance transforms and signed distance fields."""

from __future__ import annotations

import numpy as np

from ..tensor_core import as_mask

_INF = np.inf


def _lower_envelope_1d(f: list[float]) -> list[float]:
    """Squared-distance transform of a 1-D sampled function.

    Computes ``d[p] = min_q (p - q)**2 + f[q]`` exactly via the lower
    envelope of parabolas rooted at the finite samples of ``f``.
    """
    n = len(f)
    sites = [q for q in range(n) if f[q] != _INF]
    if not sites:
        return [_INF] * n
    v = [sites[0]]
    z = [-_INF, _INF]
    for q in sites[1:]:
        fq = f[q] + q * q
        p = v[-1]
        s = (fq - (f[p] + p * p)) / (2.0 * (q - p))
        # z[0] is -inf, so popping always stops with one parabola left
        while s <= z[len(v) - 1]:
            v.pop()
            z.pop()
            p = v[-1]
            s = (fq - (f[p] + p * p)) / (2.0 * (q - p))
        v.append(q)
        z[-1] = s
        z.append(_INF)
    d = [0.0] * n
    k = 0
    for p in range(n):
        while z[k + 1] < p:
            k += 1
        q = v[k]
        d[p] = (p - q) * (p - q) + f[q]
    return d


def squared_edt(mask) -> np.ndarray:
    """Squared distance from every pixel to the nearest zero pixel."""
    m = as_mask(mask)
    if np.all(m != 0):
        raise ValueError("distance transform undefined: mask has no zero pixel")
    cols = np.where(m == 0, 0.0, _INF)
    # column pass then row pass, each an exact 1-D envelope
    cols = [_lower_envelope_1d(col) for col in cols.T.tolist()]
    rows = np.array(cols).T.tolist()
    return np.array([_lower_envelope_1d(row) for row in rows], dtype=np.float64)


def euclidean_distance_transform(mask) -> np.ndarray:
    """Exact distance between pixel centers to the nearest zero pixel."""
    return np.sqrt(squared_edt(mask))


def compute_sdf(mask) -> np.ndarray:
    """Signed distance field: positive on foreground, negative on background.

    ``inner`` is the distance of foreground pixels to the nearest background
    pixel and ``outer`` the distance of background pixels to the nearest
    foreground pixel; the result is ``inner - outer``.
    """
    m = as_mask(mask)
    if m.min() == m.max():
        raise ValueError("signed distance needs both foreground and background pixels")
    inner = euclidean_distance_transform(m)
    outer = euclidean_distance_transform(1 - m)
    return inner - outer
