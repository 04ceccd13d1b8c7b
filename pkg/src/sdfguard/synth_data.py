"""Seeded synthetic shapes on textured backgrounds.

Each sample is a bright shape (disk, square, triangle or annulus) over a
sinusoidal grating plus uniform noise.  ``texture_correlation`` is the
probability that the grating orientation is the one assigned to the sample's
class rather than a random one, which gives a controllable texture shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifier import Batch
from .imageio import save_pnm

SHAPES = ("disk", "square", "triangle", "annulus")
ANNULUS_INNER = 0.45
_SPLITS = {"train": 0, "test": 1}
# bounding radius over nominal radius, per shape
_EXTENT = {"disk": 1.0, "annulus": 1.0, "square": 0.85 * np.sqrt(2.0), "triangle": 1.15}
_RADIUS = 0.24
_SCALE_JITTER = 0.2
_CENTER_JITTER = 0.15
_BACKGROUND = 0.2


@dataclass(frozen=True)
class DataConfig:
    n_train: int = 2000
    n_test: int = 400
    height: int = 32
    width: int = 32
    channels: int = 1
    classes: tuple = SHAPES
    contrast: float = 0.3
    texture_noise: float = 0.2
    intensity_jitter: float = 0.5
    texture_correlation: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be positive")
        if min(self.height, self.width) < 16:
            raise ValueError("height and width must be at least 16")
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        if len(self.classes) < 2:
            raise ValueError("need at least two classes")
        unknown = [c for c in self.classes if c not in SHAPES]
        if unknown or len(set(self.classes)) != len(self.classes):
            raise ValueError(f"classes must be distinct names from {SHAPES}")
        if not 0.3 <= self.contrast <= 0.8:
            raise ValueError("contrast must lie in [0.3, 0.8]")
        for name in ("texture_noise", "intensity_jitter", "texture_correlation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class Sample:
    image: np.ndarray
    label: int
    truth_mask: np.ndarray = field(repr=False)


def _check_fits(cfg: DataConfig) -> None:
    side = min(cfg.height, cfg.width)
    worst = max(_EXTENT[c] for c in cfg.classes)
    r_max = _RADIUS * (1 + _SCALE_JITTER) * side
    reach = r_max * worst + _CENTER_JITTER * 2 * r_max
    if reach > side / 2 - 1:
        raise ValueError(f"shapes do not fit in a {cfg.height}x{cfg.width} image")


def _rasterize(shape: str, h: int, w: int, cy: float, cx: float, r: float, theta: float) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w] + 0.5
    dy, dx = yy - cy, xx - cx
    if shape in ("disk", "annulus"):
        d2 = dy * dy + dx * dx
        inside = d2 <= r * r
        if shape == "annulus":
            inside &= d2 > (ANNULUS_INNER * r) ** 2
        return inside
    c, s = np.cos(theta), np.sin(theta)
    u = c * dx + s * dy
    v = -s * dx + c * dy
    if shape == "square":
        half = 0.85 * r
        return (np.abs(u) <= half) & (np.abs(v) <= half)
    # equilateral triangle as the intersection of three half-planes
    inradius = 1.15 * r / 2
    inside = np.ones((h, w), dtype=bool)
    for k in range(3):
        a = theta + np.pi / 2 + k * 2 * np.pi / 3
        inside &= np.cos(a) * dx + np.sin(a) * dy <= inradius
    return inside


def _make_sample(cfg: DataConfig, split: int, index: int) -> Sample:
    rng = np.random.default_rng([cfg.seed, split, index])
    k = len(cfg.classes)
    label = index % k
    shape = cfg.classes[label]
    h, w = cfg.height, cfg.width
    side = min(h, w)

    r = _RADIUS * side * (1 + rng.uniform(-_SCALE_JITTER, _SCALE_JITTER))
    cy = h / 2 + rng.uniform(-_CENTER_JITTER, _CENTER_JITTER) * 2 * r
    cx = w / 2 + rng.uniform(-_CENTER_JITTER, _CENTER_JITTER) * 2 * r
    theta = rng.uniform(0, 2 * np.pi)
    mask = _rasterize(shape, h, w, cy, cx, r, theta)

    background = _BACKGROUND + cfg.intensity_jitter * rng.uniform(-0.1, 0.1)
    contrast = cfg.contrast + cfg.intensity_jitter * rng.uniform(-0.1, 0.1)

    if rng.uniform() < cfg.texture_correlation:
        orientation = np.pi * label / k
    else:
        orientation = rng.uniform(0, np.pi)
    freq = rng.uniform(0.15, 0.3)
    phase = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    grating = np.sin(2 * np.pi * freq * (np.cos(orientation) * xx + np.sin(orientation) * yy) + phase)
    noise = rng.uniform(-1.0, 1.0, size=(h, w, cfg.channels))
    # half grating, half noise; peak-to-peak amplitude equals texture_noise
    texture = 0.25 * cfg.texture_noise * (grating[..., None] + noise)

    tint = np.ones(cfg.channels) if cfg.channels == 1 else rng.uniform(0.8, 1.2, size=3)
    base = (background + contrast * mask)[..., None] * tint
    image = np.clip(base + texture, 0.0, 1.0)
    return Sample(image, label, mask.astype(np.uint8))


def generate_dataset(cfg: DataConfig) -> tuple[list[Sample], list[Sample]]:
    """Class-balanced train and test splits drawn from disjoint seeded streams."""
    _check_fits(cfg)
    train = [_make_sample(cfg, _SPLITS["train"], i) for i in range(cfg.n_train)]
    test = [_make_sample(cfg, _SPLITS["test"], i) for i in range(cfg.n_test)]
    return train, test


def stack(samples) -> Batch:
    return Batch(np.stack([s.image for s in samples]), np.array([s.label for s in samples], dtype=np.int64))


def batch_indices(n: int, batch_size: int, epoch_seed: int) -> list[np.ndarray]:
    """Shuffled index blocks for one epoch; the last block may be short."""
    if not 1 <= batch_size <= n:
        raise ValueError("batch_size must lie in [1, n]")
    order = np.random.default_rng(epoch_seed).permutation(n)
    return [order[j:j + batch_size] for j in range(0, n, batch_size)]


def iter_batches(samples, batch_size: int, epoch_seed: int) -> list[Batch]:
    """One epoch of shuffled batches, same order as :func:`batch_indices`."""
    return [stack([samples[i] for i in idx]) for idx in batch_indices(len(samples), batch_size, epoch_seed)]


def export_dataset(train, test, out_dir) -> Path:
    """Write one PNM per sample plus ``manifest.csv`` with ``filename,label`` rows."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = ["filename,label"]
    for split, samples in (("train", train), ("test", test)):
        for i, s in enumerate(samples):
            ext = "pgm" if s.image.shape[2] == 1 else "ppm"
            name = f"{split}_{i:05d}.{ext}"
            save_pnm(out / name, s.image)
            rows.append(f"{name},{s.label}")
    manifest = out / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n")
    return manifest
