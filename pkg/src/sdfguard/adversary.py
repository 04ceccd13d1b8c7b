"""L-infinity projected gradient descent, untargeted and targeted."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import classifier
from .classifier import Batch, ModelParams

TARGET_RULES = ("random-other", "fixed")


@dataclass(frozen=True)
class AttackConfig:
    """PGD settings. ``epsilon`` and ``eta`` are on the [0, 1] pixel scale.

    ``target_rule`` is ``"random-other"`` (a seeded class different from the
    true label) or ``"fixed"`` (always ``target_class``).
    """

    epsilon: float = 8 / 255
    eta: float = 2 / 255
    steps: int = 20
    targeted: bool = False
    target_rule: str = "random-other"
    target_class: int = 0
    random_init: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.target_rule not in TARGET_RULES:
            raise ValueError(f"target_rule must be one of {TARGET_RULES}")
        if self.eta > self.epsilon and self.epsilon > 0:
            warnings.warn(f"PGD step size {self.eta:g} exceeds the budget {self.epsilon:g}",
                          stacklevel=3)


def _pick_target(rng: np.random.Generator, label: int, num_classes: int, cfg: AttackConfig) -> int:
    if cfg.target_rule == "fixed":
        return cfg.target_class
    offset = int(rng.integers(1, num_classes))
    return (label + offset) % num_classes


def _pgd(params: ModelParams, images: np.ndarray, labels: np.ndarray, seeds, cfg: AttackConfig,
         callback=None) -> np.ndarray:
    x0 = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    k = params.num_classes
    targets = labels
    noise = None
    if cfg.targeted or cfg.random_init:
        chosen, noise_list = [], []
        for label, seed in zip(labels, seeds):
            rng = np.random.default_rng(seed)
            chosen.append(_pick_target(rng, int(label), k, cfg) if cfg.targeted else int(label))
            if cfg.random_init:
                noise_list.append(rng.uniform(-cfg.epsilon, cfg.epsilon, size=x0.shape[1:]))
        targets = np.array(chosen, dtype=np.int64)
        if cfg.random_init:
            noise = np.stack(noise_list)

    lo = np.clip(x0 - cfg.epsilon, 0.0, 1.0)
    hi = np.clip(x0 + cfg.epsilon, 0.0, 1.0)
    x = x0.copy() if noise is None else np.clip(x0 + noise, lo, hi)
    # per-sample (summed) loss so every gradient is independent of the batch size
    ones = np.ones(len(x0))
    direction = -1.0 if cfg.targeted else 1.0
    for step in range(cfg.steps):
        _, grads = classifier.loss_and_grads(params, x, targets, weights=ones, need_param_grads=False)
        x = x + direction * cfg.eta * np.sign(grads.input_grad)
        x = np.minimum(np.maximum(x, lo), hi)
        if callback is not None:
            callback(step, x)
    return x


def pgd_attack(params: ModelParams, image, label: int, cfg: AttackConfig, callback=None) -> np.ndarray:
    """Attack one ``(H, W, C)`` image; the result stays within the epsilon ball and [0, 1].

    ``callback(step, x)`` is called after every projected step.
    """
    img = np.asarray(image, dtype=np.float64)
    cb = None if callback is None else (lambda step, x: callback(step, x[0]))
    return _pgd(params, img[None], [label], [cfg.seed], cfg, cb)[0]


def attack_batch(params: ModelParams, batch: Batch, cfg: AttackConfig, callback=None) -> Batch:
    """Attack every sample; sample ``i`` uses seed ``cfg.seed + i``."""
    seeds = [cfg.seed + i for i in range(len(batch))]
    adv = _pgd(params, batch.images, batch.labels, seeds, cfg, callback)
    return Batch(adv, np.asarray(batch.labels).copy())
