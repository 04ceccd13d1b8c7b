"""Five-stream shape-guided adversarial training, LR schedule and evaluation.

Streams per step, all classified by the same network:

* clean images and their PGD counterparts (the base pair),
* the adversarial images fused with the clean images' SDFs,
* one fresh GAD draw applied to the clean and to the adversarial images.

``standard`` keeps the base pair only; ``sem-only`` and ``gad-only`` add one
of the two extra groups; ``shapepuri`` uses all five.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import adversary, gad, shape_encoding
from . import classifier
from .adversary import AttackConfig
from .classifier import Batch, ModelConfig, ModelParams
from .gad import GadConfig
from .shape_encoding import SemConfig
from .synth_data import batch_indices, stack

MODES = ("standard", "shapepuri", "sem-only", "gad-only")
HISTORY_HEADER = "step,lr,l_base,l_sdf,l_gad,l_total"


def _default_train_attack() -> AttackConfig:
    return AttackConfig(epsilon=8 / 255, eta=2 / 255, steps=10, random_init=True)


@dataclass(frozen=True)
class TrainConfig:
    lr0: float = 1e-4
    step_period: int = 2500
    decay: float = 0.5
    beta: float = 0.5
    batch_size: int = 16
    total_steps: int = 2000
    attack: AttackConfig = field(default_factory=_default_train_attack)
    sem: SemConfig = field(default_factory=SemConfig)
    gad: GadConfig = field(default_factory=GadConfig)
    seed: int = 0
    mode: str = "shapepuri"
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if self.step_period < 1 or self.batch_size < 1 or self.total_steps < 1:
            raise ValueError("step_period, batch_size and total_steps must be positive")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.optimizer not in classifier.OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    @property
    def uses_sem(self) -> bool:
        return self.mode in ("shapepuri", "sem-only")

    @property
    def uses_gad(self) -> bool:
        return self.mode in ("shapepuri", "gad-only")


@dataclass(frozen=True, eq=False)
class TrainState:
    params: ModelParams
    step: int = 0
    opt_state: object = None


@dataclass(frozen=True)
class LossRecord:
    """Per-step losses; ``None`` marks a group the mode does not use."""

    step: int
    lr: float
    l_base: float
    l_sdf: float | None
    l_gad: float | None
    l_total: float


@dataclass(frozen=True)
class EvalReport:
    clean_accuracy: float
    robust_accuracy: float | None
    n_samples: int
    attack: AttackConfig | None


def lr_schedule(step: int, cfg: TrainConfig) -> float:
    """``lr0 * decay ** floor(step / step_period)``; the period counts optimizer steps."""
    if step < 0:
        raise ValueError("step must be non-negative")
    return cfg.lr0 * cfg.decay ** (step // cfg.step_period)


def step_seed(seed: int, step: int, stream: int) -> int:
    """Independent per-step seed for the attack (stream 0) and the GAD draw (stream 1)."""
    return int(np.random.SeedSequence([seed, step, stream]).generate_state(1)[0])


def sample_step_gad(cfg: TrainConfig, step: int, shape: tuple) -> gad.GadParams:
    _, h, w, c = shape
    return gad.sample_gad(step_seed(cfg.seed, step, 1), c, cfg.gad.variant, height=h, width=w,
                          leaky_slope=cfg.gad.leaky_slope)


def sdf_fields(images: np.ndarray, cfg: TrainConfig) -> np.ndarray:
    """Normalized SDFs of clean images, stacked to ``(N, H, W)``."""
    return np.stack([shape_encoding.sem_pipeline(img, cfg.sem)[1] for img in images])


def _streams(batch: Batch, adv_images, sdfs, gad_params, cfg: TrainConfig) -> dict[str, np.ndarray]:
    x = np.asarray(batch.images, dtype=np.float64)
    adv = np.asarray(adv_images, dtype=np.float64)
    if adv.shape != x.shape:
        raise ValueError("clean and adversarial batches differ in shape")
    streams = {"clean": x, "adv": adv}
    if cfg.uses_sem:
        if sdfs is None:
            raise ValueError(f"mode {cfg.mode} needs SDF fields")
        streams["sdf"] = shape_encoding.fuse(adv, sdfs, cfg.beta)
    if cfg.uses_gad:
        if gad_params is None:
            raise ValueError(f"mode {cfg.mode} needs GAD parameters")
        streams["gad_clean"] = gad.apply_gad(x, gad_params)
        streams["gad_adv"] = gad.apply_gad(adv, gad_params)
    return streams


def _group(stream_means: dict[str, float], step: int, lr: float) -> LossRecord:
    l_base = stream_means["clean"] + stream_means["adv"]
    l_sdf = stream_means.get("sdf")
    l_gad = None
    if "gad_clean" in stream_means:
        l_gad = stream_means["gad_clean"] + stream_means["gad_adv"]
    total = l_base + (l_sdf or 0.0) + (l_gad or 0.0)
    return LossRecord(step, lr, l_base, l_sdf, l_gad, total)


def _streams_loss_and_grads(params, batch, adv_images, sdfs, gad_params, cfg, need_param_grads):
    streams = _streams(batch, adv_images, sdfs, gad_params, cfg)
    n = len(batch)
    images = np.concatenate(list(streams.values()))
    labels = np.tile(np.asarray(batch.labels, dtype=np.int64), len(streams))
    # every stream is a batch mean, so each sample weighs 1/N in the sum
    _, grads = classifier.loss_and_grads(params, images, labels, weights=np.full(len(images), 1.0 / n),
                                         need_input_grad=False, need_param_grads=need_param_grads)
    ce = grads.per_sample_loss
    means = {name: float(ce[i * n:(i + 1) * n].mean()) for i, name in enumerate(streams)}
    return means, grads


def compute_losses(params: ModelParams, batch: Batch, adv_batch, sdfs, gad_params,
                   cfg: TrainConfig) -> tuple[float, float | None, float | None, float]:
    """``(l_base, l_sdf, l_gad, l_total)`` for one step; unused groups are ``None``.

    ``adv_batch`` is a :class:`Batch` or an image array; ``sdfs`` are the clean
    images' normalized fields.
    """
    adv = adv_batch.images if isinstance(adv_batch, Batch) else adv_batch
    means, _ = _streams_loss_and_grads(params, batch, adv, sdfs, gad_params, cfg, need_param_grads=False)
    r = _group(means, 0, 0.0)
    return r.l_base, r.l_sdf, r.l_gad, r.l_total


def init_state(params: ModelParams, cfg: TrainConfig) -> TrainState:
    return TrainState(params, 0, classifier.make_optimizer(cfg.optimizer).init(params))


def train_step(state: TrainState, batch: Batch, cfg: TrainConfig,
               sdfs: np.ndarray | None = None) -> tuple[TrainState, LossRecord]:
    """One optimizer update on the mode's streams.

    The attack and GAD seeds derive from ``(cfg.seed, state.step)``, so the
    step is a pure function of its arguments.  ``sdfs`` may carry precomputed
    clean-image fields; otherwise they are computed here.
    """
    step = state.step
    lr = lr_schedule(step, cfg)
    attack_cfg = replace(cfg.attack, seed=step_seed(cfg.seed, step, 0))
    adv = adversary.attack_batch(state.params, batch, attack_cfg).images
    if cfg.uses_sem and sdfs is None:
        sdfs = sdf_fields(batch.images, cfg)
    gad_params = sample_step_gad(cfg, step, batch.images.shape) if cfg.uses_gad else None
    means, grads = _streams_loss_and_grads(state.params, batch, adv, sdfs, gad_params, cfg,
                                           need_param_grads=True)
    opt = classifier.make_optimizer(cfg.optimizer)
    params, opt_state = opt.update(state.params, grads.params, lr, state.opt_state)
    return TrainState(params, step + 1, opt_state), _group(means, step, lr)


def train_loop(samples, cfg: TrainConfig, params: ModelParams | None = None,
               model: ModelConfig | None = None, log=None) -> tuple[ModelParams, list[LossRecord]]:
    """Run ``cfg.total_steps`` steps over seeded per-epoch shuffles of ``samples``.

    Without ``params`` a fresh model is built from ``model`` seeded by
    ``cfg.seed``.  Clean-image SDFs are computed once per sample and reused
    across epochs.
    ``log(record)`` is called after every step when given.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("empty dataset")
    if params is None:
        h, w, c = samples[0].image.shape
        classes = max(s.label for s in samples) + 1
        m = model or ModelConfig()
        params = classifier.init_params(h, w, c, classes, seed=cfg.seed, conv1_channels=m.conv1_channels,
                                        conv2_channels=m.conv2_channels, leaky_slope=m.leaky_slope)
    cache = sdf_fields(np.stack([s.image for s in samples]), cfg) if cfg.uses_sem else None
    bs = min(cfg.batch_size, len(samples))
    state = init_state(params, cfg)
    history = []
    epoch = 0
    while state.step < cfg.total_steps:
        for idx in batch_indices(len(samples), bs, step_seed(cfg.seed, epoch, 2)):
            if state.step >= cfg.total_steps:
                break
            batch = stack([samples[i] for i in idx])
            state, record = train_step(state, batch, cfg, None if cache is None else cache[idx])
            history.append(record)
            if log is not None:
                log(record)
        epoch += 1
    return state.params, history


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def history_csv(history) -> str:
    """CSV text with :data:`HISTORY_HEADER`; unused groups are empty fields."""
    rows = [HISTORY_HEADER]
    for r in history:
        rows.append(",".join([str(r.step), _fmt(r.lr), _fmt(r.l_base), _fmt(r.l_sdf), _fmt(r.l_gad),
                              _fmt(r.l_total)]))
    return "\n".join(rows) + "\n"


def evaluate(params: ModelParams, samples, attack: AttackConfig | None = None,
             chunk: int = 200) -> EvalReport:
    """Clean accuracy, and robust accuracy under ``attack`` when given.

    The model sees raw pixels only: no SDF fusion and no GAD at inference.
    Sample ``i`` of the whole set is attacked with seed ``attack.seed + i``.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("empty dataset")
    n = len(samples)
    clean = robust = 0
    for start in range(0, n, chunk):
        batch = stack(samples[start:start + chunk])
        clean += int(np.sum(np.argmax(classifier.forward(params, batch.images), axis=1) == batch.labels))
        if attack is not None:
            adv = adversary.attack_batch(params, batch, replace(attack, seed=attack.seed + start))
            robust += int(np.sum(np.argmax(classifier.forward(params, adv.images), axis=1) == batch.labels))
    return EvalReport(clean / n, robust / n if attack is not None else None, n, attack)
