"""Mode comparison: train every training mode on one dataset and attack each model.

All runs share the data, the model seed, the training attack and the
evaluation attack; only ``TrainConfig.mode`` changes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from . import synth_data, training
from .config import RunConfig
from .training import MODES, EvalReport


@dataclass(frozen=True)
class ModeResult:
    mode: str
    report: EvalReport
    train_seconds: float


def run_mode(run: RunConfig, mode: str, train_samples, test_samples) -> ModeResult:
    cfg = replace(run.train, mode=mode)
    start = time.perf_counter()
    params, _ = training.train_loop(train_samples, cfg, model=run.model)
    seconds = time.perf_counter() - start
    return ModeResult(mode, training.evaluate(params, test_samples, run.attack), seconds)


def compare_modes(run: RunConfig, modes=MODES, log=None) -> dict[str, ModeResult]:
    """Train and evaluate each mode; ``log(result)`` fires as each one finishes."""
    train, test = synth_data.generate_dataset(run.data)
    results = {}
    for mode in modes:
        results[mode] = run_mode(run, mode, train, test)
        if log is not None:
            log(results[mode])
    return results


def format_table(results: dict[str, ModeResult]) -> str:
    rows = ["mode,clean_accuracy,robust_accuracy,train_seconds"]
    for r in results.values():
        rows.append(f"{r.mode},{r.report.clean_accuracy:.4f},{r.report.robust_accuracy:.4f},{r.train_seconds:.1f}")
    return "\n".join(rows) + "\n"
