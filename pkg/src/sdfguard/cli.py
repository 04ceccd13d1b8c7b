"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 pipeline or
numeric error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import adversary, classifier, imageio, shape_encoding, synth_data, training
from .config import ConfigError, RunConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_PIPELINE = 0, 2, 3, 4


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"{args.command} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")


def cmd_sdf(args, cfg: RunConfig) -> None:
    _require(args, "input", "out")
    image = imageio.load_pnm(args.input)
    mask, sdf = shape_encoding.sem_pipeline(image, cfg.sem)
    fused = shape_encoding.fuse(image, sdf, cfg.sem.beta)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    imageio.save_pnm(out / "mask.pgm", mask.astype(np.float64))
    (out / "sdf.csv").write_text(imageio.write_field_csv(sdf))
    imageio.save_pnm(out / "sdf_vis.pgm", imageio.field_to_pnm(sdf))
    # fusion can exceed 1 inside the shape; the file holds the clipped view
    fused_name = "fused.pgm" if image.shape[2] == 1 else "fused.ppm"
    imageio.save_pnm(out / fused_name, np.clip(fused, 0.0, 1.0))


def cmd_gen_data(args, cfg: RunConfig) -> None:
    _require(args, "out")
    train, test = synth_data.generate_dataset(cfg.data)
    synth_data.export_dataset(train, test, args.out)


def cmd_train(args, cfg: RunConfig) -> None:
    _require(args, "out")
    train, _ = synth_data.generate_dataset(cfg.data)
    every = args.log_every

    def log(record):
        if every and (record.step + 1) % every == 0:
            print(f"step {record.step + 1} lr={record.lr:.3g} l_total={record.l_total:.6f}",
                  file=sys.stderr, flush=True)

    params, history = training.train_loop(train, cfg.train, model=cfg.model, log=log)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    classifier.save_checkpoint(params, out)
    history_path = Path(args.history) if args.history else out.parent / "history.csv"
    history_path.write_text(training.history_csv(history))


def cmd_eval(args, cfg: RunConfig) -> None:
    _require(args, "checkpoint")
    params = classifier.load_checkpoint(args.checkpoint)
    _, test = synth_data.generate_dataset(cfg.data)
    attack = cfg.attack if args.attack == "on" else None
    report = training.evaluate(params, test, attack)
    print(f"clean_accuracy={report.clean_accuracy:.6f}")
    if report.robust_accuracy is not None:
        print(f"robust_accuracy={report.robust_accuracy:.6f}")


def cmd_attack(args, cfg: RunConfig) -> None:
    _require(args, "checkpoint", "input", "label", "out")
    params = classifier.load_checkpoint(args.checkpoint)
    image = imageio.load_pnm(args.input)
    if not 0 <= args.label < params.num_classes:
        raise ConfigError(f"label must lie in [0, {params.num_classes})")
    adv = adversary.pgd_attack(params, image, args.label, cfg.attack)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    imageio.save_pnm(out, adv)


COMMANDS = {"sdf": cmd_sdf, "gen-data": cmd_gen_data, "train": cmd_train, "eval": cmd_eval,
            "attack": cmd_attack}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int, help="override every seed in the configuration")
    common.add_argument("--out", help="output path (a directory for sdf and gen-data)")

    parser = argparse.ArgumentParser(prog="sdfguard", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sdf", parents=[common], help="mask, SDF and fused image for one PNM")
    p.add_argument("input")
    sub.add_parser("gen-data", parents=[common], help="export the synthetic dataset")
    p = sub.add_parser("train", parents=[common], help="train and write a checkpoint")
    p.add_argument("--history", help="loss history CSV (default: history.csv next to --out)")
    p.add_argument("--log-every", type=int, default=100, help="steps between log lines, 0 for none")
    p = sub.add_parser("eval", parents=[common], help="clean and robust accuracy on the test split")
    p.add_argument("--checkpoint")
    p.add_argument("--attack", choices=("on", "off"), default="on")
    p = sub.add_parser("attack", parents=[common], help="PGD on one PNM image")
    p.add_argument("--checkpoint")
    p.add_argument("--label", type=int)
    p.add_argument("input")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_run_config(args)
        for name in ("input", "checkpoint"):
            path = getattr(args, name, None)
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"no such file: {path}")
        COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, imageio.PnmError, classifier.CheckpointError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
