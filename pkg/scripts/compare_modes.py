"""Train all four modes under one config and print clean/robust accuracy as CSV.

    python scripts/compare_modes.py configs/desk.ini --out results.csv
"""

import argparse
import sys
from pathlib import Path

from sdfguard.config import load_config
from sdfguard.experiment import compare_modes, format_table
from sdfguard.training import MODES


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("config")
    parser.add_argument("--modes", default=",".join(MODES))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="also write the table here")
    args = parser.parse_args()
    run = load_config(args.config)
    if args.seed is not None:
        run = run.with_seed(args.seed)

    def log(r):
        print(f"{r.mode}: clean={r.report.clean_accuracy:.4f} robust={r.report.robust_accuracy:.4f} "
              f"({r.train_seconds:.0f}s)", file=sys.stderr, flush=True)

    table = format_table(compare_modes(run, args.modes.split(","), log=log))
    print(table, end="")
    if args.out:
        Path(args.out).write_text(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
