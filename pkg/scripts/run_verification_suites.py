#!/usr/bin/env python3
"""Run the operator-level verification suites and write their CSV artifacts.

Equivalent to `oversmooth suite fracpow-check decay-check aux-rates
nonlinearity-check`; the rate studies have their own script.
"""

import argparse
from pathlib import Path

from oversmooth import ExperimentConfig
from oversmooth.harness import run_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--grid-n", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = ExperimentConfig(grid_n=args.grid_n, seed=args.seed)
    names = ["fracpow-check", "decay-check", "aux-rates", "nonlinearity-check"]
    all_pass = True
    args.out.mkdir(parents=True, exist_ok=True)
    for res in run_suite(names, cfg):
        for line in res.lines:
            print(f"[{res.name}] {line}")
        print(f"[{res.name}] {'PASS' if res.passed else 'FAIL'}")
        all_pass = all_pass and res.passed
        for fname, text in res.artifacts.items():
            (args.out / fname).write_text(text)
    return 0 if all_pass else 1


if __name__ == "__main__":
    raise SystemExit(main())
