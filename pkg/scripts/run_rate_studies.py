#!/usr/bin/env python3
"""Run the four convergence-rate studies and write CSV/JSON reports.

Usage:
    python scripts/run_rate_studies.py [--out results] [--grid-n 256] [--seed 0]
"""

import argparse
import dataclasses
from pathlib import Path

from oversmooth import ExperimentConfig, run_rate_study


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--grid-n", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = ExperimentConfig(grid_n=args.grid_n, seed=args.seed)
    studies = {
        "hoelder_p1": base,
        "hoelder_p05": dataclasses.replace(base, p=0.5),
        "low_order": dataclasses.replace(base, regime="low_order"),
        "no_smoothness": dataclasses.replace(base, regime="none"),
    }
    all_pass = True
    for name, cfg in studies.items():
        report = run_rate_study(cfg)
        report.write(args.out, stem=f"rate_{name}")
        summary = (
            f"slope={report.fitted_slope:.4f}" if report.fitted_slope is not None else "slope=-"
        )
        if report.statistic is not None:
            summary += f" statistic={report.statistic:.3f}"
        print(f"{name}: {summary} passed={report.passed}")
        all_pass = all_pass and report.passed
    return 0 if all_pass else 1


if __name__ == "__main__":
    raise SystemExit(main())
