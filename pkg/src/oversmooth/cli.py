"""Command-line entry point for the verification suites and rate studies."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .harness import SUITE_NAMES, CheckResult, ExperimentConfig, parse_config_file

_REGIME_FROM_CLI = {"none": "none", "hoelder": "hoelder", "low-order": "low_order"}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-n", type=int, default=None, help="grid size (default 256)")
    parser.add_argument("--seed", type=int, default=None, help="base random seed")
    parser.add_argument("--out", type=Path, default=None, metavar="DIR", help="write CSV/JSON artifacts here")
    parser.add_argument("--config", type=Path, default=None, metavar="FILE", help="key = value config file")


def _add_study_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--regime", choices=sorted(_REGIME_FROM_CLI), default=None)
    parser.add_argument("--p", type=float, default=None, help="smoothness order for the hoelder regime")
    parser.add_argument("--r", type=float, default=None, help="functional exponent")
    parser.add_argument("--m", type=int, default=None, help="Lavrentiev iteration count")
    parser.add_argument("--alpha-c", type=float, default=None, help="constant in the alpha rule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oversmooth",
        description="Verification suites and convergence-rate studies for "
        "sup-norm Tikhonov regularization with oversmoothing penalties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fracpow-check", "decay-check", "aux-rates", "nonlinearity-check"):
        p = sub.add_parser(name, help=f"run the {name} verification suite")
        _add_common(p)
        p.add_argument("--m", type=int, default=None, help="Lavrentiev iteration count")
    study = sub.add_parser("rate-study", help="run one configured rate study")
    _add_common(study)
    _add_study_flags(study)
    suite = sub.add_parser("suite", help="run several suites (all when none named)")
    suite.add_argument("names", nargs="*", metavar="NAME", help=f"suite names: {', '.join(SUITE_NAMES)}")
    _add_common(suite)
    _add_study_flags(suite)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        cfg = parse_config_file(args.config, cfg)
    overrides = {}
    if getattr(args, "grid_n", None) is not None:
        overrides["grid_n"] = args.grid_n
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "m", None) is not None:
        overrides["m"] = args.m
    if getattr(args, "regime", None) is not None:
        overrides["regime"] = _REGIME_FROM_CLI[args.regime]
    if getattr(args, "p", None) is not None:
        overrides["p"] = args.p
    if getattr(args, "r", None) is not None:
        overrides["r"] = args.r
    if getattr(args, "alpha_c", None) is not None:
        overrides["c_alpha"] = args.alpha_c
    return dataclasses.replace(cfg, **overrides)


def _emit(results: list[CheckResult], out_dir: Path | None) -> int:
    all_pass = True
    for res in results:
        for line in res.lines:
            print(f"[{res.name}] {line}")
        print(f"[{res.name}] {'PASS' if res.passed else 'FAIL'}")
        all_pass = all_pass and res.passed
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            for fname, text in res.artifacts.items():
                (out_dir / fname).write_text(text)
    return 0 if all_pass else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = _config_from_args(args)
        if args.command == "suite":
            names = args.names or list(SUITE_NAMES)
            unknown = [n for n in names if n not in SUITE_NAMES]
            if unknown:
                raise ValueError(f"unknown suite name(s): {', '.join(unknown)}")
            results = [SUITE_NAMES[name](cfg) for name in names]
        else:
            results = [SUITE_NAMES[args.command](cfg)]
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return _emit(results, args.out)


if __name__ == "__main__":
    sys.exit(main())
