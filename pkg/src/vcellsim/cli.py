"""Command-line entry point for the Monte Carlo sweep."""

from __future__ import annotations

import argparse
import sys

from . import harness


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcellsim",
        description="Sweep virtual-cell counts and interference distances over "
        "seeded network realizations; writes plot-ready CSV.",
    )
    parser.add_argument("--config", required=True, help="INI config file (see configs/)")
    parser.add_argument("--realizations", type=int, help="override realization count")
    parser.add_argument("--seed", type=int, help="override scenario seed")
    parser.add_argument("--output", help="override output CSV path")
    parser.add_argument("--gamma-d", dest="gamma_d",
                        help="override interference distances, e.g. 0,70,140")
    parser.add_argument("--m", help="override virtual-cell counts, e.g. 2,4,8")
    parser.add_argument("--cgbr", help="override guaranteed bit rates in bits/s")
    parser.add_argument("--workers", type=int, help="parallel realization workers")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = harness.load_sweep_config(args.config)
        overrides = {}
        if args.realizations is not None:
            overrides["num_realizations"] = args.realizations
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.output is not None:
            overrides["output_path"] = args.output
        if args.gamma_d is not None:
            overrides["gamma_d_values"] = harness._parse_list(args.gamma_d, float)
        if args.m is not None:
            overrides["m_values"] = harness._parse_list(args.m, int)
        if args.cgbr is not None:
            overrides["cgbr_values"] = harness._parse_list(args.cgbr, float)
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            config = harness.override(config, **overrides)
        rows = harness.run_sweep(config)
        harness.emit_csv(rows, config.output_path, seed=config.scenario.seed)
    except Exception as exc:
        print(f"vcellsim: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} rows to {config.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
