"""Command-line front end.

Two subcommands: ``run`` executes a scenario config and writes its
report files; ``validate`` checks a config and lists every violation.
Exit codes: 0 success, 2 config validation failure, 3 experiment error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import L1LabError
from .scenarios import EXPERIMENTS, run_scenario, validate_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1lab",
        description="Deterministic experiments on piecewise-constant function geometry.",
        epilog="Experiments: " + ", ".join(EXPERIMENTS),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config and write its report")
    run_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--out", help="output directory (overrides the config's output_path)")
    run_p.add_argument("--seed", type=int, help="seed override")
    run_p.add_argument("--quiet", action="store_true", help="suppress the result summary")
    run_p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    val_p = sub.add_parser("validate", help="check a scenario config, listing all violations")
    val_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    return parser


def _read_config(path: str) -> str | None:
    try:
        return Path(path).read_text()
    except OSError as exc:
        print(f"config: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    raw = _read_config(args.config)
    if raw is None:
        return 2
    outcome = validate_config(raw)
    if isinstance(outcome, list):
        for violation in outcome:
            print(violation, file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {outcome.experiment} scenario (seed {outcome.seed})")
        return 0

    try:
        report = run_scenario(
            outcome,
            out_override=args.out,
            seed_override=args.seed,
            figures=not args.no_figures,
        )
    except L1LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if not args.quiet:
        out_dir = args.out if args.out is not None else outcome.output_path
        print(f"{outcome.experiment}: wrote {out_dir}/report.json "
              f"({report.wall_time_seconds:.2f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
