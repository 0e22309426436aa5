"""Command-line entry point for the Monte-Carlo experiment harness.

Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (KINDS, SCHEMES, ConfigError, ExperimentSpec,
                          load_config, run_experiment)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ris-cnoma",
                description="Monte-Carlo power-minimization experiments for "
                            "the surface-assisted cooperative NOMA cell")
    p.add_argument("--experiment", choices=KINDS, required=True)
    p.add_argument("--config", help="JSON file with scenario/experiment blocks")
    p.add_argument("--out", help="output CSV path (default: <experiment>.csv)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--elements", type=_ints, metavar="M1,M2,...")
    p.add_argument("--rf-grid", type=_floats, metavar="R1,R2,...")
    p.add_argument("--si-grid-db", type=_floats, metavar="S1,S2,...")
    p.add_argument("--schemes", type=lambda s: tuple(s.split(",")),
                   metavar=",".join(SCHEMES))
    p.add_argument("--step", type=float, help="oracle grid step for --verify")
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the grid oracle; adds margin columns")
    return p


def _build_spec(args) -> ExperimentSpec:
    merged = {"scenario": None, "experiment": {}}
    if args.config:
        merged = load_config(args.config)
    exp = dict(merged["experiment"])
    exp["kind"] = args.experiment
    if args.trials is not None:
        exp["trials"] = args.trials
    if args.seed is not None:
        exp["master_seed"] = args.seed
    if args.elements is not None:
        exp["elements_grid"] = args.elements
    if args.rf_grid is not None:
        exp["rf_grid"] = args.rf_grid
    if args.si_grid_db is not None:
        exp["si_grid_db"] = args.si_grid_db
        exp["si_variants_db"] = args.si_grid_db
    if args.schemes is not None:
        exp["schemes"] = args.schemes
    if args.step is not None:
        exp["oracle_step"] = args.step
    if args.verify:
        exp["verify"] = True
    scenario = merged["scenario"]
    if scenario is not None:
        exp["scenario"] = scenario
    return ExperimentSpec(**exp)


def cli_main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(parser.format_usage(), file=sys.stderr, end="")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1

    try:
        spec = _build_spec(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    out = args.out or f"{args.experiment}.csv"
    try:
        records = run_experiment(spec, out)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(records)} records to {out}")
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
