"""Command-line driver: verify scenarios, list scenarios and checks."""

from __future__ import annotations

import argparse
import os
import sys

from .catalog import scenario_names
from .checks import list_checks, run_suite
from .report import ConfigError, RunConfig, default_seed, emit_report, parse_config

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcs-reduce",
        description="Residual-checked twisted calculus and cotangent reduction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the check suite for one scenario")
    v.add_argument("--scenario", required=True,
                   help="scenario name or path to a config file")
    v.add_argument("--xi", help="comma-separated momentum levels")
    v.add_argument("--samples", type=int, help="sample points per check cell")
    v.add_argument("--seed", type=int, help="rng seed (env LCS_REDUCE_SEED)")
    v.add_argument("--tol", action="append", default=[], metavar="CHECK=VAL",
                   help="tolerance override, repeatable")
    v.add_argument("--format", choices=("json", "text"), help="report format")
    v.add_argument("--out", help="write the report to this path")

    sub.add_parser("list-scenarios", help="print the scenario names")
    sub.add_parser("list-checks", help="print check ids, anchors, tolerances")
    return parser


def _config_from_args(args) -> RunConfig:
    if os.path.isfile(args.scenario):
        with open(args.scenario, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if not cfg.scenario:
            raise ConfigError("config file does not name a scenario")
    else:
        cfg = RunConfig(scenario=args.scenario, seed=default_seed())
        if cfg.scenario not in scenario_names():
            raise ConfigError(
                f"unknown scenario {cfg.scenario!r}; names: {', '.join(scenario_names())}")
    if args.xi is not None:
        cfg.xi = tuple(float(x) for x in args.xi.split(",") if x.strip())
    if args.samples is not None:
        cfg.samples = args.samples
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.format = args.format
    if args.out is not None:
        cfg.out = args.out
    for item in args.tol:
        if "=" not in item:
            raise ConfigError(f"--tol expects CHECK=VALUE, got {item!r}")
        key, _, val = item.partition("=")
        try:
            cfg.tolerances[key.strip()] = float(val)
        except ValueError as e:
            raise ConfigError(f"bad tolerance value in {item!r}") from e
    return cfg.validate()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in scenario_names():
            print(name)
        return 0
    if args.command == "list-checks":
        for entry in list_checks():
            print(f"{entry['id']:<28} tol {entry['tolerance']:<8g} "
                  f"needs {entry['needs']:<10} {entry['anchor']}")
        return 0

    try:
        cfg = _config_from_args(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    try:
        report = run_suite(cfg)
    except KeyError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # scenario construction failures surface structured
        print(f"scenario error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2

    payload = emit_report(report, cfg.format)
    if cfg.out:
        try:
            with open(cfg.out, "wb") as fh:
                fh.write(payload)
        except OSError as e:
            print(f"cannot write report: {e}", file=sys.stderr)
            return 2
    else:
        sys.stdout.buffer.write(payload)
    return report.exit_code()


if __name__ == "__main__":
    raise SystemExit(main())
