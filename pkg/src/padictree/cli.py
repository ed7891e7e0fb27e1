"""
Command-line interface for the verification harness.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import Iterable

from .harness import (
    EXPERIMENTS,
    OPERATORS,
    ExperimentConfig,
    dumps_json,
    load_config,
    report_csv,
    run_experiment,
    validate_config,
    write_report,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment configuration (JSON)")
    parser.add_argument("--p", type=int, action="append", help="Prime (repeat for several)")
    parser.add_argument("--d", type=int, help="Dimension")
    parser.add_argument("--seed", type=int, action="append", help="Seed (repeat for several)")
    parser.add_argument("--gamma-max", type=int, help="Largest ball exponent in frame sums")
    parser.add_argument("--out", help="Output directory (default: report on stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="Report format")
    parser.add_argument("--timings", action="store_true", help="Include per-case wall-clock times")
    parser.add_argument(
        "--negative-control",
        action="store_true",
        help="Skip kernel and field transport; identity cases are then expected to fail",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padictree",
        description="Exact p-adic ball calculus: run the verification suites or apply an operator.",
        epilog=(
            "p-adic literals list base-p digits lowest position first, "
            "then an optional '.' and the digits of positions -1, -2, ...: "
            "'21.1' in base 3 is 2 + 1*3 + 1/3."
        ),
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    helps = {
        "frame-bound": "Frame bound of the ball orbit functions",
        "identities": "Chain rule, kernel transformation rule and vector-field covariance",
        "structure": "Set S, tangent maps, wavelet mapping and group structure",
        "apply": "Apply an operator to a function given as JSON",
        "oracle": "Brute-force quadrature oracles",
    }
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=helps[name])
        _add_common(cmd)
        if name == "apply":
            cmd.add_argument("function", help="Input function (JSON)")
            cmd.add_argument("--operator", choices=OPERATORS, default="vladimirov")
            cmd.add_argument("--alpha", type=float, help="Order of the Vladimirov operator")
            cmd.add_argument("--kernel", help="Kernel (JSON) for --operator kernel/vf")
            cmd.add_argument("--field", help="Vector field (JSON) for --operator vf")
            cmd.add_argument("--morphism", help="Morphism (JSON) for --operator pushforward/unitary")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Load ``--config`` (if any) and override it with the flags given."""
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {"experiment": args.experiment}
    if args.p:
        overrides.update(p=args.p[0], primes=list(args.p))
    if args.d is not None:
        overrides.update(d=args.d, dims=[args.d])
    if args.seed:
        overrides["seeds"] = list(args.seed)
    if args.gamma_max is not None:
        overrides["gamma_max"] = args.gamma_max
    if args.timings:
        overrides["timings"] = True
    if args.negative_control:
        overrides["negative_control"] = True
    if args.experiment == "apply":
        inputs = dict(config.inputs, function=args.function)
        for key in ("kernel", "field", "morphism"):
            if getattr(args, key):
                inputs[key] = getattr(args, key)
        overrides.update(inputs=inputs, operator=args.operator)
        if args.alpha is not None:
            overrides["alpha"] = args.alpha
    config = replace(config, **overrides)
    validate_config(config)
    return config


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    def warn(message: str) -> None:
        sys.stderr.write(f"[warn] {message}\n")

    try:
        config = config_from_args(args)
        report = run_experiment(config, on_warning=warn)
        if args.out:
            for path in write_report(report, args.out, args.format):
                sys.stdout.write(f"[info] Wrote {path}\n")
        elif args.experiment == "apply":
            sys.stdout.write(report.artifacts["apply_output.json"])
        elif args.format == "csv":
            sys.stdout.write(report_csv(report))
        else:
            sys.stdout.write(dumps_json(report.to_json()))
    except ValueError as exc:
        sys.stderr.write(f"[error] {exc}\n")
        return 1

    if not report.passed:
        summary = report.summary
        warn(f"{summary['failed']} of {summary['total']} cases failed")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
