"""Command-line entry point ``quasilog``.

    quasilog <experiment> --config <path> [--out <dir>] [--key value ...]

Every configuration key has a long flag (``--lambda 12.5``, ``--kappa-grid 0.1,0.01``)
that overrides the file.  Exit status: 0 all checks pass, 1 a check failed, 2 usage or
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import EXPERIMENTS, SCHEMA, SECTIONS, ConfigError, flag_name, parse_config
from .errors import ConvergenceError, NumericError, QuasilogError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quasilog",
        description="Numerical experiments for the quasilinear logistic problem via its dual transform.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    for section in SECTIONS:
        group = parser.add_argument_group(f"[{section}]")
        for key, key_spec in SCHEMA.items():
            if key_spec.section != section or key == "experiment":
                continue
            default = key_spec.default
            if isinstance(default, tuple):
                default = ",".join(f"{x:g}" for x in default)
            rule = f"; {key_spec.rule}" if key_spec.rule else ""
            group.add_argument(flag_name(key), dest=key, metavar="VALUE", default=argparse.SUPPRESS,
                               help=f"{key_spec.help} (default: {default}{rule})")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    flags = {k: v for k, v in vars(args).items() if k in SCHEMA and k != "experiment"}
    flags["experiment"] = args.experiment
    try:
        cfg = parse_config(args.config, flags)
    except ConfigError as exc:
        print(f"quasilog: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    from .experiments import run

    try:
        outcome = run(cfg)
    except (ConvergenceError, NumericError, ArithmeticError) as exc:
        print(f"quasilog: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QuasilogError, ValueError) as exc:
        print(f"quasilog: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in outcome.checks:
        print(c.line())
    print(f"# {cfg['experiment']}: {'PASS' if outcome.ok else 'FAIL'} in {outcome.elapsed:.1f} s; "
          f"artifacts in {cfg['out']}")
    return EXIT_OK if outcome.ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
