"""Command-line entry point: aggdiff {run, check, version} <config>."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import ConfigError, parse_config
from .experiments import check_experiment, run_experiment


def _load_config(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config {path!r}: {exc}", file=sys.stderr)
        raise SystemExit(4)
    try:
        return parse_config(text)
    except ConfigError as exc:
        print(f"config error in {path!r}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aggdiff",
        description="Solver and verification experiments for the 1D nonlocal "
        "aggregation equation with degenerate nonlinear diffusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the configured experiment and write outputs")
    p_run.add_argument("config", help="path to a key = value configuration file")
    p_check = sub.add_parser("check", help="replay the experiment, report bounds, write nothing")
    p_check.add_argument("config", help="path to a key = value configuration file")
    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    cfg = _load_config(args.config)
    if args.command == "run":
        return run_experiment(cfg)
    return check_experiment(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
