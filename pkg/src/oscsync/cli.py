"""Command-line interface.

Subcommands: simulate | sweep | classical | sample-gaussian | bounds.
Common flags: --config, --seed, --out, --workers, --plot. Exit codes:
0 success, 2 partial sweep failure, 1 fatal error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, runners
from .errors import OscsyncError


def _add_common(parser: argparse.ArgumentParser, need_out: bool = True) -> None:
    parser.add_argument("--config", required=True, help="configuration file")
    parser.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    parser.add_argument("--out", required=need_out, default=None,
                        help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for sweeps (default 1)")
    parser.add_argument("--plot", action="store_true",
                        help="also render figures next to the CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscsync",
        description="Coupled-oscillator synchronization: trajectories, sweeps, "
                    "Gaussian sampling, and cost/speed bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one dimer trajectory")
    _add_common(p)
    p = sub.add_parser("sweep", help="parameter sweep over (k, delta_omega)")
    _add_common(p)
    p = sub.add_parser("classical", help="classical Stuart-Landau ensemble run")
    _add_common(p)
    p = sub.add_parser("sample-gaussian", help="random Gaussian states and hulls")
    _add_common(p)
    p = sub.add_parser("bounds", help="tabulate chi-D and work bounds")
    _add_common(p, need_out=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return runners.run_simulate(args.config, args.seed, args.out, args.plot)
        if args.command == "sweep":
            return runners.run_sweep(args.config, args.seed, args.out,
                                     args.workers, args.plot)
        if args.command == "classical":
            return runners.run_classical(args.config, args.seed, args.out, args.plot)
        if args.command == "sample-gaussian":
            return runners.run_sample_gaussian(args.config, args.seed, args.out,
                                               args.plot)
        if args.command == "bounds":
            return runners.run_bounds(args.config, args.out, args.plot)
        raise AssertionError(f"unhandled command {args.command}")
    except OscsyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
