# cli_rebound.py
"""
rebound-lab - command line of the contactless rebound laboratory

Subcommands:
- simulate   one trajectory from a config file
- sweep      a viscosity sweep from a config file with mu_values
- drag-table lubrication drag of one geometry against the closed forms
- audit      drag and spring assumption audit of a config
- verify     the acceptance property suite

Exit codes: 0 success, 1 usage / parse / validation, 2 numerical failure,
3 property-suite failure.
"""

import argparse
import asyncio
import sys
from typing import Optional, Sequence

from rich.console import Console

from configs import LOG_LEVEL, RUNS_DIR
from fsi import __version__
from fsi.log import setup_logging
from runners import EXIT_INPUT, LabManager, Reporter


class UsageError(Exception):
    pass


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors to the caller instead of exiting with 2"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(
        prog="rebound-lab",
        description="Spring-mass shell approaching a wall through a viscous fluid.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="Library log level (default: %(default)s)")
    parser.add_argument("--quiet", action="store_true", help="Only show warnings, errors and results")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    simulate = sub.add_parser("simulate", help="Integrate one configuration")
    simulate.add_argument("--config", required=True, help="JSON config file")
    simulate.add_argument("--t-end", type=float, default=None, help="End time in seconds (default: from config)")
    simulate.add_argument("--out", default=str(RUNS_DIR / "simulate"), help="Output directory")

    sweep = sub.add_parser("sweep", help="Run a viscosity sweep")
    sweep.add_argument("--config", required=True, help="JSON config file with mu_values")
    sweep.add_argument("--out", default=str(RUNS_DIR / "sweep"), help="Output directory")

    table = sub.add_parser("drag-table", help="Tabulate the lubrication drag")
    table.add_argument("--alpha", type=float, required=True, help="Shape exponent")
    table.add_argument("--gamma", type=float, required=True, help="Shape coefficient")
    table.add_argument("--dim", type=int, choices=[2, 3], required=True, help="Spatial dimension")
    table.add_argument("--h-min", type=float, required=True, help="Smallest distance (m)")
    table.add_argument("--h-max", type=float, required=True, help="Largest distance (m)")
    table.add_argument("--points", type=int, required=True, help="Number of log-spaced distances")
    table.add_argument("--out", required=True, help="Output CSV file")

    audit = sub.add_parser("audit", help="Audit the drag law and spring of a config")
    audit.add_argument("--config", required=True, help="JSON config file")

    verify = sub.add_parser("verify", help="Run the acceptance property suite")
    verify.add_argument("--quick", action="store_true", help="Reduced viscosity list and audit grid")
    verify.add_argument("--only", type=int, nargs="+", metavar="ID", help="Run only these property ids")

    return parser


def task_data(args: argparse.Namespace) -> dict:
    if args.command == "simulate":
        return {"config": args.config, "t_end": args.t_end, "out": args.out}
    if args.command == "sweep":
        return {"config": args.config, "out": args.out}
    if args.command == "drag-table":
        return {
            "alpha": args.alpha, "gamma": args.gamma, "dim": args.dim,
            "h_min": args.h_min, "h_max": args.h_max, "points": args.points, "out": args.out,
        }
    if args.command == "audit":
        return {"config": args.config}
    return {"quick": args.quick, "only": args.only}


async def run_command(args: argparse.Namespace, reporter: Reporter) -> int:
    manager = LabManager(reporter)
    response = await manager.dispatch(args.command.replace("-", "_"), task_data(args))
    return response.exit_code


def cli_dispatch(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    """Parse `argv`, run the command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    setup_logging(args.log_level)
    reporter = Reporter(console=console, quiet=args.quiet)
    return asyncio.run(run_command(args, reporter))


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
