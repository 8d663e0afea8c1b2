"""Command-line entry: reproduce the reference curves, run config scenarios, self-test."""

import argparse
import json
import logging
import sys
from typing import Sequence

from pydantic import TypeAdapter

from app import __version__
from app.core.config import settings
from app.core.errors import ConfigError, SimulationError
from app.core.logging_config import configure_logging
from app.schemas.scenario import BackflowInterval, ScenarioConfig, TimeSeriesRecord
from app.services.environment import backflow_intervals, classify_backflow
from app.services.export import write_records, write_sweep
from app.services.scenarios import (
    DEFAULT_ETAS,
    detect_events,
    load_config,
    run_scenario,
    scenario_fig1,
    scenario_fig2,
    scenario_fig2_family,
    with_points,
)
from app.services.selftest import run_selftest

logger = logging.getLogger(__name__)

_intervals_adapter = TypeAdapter(list[BackflowInterval])


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--points", type=_positive_int, default=None, help="Grid size (default 1001)")
    common.add_argument("--out", default="-", help="Output path, '-' for stdout")
    common.add_argument("--format", choices=["csv", "json"], default="csv", dest="fmt")
    common.add_argument("--events", action="store_true", help="Report sudden death / revival on stderr")
    common.add_argument("--backflow", action="store_true", help="Report backflow intervals on stderr")
    common.add_argument("--workers", type=_positive_int, default=None, help="Grid evaluation threads")
    common.add_argument("--log-level", default=None, help="Override LOG_LEVEL")

    parser = CliParser(prog="hidden-entanglement", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("fig1", parents=[common], help="|phi+> under random x/z rotations")

    fig2 = commands.add_parser("fig2", parents=[common], help="eta-mixture under random x/z rotations")
    fig2.add_argument("--eta", type=float, required=True)

    sweep = commands.add_parser("sweep", parents=[common], help="fig2 for several eta values")
    sweep.add_argument("--eta", type=float, action="append", dest="etas", help="Repeatable")

    run = commands.add_parser("run", parents=[common], help="Scenario from a JSON config")
    run.add_argument("--config", required=True, help="Config path, '-' for stdin")

    selftest = commands.add_parser("selftest", help="Run the reproduction checks")
    selftest.add_argument("--points", type=_positive_int, default=None)
    selftest.add_argument("--samples", type=_positive_int, default=None)
    selftest.add_argument("--log-level", default=None)

    return parser


def _report_diagnostics(
    args: argparse.Namespace,
    cfg: ScenarioConfig,
    records: list[TimeSeriesRecord],
    eta: float | None = None,
) -> None:
    payload: dict = {} if eta is None else {"eta": eta}
    if args.events:
        payload["events"] = detect_events(cfg, records).model_dump()
    if args.backflow:
        report = backflow_intervals(records, cfg.period)
        payload["backflow"] = _intervals_adapter.dump_python(classify_backflow(records, report))
    if args.events or args.backflow:
        sys.stderr.write(json.dumps(payload) + "\n")


def _run_single(args: argparse.Namespace, cfg: ScenarioConfig) -> int:
    records = run_scenario(cfg, args.workers)
    write_records(records, args.out, args.fmt)
    _report_diagnostics(args, cfg, records)
    return 0


def _cmd_fig1(args: argparse.Namespace) -> int:
    return _run_single(args, scenario_fig1(args.points))


def _cmd_fig2(args: argparse.Namespace) -> int:
    return _run_single(args, scenario_fig2(args.eta, args.points))


def _cmd_run(args: argparse.Namespace) -> int:
    return _run_single(args, with_points(load_config(args.config), args.points))


def _cmd_sweep(args: argparse.Namespace) -> int:
    sweep = []
    for eta, cfg in scenario_fig2_family(args.etas or DEFAULT_ETAS, args.points):
        records = run_scenario(cfg, args.workers)
        _report_diagnostics(args, cfg, records, eta)
        sweep.append((eta, records))
    write_sweep(sweep, args.out, args.fmt)
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    results = run_selftest(points=args.points, samples=args.samples)
    return 0 if all(r.passed for r in results) else 2


_COMMANDS = {
    "fig1": _cmd_fig1,
    "fig2": _cmd_fig2,
    "sweep": _cmd_sweep,
    "run": _cmd_run,
    "selftest": _cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes.

    Returns:
        0 on success, 1 on invalid input, 2 on a numerical failure, 3 on an I/O error
    """
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        logger.debug(f"Command {args.command} (eigensolver={settings.eigensolver})")
        return _COMMANDS[args.command](args)
    except SimulationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return 2


def run() -> None:
    sys.exit(main())
