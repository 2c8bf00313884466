"""
CLI Module

Command line front end:

    nc-restriction run <command> [--key value ...] [--config FILE] [--output PATH] [--format csv|parquet|json]
    nc-restriction suite {lemmas,restriction,lower-bound,all}

Exit codes are 0 when every report passes, 1 when a report fails and 2 on usage or validation errors.

"""

import argparse
import json
import logging
import math
import os
import sys
from typing import Dict, Iterable, Optional, Sequence, Tuple

from pydantic import ValidationError

from nc_restriction.deleeuw_harness import DisjointnessError, FundamentalDomainError
from nc_restriction.experiment_config import (
    PARAMETER_MODELS,
    ConfigFileError,
    ExperimentConfig,
    UnknownCommandError,
    read_config_file,
    resolve_config,
)
from nc_restriction.experiments import SUITE_SEED, SUITES, CommandResult, execute
from nc_restriction.finite_groups import (
    ElementNotFoundError,
    EmptySubsetError,
    GroupOrderOverflowError,
    MalformedDescriptorError,
    NotASubgroupError,
    NotNormalError,
    NotSymmetricError,
)
from nc_restriction.lie_geometry import InvalidRadiusError, NotInGroupError, UnsupportedModelError
from nc_restriction.monte_carlo import DegenerateSeriesError, MalformedNeighbourhoodError, RadiusTooLargeError
from nc_restriction.multipliers import (
    ArityMismatchError,
    FolnerRadiusError,
    InvalidIndexPatternError,
    MalformedSymbolSpecError,
    SymbolSizeError,
)
from nc_restriction.noncommutative_lp import InvalidExponentError
from nc_restriction.reporting import (
    FORMATS,
    ResidualReport,
    json_default,
    summary_table,
    write_frame,
    write_json,
    write_reports,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

USAGE_ERRORS = (
    ConfigFileError,
    UnknownCommandError,
    ValidationError,
    MalformedDescriptorError,
    GroupOrderOverflowError,
    ElementNotFoundError,
    NotASubgroupError,
    NotNormalError,
    NotSymmetricError,
    EmptySubsetError,
    MalformedSymbolSpecError,
    SymbolSizeError,
    ArityMismatchError,
    InvalidIndexPatternError,
    FolnerRadiusError,
    InvalidExponentError,
    DisjointnessError,
    FundamentalDomainError,
    UnsupportedModelError,
    InvalidRadiusError,
    NotInGroupError,
    MalformedNeighbourhoodError,
    RadiusTooLargeError,
    DegenerateSeriesError,
    OSError,
)


def _add_common_flags(parser: argparse.ArgumentParser, with_config: bool = True) -> None:
    if with_config:
        parser.add_argument("--config", help="flat key=value file, overridden by flags")
        parser.add_argument("--output", help="result file; reports go next to it as <stem>.reports.jsonl")
        parser.add_argument("--format", choices=FORMATS, help="table format of the output file")
    else:
        parser.add_argument("--output", help="JSONL file of the reports")
    parser.add_argument("--seed", type=int, help="seed of every random stream")
    parser.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS, help="default WARNING")


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    """Top level parser and the parser of every run command, whose flags mirror the parameter models."""
    parser = argparse.ArgumentParser(prog="nc-restriction", description="noncommutative restriction experiments")
    actions = parser.add_subparsers(dest="action", required=True)

    run_parser = actions.add_parser("run", help="run one experiment")
    commands = run_parser.add_subparsers(dest="command", required=True)
    command_parsers = {}
    for command, model in PARAMETER_MODELS.items():
        command_parser = commands.add_parser(command, help=model.__doc__, argument_default=argparse.SUPPRESS)
        _add_common_flags(command_parser)
        for name, info in model.model_fields.items():
            command_parser.add_argument(f"--{name.replace('_', '-')}", dest=name, help=info.description)
        command_parsers[command] = command_parser

    suite_parser = actions.add_parser("suite", help="run an acceptance bundle", argument_default=argparse.SUPPRESS)
    suite_parser.add_argument("name", choices=tuple(SUITES))
    _add_common_flags(suite_parser, with_config=False)
    return parser, command_parsers


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


def reports_path(output: str) -> str:
    stem, _ = os.path.splitext(output)
    return f"{stem}.reports.jsonl"


def exit_code(reports: Iterable[ResidualReport]) -> int:
    """1 when a testable, non-informational report fails"""
    for report in reports:
        if math.isnan(report.residual) or report.context.get("informational"):
            continue
        if not report.passed:
            return EXIT_FAIL
    return EXIT_PASS


def _write_result(result: CommandResult, config: ExperimentConfig) -> None:
    output = config.output_path
    if output is not None:
        if result.payload is not None and (result.frame is None or config.output_format == "json"):
            write_json({**result.payload, "config": config.echo()}, output)
        elif result.frame is not None:
            write_frame(result.frame, output, config.output_format)
        if result.reports:
            write_reports(result.reports, reports_path(output))
    if result.message:
        print(result.message)
    if result.payload is not None and output is None:
        print(json.dumps(result.payload, default=json_default))
    elif result.frame is not None and output is None and not result.reports:
        print(result.frame.to_csv(index=False, float_format="%.17g"), end="")
    if result.reports:
        print(summary_table(result.reports))


def run_command(args: argparse.Namespace, command_parser: argparse.ArgumentParser) -> int:
    """Resolve the configuration of a run command, execute it and write its outputs."""
    values = {key: value for key, value in vars(args).items() if key not in ("action", "command", "config", "log_level")}
    try:
        file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
        config = resolve_config(args.command, values, file_values)
        result = execute(config)
    except USAGE_ERRORS as error:
        logger.error("%s: %s", type(error).__name__, error)
        command_parser.print_usage(sys.stderr)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    _write_result(result, config)
    return exit_code(result.reports)


def suite(name: str, seed: int = SUITE_SEED, output: Optional[str] = None) -> int:
    """Run an acceptance bundle, print its summary table and return the exit code."""
    logger.info("suite %s with seed %d", name, seed)
    reports = SUITES[name](seed)
    for report in reports:
        logger.info("%s: residual %s tolerance %s pass %s", report.name, report.residual, report.tolerance, report.passed)
    if output is not None:
        write_reports(reports, output)
    print(summary_table(reports))
    return exit_code(reports)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv and dispatch; argparse exits with 2 on malformed command lines."""
    parser, command_parsers = build_parser()
    args = parser.parse_args(argv)
    configure_logging(getattr(args, "log_level", None) or "WARNING")
    if args.action == "suite":
        return suite(args.name, getattr(args, "seed", SUITE_SEED), getattr(args, "output", None))
    return run_command(args, command_parsers[args.command])


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
