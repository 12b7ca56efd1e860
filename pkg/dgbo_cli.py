#!/usr/bin/env python3
"""
DGBO CLI - Command Line Interface for the DGBO toolkit
Ground states, evolution and threshold checks for the k-dispersion
generalized Benjamin-Ono equation.

Usage:
    dgbo ground-state --config run.yaml     - Compute and certify Q
    dgbo evolve --config run.yaml           - Evolve initial data
    dgbo threshold --config run.yaml        - Classify scaled data
    dgbo sweep --config sweep.yaml          - Sweep over (beta, k, amplitude)
    dgbo verify --resolution reduced        - Run the verification checks
    dgbo --version                          - Show version
"""
import argparse
import logging
import os
import re
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src import __version__
from src.config import setup_logging
from src.core.exceptions import DGBOError
from src.harness.commands import cmd_evolve, cmd_ground_state, cmd_sweep, cmd_threshold, cmd_verify
from src.harness.run_config import RunConfig, apply_overrides, load_run_config

logger = logging.getLogger("dgbo")

COMMANDS = {
    'ground-state': cmd_ground_state,
    'evolve': cmd_evolve,
    'threshold': cmd_threshold,
    'sweep': cmd_sweep,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so usage errors map to exit 2 in main()."""

    def error(self, message: str):
        raise _UsageError(message)


class DGBOCLI:
    """Command Line Interface for DGBO."""

    def __init__(self, debug: bool = False):
        self.debug = debug

    def _color(self, code: str, text: str) -> str:
        if os.environ.get('NO_COLOR'):
            return text
        return f"\033[{code}m{text}\033[0m"

    def _format_error_type(self, error_type: str) -> str:
        """Format error type with spaces (e.g., 'NoContractionError' -> 'NO CONTRACTION ERROR')."""
        formatted = re.sub(r'(?<!^)(?=[A-Z])', ' ', error_type)
        return formatted.upper()

    def _print_debug_error(self, error: Exception) -> None:
        """Print the error; with --debug include the traceback."""
        header = self._color('91', self._format_error_type(type(error).__name__))
        if not self.debug:
            print(f"{header} {error}", file=sys.stderr)
            return

        import traceback

        rule = self._color('91', '=' * 60)
        print(f"\n{rule}", file=sys.stderr)
        print(header, file=sys.stderr)
        print(rule, file=sys.stderr)
        print(f"{self._color('93', 'Message:')} {error}", file=sys.stderr)
        print(f"{self._color('93', 'Exit code:')} {getattr(error, 'exit_code', 1)}", file=sys.stderr)
        if error.__traceback__:
            print(self._color('93', 'Traceback:'), file=sys.stderr)
            traceback.print_exception(type(error), error, error.__traceback__, file=sys.stderr)
        print(f"{rule}\n", file=sys.stderr)

    def run(self, command: str, config: RunConfig, args: argparse.Namespace) -> int:
        """Dispatch one subcommand and translate failures to exit codes."""
        try:
            if command == 'verify':
                checks = [name.strip() for name in args.checks.split(',') if name.strip()] if args.checks else None
                return cmd_verify(config, checks=checks, compare=args.compare)
            return COMMANDS[command](config)
        except DGBOError as e:
            self._print_debug_error(e)
            return e.exit_code
        except KeyboardInterrupt:
            print("\nInterrupted.", file=sys.stderr)
            return 1
        except Exception as e:
            self._print_debug_error(e)
            return 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', metavar='FILE', help='YAML run document')
    parser.add_argument('--output-dir', metavar='DIR', help='Directory for artifacts')
    parser.add_argument('--threads', type=int, metavar='N', help='Worker processes for sweeps')
    parser.add_argument('--seed', type=int, metavar='N', help='Seed for randomized checks')
    parser.add_argument('-d', '--debug', action='store_true', help='Enable debug logging and tracebacks')
    parser.add_argument('--no-color', action='store_true', help='Disable colored output')


def create_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog='dgbo',
        description='Toolkit for the k-dispersion generalized Benjamin-Ono equation',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    dgbo ground-state --config configs/bo_quintic.yaml
    dgbo threshold --config configs/bo_quintic.yaml --output-dir runs/bo
    dgbo sweep --config configs/sweep.yaml --threads 4
    dgbo verify --resolution reduced --checks bo_soliton,identities

Exit codes:
    0 success, 1 failure, 2 invalid configuration or input,
    3 numerical instability, 4 theorem not applicable (k <= 2*beta)
"""
    )
    parser.add_argument('-v', '--version', action='version', version=f'DGBO {__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', parser_class=_Parser)
    subparsers.required = True

    for name, help_text in (
        ('ground-state', 'Compute the ground state and its certificates'),
        ('evolve', 'Evolve initial data and record conserved quantities'),
        ('threshold', 'Evaluate the global-existence threshold for scaled data'),
        ('sweep', 'Threshold classification over a (beta, k, amplitude) grid'),
    ):
        _add_common(subparsers.add_parser(name, help=help_text))

    verify = subparsers.add_parser('verify', help='Run the verification checks')
    _add_common(verify)
    verify.add_argument('--checks', metavar='A,B', help='Comma-separated check names')
    verify.add_argument('--resolution', choices=['default', 'reduced'], help='Grid resolution for the checks')
    verify.add_argument('--compare', metavar='FILE', help='Earlier verify.json to compare digests with')
    return parser


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config)
    config = apply_overrides(config, output_dir=args.output_dir, threads=args.threads, seed=args.seed)
    if getattr(args, 'resolution', None):
        config = config.model_copy(update={'verify': config.verify.model_copy(update={'resolution': args.resolution})})
    return config


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"dgbo: error: {e}", file=sys.stderr)
        return 2

    if args.no_color:
        os.environ['NO_COLOR'] = '1'
    setup_logging('DEBUG' if args.debug else None)

    cli = DGBOCLI(debug=args.debug)
    try:
        config = _load(args)
    except DGBOError as e:
        cli._print_debug_error(e)
        return e.exit_code

    logger.debug(f"Running {args.command} with output directory {config.output.directory}")
    return cli.run(args.command, config, args)


if __name__ == '__main__':
    sys.exit(main())
