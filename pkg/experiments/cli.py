"""
CLI for Kloosterman angle experiments.

Usage:
    python experiments/cli.py compute 1 1 7
    python experiments/cli.py vst --p 5 --k 1
    python experiments/cli.py interval --p 1000003 --h 1 --k 1 --M 0 --N 251
    python experiments/cli.py extremes --p 100003 --delta 0.5
    python experiments/cli.py multisum --spec multisum.cfg
    python experiments/cli.py sweep --configs a.cfg b.cfg --workers 3 --output all.csv
"""

import argparse
import sys
from pathlib import Path
import logging

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from experiments.config_loader import build_config, load_config, load_file, parse_overrides
from experiments.reports import error_record
from experiments.runner import EXIT_USAGE, run, sweep
from shared.config import settings
from shared.exceptions import ConfigValidationError
from shared.models import ExperimentKind, ReportFormat
from rich.console import Console

console = Console(stderr=True)

# (flag, type, help) per subcommand; dest is the parameter name
_OPTIONS = {
    "table": [("p", int, "Prime modulus"), ("b", int, "Twist b"),
              ("method", str, "naive or dft"), ("cache", str, "Table cache directory"),
              ("p_lo", int, "Range start (inclusive)"), ("p_hi", int, "Range end (inclusive)")],
    "vst": [("p", int, "Prime modulus"), ("k", int, "Chebyshev order"),
            ("p_lo", int, "Range start (inclusive)"), ("p_hi", int, "Range end (inclusive)")],
    "interval": [("p", int, "Prime modulus"), ("h", int, "Twist"), ("k", int, "Chebyshev order"),
                 ("M", int, "Interval start (exclusive)"), ("N", int, "Interval length"),
                 ("r", int, "Fixed Burgess exponent"), ("samples", int, "Random (M, h) draws"),
                 ("seed", int, "Sampling seed")],
    "twisted": [("p", int, "Prime modulus"), ("h", int, "Twist"), ("m", int, "Additive character"),
                ("k", int, "Chebyshev order"), ("M", int, "Interval start"), ("N", int, "Interval length")],
    "moments": [("p", int, "Prime modulus"), ("alpha", float, "Moment exponent"), ("h", int, "Twist"),
                ("M", int, "Interval start"), ("N", int, "Interval length")],
    "signs": [("p", int, "Prime modulus"), ("h", int, "Twist"),
              ("M", int, "Interval start"), ("N", int, "Interval length")],
    "extremes": [("p", int, "Prime modulus"), ("delta", float, "Threshold in (0, 1]"), ("h", int, "Twist"),
                 ("M", int, "Interval start"), ("N", int, "Interval length")],
    "cdf": [("p", int, "Prime modulus"), ("h", int, "Twist"), ("M", int, "Interval start"),
            ("N", int, "Interval length"), ("p_lo", int, "Range start"), ("p_hi", int, "Range end")],
    "multisum": [("p", int, "Prime modulus"), ("polys", str, "Polynomials a:b,a:b,..."),
                 ("orders", str, "Chebyshev orders k,k,..."), ("h", int, "Additive twist"),
                 ("M", int, "Interval start"), ("N", int, "Interval length")],
    "gm": [("p", int, "Prime modulus"), ("h", int, "Window length"), ("r", int, "Moment order"),
           ("k", int, "Chebyshev order"), ("m", int, "Dilation"), ("m_char", int, "Additive character")],
    "wk": [("p", int, "Prime modulus"), ("r", int, "Moment order"), ("k", int, "Chebyshev order"),
           ("h", int, "Window scale"), ("length", int, "Interval length"), ("count", int, "Interval count"),
           ("seed", int, "Sampling seed")],
    "horizontal": [("x", int, "Primes in (x, 2x]"), ("h", int, "Twist"), ("k", int, "Chebyshev order"),
                   ("M", int, "Interval start"), ("N", int, "Interval length")],
    "bounds": [("p", int, "Prime modulus"), ("N", int, "Interval length"), ("k", int, "Chebyshev order")],
    "chebyshev": [("mode", str, "power, indicator, sign, extreme or linearize"),
                  ("alpha", float, "Power exponent"), ("L", int, "Truncation degree"),
                  ("c", float, "Indicator left end"), ("d", float, "Indicator right end"),
                  ("delta", float, "Extreme threshold"), ("orders", str, "Orders k,k,...")],
}


def _common(parser: argparse.ArgumentParser):
    parser.add_argument('--config', '-c', type=str, help='Flat key = value config file')
    parser.add_argument('--set', action='append', dest='overrides', metavar='KEY=VALUE',
                        help='Override a config value (repeatable)')
    parser.add_argument('--format', choices=[f.value for f in ReportFormat], default=None,
                        help='Report format (default csv)')
    parser.add_argument('--output', '-o', type=str, default=None, help='Report path (default stdout)')


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment kind plus ``sweep``."""
    parser = argparse.ArgumentParser(description="Kloosterman angle experiments")
    parser.add_argument('--log-level', default=None, help='Logging level (default from settings)')
    sub = parser.add_subparsers(dest='command', required=True)

    compute = sub.add_parser('compute', help='Evaluate S(a,b;p)')
    compute.add_argument('a', type=int)
    compute.add_argument('b', type=int)
    compute.add_argument('p', type=int)
    compute.add_argument('--method', choices=['naive', 'dft'], default=None)
    _common(compute)

    for name, options in _OPTIONS.items():
        cmd = sub.add_parser(name, help=f'{name} experiment')
        for dest, kind, text in options:
            cmd.add_argument(f'--{dest}', dest=dest, type=kind, default=None, help=text)
        if name == 'moments':
            cmd.add_argument('--signed', action='store_true', default=None, help='S^alpha instead of |S|^alpha')
        if name == 'multisum':
            cmd.add_argument('--spec', type=str, help='Multi-sum spec file (key = value)')
        _common(cmd)

    sweep_cmd = sub.add_parser('sweep', help='Run several config files')
    sweep_cmd.add_argument('--configs', nargs='*', default=[], help='Config files')
    sweep_cmd.add_argument('--workers', type=int, default=None, help='Worker threads')
    sweep_cmd.add_argument('--format', choices=[f.value for f in ReportFormat], default='csv')
    sweep_cmd.add_argument('--output', '-o', type=str, default=None)
    return parser


def _flags(args: argparse.Namespace) -> dict:
    skip = {'command', 'config', 'overrides', 'spec', 'log_level'}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def main(argv=None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if args.command == 'sweep':
        try:
            configs = [load_config(path) for path in args.configs]
        except ConfigValidationError as e:
            print(error_record('sweep', e, EXIT_USAGE), file=sys.stderr)
            return EXIT_USAGE
        workers = args.workers if args.workers is not None else settings.workers
        output = Path(args.output) if args.output else None
        console.print(f"[cyan]Sweeping[/cyan] {len(configs)} configs with {workers} workers")
        code = sweep(configs, workers=workers, output=output, fmt=ReportFormat(args.format))
        _status(code, output)
        return code

    try:
        file_values = load_file(args.config) if args.config else {}
        if getattr(args, 'spec', None):
            file_values.update(load_file(args.spec))
        config = build_config(
            kind=ExperimentKind(args.command).value,
            file_values=file_values,
            overrides=parse_overrides(args.overrides),
            flags=_flags(args),
        )
    except ConfigValidationError as e:
        print(error_record(args.command, e, EXIT_USAGE), file=sys.stderr)
        return EXIT_USAGE

    code = run(config)
    _status(code, config.output)
    return code


def _status(code: int, output):
    if code == 0 and output is not None:
        console.print(f"[green]✓[/green] Report written to {output}")
    elif code != 0:
        console.print(f"[bold red]✗ Failed[/bold red] with exit code {code}")


if __name__ == "__main__":
    sys.exit(main())
