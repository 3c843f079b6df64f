"""``nhqw <scenario> [--out DIR] [--seed N] [--threads N]``

Exit status: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
Failures print one diagnostic line on stderr.
"""
import argparse
import sys
from pathlib import Path

from nhqw.cli.runner import resolve_threads, run
from nhqw.cli.scenario import load_scenario
from nhqw.errors import ConfigError, NHQWError, NumericalError, ValidationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser():
    p = argparse.ArgumentParser(
        prog="nhqw", description="Run a lossy quantum-walk scenario and write CSV datasets."
    )
    p.add_argument("scenario", help="scenario file (INI)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="override the scenario's detection seed")
    p.add_argument(
        "--threads", type=int, help="worker threads for grid sweeps (default: $NHQW_THREADS or 1)"
    )
    return p


def _fail(code, message):
    print(f"nhqw: error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError(f"--seed must be non-negative, got {args.seed}")
        try:
            threads = resolve_threads(args.threads)
        except ValueError as exc:
            raise ConfigError(f"thread count: {exc}") from None
        sc = load_scenario(args.scenario)
        paths = run(
            sc,
            out_dir=args.out,
            threads=threads,
            seed=args.seed,
            base_dir=Path(args.scenario).parent,
        )
    except (ConfigError, ValidationError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except (NumericalError, NHQWError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
