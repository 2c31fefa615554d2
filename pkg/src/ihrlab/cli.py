"""Command line entry point.

    python -m ihrlab all --out results
    python -m ihrlab exp1 --seed 7 --format csv
    python -m ihrlab config > suite.json      # default config document
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import FORMATS, ConfigError, ExperimentSuiteConfig, dump_config, parse_config
from .report import EXIT_CONFIG, EXIT_IO, EXPERIMENTS, run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _threads(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ihrlab", description="Inference Headroom Ratio simulation experiments")
    parser.add_argument("command", choices=[*EXPERIMENTS, "all", "config"],
                        help="experiment to run, 'all', or 'config' to print the resolved config")
    parser.add_argument("--config", metavar="PATH", help="JSON config file (omitted keys take defaults)")
    parser.add_argument("--seed", type=_seed, help="master seed; overrides the config")
    parser.add_argument("--out", metavar="DIR", help="output directory; overrides the config")
    parser.add_argument("--format", choices=FORMATS, help="table format; overrides the config")
    parser.add_argument("--threads", type=_threads, default=1, help="worker threads (results do not depend on it)")
    return parser


def load_config(args) -> ExperimentSuiteConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(exc.errno, exc.strerror, args.config) from exc
        cfg = parse_config(text)
    else:
        cfg = ExperimentSuiteConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    if args.format is not None:
        cfg = replace(cfg, format=args.format)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    if args.command == "config":
        sys.stdout.write(dump_config(cfg))
        return 0
    selection = EXPERIMENTS if args.command == "all" else (args.command,)
    return run_suite(cfg, selection, workers=args.threads)


if __name__ == "__main__":
    sys.exit(main())
