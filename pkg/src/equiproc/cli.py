"""Command-line entry point mirroring the experiment kinds.

Exit codes: 0 success, 2 configuration or usage problems, 1 runtime
failures. EQUIPROC_THREADS sets the default worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, ContractionError, CoverCapError, ComplexityGateError
from .runner import KINDS, parse_config_file, run, summarize


def _default_threads():
    raw = os.environ.get("EQUIPROC_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="equiproc",
        description="Monte Carlo diagnostics for empirical-process equicontinuity",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment from a JSON config")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--reps", type=int, default=None, help="override replication count")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument(
            "--threads", type=int, default=None,
            help="worker threads (default: EQUIPROC_THREADS or 1)",
        )
    p = sub.add_parser("summarize", help="print key statistics of a finished run")
    p.add_argument("run_dir", help="directory containing manifest.json")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "summarize":
        try:
            sys.stdout.write(summarize(args.run_dir))
        except Exception as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        return 0

    try:
        config = parse_config_file(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    problems = []
    if config.kind != args.command:
        problems.append(
            f"config kind {config.kind!r} does not match subcommand {args.command!r}"
        )
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    if problems:
        print(ConfigError(problems), file=sys.stderr)
        return 2

    threads = args.threads if args.threads is not None else _default_threads()
    try:
        manifest = run(config, out_dir=args.out, threads=threads)
    except (ConfigError, ComplexityGateError, CoverCapError, ContractionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    dest = args.out if args.out is not None else (config.out_dir or ".")
    print(f"wrote {len(manifest.outputs)} files to {dest}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
