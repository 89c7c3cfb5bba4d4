"""Command-line entry point: ``piht run | validate | report``.

Exit codes: 0 on success, 1 when a config or trace cannot be parsed or
fails validation, 2 when a run fails at runtime.
"""
import argparse
import json
import logging
import sys

from .errors import ConfigError, InvalidInputError, PihtError
from .experiment import run_experiment, summarize_trace, validate_config

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _cmd_validate(args):
    report = validate_config(args.config)
    for v in report.violations:
        print(f"error: {v}")
    for n in report.notices:
        print(f"notice: {n}")
    if report.ok and not args.quiet:
        print(f"{args.config}: ok")
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_run(args):
    report = validate_config(args.config)
    if not report.ok:
        for v in report.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_INVALID
    rows = run_experiment(args.config, output_dir=args.output_dir, jobs=args.jobs, quiet=args.quiet)
    failed = [r for r in rows if r["status"] != "ok"]
    if not args.quiet:
        print(f"{len(rows)} cells, {len(failed)} aborted")
    return EXIT_OK


def _cmd_report(args):
    summary = summarize_trace(args.trace)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="piht", description=__doc__.splitlines()[0])
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every (K, run) cell of a config")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None, help="override experiment.output_dir")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep cells")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("report", help="recompute summary statistics from a trace file")
    p.add_argument("trace")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PihtError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
