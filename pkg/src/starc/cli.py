"""Command line entry point: ``starc run | verify-algebra | list-scenarios``."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .algebra_suite import verify_algebra
from .errors import SchemaError
from .report import emit_report
from .runner import resolve_checks, run_scenario
from .scenarios import BUILTINS, builtin, list_builtins, load_config

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _env_seed():
    raw = os.environ.get("STARC_SEED")
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise SchemaError("STARC_SEED", f"expected an integer, got {raw!r}") from None


def _resolve(target):
    """A path to a JSON scenario, or the name of a built-in."""
    if os.path.exists(target) or target.endswith(".json"):
        return load_config(target)
    if target in BUILTINS:
        return builtin(target)
    raise SchemaError("config", f"no such file or built-in scenario: {target!r}")


def _write(data: bytes):
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def _config_error(exc):
    if isinstance(exc, SyntaxError):
        path = getattr(exc, "path", None)
        where = f" in {path}" if path else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
    elif isinstance(exc, OSError):
        print(f"config error: cannot read {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
    else:
        print(f"config error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args):
    try:
        config = _resolve(args.config)
        seed = args.seed if args.seed is not None else _env_seed()
        config = config.with_numerics(fd_step=args.fd_step, tolerance=args.tol, samples=args.samples, seed=seed)
        if args.tol is not None:
            config = replace(config, tolerances={})
        config.build()
        which = None
        if args.checks:
            which = resolve_checks([c.strip() for c in args.checks.split(",") if c.strip()])
        report = run_scenario(config, which)
    except (SchemaError, SyntaxError, OSError) as exc:
        return _config_error(exc)
    _write(emit_report(report, args.output))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify_algebra(args):
    try:
        seed = args.seed if args.seed is not None else _env_seed()
    except SchemaError as exc:
        return _config_error(exc)
    report = verify_algebra(samples=args.samples, seed=0 if seed is None else seed)
    _write(emit_report(report, args.output))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list(args):
    for name in list_builtins():
        print(name)
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="starc", description="Spacetime-algebra geometry checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or built-in")
    run.add_argument("config", help="path to a scenario JSON file, or a built-in name")
    run.add_argument("--checks", help="comma-separated check names (default: the scenario's list)")
    run.add_argument("--fd-step", type=_positive_float)
    run.add_argument("--tol", type=float, help="tolerance for every upper-bound check (replaces per-check values)")
    run.add_argument("--samples", type=_positive_int)
    run.add_argument("--seed", type=int)
    run.add_argument("--output", choices=("text", "json"), default="text")
    run.set_defaults(func=cmd_run)

    alg = sub.add_parser("verify-algebra", help="randomized identity suite for the algebra kernel")
    alg.add_argument("--samples", type=_positive_int, default=10_000)
    alg.add_argument("--seed", type=int)
    alg.add_argument("--output", choices=("text", "json"), default="text")
    alg.set_defaults(func=cmd_verify_algebra)

    ls = sub.add_parser("list-scenarios", help="print the built-in scenario names")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
