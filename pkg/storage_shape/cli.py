from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from storage_shape import __version__
from storage_shape.commands.handler import (
    cmd_analyze,
    cmd_certify,
    cmd_drift_check,
    cmd_simulate,
    cmd_validate,
)
from storage_shape.config import RUNS_DIR, ensure_dirs
from storage_shape.services.reporting import dump_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def nonnegative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from exc
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {number}")
    return number


def positive_int(value: str) -> int:
    number = nonnegative_int(value)
    if number == 0:
        raise argparse.ArgumentTypeError("expected a positive integer, got 0")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="storage-shape", description="Shape stability of overlapping storage networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--output-dir", type=Path, default=RUNS_DIR, help="where result files and manifests go")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("network", type=Path)

    p = sub.add_parser("analyze", help="feasibility, geometry and certificate report")
    p.add_argument("network", type=Path)

    p = sub.add_parser("drift-check", help="exact one-step drift against the closed forms")
    p.add_argument("network", type=Path)
    p.add_argument("spec", type=Path)
    p.add_argument("--seed", type=nonnegative_int, default=None)

    p = sub.add_parser("simulate", help="Monte Carlo run of the embedded chain")
    p.add_argument("config", type=Path)
    p.add_argument("--seed", type=nonnegative_int, default=None)
    p.add_argument("--replicas", type=positive_int, default=None)
    p.add_argument("--steps", type=nonnegative_int, default=None)
    p.add_argument("--workers", type=positive_int, default=None)

    p = sub.add_parser("certify", help="separating functional and sampled drift checks")
    p.add_argument("network", type=Path)
    p.add_argument("spec", type=Path, nargs="?", default=None)
    p.add_argument("--seed", type=nonnegative_int, default=None)
    return parser


def run(args: argparse.Namespace) -> dict:
    output_dir = Path(getattr(args, "output_dir", None) or RUNS_DIR)
    if args.cmd == "validate":
        return cmd_validate(args.network)
    if args.cmd == "analyze":
        return cmd_analyze(args.network, output_dir)
    if args.cmd == "drift-check":
        return cmd_drift_check(args.network, args.spec, output_dir, seed=args.seed)
    if args.cmd == "simulate":
        return cmd_simulate(
            args.config,
            output_dir,
            seed=args.seed,
            replicas=args.replicas,
            steps=args.steps,
            workers=args.workers,
        )
    if args.cmd == "certify":
        return cmd_certify(args.network, args.spec, output_dir, seed=args.seed)
    raise ValueError(f"unknown command {args.cmd!r}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.output_dir == RUNS_DIR:
        ensure_dirs()
    try:
        result = run(args)
    except ValueError as exc:
        # pydantic.ValidationError is a ValueError too
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        logger.debug("internal failure", exc_info=True)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    sys.stdout.write(dump_json(result))
    return EXIT_INPUT if result.get("ok") is False else EXIT_OK
