"""``qms`` command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for input errors (unreadable or malformed files, schema violations,
dimension limits, bad flags).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import __version__
from .errors import QMSError
from .pipelines import Options, run, run_validate
from .report import Report, digest, render
from .specio import EXAMPLE_NAMES, dumps_spec, example_spec, load_operator, loads_spec

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _float_list(text: str) -> tuple:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="main tolerance (defaults per command)")
    common.add_argument("--rank-tol", type=float, default=1e-10)
    common.add_argument("--gram-tol", type=float, default=1e-10)
    common.add_argument("--gap-tol", type=float, default=1e-6, help="Cauchy gap tolerance for yosida")
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--T", dest="T_path", help="JSON file with the positive operator T")
    common.add_argument("--t", dest="times", type=_float_list, default=(0.1, 0.5, 1.0))
    common.add_argument("--eps", type=_float_list, default=(1e-1, 1e-2, 1e-3, 1e-4))

    parser = argparse.ArgumentParser(prog="qms", description="Check and decompose quantum Markov semigroup generators.")
    parser.add_argument("--version", action="version", version=f"qms {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("validate", "hermiticity, unitality and conditional complete positivity"),
        ("decompose", "Lindblad decomposition L = phi + G . + . G^*"),
        ("dilate", "Stinespring dilation of the extracted phi"),
        ("evolve", "complete positivity, unitality and semigroup law of exp(tL)"),
        ("yosida", "Yosida approximation diagnostics"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("spec", help="generator spec file (JSON)")
    p = sub.add_parser("example", parents=[common], help="write a built-in example spec and verify it")
    p.add_argument("name", choices=EXAMPLE_NAMES)
    p.add_argument("--dim", type=int)
    p.add_argument("--delta", type=float, help="reset decay rate for shift_reset")
    p.add_argument("--emit", help="path for the generated spec file")
    return parser


def _options(args, dim: int) -> Options:
    return Options(
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        rank_tol=args.rank_tol,
        gram_tol=args.gram_tol,
        gap_tol=args.gap_tol,
        times=args.times,
        eps=args.eps,
        T=load_operator(args.T_path, dim) if args.T_path else None,
    )


def _execute(args) -> Report:
    if args.command == "example":
        spec = example_spec(args.name, args.dim, args.delta)
        text = dumps_spec(spec)
        if args.emit:
            Path(args.emit).write_text(text, encoding="utf-8")
        spec = loads_spec(text)
        report = run_validate(spec, _options(args, spec.dim))
        report.command = "example"
        report.input_sha256 = digest(text.encode("utf-8"))
        report.details["example"] = args.name
        return report
    raw = Path(args.spec).read_bytes()
    spec = loads_spec(raw.decode("utf-8"))
    opts = _options(args, spec.dim)
    report = run(args.command, spec, opts)
    blobs = [raw]
    if args.T_path:
        blobs.append(Path(args.T_path).read_bytes())
    report.input_sha256 = digest(*blobs)
    return report


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        # single-threaded BLAS keeps floating-point reduction order fixed
        with threadpool_limits(limits=1):
            report = _execute(args)
        text = render(report, args.format)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except (QMSError, ValueError, OSError, UnicodeDecodeError, IndexError) as exc:
        print(f"qms: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return EXIT_OK if report.verdict else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
