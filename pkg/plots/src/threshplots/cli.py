"""Command-line front end: one subcommand, ``plot``.

Either point it at CSV files directly or hand it a JSON figure spec.
Exit codes: 0 success, 1 bad flags, bad spec, or bad input data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figure import FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshplots",
        description="Plot regret-trace CSV files (round,mean_regret,ci_low,ci_high).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render one figure from trace CSVs")
    p.add_argument("csv", nargs="*", help="trace CSV files, one curve each")
    p.add_argument("--spec", help="JSON figure spec (instead of positional files)")
    p.add_argument("--labels", help="comma-separated legend labels, one per file")
    p.add_argument("--out", default="regret.svg", help="output figure path")
    p.add_argument("--title", default="", help="figure title")
    return parser


def _spec_from_args(args: argparse.Namespace) -> FigureSpec:
    if args.spec is not None:
        if args.csv or args.labels:
            raise ValueError("--spec replaces positional files and --labels")
        path = Path(args.spec)
        if not path.is_file():
            raise ValueError(f"{path}: no such spec file")
        return FigureSpec.from_json(path.read_text())
    if not args.csv:
        raise ValueError("name at least one CSV file or pass --spec")
    labels: tuple[str, ...] = ()
    if args.labels:
        labels = tuple(s.strip() for s in args.labels.split(","))
    return FigureSpec(
        input_files=tuple(args.csv),
        labels=labels,
        output=args.out,
        title=args.title,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        out = render(_spec_from_args(args))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
