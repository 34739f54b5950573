"""``plot`` command: regenerate figures from leadfollow CSV outputs.

Usage::

    plot heatmap     densities.csv             -o heatmap.png
    plot mass-curves diagnostics.csv           -o masses.png
    plot snapshots   densities.csv             -o frames.png --times 0,5,10,15
    plot convergence convergence_aggregate.csv -o decay.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", nargs="+", type=Path)
    parser.add_argument("-o", "--output", type=Path, required=True)
    parser.add_argument(
        "--times",
        default=None,
        help="comma-separated snapshot times (snapshots only)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    times = None
    if args.times is not None:
        try:
            times = tuple(float(tok) for tok in args.times.split(",") if tok)
        except ValueError:
            print(f"bad --times value: {args.times}", file=sys.stderr)
            return 2
    job = FigureJob(
        kind=args.kind,
        csv_paths=tuple(args.csv),
        output=args.output,
        times=times,
    )
    try:
        render(job)
    except (SchemaError, OSError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
