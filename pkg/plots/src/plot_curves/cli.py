"""plot-curves command line: metrics CSVs in, figure out."""

from __future__ import annotations

import argparse
import sys

from .curves import MetricsFormatError, render_curves


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-curves",
        description="Render learning curves (mean + std band) from metrics CSVs",
    )
    parser.add_argument("csvs", nargs="+", help="metrics CSV files")
    parser.add_argument("-o", "--output", required=True, help="image file to write")
    parser.add_argument("--title", default="", help="figure title")
    args = parser.parse_args(argv)

    try:
        render_curves(args.csvs, args.output, args.title)
    except (MetricsFormatError, OSError) as exc:
        print(f"plot-curves: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
