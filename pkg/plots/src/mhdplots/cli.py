"""Command-line entry points: `mhdplots wp` and `mhdplots snap`."""

import argparse
import sys

from .records import SchemaError
from .render import plot_snapshot, plot_work_precision
from .snapfile import FIELD_NAMES, SnapshotError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mhdplots",
        description="Render benchmark work-precision CSVs and field snapshots.")
    sub = parser.add_subparsers(dest="command", required=True)

    wp = sub.add_parser("wp", help="work-precision diagram from records CSVs")
    wp.add_argument("csv", nargs="+", help="records CSV file(s)")
    wp.add_argument("-o", "--out", required=True, help="output image path")

    snap = sub.add_parser("snap", help="2D colormap of a snapshot field")
    snap.add_argument("file", help="binary snapshot file")
    snap.add_argument("--field", default="J_z", choices=sorted(FIELD_NAMES),
                      help="field to render (default J_z)")
    snap.add_argument("-o", "--out", required=True, help="output image path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "wp":
            out = plot_work_precision(args.csv, args.out)
        else:
            out = plot_snapshot(args.file, args.field, args.out)
    except (SchemaError, SnapshotError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
