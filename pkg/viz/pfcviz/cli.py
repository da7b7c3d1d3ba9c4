"""Command-line front end: field, overlay, and costs subcommands."""

from __future__ import annotations

import argparse
import sys

from . import __version__, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfcviz",
                                     description="Render pfcbench output files")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_field = sub.add_parser("field", help="heatmap or level curve of one snapshot")
    p_field.add_argument("snapshot")
    p_field.add_argument("--style", choices=("heatmap", "contour"), default="heatmap")
    p_field.add_argument("--level", type=float, default=0.0)
    p_field.add_argument("--out", required=True)

    p_overlay = sub.add_parser("overlay", help="one level curve from several snapshots")
    p_overlay.add_argument("snapshots", nargs="+")
    p_overlay.add_argument("--level", type=float, default=0.0)
    p_overlay.add_argument("--labels", help="comma-separated legend labels")
    p_overlay.add_argument("--out", required=True)

    p_costs = sub.add_parser("costs", help="bar charts from a benchmark CSV")
    p_costs.add_argument("csv")
    p_costs.add_argument("--outdir", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "field":
            out = render.render_field(args.snapshot, args.out, style=args.style,
                                      level=args.level)
            print(f"wrote {out}")
        elif args.command == "overlay":
            labels = args.labels.split(",") if args.labels else None
            out = render.render_contour_overlay(args.snapshots, args.out,
                                                level=args.level, labels=labels)
            print(f"wrote {out}")
        else:
            for path in render.render_costs(args.csv, args.outdir):
                print(f"wrote {path}")
    except (render.SnapshotFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
