"""Command-line front end: render figures from a result table."""

from __future__ import annotations

import argparse
import sys

from .figures import SchemaError, render_all, render_one

EXIT_OK = 0
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iov-plots",
        description="Render benchmark figures from a simulator result table.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    render = sub.add_parser("render", help="render figures from a CSV table")
    render.add_argument("--csv", required=True, help="result table to read")
    render.add_argument("--out", required=True, help="output directory")
    render.add_argument(
        "--metric",
        help="render only this metric column (default: all seven figures)",
    )
    return parser


def cmd_render(args) -> int:
    from pathlib import Path

    out_dir = Path(args.out)
    if args.metric is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = [render_one(args.csv, args.metric, out_dir / f"{args.metric}.png")]
    else:
        written = render_all(args.csv, out_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return cmd_render(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
