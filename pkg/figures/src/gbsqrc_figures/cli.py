"""`gbsqrc-figures render --figure <id> --in <dir> --out <path>`."""

from __future__ import annotations

import argparse
import sys

from .loader import SchemaError
from .render import FIGURE_IDS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbsqrc-figures",
        description="render figures from experiment CSV directories")
    sub = parser.add_subparsers(dest="command", required=True)
    render_p = sub.add_parser("render", help="render one figure to a PNG")
    render_p.add_argument("--figure", required=True, choices=FIGURE_IDS,
                          help="figure id")
    render_p.add_argument("--in", dest="in_dir", required=True,
                          help="directory of <kind>.csv + <kind>.schema.txt")
    render_p.add_argument("--out", required=True, help="output PNG path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(args.figure, args.in_dir, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
