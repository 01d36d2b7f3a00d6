"""Command line: ``planetoid-gdf convert --input DIR --name cora --out FILE``."""

from __future__ import annotations

import argparse
import sys

from .convert import DATASET_NAMES, ConversionError, convert


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planetoid-gdf",
        description="Convert the upstream citation benchmark distribution to GDF.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("convert", help="convert one dataset")
    p.add_argument("--input", required=True, help="directory with the ind.* files")
    p.add_argument("--name", required=True, choices=DATASET_NAMES)
    p.add_argument("--out", required=True, help="output .gdf.json path")
    p.add_argument("--val-size", type=int, default=500, dest="val_size")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        stats = convert(args.input, args.name, args.out, val_size=args.val_size)
    except (ConversionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {args.out}: {stats['num_nodes']} nodes, {stats['num_edges']} edges, "
        f"{stats['num_features']} features, {stats['num_classes']} classes, "
        f"split {stats['train']}/{stats['val']}/{stats['test']}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
