"""Command line: miht-plot <figure_kind> --in <csv> --out <img> [--force]."""

import argparse
import sys

from .render import FIGURE_KINDS, FigureInputError, FigureJob, render


def build_parser():
    ap = argparse.ArgumentParser(prog="miht-plot",
                                 description="render miht experiment CSVs as figures")
    ap.add_argument("figure_kind", choices=FIGURE_KINDS)
    ap.add_argument("--in", dest="csv_path", required=True, help="experiment CSV")
    ap.add_argument("--out", dest="output_image_path", required=True,
                    help="output image (.png or .svg)")
    ap.add_argument("--force", action="store_true", help="overwrite an existing output file")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = FigureJob(csv_path=args.csv_path, figure_kind=args.figure_kind,
                    output_image_path=args.output_image_path, force=args.force)
    try:
        render(job)
    except (FigureInputError, FileExistsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
