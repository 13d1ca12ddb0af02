"""plots: render benchmark CSVs and detector slices to SVG files."""

from __future__ import annotations

import argparse
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description="figure rendering for fractalshor outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    rates = sub.add_parser("rates", help="error-rate curves vs diameter from a stats CSV")
    rates.add_argument("--csv", required=True)
    rates.add_argument("--out", required=True, help="output SVG path")

    slc = sub.add_parser("slice", help="detector-slice diagram from slice JSON")
    slc.add_argument("--json", required=True)
    slc.add_argument("--out", required=True, help="output SVG path")

    args = parser.parse_args(argv)
    from fsplots import render

    try:
        if args.command == "rates":
            render.plot_rates(args.csv, args.out)
        else:
            render.plot_slice(args.json, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
