"""Batch figure renderer over a directory of simulator artifacts.

Reads whatever the input directory offers (cells.csv, scenario_*.json,
grover_reports.json) and writes one file per figure. Exit codes: 0 on
success, 2 for bad inputs or schema violations, 1 for I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .artifacts import ArtifactError
from .figures import PlotSpec, render_all


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skyshield-plots",
        description="Render figures from sweep and scenario artifacts")
    parser.add_argument("--in-dir", required=True,
                        help="directory with cells.csv / scenario_*.json")
    parser.add_argument("--out-dir", required=True,
                        help="directory to write figures into")
    parser.add_argument("--format", choices=["png", "svg"], default="png")
    parser.add_argument("--dpi", type=int, default=120)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(Path(args.in_dir), Path(args.out_dir),
                        fmt=args.format, dpi=args.dpi)
        written = render_all(spec)
    except (ArtifactError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
