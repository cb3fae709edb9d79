#!/usr/bin/env python3
"""Render PNG replicas of the toolkit's figures from its CSV outputs.

Usage:
    python plots/render_all.py --csv-dir <dir> --out-dir <dir>

Consumes exactly the CSV schemas written by `mmrkit figures` and never
recomputes any mathematics. Exits nonzero with a diagnostic naming the
offending file when an input is missing or has no data rows.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from figures import RenderError, render_all  # noqa: E402


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv-dir", required=True, help="directory with the CSV tables")
    parser.add_argument("--out-dir", required=True, help="directory for the PNG files")
    args = parser.parse_args(argv)
    try:
        written = render_all(args.csv_dir, args.out_dir)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
