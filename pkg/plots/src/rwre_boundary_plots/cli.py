"""Console entry points: plot-sweep, plot-series, plot-l2, plot-rates.

Usage pattern shared by all four:

    plot-sweep --in RUN/sweep.csv RUN/sweep.json --out figure.png
    plot-series --in RUN/series.csv --out figure.svg

Exit codes: 0 on success, 2 for schema or argument problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import render
from .schema import FigureSpec, SchemaError

EXIT_OK = 0
EXIT_SCHEMA = 2


def _run(kind: str, description: str, argv) -> int:
    parser = argparse.ArgumentParser(prog=f"plot-{kind}", description=description)
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, metavar="FILE",
        help="input artifact file(s); each needs a manifest.json beside it",
    )
    parser.add_argument("--out", required=True, metavar="IMAGE", help="output .png or .svg")
    parser.add_argument("--title", help="override the default figure title")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            kind=kind,
            inputs=tuple(Path(p) for p in args.inputs),
            out=Path(args.out),
            title=args.title,
        )
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    print(f"wrote {out}")
    return EXIT_OK


def main_sweep(argv=None) -> int:
    return _run("sweep", "Gap vs epsilon with error bars and transition bracket.", argv)


def main_series(argv=None) -> int:
    return _run("series", "Endpoint mass/overlap series with Cesaro averages.", argv)


def main_l2(argv=None) -> int:
    return _run("l2", "Second-moment growth curve of W_n.", argv)


def main_rates(argv=None) -> int:
    return _run("rates", "Annealed vs quenched rate profiles.", argv)


if __name__ == "__main__":
    sys.exit(main_sweep())
