"""``plots`` command: render figure analogs from solver output directories."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FigureSpec, Style, render
from .schemas import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render bistability, phase-boundary and fluctuation "
                    "figures from cavity-ising CSV/JSON artifacts.",
    )
    parser.add_argument("--figure", required=True, choices=("fig2", "fig3", "fig4"))
    parser.add_argument("--in", dest="input_dir", required=True, type=Path,
                        help="directory holding the solver's output files")
    parser.add_argument("--out", required=True, type=Path, help="output image path")
    parser.add_argument("--stable-linestyle", default="solid")
    parser.add_argument("--unstable-linestyle", default="dashed")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)

    spec = FigureSpec(
        figure=args.figure,
        input_dir=args.input_dir,
        output=args.out,
        style=Style(
            stable_linestyle=args.stable_linestyle,
            unstable_linestyle=args.unstable_linestyle,
            dpi=args.dpi,
        ),
    )
    try:
        render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
