"""Command-line front end for rendering nudgelab result files.

Exit codes: 0 on success, 2 when an input file is unreadable or does
not match the export schema (the offending columns are named on
stderr).
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

# batch tool, never a display; pick the backend before pyplot loads
matplotlib.use("Agg")

from .figures import PlotRequest, render  # noqa: E402
from .io import SchemaError  # noqa: E402

EXIT_OK = 0
EXIT_INPUT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nudgeplots",
        description="Render figures from nudgelab trajectory and sweep files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser(
        "convergence", help="semilog error curves from a trajectory csv"
    )
    conv.add_argument("input", help="trajectory.csv from a nudgelab run")
    conv.add_argument(
        "--out", required=True, help="image file; format follows the extension"
    )
    conv.add_argument(
        "--baseline", help="second trajectory csv drawn dashed (e.g. a mu=0 run)"
    )
    conv.add_argument(
        "--summary", help="summary.json whose fitted rates label the curves"
    )
    conv.add_argument(
        "--linear-y", action="store_true", help="linear instead of log error axis"
    )

    heat = sub.add_parser("heatmap", help="fitted-rate heatmap from a sweep csv")
    heat.add_argument("input", help="sweep.csv from a nudgelab sweep")
    heat.add_argument(
        "--out", required=True, help="image file; format follows the extension"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "convergence":
        req = PlotRequest(
            input_path=args.input,
            kind="convergence",
            output_image_path=args.out,
            log_y=not args.linear_y,
            baseline_path=args.baseline,
            summary_path=args.summary,
        )
    else:
        req = PlotRequest(
            input_path=args.input,
            kind="sweep_heatmap",
            output_image_path=args.out,
        )
    try:
        path = render(req)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
