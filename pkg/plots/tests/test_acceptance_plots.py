"""End-to-end acceptance for the figure package.

One verdict line in the same ``criterion N: PASS/FAIL ...`` format as
the solver's acceptance suite: both renderers succeed on real solver
outputs (the synchronization run and the gain sweep), the rendered data
series equal the source csv values bit for bit, and the solver package
carries no reference to this one — its test suite runs with no figure
package built.
"""

import csv
import importlib.util
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from nudgeplots import PlotRequest, convergence_figure, heatmap_figure, render  # noqa: E402


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")


def parse(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(header, data, name):
    i = header.index(name)
    return np.array([float(row[i]) for row in data])


def solver_sources() -> list[Path]:
    spec = importlib.util.find_spec("nudgelab")
    assert spec is not None and spec.origin is not None
    return sorted(Path(spec.origin).parent.rglob("*.py"))


def test_criterion_10_figures_consume_solver_outputs(sync_run, sweep_run, tmp_path):
    # -- convergence curves from the synchronization run ------------------
    conv_req = PlotRequest(
        input_path=sync_run / "trajectory.csv",
        kind="convergence",
        output_image_path=tmp_path / "convergence.png",
        summary_path=sync_run / "summary.json",
    )
    conv_path = render(conv_req)
    conv_ok = conv_path.is_file() and conv_path.stat().st_size > 0

    header, data = parse(sync_run / "trajectory.csv")
    fig = convergence_figure(conv_req)
    lines = {ln.get_label().split(" ")[0]: ln for ln in fig.axes[0].get_lines()}
    n_series = len(lines)
    series_ok = set(lines) == {"l2", "h1", "vstar"}
    for norm, line in lines.items():
        series_ok = (
            series_ok
            and np.array_equal(line.get_xdata(), column(header, data, "time"))
            and np.array_equal(line.get_ydata(), column(header, data, f"err_{norm}"))
        )
    plt.close(fig)

    # -- rate heatmap from the gain sweep ---------------------------------
    heat_req = PlotRequest(
        input_path=sweep_run / "sweep.csv",
        kind="sweep_heatmap",
        output_image_path=tmp_path / "sweep.png",
    )
    heat_path = render(heat_req)
    heat_ok = heat_path.is_file() and heat_path.stat().st_size > 0

    sh, sd = parse(sweep_run / "sweep.csv")
    fig = heatmap_figure(heat_req)
    cells = np.ma.asarray(fig.axes[0].collections[0].get_array()).reshape(-1)
    n_cells = cells.size
    cells_ok = np.array_equal(np.asarray(cells), column(sh, sd, "rate"))
    plt.close(fig)

    # -- the solver stands alone ------------------------------------------
    # no module of the installed solver package mentions this package, so
    # its suite runs with no figure package built; and this suite reached
    # the solver only through its cli (never an import)
    independent = all(
        "nudgeplots" not in src.read_text() for src in solver_sources()
    )
    clean_consumer = all(
        "import nudgelab" not in f.read_text()
        for f in sorted((Path(__file__).parents[1] / "src").rglob("*.py"))
    )

    ok = conv_ok and series_ok and heat_ok and cells_ok and independent and clean_consumer
    report(
        10,
        ok,
        f"convergence series == trajectory.csv ({n_series} norms x {len(data)} rows), "
        f"heatmap cells == sweep.csv ({n_cells} cells), "
        f"solver sources reference this package: {not independent}",
    )
    assert conv_ok and heat_ok
    assert series_ok and cells_ok
    assert independent and clean_consumer
