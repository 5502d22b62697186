"""Offline figures from nudgelab result files.

This package is purely a consumer of the csv/json files the nudgelab
harness exports; it never imports the solver.  ``io`` reads and
validates the files, ``figures`` turns them into matplotlib figures,
``cli`` is the batch front end.
"""

from .figures import (
    PlotRequest,
    convergence_figure,
    heatmap_figure,
    plot_convergence,
    plot_sweep_heatmap,
    render,
)
from .io import (
    SchemaError,
    SweepTable,
    Trajectory,
    read_summary_rates,
    read_sweep_csv,
    read_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "PlotRequest",
    "SchemaError",
    "SweepTable",
    "Trajectory",
    "convergence_figure",
    "heatmap_figure",
    "plot_convergence",
    "plot_sweep_heatmap",
    "read_summary_rates",
    "read_sweep_csv",
    "read_trajectory_csv",
    "render",
]
