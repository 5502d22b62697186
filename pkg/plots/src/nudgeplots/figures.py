"""Figure builders for nudgelab result files.

Two renderers: synchronization error curves from a trajectory csv, and
a fitted-rate heatmap over the (mu, delta) grid of a sweep csv.  Every
plotted number comes straight from the input files; the only computed
curve is the analytic gain-feasibility boundary ``1 + mu^2 delta^2 - mu
= 0`` overlaid on the heatmap.

``*_figure`` functions return a live matplotlib Figure (this is what
the data-level tests inspect); the ``plot_*`` operations save it to the
requested image path, with the format chosen by the file extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
import matplotlib.pyplot as plt
import numpy as np

from .io import read_summary_rates, read_sweep_csv, read_trajectory_csv

__all__ = [
    "KINDS",
    "PlotRequest",
    "convergence_figure",
    "heatmap_figure",
    "plot_convergence",
    "plot_sweep_heatmap",
    "render",
]

KINDS = ("convergence", "sweep_heatmap")


@dataclass(frozen=True)
class PlotRequest:
    """One figure to render.

    ``kind`` selects the renderer; ``log_y`` applies to convergence
    curves only.  ``baseline_path`` overlays a second trajectory (a
    mu=0 run, typically) with dashed lines, and ``summary_path`` pulls
    the fitted decay rates into the legend labels.
    """

    input_path: str | Path
    kind: str
    output_image_path: str | Path
    log_y: bool = True
    baseline_path: str | Path | None = None
    summary_path: str | Path | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(
                f"unknown plot kind {self.kind!r}; expected one of {KINDS}"
            )


def convergence_figure(req: PlotRequest) -> matplotlib.figure.Figure:
    """Semilog error-vs-time curves, one line per recorded norm."""
    traj = read_trajectory_csv(req.input_path)
    rates = read_summary_rates(req.summary_path) if req.summary_path else {}
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for norm, series in traj.errors.items():
        label = norm
        if norm in rates:
            label = f"{norm} (rate {rates[norm]:.4g})"
        ax.plot(traj.times, series, label=label)
    if req.baseline_path is not None:
        base = read_trajectory_csv(req.baseline_path)
        for norm, series in base.errors.items():
            ax.plot(base.times, series, linestyle="--", label=f"{norm} (baseline)")
    if req.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("error norm")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def _edges(centers: np.ndarray) -> np.ndarray:
    """Cell edges bracketing sorted cell centers (midpoint rule)."""
    c = np.asarray(centers, dtype=float)
    if c.size == 1:
        # a single row or column still needs a visible cell width
        half = 0.5 * abs(c[0]) if c[0] != 0.0 else 0.5
        return np.array([c[0] - half, c[0] + half])
    mid = 0.5 * (c[1:] + c[:-1])
    return np.concatenate(([2.0 * c[0] - mid[0]], mid, [2.0 * c[-1] - mid[-1]]))


def heatmap_figure(req: PlotRequest) -> matplotlib.figure.Figure:
    """Fitted-rate heatmap over the sweep grid with the feasibility boundary.

    Cells whose fit failed (nan rate) are drawn in gray.  The white
    dashed curve is delta = sqrt(mu - 1)/mu, the zero set of
    ``1 + mu^2 delta^2 - mu``; gains below it satisfy the sufficient
    condition for synchronization.
    """
    table = read_sweep_csv(req.input_path)
    mus = np.unique(table.mu)
    deltas = np.unique(table.delta)
    grid = np.full((deltas.size, mus.size), np.nan)
    for mu, delta, rate in zip(table.mu, table.delta, table.rate):
        grid[np.searchsorted(deltas, delta), np.searchsorted(mus, mu)] = rate

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    cmap = matplotlib.colormaps["viridis"].copy()
    cmap.set_bad("lightgray")
    mesh = ax.pcolormesh(
        _edges(mus), _edges(deltas), np.ma.masked_invalid(grid), cmap=cmap
    )
    fig.colorbar(mesh, ax=ax, label="fitted rate")
    if mus.max() > 1.0:
        mu_line = np.linspace(max(1.0, mus.min()), float(mus.max()), 256)
        ax.plot(
            mu_line,
            np.sqrt(mu_line - 1.0) / mu_line,
            "w--",
            label="feasibility boundary",
        )
        ax.legend(loc="upper right")
    ax.set_xlabel("mu")
    ax.set_ylabel("delta")
    fig.tight_layout()
    return fig


def _save(fig: matplotlib.figure.Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_convergence(req: PlotRequest) -> Path:
    """Render convergence curves and save them to the requested image."""
    if req.kind != "convergence":
        raise ValueError(f"plot_convergence got a {req.kind!r} request")
    return _save(convergence_figure(req), req.output_image_path)


def plot_sweep_heatmap(req: PlotRequest) -> Path:
    """Render the sweep heatmap and save it to the requested image."""
    if req.kind != "sweep_heatmap":
        raise ValueError(f"plot_sweep_heatmap got a {req.kind!r} request")
    return _save(heatmap_figure(req), req.output_image_path)


def render(req: PlotRequest) -> Path:
    """Dispatch a request to the renderer named by its kind."""
    if req.kind == "convergence":
        return plot_convergence(req)
    return plot_sweep_heatmap(req)
