"""Twin-experiment orchestration, decay-rate fitting, sweeps and export.

A twin experiment integrates the hidden reference trajectory and the
nudged estimator side by side from independent initial data and records
error norms, reference norms and model diagnostics.  Decay rates come
from least-squares fits of ``log(error)`` against time over a burn-in
window, with a floor to drop rounding-dominated samples.

Exports are deterministic: the same configuration produces byte-identical
CSV and JSON files, which the tests rely on.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import BlowUpError, ConfigError, FitError
from .models import ModelSpec, diagnostics, random_smooth_state
from .nudging import NudgeConfig, feasible_mu_interval
from .observation import make_observer
from .spectral import NORM_EXPONENTS, Field, Grid, to_physical
from .timestepping import NudgedStepper, ReferenceStepper, SchemeConfig, stability_limit

__all__ = [
    "TwinConfig",
    "TrajectoryRecord",
    "DecayFit",
    "SweepCell",
    "SweepTable",
    "run_twin_experiment",
    "fit_decay_rate",
    "sweep",
    "export",
    "load_json",
]

DEFAULT_FLOOR = 1e-13
MIN_FIT_POINTS = 10


@dataclass(frozen=True)
class TwinConfig:
    """Everything needed to reproduce one twin experiment."""

    model: ModelSpec
    grid: Grid
    scheme: SchemeConfig
    nudge: NudgeConfig | None = None
    u0_seed: int = 0
    v0: str = "zero"
    record_every: int = 1
    norms: tuple[str, ...] = ("l2", "h1", "vstar")
    amplitude: float = 0.1

    def __post_init__(self):
        if self.v0 not in ("zero", "seeded"):
            raise ConfigError(f"v0 must be 'zero' or 'seeded', got {self.v0!r}")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not self.norms:
            raise ConfigError("at least one error norm must be recorded")
        for name in self.norms:
            if name not in NORM_EXPONENTS:
                raise ConfigError(
                    f"unknown norm {name!r}, expected one of {sorted(NORM_EXPONENTS)}"
                )
        if not self.amplitude > 0:
            raise ConfigError("initial amplitude must be positive")


@dataclass
class TrajectoryRecord:
    """Time series produced by one twin experiment."""

    times: np.ndarray
    err_norms: dict[str, np.ndarray]
    ref_norms: dict[str, np.ndarray]
    diagnostics: dict[str, np.ndarray]
    summary: dict[str, float]
    meta: dict
    final_ref: Field | None = None
    final_nudged: Field | None = None


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential decay fit of one error series."""

    rate: float
    intercept: float
    r_squared: float
    n_points: int
    window: tuple[float, float]
    floor: float


@dataclass(frozen=True)
class SweepCell:
    mu: float
    delta: float
    rate: float
    r_squared: float
    feasible: bool
    blewup: bool
    error: str = ""


@dataclass
class SweepTable:
    cells: list[SweepCell]
    meta: dict = field(default_factory=dict)


class _NormAccumulator:
    """Precomputed Sobolev weights for fast per-record norms."""

    def __init__(self, grid: Grid, norms: tuple[str, ...]):
        self.dv = grid.cell_volume
        self.weights = {
            name: (1.0 + grid.laplacian_symbol) ** NORM_EXPONENTS[name] for name in norms
        }
        self.h1_weight = 1.0 + grid.laplacian_symbol

    def norm(self, name: str, modal: np.ndarray) -> float:
        w = self.weights[name]
        return float(np.sqrt(self.dv * np.sum(w * np.abs(modal) ** 2)))

    def h1_sq(self, modal: np.ndarray) -> float:
        return float(self.dv * np.sum(self.h1_weight * np.abs(modal) ** 2))


def _config_echo(cfg: TwinConfig) -> dict:
    nudge = None
    if cfg.nudge is not None:
        nudge = {
            "mu": cfg.nudge.mu,
            "kind": cfg.nudge.observer.kind,
            "delta": cfg.nudge.observer.delta,
        }
    return {
        "model": {
            "name": cfg.model.name,
            "bc": cfg.model.bc,
            "params": dict(sorted(cfg.model.params.items())),
            "linear_only": cfg.model.linear_only,
            "flip_sign": cfg.model.flip_sign,
        },
        "grid": {"dim": cfg.grid.dim, "n": cfg.grid.n, "bc": cfg.grid.bc, "extent": cfg.grid.extent},
        "scheme": {"kind": cfg.scheme.kind, "dt": cfg.scheme.dt, "t_end": cfg.scheme.t_end},
        "nudge": nudge,
        "u0_seed": cfg.u0_seed,
        "v0": cfg.v0,
        "record_every": cfg.record_every,
        "norms": list(cfg.norms),
        "amplitude": cfg.amplitude,
        "version": __version__,
    }


def run_twin_experiment(cfg: TwinConfig) -> TrajectoryRecord:
    """Integrate reference and nudged trajectories and record their drift.

    The reference advances first within each step; the nudged system sees
    the reference at both ends of the step.  Raises
    :class:`~nudgelab.errors.BlowUpError` (with the partial record
    attached) if either trajectory leaves the finite range, and
    :class:`~nudgelab.errors.ConfigError` if ``dt`` exceeds the stability
    limit of the configuration.
    """
    spec, grid, scheme = cfg.model, cfg.grid, cfg.scheme
    u0 = random_smooth_state(spec, grid, cfg.u0_seed, amplitude=cfg.amplitude)
    limit = stability_limit(spec, grid, cfg.nudge, scheme, state=u0)
    if scheme.dt > limit * (1.0 + 1e-12):
        raise ConfigError(
            f"dt={scheme.dt} exceeds the stability limit {limit:.3e} for this configuration"
        )
    if cfg.v0 == "zero":
        v = np.zeros_like(u0.data)
    else:
        # "seeded" starts the estimator on the truth itself; useful for
        # checking that a synchronized pair never separates
        v = u0.data.copy()
    u = u0.data.copy()

    nudge = cfg.nudge if cfg.nudge is not None else NudgeConfig(
        0.0, make_observer("low_pass", 0.5, grid)
    )
    ref_stepper = ReferenceStepper(spec, grid, scheme)
    nudged_stepper = NudgedStepper(spec, grid, scheme, nudge)
    acc = _NormAccumulator(grid, cfg.norms)

    is_ch = spec.name.startswith("cahn_hilliard")
    is_nse = spec.name == "nse_2d_vorticity"
    nu = spec.params.get("nu", 0.0)

    times: list[float] = []
    errs: dict[str, list[float]] = {k: [] for k in cfg.norms}
    refs: dict[str, list[float]] = {k: [] for k in cfg.norms}
    diag_series: dict[str, list[float]] = {}
    summary: dict[str, float] = {}

    def record(step: int) -> None:
        times.append(step * scheme.dt)
        diff = u - v
        for name in cfg.norms:
            errs[name].append(acc.norm(name, diff))
            refs[name].append(acc.norm(name, u))
        d = diagnostics(spec, Field(grid, u, "modal", spec.components))
        for key, val in d.items():
            if key in ("l2", "h1"):
                continue
            diag_series.setdefault(key, []).append(val)
        diag_series.setdefault("h1sq_integral", []).append(h1sq_integral)
        if is_nse:
            kin = d["kinetic"]
            resid = abs(kin + dissipation[0] - kin0[0]) / kin0[0] if kin0[0] > 0 else 0.0
            diag_series.setdefault("energy_residual", []).append(resid)

    def partial_record() -> TrajectoryRecord:
        return _finalize(times, errs, refs, diag_series, summary, cfg, None, None)

    # per-step monitor state
    h1sq_integral = 0.0
    h1sq_prev = acc.h1_sq(u)
    dissipation = [0.0]
    kin0 = [0.0]
    if is_nse:
        kin0[0] = diagnostics(spec, u0)["kinetic"]
    if is_ch:
        d0 = diagnostics(spec, u0)
        mass0 = d0["mass"]
        lyap_prev = d0["lyapunov"]
        summary["mass_drift_max"] = 0.0
        summary["lyapunov_max_increase"] = 0.0

    record(0)
    n_steps = scheme.n_steps
    # overflow on the way to a detected blow-up is expected, not a bug;
    # the finite check below turns it into a typed error
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            u_prev = u
            u = ref_stepper.step(u_prev)
            v = nudged_stepper.step(v, u_prev, u)
            t_now = step * scheme.dt
            u_ok = bool(np.all(np.isfinite(u)))
            if not (u_ok and np.all(np.isfinite(v))):
                which = "nudged" if u_ok else "reference"
                raise BlowUpError(
                    f"{which} trajectory left the finite range at t={t_now:.6g}",
                    time=t_now,
                    record=partial_record(),
                )
            h1sq_cur = acc.h1_sq(u)
            h1sq_integral += 0.5 * scheme.dt * (h1sq_prev + h1sq_cur)
            h1sq_prev = h1sq_cur
            if is_nse:
                # 2-d identity ||grad velocity|| = ||vorticity||; the midpoint
                # value makes the linear part of the CN energy balance exact
                mid = 0.5 * (u_prev + u)
                dissipation[0] += scheme.dt * nu * acc.dv * float(np.sum(np.abs(mid) ** 2))
            if is_ch:
                d_now = diagnostics(spec, Field(grid, u, "modal"))
                summary["mass_drift_max"] = max(
                    summary["mass_drift_max"], abs(d_now["mass"] - mass0)
                )
                summary["lyapunov_max_increase"] = max(
                    summary["lyapunov_max_increase"], d_now["lyapunov"] - lyap_prev
                )
                lyap_prev = d_now["lyapunov"]
            if step % cfg.record_every == 0 or step == n_steps:
                record(step)

    summary["h1sq_integral"] = h1sq_integral
    if is_nse:
        summary["dissipation_integral"] = dissipation[0]
        resid_series = diag_series.get("energy_residual", [])
        summary["energy_residual_final"] = resid_series[-1] if resid_series else 0.0
        summary["energy_residual_max"] = max(resid_series) if resid_series else 0.0
    final_ref = Field(grid, u.copy(), "modal", spec.components)
    final_nudged = Field(grid, v.copy(), "modal", spec.components)
    return _finalize(times, errs, refs, diag_series, summary, cfg, final_ref, final_nudged)


def _finalize(times, errs, refs, diag_series, summary, cfg, final_ref, final_nudged):
    return TrajectoryRecord(
        times=np.asarray(times),
        err_norms={k: np.asarray(vs) for k, vs in errs.items()},
        ref_norms={k: np.asarray(vs) for k, vs in refs.items()},
        diagnostics={k: np.asarray(vs) for k, vs in diag_series.items()},
        summary=dict(summary),
        meta=_config_echo(cfg),
        final_ref=final_ref,
        final_nudged=final_nudged,
    )


def fit_decay_rate(
    record: TrajectoryRecord,
    norm: str = "l2",
    t_burn: float | None = None,
    floor: float = DEFAULT_FLOOR,
) -> DecayFit:
    """Fit ``log(err) ~ rate * t + intercept`` after burn-in, above a floor.

    ``t_burn`` defaults to 10 percent of the recorded span.  Samples at or
    below ``floor`` are rounding noise and are excluded.  Raises
    :class:`~nudgelab.errors.FitError` when fewer than ``MIN_FIT_POINTS``
    samples survive the selection.
    """
    if norm not in record.err_norms:
        raise FitError(f"norm {norm!r} was not recorded")
    t = record.times
    err = record.err_norms[norm]
    if t_burn is None:
        t_burn = 0.1 * float(t[-1])
    keep = (t >= t_burn) & (err > floor)
    n = int(np.sum(keep))
    if n < MIN_FIT_POINTS:
        raise FitError(
            f"only {n} usable samples above floor {floor:g} after t={t_burn:g}, "
            f"need at least {MIN_FIT_POINTS}; extend t_end or adjust the floor"
        )
    ts, ys = t[keep], np.log(err[keep])
    slope, intercept = np.polyfit(ts, ys, 1)
    pred = slope * ts + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r_sq = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=float(slope),
        intercept=float(intercept),
        r_squared=float(r_sq),
        n_points=n,
        window=(float(t_burn), float(t[-1])),
        floor=floor,
    )


def _run_cell(cfg: TwinConfig, mu: float, delta: float, kind: str) -> SweepCell:
    feasible = False
    try:
        feasible = feasible_mu_interval(delta).contains(mu)
        observer = make_observer(kind, delta, cfg.grid)
        cell_cfg = replace(cfg, nudge=NudgeConfig(mu, observer))
        rec = run_twin_experiment(cell_cfg)
        fit = fit_decay_rate(rec)
    except BlowUpError as exc:
        return SweepCell(mu, delta, float("nan"), float("nan"), feasible, True, str(exc))
    except (ConfigError, FitError) as exc:
        return SweepCell(mu, delta, float("nan"), float("nan"), feasible, False, str(exc))
    return SweepCell(mu, delta, fit.rate, fit.r_squared, feasible, False)


def sweep(
    cfg: TwinConfig,
    mus: list[float],
    deltas: list[float],
    parallelism: int = 1,
) -> SweepTable:
    """Run the twin experiment over a gain/resolution product grid.

    Rows come back sorted by ``(delta, mu)``.  Cell failures are recorded
    in-row (``nan`` rate plus an error message) rather than aborting the
    table.  ``parallelism`` bounds the number of concurrently running
    cells.
    """
    if not mus or not deltas:
        raise ConfigError("sweep needs at least one mu and one delta")
    kind = cfg.nudge.observer.kind if cfg.nudge is not None else "low_pass"
    pairs = [(mu, delta) for delta in sorted(deltas) for mu in sorted(mus)]
    if parallelism <= 1:
        cells = [_run_cell(cfg, mu, delta, kind) for mu, delta in pairs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            cells = list(pool.map(lambda p: _run_cell(cfg, p[0], p[1], kind), pairs))
    meta = _config_echo(cfg)
    meta["sweep"] = {"mu": sorted(mus), "delta": sorted(deltas), "kind": kind}
    return SweepTable(cells=cells, meta=meta)


# -- persistence -------------------------------------------------------------
#
# CSV carries the numeric series only; JSON adds a metadata header (config
# echo, package version, seed) under a named schema.  Floats are written
# with repr, which round-trips exactly and is stable across runs.


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _trajectory_columns(record: TrajectoryRecord) -> list[tuple[str, np.ndarray]]:
    cols = [("time", record.times)]
    for name in record.err_norms:
        cols.append((f"err_{name}", record.err_norms[name]))
    for name in record.ref_norms:
        cols.append((f"ref_{name}", record.ref_norms[name]))
    for name in sorted(record.diagnostics):
        cols.append((name, record.diagnostics[name]))
    return cols


def _trajectory_rows(record: TrajectoryRecord) -> list[dict]:
    cols = _trajectory_columns(record)
    return [{name: float(series[i]) for name, series in cols} for i in range(len(record.times))]


SWEEP_COLUMNS = ("mu", "delta", "rate", "r2", "feasible", "blewup")


def _sweep_rows(table: SweepTable) -> list[dict]:
    rows = []
    for c in table.cells:
        rows.append(
            {
                "mu": c.mu,
                "delta": c.delta,
                "rate": c.rate,
                "r2": c.r_squared,
                "feasible": bool(c.feasible),
                "blewup": bool(c.blewup),
                "error": c.error,
            }
        )
    return rows


def export(obj: TrajectoryRecord | SweepTable, path: str, format: str) -> None:
    """Write a trajectory record or sweep table to ``path``.

    ``format`` is ``"csv"`` (plain series with a header row) or ``"json"``
    (schema-tagged document with a metadata header).  Output bytes are a
    pure function of the object contents.
    """
    if format not in ("csv", "json"):
        raise ConfigError(f"unknown export format {format!r}")
    if isinstance(obj, TrajectoryRecord):
        schema = "nudgelab.trajectory.v1"
        rows = _trajectory_rows(obj)
        columns = [name for name, _ in _trajectory_columns(obj)]
        meta = obj.meta | {"summary": dict(sorted(obj.summary.items()))}
    elif isinstance(obj, SweepTable):
        schema = "nudgelab.sweep.v1"
        rows = _sweep_rows(obj)
        columns = list(SWEEP_COLUMNS)
        meta = obj.meta
    else:
        raise ConfigError(f"cannot export object of type {type(obj).__name__}")
    if format == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(row[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    else:
        doc = {"schema": schema, "meta": meta, "rows": rows}
        text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def load_json(path: str) -> dict:
    """Read back a JSON export; inverse of :func:`export` for that format."""
    with open(path) as fh:
        doc = json.load(fh)
    if "schema" not in doc or "rows" not in doc:
        raise ConfigError(f"{path} is not a recognized export document")
    return doc
