"""Readers for the nudgelab export files.

These files are the whole contract between the solver package and this
one, so every reader is defensive: a malformed or foreign file produces
a :class:`SchemaError` naming exactly what is missing, never a
downstream matplotlib traceback.

Expected inputs:

* ``trajectory.csv`` — ``time`` column plus ``err_<norm>`` error columns
  (``ref_*`` and diagnostic columns may follow; they are ignored here).
* ``sweep.csv`` — ``mu, delta, rate, r2, feasible, blewup`` with
  lowercase ``true``/``false`` booleans and ``nan`` rates for failed
  cells.
* ``summary.json`` — declares ``"schema": "nudgelab.summary.v1"`` and
  carries one decay fit per norm under ``fits``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SchemaError",
    "SweepTable",
    "Trajectory",
    "read_summary_rates",
    "read_sweep_csv",
    "read_trajectory_csv",
]

SWEEP_COLUMNS = ("mu", "delta", "rate", "r2", "feasible", "blewup")
SUMMARY_SCHEMA = "nudgelab.summary.v1"


class SchemaError(ValueError):
    """An input file does not match the expected export schema."""


@dataclass(frozen=True)
class Trajectory:
    """Error time series of one twin experiment, keyed by norm name."""

    path: Path
    times: np.ndarray
    errors: dict[str, np.ndarray]


@dataclass(frozen=True)
class SweepTable:
    """One fitted decay rate per (mu, delta) cell of a gain sweep."""

    path: Path
    mu: np.ndarray
    delta: np.ndarray
    rate: np.ndarray
    feasible: np.ndarray
    blewup: np.ndarray


def _read_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path} is empty")
    header, data = rows[0], rows[1:]
    if not data:
        raise SchemaError(f"{path} has a header but no data rows")
    return header, data


def _floats(data: list[list[str]], idx: int, path: Path, name: str) -> np.ndarray:
    try:
        return np.array([float(row[idx]) for row in data])
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: column {name!r} is not numeric") from exc


def _bools(data: list[list[str]], idx: int, path: Path, name: str) -> np.ndarray:
    out = []
    for row in data:
        val = row[idx] if idx < len(row) else ""
        if val not in ("true", "false"):
            raise SchemaError(
                f"{path}: column {name!r} has non-boolean value {val!r}"
            )
        out.append(val == "true")
    return np.array(out, dtype=bool)


def read_trajectory_csv(path: str | Path) -> Trajectory:
    """Read ``time`` and every ``err_*`` column of a trajectory csv.

    The returned ``errors`` dict preserves the file's column order.
    """
    path = Path(path)
    header, data = _read_rows(path)
    missing = [] if "time" in header else ["time"]
    err_cols = [c for c in header if c.startswith("err_")]
    if not err_cols:
        missing.append("err_<norm>")
    if missing:
        raise SchemaError(
            f"trajectory csv {path} missing column(s): {', '.join(missing)}"
        )
    times = _floats(data, header.index("time"), path, "time")
    errors = {
        col[len("err_"):]: _floats(data, header.index(col), path, col)
        for col in err_cols
    }
    return Trajectory(path=path, times=times, errors=errors)


def read_sweep_csv(path: str | Path) -> SweepTable:
    """Read the per-cell rate table of a (mu, delta) sweep csv."""
    path = Path(path)
    header, data = _read_rows(path)
    missing = [c for c in SWEEP_COLUMNS if c not in header]
    if missing:
        raise SchemaError(
            f"sweep csv {path} missing column(s): {', '.join(missing)}"
        )
    idx = {col: header.index(col) for col in SWEEP_COLUMNS}
    return SweepTable(
        path=path,
        mu=_floats(data, idx["mu"], path, "mu"),
        delta=_floats(data, idx["delta"], path, "delta"),
        rate=_floats(data, idx["rate"], path, "rate"),
        feasible=_bools(data, idx["feasible"], path, "feasible"),
        blewup=_bools(data, idx["blewup"], path, "blewup"),
    )


def read_summary_rates(path: str | Path) -> dict[str, float]:
    """Fitted decay rate per norm from a run's ``summary.json``."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid json: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SUMMARY_SCHEMA:
        raise SchemaError(f"{path} does not declare schema {SUMMARY_SCHEMA!r}")
    fits = doc.get("fits")
    if not isinstance(fits, dict) or not fits:
        raise SchemaError(f"{path} has no 'fits' section")
    try:
        return {norm: float(fit["rate"]) for norm, fit in fits.items()}
    except (TypeError, KeyError) as exc:
        raise SchemaError(f"{path}: malformed fit entry ({exc})") from exc
