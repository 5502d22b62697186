"""Shared fixtures: real result files produced through the nudgelab cli.

This package consumes the solver only through its exported files, so
the fixtures shell out to the installed ``nudgelab`` entry point rather
than importing it.  Each fixture runs once per session; the
synchronization run takes a couple of seconds, the sweep a few more.
"""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import pytest

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def _nudgelab(*args: str) -> None:
    exe = shutil.which("nudgelab")
    if exe is None:
        raise RuntimeError(
            "nudgelab entry point not on PATH; install the solver package first"
        )
    proc = subprocess.run([exe, *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


@pytest.fixture(scope="session")
def sync_run(tmp_path_factory) -> Path:
    """Nudged synchronization run: trajectory.csv/json + summary.json."""
    out = tmp_path_factory.mktemp("sync")
    _nudgelab(
        "run", "--config", str(CONFIGS / "allen_cahn_sync.yaml"), "--out", str(out)
    )
    return out


@pytest.fixture(scope="session")
def baseline_run(tmp_path_factory) -> Path:
    """The same experiment with the gain zeroed: the mu=0 overlay curve."""
    out = tmp_path_factory.mktemp("baseline")
    _nudgelab(
        "run",
        "--config", str(CONFIGS / "allen_cahn_sync.yaml"),
        "--set", "nudge.mu=0.0",
        "--out", str(out),
    )
    return out


@pytest.fixture(scope="session")
def sweep_run(tmp_path_factory) -> Path:
    """Gain sweep over mu in {10, 30, 100}: sweep.csv/json."""
    out = tmp_path_factory.mktemp("sweep")
    _nudgelab(
        "sweep", "--config", str(CONFIGS / "allen_cahn_sweep.yaml"), "--out", str(out)
    )
    return out
