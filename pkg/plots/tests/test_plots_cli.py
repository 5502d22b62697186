"""Exit codes and stderr wording of the command-line front end."""

import subprocess

import pytest

from nudgeplots.cli import main


def test_convergence_subcommand(sync_run, tmp_path, capsys):
    out = tmp_path / "conv.png"
    rc = main(
        [
            "convergence", str(sync_run / "trajectory.csv"),
            "--out", str(out),
            "--summary", str(sync_run / "summary.json"),
        ]
    )
    assert rc == 0
    assert out.stat().st_size > 0
    assert str(out) in capsys.readouterr().out


def test_convergence_with_baseline_and_linear_axis(
    sync_run, baseline_run, tmp_path
):
    rc = main(
        [
            "convergence", str(sync_run / "trajectory.csv"),
            "--out", str(tmp_path / "conv.svg"),
            "--baseline", str(baseline_run / "trajectory.csv"),
            "--linear-y",
        ]
    )
    assert rc == 0
    assert (tmp_path / "conv.svg").stat().st_size > 0


def test_heatmap_subcommand(sweep_run, tmp_path):
    rc = main(
        ["heatmap", str(sweep_run / "sweep.csv"), "--out", str(tmp_path / "h.pdf")]
    )
    assert rc == 0
    assert (tmp_path / "h.pdf").stat().st_size > 0


def test_missing_columns_named_on_stderr(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,value\n0.0,1.0\n")
    rc = main(["convergence", str(bad), "--out", str(tmp_path / "x.png")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "missing column" in err and "time" in err
    assert not (tmp_path / "x.png").exists()


def test_header_only_input_fails_cleanly(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("mu,delta,rate,r2,feasible,blewup\n")
    rc = main(["heatmap", str(bad), "--out", str(tmp_path / "x.png")])
    assert rc == 2
    assert "no data rows" in capsys.readouterr().err


def test_nonexistent_input_fails_cleanly(tmp_path, capsys):
    rc = main(
        ["convergence", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")]
    )
    assert rc == 2
    assert "cannot read" in capsys.readouterr().err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0


def test_missing_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_installed_entry_point():
    proc = subprocess.run(
        ["nudgeplots", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "convergence" in proc.stdout and "heatmap" in proc.stdout
