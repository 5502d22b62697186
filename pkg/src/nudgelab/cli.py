"""Command-line front end: twin runs, sweeps and assumption checks.

Exit codes are part of the contract: 0 success, 2 configuration error,
3 blow-up (the partial trajectory is still written), 4 fit or check
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import (
    apply_overrides,
    assumption_settings,
    build_sweep_args,
    build_twin_config,
    load_config,
    observe_settings,
)
from .errors import BlowUpError, ConfigError, FitError
from .harness import export, fit_decay_rate, run_twin_experiment, sweep
from .models import (
    coercivity_constant,
    growth_condition_margin,
    lipschitz_probe,
    make_model,
    random_smooth_state,
)
from .nudging import feasible_mu_interval
from .observation import (
    SCALING_TOLERANCES,
    estimate_interp_constant,
    make_observer,
    scaling_study,
)
from .spectral import Grid

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_CHECK = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nudgelab",
        description="Twin experiments for nudging-based data assimilation "
        "of dissipative PDEs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool) -> None:
        p.add_argument("--config", required=config_required, default=None,
                       help="YAML configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value by dotted path (repeatable)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the experiment seed")

    p_run = sub.add_parser("run", help="integrate one twin experiment and fit decay rates")
    common(p_run, True)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="scan the (mu, delta) product grid")
    common(p_sweep, True)
    p_sweep.add_argument("--out", default="out", help="output directory")
    p_sweep.add_argument("--parallelism", type=int, default=None,
                         help="concurrent sweep cells (overrides sweep.parallelism)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_obs = sub.add_parser("observe-check",
                           help="measure observation constants and delta scaling")
    common(p_obs, False)
    p_obs.set_defaults(func=cmd_observe_check)

    p_asm = sub.add_parser("assumptions-check",
                           help="verify coercivity and growth exponents for each model")
    common(p_asm, False)
    p_asm.set_defaults(func=cmd_assumptions_check)
    return parser


def _load(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    cfg = apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg = apply_overrides(
            cfg, [f"run.u0_seed={args.seed}", f"observe.seed={args.seed}"]
        )
    return cfg


def _write_json(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def _feasibility(twin) -> dict | None:
    if twin.nudge is None:
        return None
    interval = feasible_mu_interval(twin.nudge.delta)
    return {
        "mu": twin.nudge.mu,
        "kind": twin.nudge.observer.kind,
        "delta": twin.nudge.delta,
        "feasible": interval.contains(twin.nudge.mu),
        "interval": [interval.lower, interval.upper],
    }


def cmd_run(args) -> int:
    twin = build_twin_config(_load(args))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "trajectory.csv")
    json_path = os.path.join(args.out, "trajectory.json")
    try:
        record = run_twin_experiment(twin)
    except BlowUpError as exc:
        if exc.record is not None and len(exc.record.times) > 0:
            export(exc.record, csv_path, "csv")
            export(exc.record, json_path, "json")
        print(f"blow-up at t={exc.time:.6g}; partial trajectory written to {args.out}",
              file=sys.stderr)
        return EXIT_BLOWUP
    export(record, csv_path, "csv")
    export(record, json_path, "json")

    fits = {norm: fit_decay_rate(record, norm) for norm in twin.norms}
    verdict = _feasibility(twin)
    summary = {
        "schema": "nudgelab.summary.v1",
        "fits": {
            norm: {
                "rate": fit.rate,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "n_points": fit.n_points,
                "window": list(fit.window),
                "floor": fit.floor,
            }
            for norm, fit in fits.items()
        },
        "nudge": verdict,
        "monitors": dict(sorted(record.summary.items())),
        "meta": record.meta,
    }
    _write_json(summary, os.path.join(args.out, "summary.json"))

    for norm, fit in fits.items():
        print(f"{norm}: rate={fit.rate:.4f} r2={fit.r_squared:.6f} n={fit.n_points}")
    if verdict is not None:
        state = "feasible" if verdict["feasible"] else "outside the feasible interval"
        print(f"mu={verdict['mu']:g} delta={verdict['delta']:g}: {state} "
              f"({verdict['interval'][0]:.4g}, {verdict['interval'][1]:.4g})")
    print(f"wrote {csv_path}, {json_path}, {os.path.join(args.out, 'summary.json')}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    twin = build_twin_config(cfg)
    mus, deltas, parallelism = build_sweep_args(cfg)
    if args.parallelism is not None:
        parallelism = args.parallelism
    table = sweep(twin, mus, deltas, parallelism=parallelism)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sweep.csv")
    export(table, csv_path, "csv")
    export(table, os.path.join(args.out, "sweep.json"), "json")
    for cell in table.cells:
        note = f"  [{cell.error}]" if cell.error else ""
        print(f"mu={cell.mu:g} delta={cell.delta:g} rate={cell.rate:.4f} "
              f"r2={cell.r_squared:.4f} feasible={str(cell.feasible).lower()} "
              f"blewup={str(cell.blewup).lower()}{note}")
    print(f"wrote {csv_path} ({len(table.cells)} cells)")
    return EXIT_OK


def cmd_observe_check(args) -> int:
    s = observe_settings(_load(args))
    grid = s["grid"]
    print(f"grid: dim={grid.dim} n={grid.n} bc={grid.bc}  "
          f"samples={s['count']} seed={s['seed']}")
    print(f"{'kind':<16}{'delta':>10}{'mean_err':>12}{'C_hat':>10}")
    failed = False
    for kind in s["kinds"]:
        study = scaling_study(kind, grid, s["deltas"], count=s["count"], seed=s["seed"])
        for delta, mean_err in zip(study.deltas, study.mean_errors):
            c_hat = estimate_interp_constant(
                make_observer(kind, delta, grid), samples=s["count"], seed=s["seed"]
            )
            print(f"{kind:<16}{delta:>10.5f}{mean_err:>12.4e}{c_hat:>10.4f}")
        tol = SCALING_TOLERANCES[kind]
        ok = abs(study.slope - 1.0) <= tol
        failed = failed or not ok
        print(f"{kind}: slope {study.slope:.4f} vs 1.00 +- {tol:.2f} -> "
              f"{'ok' if ok else 'FAIL'}")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_assumptions_check(args) -> int:
    s = assumption_settings(_load(args))
    failed = False
    header = (f"{'model':<20}{'alpha':>10}{'omega':>8}{'growth_margin':>15}"
              f"{'lipschitz':>11}")
    print(header)
    for name in s["models"]:
        spec = make_model(name)
        grid = Grid(spec.dim, s["n"], spec.bc)
        alpha, omega = coercivity_constant(spec, grid)
        margin = growth_condition_margin(spec)
        u1 = random_smooth_state(spec, grid, 1)
        u2 = random_smooth_state(spec, grid, 2)
        probe = lipschitz_probe(spec, u1, u2)
        ok = alpha > 0.0 and margin >= 0.0
        failed = failed or not ok
        print(f"{name:<20}{alpha:>10.6f}{omega:>8.3f}{margin:>15.3f}"
              f"{probe.ratio:>11.4f}  {'ok' if ok else 'FAIL'}")
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
