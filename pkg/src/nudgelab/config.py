"""Strict YAML configuration for the command-line tool.

The schema is a fixed tree of sections and keys; anything outside it is
rejected with the full dotted path of the offending key, so a typo in an
experiment file fails loudly instead of silently running with defaults.
``model.params`` is the one free-form subtree, since its keys belong to
the individual model.

Overrides (``--set key.path=value``) use the same dotted paths; values
are parsed as YAML scalars or flow collections, so ``--set nudge.mu=50``
and ``--set "sweep.mu=[10, 30, 100]"`` both work.
"""

from __future__ import annotations

import copy

import yaml

from .errors import ConfigError
from .harness import TwinConfig
from .models import make_model, model_names
from .nudging import NudgeConfig
from .observation import OBSERVER_KINDS, make_observer
from .spectral import Grid
from .timestepping import SchemeConfig

__all__ = [
    "load_config",
    "apply_overrides",
    "build_model",
    "build_twin_config",
    "build_sweep_args",
    "observe_settings",
    "assumption_settings",
]

# Allowed keys per section; the sentinel "free" marks a free-form mapping.
_SCHEMA: dict[str, dict] = {
    "model": {"name": None, "bc": None, "params": "free", "linear_only": None, "flip_sign": None},
    "grid": {"n": None, "extent": None},
    "scheme": {"kind": None, "dt": None, "t_end": None},
    "nudge": {"mu": None, "kind": None, "delta": None},
    "run": {"u0_seed": None, "v0": None, "record_every": None, "norms": None, "amplitude": None},
    "sweep": {"mu": None, "delta": None, "parallelism": None},
    "observe": {"dim": None, "n": None, "bc": None, "kinds": None, "deltas": None,
                "count": None, "seed": None},
    "assumptions": {"models": None, "n": None},
}


def _validate(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping of sections")
    for section, body in cfg.items():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown config section {section!r}, expected one of {sorted(_SCHEMA)}"
            )
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section + '.' + key!r}")
            if _SCHEMA[section][key] == "free" and value is not None and not isinstance(value, dict):
                raise ConfigError(f"config key {section + '.' + key!r} must be a mapping")


def load_config(path: str) -> dict:
    """Read and validate a YAML config file."""
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    cfg = cfg or {}
    _validate(cfg)
    return cfg


def apply_overrides(cfg: dict, assignments: list[str]) -> dict:
    """Apply dotted ``key=value`` overrides and re-validate."""
    out = copy.deepcopy(cfg)
    for text in assignments:
        if "=" not in text:
            raise ConfigError(f"override {text!r} is not of the form key.path=value")
        dotted, raw = text.split("=", 1)
        parts = dotted.strip().split(".")
        if len(parts) < 2 or not all(parts):
            raise ConfigError(f"override key {dotted!r} must be a dotted path like nudge.mu")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override value {raw!r} is not valid YAML: {exc}") from exc
        node = out
        for part in parts[:-1]:
            nxt = node.get(part)
            if nxt is None:
                nxt = node[part] = {}
            elif not isinstance(nxt, dict):
                raise ConfigError(f"override {dotted!r} descends into non-mapping {part!r}")
            node = nxt
        node[parts[-1]] = value
    _validate(out)
    return out


def _section(cfg: dict, name: str) -> dict:
    body = cfg.get(name)
    return dict(body) if body else {}


def _require(section: dict, section_name: str, key: str):
    if key not in section or section[key] is None:
        raise ConfigError(f"missing required config key {section_name + '.' + key!r}")
    return section[key]


def _number(value, dotted: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {dotted!r} must be a number, got {value!r}")
    return float(value)


def _number_list(value, dotted: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"config key {dotted!r} must be a nonempty list of numbers")
    return [_number(v, dotted) for v in value]


def build_model(cfg: dict):
    model = _section(cfg, "model")
    return make_model(
        _require(model, "model", "name"),
        bc=model.get("bc"),
        params=model.get("params") or {},
        linear_only=bool(model.get("linear_only", False)),
        flip_sign=bool(model.get("flip_sign", False)),
    )


def build_twin_config(cfg: dict) -> TwinConfig:
    """Assemble the full twin-experiment configuration for run/sweep."""
    spec = build_model(cfg)
    grid_cfg = _section(cfg, "grid")
    grid = Grid(
        spec.dim,
        int(_require(grid_cfg, "grid", "n")),
        spec.bc,
        extent=_number(grid_cfg.get("extent", 1.0), "grid.extent"),
    )
    scheme_cfg = _section(cfg, "scheme")
    scheme = SchemeConfig(
        _require(scheme_cfg, "scheme", "kind"),
        _number(_require(scheme_cfg, "scheme", "dt"), "scheme.dt"),
        _number(_require(scheme_cfg, "scheme", "t_end"), "scheme.t_end"),
    )
    nudge = None
    nudge_cfg = _section(cfg, "nudge")
    if nudge_cfg:
        nudge = NudgeConfig(
            _number(_require(nudge_cfg, "nudge", "mu"), "nudge.mu"),
            make_observer(
                _require(nudge_cfg, "nudge", "kind"),
                _number(_require(nudge_cfg, "nudge", "delta"), "nudge.delta"),
                grid,
            ),
        )
    run = _section(cfg, "run")
    norms = run.get("norms", ["l2", "h1", "vstar"])
    if not isinstance(norms, (list, tuple)):
        raise ConfigError("config key 'run.norms' must be a list of norm names")
    return TwinConfig(
        model=spec,
        grid=grid,
        scheme=scheme,
        nudge=nudge,
        u0_seed=int(run.get("u0_seed", 0)),
        v0=run.get("v0", "zero"),
        record_every=int(run.get("record_every", 1)),
        norms=tuple(norms),
        amplitude=_number(run.get("amplitude", 0.1), "run.amplitude"),
    )


def build_sweep_args(cfg: dict) -> tuple[list[float], list[float], int]:
    body = _section(cfg, "sweep")
    if not body:
        raise ConfigError("the sweep subcommand needs a 'sweep' config section")
    mus = _number_list(_require(body, "sweep", "mu"), "sweep.mu")
    deltas = _number_list(_require(body, "sweep", "delta"), "sweep.delta")
    parallelism = int(body.get("parallelism", 1))
    if parallelism < 1:
        raise ConfigError("config key 'sweep.parallelism' must be >= 1")
    return mus, deltas, parallelism


def observe_settings(cfg: dict) -> dict:
    """Grid and study parameters for the observe-check subcommand."""
    body = _section(cfg, "observe")
    kinds = body.get("kinds", list(OBSERVER_KINDS))
    if not isinstance(kinds, (list, tuple)) or not kinds:
        raise ConfigError("config key 'observe.kinds' must be a nonempty list")
    grid = Grid(
        int(body.get("dim", 1)),
        int(body.get("n", 256)),
        body.get("bc", "neumann"),
    )
    deltas = tuple(_number_list(body.get("deltas", [1 / 8, 1 / 16, 1 / 32]), "observe.deltas"))
    return {
        "grid": grid,
        "kinds": list(kinds),
        "deltas": deltas,
        "count": int(body.get("count", 100)),
        "seed": int(body.get("seed", 0)),
    }


def assumption_settings(cfg: dict) -> dict:
    body = _section(cfg, "assumptions")
    names = body.get("models", list(model_names()))
    if not isinstance(names, (list, tuple)) or not names:
        raise ConfigError("config key 'assumptions.models' must be a nonempty list")
    return {"models": list(names), "n": int(body.get("n", 32))}
