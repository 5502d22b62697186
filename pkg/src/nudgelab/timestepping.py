"""IMEX time integration for the reference and nudged systems.

Two schemes are provided, both treating the (diagonal) linear operator
implicitly and the nonlinearity explicitly:

* ``imex_euler`` -- backward Euler / forward Euler;
* ``imex_cnab2`` -- Crank-Nicolson / Adams-Bashforth 2.  The first step
  has no explicit history, so the nonlinearity is advanced by forward
  Euler there while the linear part keeps its Crank-Nicolson weighting;
  this preserves the discrete energy identity of the linear flow from
  step one, which a backward-Euler bootstrap would not.

Spectral (low-pass) nudging is folded into the implicit solve and applied
as a post-step relaxation toward the reference, a form that is exactly
neutral when the two trajectories coincide.  Cell-average nudging is
explicit and therefore carries the ``dt * mu <= 1`` guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .models import ModelSpec, check_grid, linear_symbol, nonlinear_modal, random_smooth_state
from .nudging import NudgeConfig
from .observation import low_pass_mask, observe
from .spectral import Field, Grid, to_modal

__all__ = [
    "SchemeConfig",
    "ReferenceStepper",
    "NudgedStepper",
    "step_reference",
    "step_nudged",
    "stability_limit",
]

SCHEMES = ("imex_euler", "imex_cnab2")

#: Safety factor applied to the probed nonlinear response when bounding
#: the explicit step size.
CFL_SAFETY = 0.5


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme name, step size and final time of one integration."""

    kind: str
    dt: float
    t_end: float

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.kind!r}, expected one of {SCHEMES}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        steps = round(self.t_end / self.dt)
        if steps < 1 or abs(steps * self.dt - self.t_end) > 1e-9 * self.t_end:
            raise ConfigError(
                f"t_end={self.t_end} is not an integer number of steps of dt={self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)


class ReferenceStepper:
    """Advances the shifted reference system ``u' + (A + omega) u = F(u)``.

    Operates on raw modal arrays; use :func:`step_reference` for the
    field-level one-shot interface.
    """

    def __init__(self, spec: ModelSpec, grid: Grid, scheme: SchemeConfig):
        check_grid(spec, grid)
        self.spec = spec
        self.grid = grid
        self.scheme = scheme
        sym = linear_symbol(spec, grid, include_shift=True)
        dt = scheme.dt
        self._euler_denom = 1.0 + dt * sym
        self._cn_num = 1.0 - 0.5 * dt * sym
        self._cn_denom = 1.0 + 0.5 * dt * sym
        self._fprev = None

    def reset(self) -> None:
        self._fprev = None

    def step(self, modal: np.ndarray) -> np.ndarray:
        dt = self.scheme.dt
        f = nonlinear_modal(self.spec, self.grid, modal)
        if self.scheme.kind == "imex_euler":
            return (modal + dt * f) / self._euler_denom
        if self._fprev is None:
            out = (self._cn_num * modal + dt * f) / self._cn_denom
        else:
            out = (self._cn_num * modal + dt * (1.5 * f - 0.5 * self._fprev)) / self._cn_denom
        self._fprev = f
        return out


class NudgedStepper:
    """Advances ``v' + A v = F(v) - mu * (I_delta v - I_delta u)``.

    The operator here is unshifted: the feedback term, not a coercivity
    shift, is what controls the low modes.  ``step`` needs the reference
    state at both ends of the step; the implicit relaxation uses the new
    one, the explicit path the current one.
    """

    def __init__(self, spec: ModelSpec, grid: Grid, scheme: SchemeConfig, nudge: NudgeConfig):
        check_grid(spec, grid)
        if nudge.observer.grid != grid:
            raise ConfigError("nudge observer lives on a different grid")
        self.spec = spec
        self.grid = grid
        self.scheme = scheme
        self.nudge = nudge
        dt = scheme.dt
        mu = nudge.mu
        if not nudge.implicit and mu > 0 and dt * mu > 1.0:
            raise ConfigError(
                f"explicit nudging is unstable for dt*mu > 1 (dt={dt}, mu={mu}); "
                "reduce the step or use a spectral observer"
            )
        sym = linear_symbol(spec, grid, include_shift=False)
        self._euler_denom = 1.0 + dt * sym
        self._cn_num = 1.0 - 0.5 * dt * sym
        self._cn_denom = 1.0 + 0.5 * dt * sym
        if nudge.implicit and mu > 0:
            mask = low_pass_mask(nudge.observer)
            self._relax_euler = dt * mu * mask / (self._euler_denom + dt * mu)
            self._relax_cn = 0.5 * dt * mu * mask / (self._cn_denom + 0.5 * dt * mu)
        self._gprev = None

    def reset(self) -> None:
        self._gprev = None

    def _explicit_tendency(self, v_modal: np.ndarray, u_modal: np.ndarray) -> np.ndarray:
        g = nonlinear_modal(self.spec, self.grid, v_modal)
        if self.nudge.mu > 0:
            diff = Field(self.grid, v_modal - u_modal, "modal", self.spec.components)
            g = g - self.nudge.mu * observe(self.nudge.observer, diff).data
        return g

    def step(self, v_modal: np.ndarray, u_now: np.ndarray, u_next: np.ndarray) -> np.ndarray:
        dt = self.scheme.dt
        euler = self.scheme.kind == "imex_euler"
        if self.nudge.implicit:
            f = nonlinear_modal(self.spec, self.grid, v_modal)
            if euler:
                vstar = (v_modal + dt * f) / self._euler_denom
            elif self._gprev is None:
                vstar = (self._cn_num * v_modal + dt * f) / self._cn_denom
            else:
                vstar = (self._cn_num * v_modal + dt * (1.5 * f - 0.5 * self._gprev)) / self._cn_denom
            if not euler:
                self._gprev = f
            if self.nudge.mu == 0:
                return vstar
            if euler:
                return vstar + self._relax_euler * (u_next - vstar)
            return vstar + self._relax_cn * ((u_now - v_modal) + (u_next - vstar))
        g = self._explicit_tendency(v_modal, u_now)
        if euler:
            return (v_modal + dt * g) / self._euler_denom
        if self._gprev is None:
            out = (self._cn_num * v_modal + dt * g) / self._cn_denom
        else:
            out = (self._cn_num * v_modal + dt * (1.5 * g - 0.5 * self._gprev)) / self._cn_denom
        self._gprev = g
        return out


def step_reference(spec: ModelSpec, grid: Grid, scheme: SchemeConfig, state: Field) -> Field:
    """One reference step from a state field (modal result)."""
    modal = to_modal(state)
    out = ReferenceStepper(spec, grid, scheme).step(modal.data)
    return modal.with_data(out)


def step_nudged(
    spec: ModelSpec,
    grid: Grid,
    scheme: SchemeConfig,
    nudge: NudgeConfig,
    v: Field,
    u_now: Field,
    u_next: Field,
) -> Field:
    """One nudged step from field states (modal result)."""
    vm = to_modal(v)
    out = NudgedStepper(spec, grid, scheme, nudge).step(
        vm.data, to_modal(u_now).data, to_modal(u_next).data
    )
    return vm.with_data(out)


def _probe_nonlinear_gain(spec: ModelSpec, grid: Grid, state: Field | None) -> float:
    """Finite-difference estimate of ``||F'(u)||`` along smooth directions.

    Probes the response to a few seeded low-mode perturbations of unit
    norm.  High-mode stiffness is deliberately not probed: the linear
    operator that owns it is integrated implicitly.
    """
    if state is None:
        base = np.zeros(
            grid.shape if spec.components == 1 else (spec.components, *grid.shape),
            dtype=grid.modal_dtype(),
        )
    else:
        base = to_modal(state).data
    f0 = nonlinear_modal(spec, grid, base)
    dv = grid.cell_volume
    eps = 1e-4
    gain = 0.0
    for probe_seed in (1234, 1235, 1236):
        eta = random_smooth_state(spec, grid, probe_seed, amplitude=1.0).data
        f1 = nonlinear_modal(spec, grid, base + eps * eta)
        resp = np.sqrt(dv * float(np.sum(np.abs(f1 - f0) ** 2))) / eps
        gain = max(gain, resp)
    return gain


def stability_limit(
    spec: ModelSpec,
    grid: Grid,
    nudge: NudgeConfig | None,
    scheme: SchemeConfig,
    state: Field | None = None,
) -> float:
    """Largest admissible step for this configuration, capped at ``t_end``.

    Combines the explicit-nudging bound ``1/mu`` (when applicable) with a
    CFL-style bound from the probed nonlinear response.  Purely implicit
    linear dynamics impose no limit of their own.
    """
    bounds = [scheme.t_end]
    if nudge is not None and nudge.mu > 0 and not nudge.implicit:
        bounds.append(1.0 / nudge.mu)
    gain = _probe_nonlinear_gain(spec, grid, state)
    if gain > 1e-12:
        bounds.append(CFL_SAFETY / gain)
    return min(bounds)
