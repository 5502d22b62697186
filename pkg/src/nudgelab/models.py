"""Model registry: semilinear parabolic systems in abstract form.

Every model is written as ``u' + A u = F(u)`` with ``A`` diagonal in the
grid's spectral basis and ``F`` a polynomial (plus, for the vorticity
equation, advective) nonlinearity evaluated with dealiasing.  A model may
carry a coercivity shift ``omega``: the reference run integrates the
shifted operator ``A + omega*I`` while the nudged run keeps ``A`` alone.

Shipped models
--------------
``allen_cahn_1d``
    ``u' = u_xx + u - u^3`` with homogeneous Dirichlet conditions.
``cahn_hilliard_1d`` / ``cahn_hilliard_2d``
    ``u' = -Lap^2 u + Lap(u^3 - u)`` with Neumann (default) or periodic
    conditions; the reference run carries shift ``omega = 1``.
``nse_2d_vorticity``
    2-d incompressible Navier-Stokes in vorticity form,
    ``w' + u . grad w = nu Lap w``, periodic, with the velocity recovered
    from the streamfunction.
``bidomain_fhn``
    Reduced bidomain model with FitzHugh-Nagumo kinetics; two components
    ``(u, w)`` where only ``u`` diffuses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .spectral import (
    Field,
    Grid,
    dealiased_apply,
    hermitian_symmetrize,
    sobolev_norm,
    to_modal,
    to_physical,
)

__all__ = [
    "ModelSpec",
    "make_model",
    "model_names",
    "check_grid",
    "linear_symbol",
    "active_mask",
    "nonlinear_modal",
    "eval_nonlinearity",
    "coercivity_constant",
    "growth_condition_margin",
    "lipschitz_probe",
    "LipschitzProbe",
    "diagnostics",
    "state_norm",
    "random_smooth_state",
]


@dataclass(frozen=True)
class ModelSpec:
    """Immutable description of one model instance.

    ``beta``, ``beta_j`` and ``rho`` are the nonlinearity growth exponents
    entering the structural assumptions; ``v_exponents`` records, per
    component, the Sobolev exponent of the energy space (1 for a
    second-order operator, 2 for fourth-order, 0 for an undiffused
    component).  ``linear_only`` and ``flip_sign`` are test hooks that
    switch the nonlinearity off or reverse its sign.
    """

    name: str
    dim: int
    bc: str
    shift: float
    beta: float
    beta_j: float
    rho: float
    v_exponents: tuple[float, ...]
    params: dict = field(default_factory=dict)
    linear_only: bool = False
    flip_sign: bool = False

    @property
    def components(self) -> int:
        return len(self.v_exponents)


_REGISTRY = {}


def model_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def _register(name):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn

    return deco


def make_model(
    name: str,
    bc: str | None = None,
    params: dict | None = None,
    linear_only: bool = False,
    flip_sign: bool = False,
) -> ModelSpec:
    """Build a validated :class:`ModelSpec` from the registry."""
    if name not in _REGISTRY:
        raise ConfigError(f"unknown model {name!r}, expected one of {model_names()}")
    spec = _REGISTRY[name](bc, dict(params or {}))
    return replace(spec, linear_only=linear_only, flip_sign=flip_sign)


def _check_bc(name: str, bc: str | None, allowed: tuple[str, ...], default: str) -> str:
    if bc is None:
        return default
    if bc not in allowed:
        raise ConfigError(f"model {name} supports bc in {allowed}, got {bc!r}")
    return bc


def _check_params(name: str, params: dict, known: dict) -> dict:
    for key in params:
        if key not in known:
            raise ConfigError(f"model {name} has no parameter {key!r}")
    out = dict(known)
    out.update(params)
    for key, val in out.items():
        if not (isinstance(val, (int, float)) and math.isfinite(val)):
            raise ConfigError(f"model {name} parameter {key} must be finite, got {val!r}")
    return out


@_register("allen_cahn_1d")
def _make_allen_cahn(bc, params):
    bc = _check_bc("allen_cahn_1d", bc, ("dirichlet",), "dirichlet")
    params = _check_params("allen_cahn_1d", params, {})
    return ModelSpec(
        name="allen_cahn_1d", dim=1, bc=bc, shift=0.0,
        beta=2.0 / 3.0, beta_j=2.0 / 3.0, rho=2.0,
        v_exponents=(1.0,), params=params,
    )


def _make_cahn_hilliard(name, dim, bc, params):
    bc = _check_bc(name, bc, ("neumann", "periodic"), "neumann")
    params = _check_params(name, params, {})
    return ModelSpec(
        name=name, dim=dim, bc=bc, shift=1.0,
        beta=2.0 / 3.0, beta_j=2.0 / 3.0, rho=2.0,
        v_exponents=(2.0,), params=params,
    )


@_register("cahn_hilliard_1d")
def _make_ch1(bc, params):
    return _make_cahn_hilliard("cahn_hilliard_1d", 1, bc, params)


@_register("cahn_hilliard_2d")
def _make_ch2(bc, params):
    return _make_cahn_hilliard("cahn_hilliard_2d", 2, bc, params)


@_register("nse_2d_vorticity")
def _make_nse(bc, params):
    bc = _check_bc("nse_2d_vorticity", bc, ("periodic",), "periodic")
    params = _check_params("nse_2d_vorticity", params, {"nu": 1.0})
    if params["nu"] <= 0:
        raise ConfigError("nse_2d_vorticity requires nu > 0")
    return ModelSpec(
        name="nse_2d_vorticity", dim=2, bc=bc, shift=0.0,
        beta=3.0 / 4.0, beta_j=3.0 / 4.0, rho=1.0,
        v_exponents=(1.0,), params=params,
    )


@_register("bidomain_fhn")
def _make_bidomain(bc, params):
    bc = _check_bc("bidomain_fhn", bc, ("neumann", "periodic"), "neumann")
    defaults = {"a": 0.1, "b": 1.0, "c": 1.0, "eps": 0.1, "delta_fh": 0.5,
                "sigma_i": 1.0, "sigma_e": 1.0}
    params = _check_params("bidomain_fhn", params, defaults)
    if not 0.0 < params["a"] < 1.0:
        raise ConfigError("bidomain_fhn requires 0 < a < 1")
    for key in ("b", "c", "eps", "delta_fh", "sigma_i", "sigma_e"):
        if params[key] <= 0:
            raise ConfigError(f"bidomain_fhn requires {key} > 0")
    a, eps, dfh = params["a"], params["eps"], params["delta_fh"]
    margin = a - eps + dfh - (a + 1.0) ** 2 / 4.0
    if margin < 0:
        raise ConfigError(
            "bidomain_fhn kinetics must satisfy a - eps + delta_fh >= (a+1)^2/4; "
            f"margin is {margin:.6g}"
        )
    return ModelSpec(
        name="bidomain_fhn", dim=2, bc=bc, shift=0.0,
        beta=1.0 / 3.0, beta_j=1.0 / 3.0, rho=2.0,
        v_exponents=(1.0, 0.0), params=params,
    )


def check_grid(spec: ModelSpec, grid: Grid) -> None:
    if grid.dim != spec.dim:
        raise ConfigError(f"model {spec.name} is {spec.dim}-dimensional, grid has dim {grid.dim}")
    if grid.bc != spec.bc:
        raise ConfigError(f"model {spec.name} was built for bc {spec.bc!r}, grid has {grid.bc!r}")


def linear_symbol(spec: ModelSpec, grid: Grid, include_shift: bool = True) -> np.ndarray:
    """Diagonal symbol of the linear operator on the modal lattice.

    Shape ``grid.shape`` for scalar models, ``(components, *grid.shape)``
    otherwise.  With ``include_shift`` the coercivity shift is added; the
    nudged system integrates the unshifted symbol.
    """
    check_grid(spec, grid)
    lam = grid.laplacian_symbol
    if spec.name == "allen_cahn_1d":
        sym = lam.copy()
    elif spec.name.startswith("cahn_hilliard"):
        sym = lam**2
    elif spec.name == "nse_2d_vorticity":
        sym = spec.params["nu"] * lam
    else:  # bidomain_fhn
        p = spec.params
        harm = p["sigma_i"] * p["sigma_e"] / (p["sigma_i"] + p["sigma_e"])
        sym = np.stack([harm * lam + p["eps"], np.full(grid.shape, p["b"])])
    if include_shift and spec.shift != 0.0:
        sym = sym + spec.shift
    if np.any(sym < 0):
        raise ConfigError(f"linear symbol of {spec.name} has negative entries")
    return sym


def active_mask(spec: ModelSpec, grid: Grid) -> np.ndarray:
    """Modes belonging to the model's state space.

    The vorticity formulation lives on mean-free fields, so its zero mode
    is excluded; all other models use the full basis.
    """
    if spec.name == "nse_2d_vorticity":
        return grid.mode_magnitude_sq > 0
    return np.ones(grid.shape, dtype=bool)


# -- nonlinearities ----------------------------------------------------------


def _axis_derivative_multiplier(grid: Grid, axis: int) -> np.ndarray:
    k = grid.axis_modes
    mult = 2j * np.pi / grid.extent * k
    shape = [1] * grid.dim
    shape[axis] = k.size
    return mult.reshape(shape)


def streamfunction_modal(spec: ModelSpec, grid: Grid, vort_modal: np.ndarray) -> np.ndarray:
    """Solve ``-Lap psi = w`` spectrally; the mean of psi is set to zero."""
    lam = grid.laplacian_symbol
    psi = np.zeros_like(vort_modal)
    nz = lam > 0
    psi[nz] = vort_modal[nz] / lam[nz]
    return psi


def velocity_modal(spec: ModelSpec, grid: Grid, vort_modal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Modal velocity components ``(psi_y, -psi_x)`` of a vorticity state."""
    psi = streamfunction_modal(spec, grid, vort_modal)
    dx = _axis_derivative_multiplier(grid, 0)
    dy = _axis_derivative_multiplier(grid, 1)
    return dy * psi, -(dx * psi)


def nonlinear_modal(spec: ModelSpec, grid: Grid, modal: np.ndarray) -> np.ndarray:
    """Dealiased modal tendency ``F(u)``; the workhorse behind the steppers."""
    if spec.linear_only:
        return np.zeros_like(modal)
    if spec.name == "allen_cahn_1d":
        cube = dealiased_apply(grid, [modal], lambda u: u**3, factor=2)
        out = modal - cube
    elif spec.name.startswith("cahn_hilliard"):
        cube = dealiased_apply(grid, [modal], lambda u: u**3, factor=2)
        out = -grid.laplacian_symbol * (cube - modal)
    elif spec.name == "nse_2d_vorticity":
        ux, uy = velocity_modal(spec, grid, modal)
        dx = _axis_derivative_multiplier(grid, 0)
        dy = _axis_derivative_multiplier(grid, 1)
        adv = dealiased_apply(
            grid,
            [ux, uy, dx * modal, dy * modal],
            lambda a, b, wx, wy: a * wx + b * wy,
            factor=1.5,
        )
        out = -adv
        # advection of a mean-free field is mean-free; pin the zero mode
        # so rounding cannot push the state off the mean-free subspace
        out[tuple([0] * grid.dim)] = 0.0
    else:  # bidomain_fhn
        p = spec.params
        a = p["a"]
        poly = dealiased_apply(
            grid, [modal[0]], lambda u: -(u**3) + (a + 1.0) * u**2, factor=2
        )
        f_u = poly - modal[1] - (a - p["eps"] + p["delta_fh"]) * modal[0]
        f_w = p["c"] * modal[0]
        out = np.stack([f_u, f_w])
    return -out if spec.flip_sign else out


def eval_nonlinearity(spec: ModelSpec, state: Field) -> Field:
    """Evaluate ``F`` on a state; the result keeps the input representation."""
    check_grid(spec, state.grid)
    if state.components != spec.components:
        raise ConfigError(
            f"model {spec.name} has {spec.components} component(s), state has {state.components}"
        )
    modal = to_modal(state)
    out = modal.with_data(nonlinear_modal(spec, state.grid, modal.data))
    return out if state.rep == "modal" else to_physical(out)


# -- structural assumption checks -------------------------------------------


def coercivity_constant(spec: ModelSpec, grid: Grid) -> tuple[float, float]:
    """Return ``(alpha, omega)`` for the shifted operator.

    ``alpha`` is the minimum over active modes of the Rayleigh quotient of
    ``A + omega*I`` against the per-component energy norm
    ``(1 + lambda)**v_exponent``; ``omega`` is the stored shift.
    """
    sym = linear_symbol(spec, grid, include_shift=True)
    mask = active_mask(spec, grid)
    lam = grid.laplacian_symbol
    alphas = []
    for comp in range(spec.components):
        comp_sym = sym if spec.components == 1 else sym[comp]
        weight = (1.0 + lam) ** spec.v_exponents[comp]
        alphas.append(float(np.min((comp_sym / weight)[mask])))
    return min(alphas), spec.shift


def growth_condition_margin(spec: ModelSpec) -> float:
    """Slack in the exponent balance ``rho*(beta_j - 1/2) + beta <= 1``.

    Nonnegative for admissible exponent combinations.
    """
    return 1.0 - (spec.rho * (spec.beta_j - 0.5) + spec.beta)


@dataclass(frozen=True)
class LipschitzProbe:
    """Empirical local-Lipschitz ratio for one pair of states."""

    ratio: float
    diff_dual: float
    separation: float
    growth: float


def state_norm(spec: ModelSpec, f: Field, scale: float = 1.0) -> float:
    """Combined norm with per-component exponent ``scale * v_exponent``."""
    if f.components == 1:
        return sobolev_norm(f, scale * spec.v_exponents[0])
    total = 0.0
    for comp in range(f.components):
        g = Field(f.grid, f.component(comp), f.rep)
        total += sobolev_norm(g, scale * spec.v_exponents[comp]) ** 2
    return math.sqrt(total)


def lipschitz_probe(spec: ModelSpec, u1: Field, u2: Field) -> LipschitzProbe:
    """Measure ``||F(u1) - F(u2)||_dual`` against the assumed growth form.

    The reported ratio is
    ``diff_dual / ((1 + ||u1||^rho + ||u2||^rho) * separation)`` where the
    separation is taken in the interpolation norm of exponent
    ``(2*beta - 1) * v_exponent`` and the growth norms are plain ``L^2``.
    Identical states give ratio zero.
    """
    d1 = to_modal(u1)
    d2 = to_modal(u2)
    if np.array_equal(d1.data, d2.data):
        return LipschitzProbe(0.0, 0.0, 0.0, 1.0 + 2.0 * sobolev_norm(u1, 0.0) ** spec.rho)
    f1 = eval_nonlinearity(spec, d1)
    f2 = eval_nonlinearity(spec, d2)
    diff_dual = state_norm(spec, f1 - f2, scale=-1.0)
    separation = state_norm(spec, d1 - d2, scale=(2.0 * spec.beta - 1.0))
    growth = 1.0 + sobolev_norm(u1, 0.0) ** spec.rho + sobolev_norm(u2, 0.0) ** spec.rho
    return LipschitzProbe(diff_dual / (growth * separation), diff_dual, separation, growth)


def random_smooth_state(
    spec: ModelSpec,
    grid: Grid,
    seed: int,
    amplitude: float = 0.1,
    kmax: int | None = None,
    decay: float = 2.0,
) -> Field:
    """Seeded random smooth state used for initial data and probes.

    A superposition of the lowest modes (``1 <= |k| <= kmax``, default
    ``n // 8``) with amplitudes falling off like ``|k|**(-decay)`` and
    independent standard-normal factors per component.  Mean-free by
    construction and normalized so the combined discrete ``L^2`` norm
    equals ``amplitude``.
    """
    check_grid(spec, grid)
    if kmax is None:
        kmax = max(1, grid.n // 8)
    rng = np.random.default_rng(seed)
    kmag2 = grid.mode_magnitude_sq
    band = (kmag2 > 0) & (kmag2 <= kmax * kmax) & active_mask(spec, grid)
    amp = np.zeros(grid.shape)
    amp[band] = kmag2[band].astype(np.float64) ** (-decay / 2.0)
    comps = []
    for _ in range(spec.components):
        if grid.bc == "periodic":
            coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            coeffs = hermitian_symmetrize(coeffs)
        else:
            coeffs = rng.standard_normal(grid.shape)
        comps.append(coeffs * amp)
    data = comps[0] if spec.components == 1 else np.stack(comps)
    f = Field(grid, data.astype(grid.modal_dtype()), "modal", spec.components)
    norm = sobolev_norm(f, 0.0)
    if norm == 0.0:
        raise ConfigError("initial state recipe produced an empty band")
    return f.with_data(f.data * (amplitude / norm))


# -- per-model diagnostics ---------------------------------------------------


def _mass(grid: Grid, modal: np.ndarray) -> float:
    mean = modal[tuple([0] * grid.dim)] / grid.n ** (grid.dim / 2.0)
    return float(np.real(mean)) * grid.extent**grid.dim


def diagnostics(spec: ModelSpec, state: Field) -> dict[str, float]:
    """Named scalar diagnostics of a state; keys depend on the model.

    Every model reports ``l2`` and ``h1``; conserved-quantity style extras
    are ``mass`` and ``lyapunov`` for the fourth-order model and
    ``kinetic`` and ``enstrophy`` for the vorticity equation.
    """
    check_grid(spec, state.grid)
    grid = state.grid
    modal = to_modal(state)
    out = {"l2": sobolev_norm(state, 0.0), "h1": sobolev_norm(state, 1.0)}
    if spec.name.startswith("cahn_hilliard"):
        phys = to_physical(state)
        vol = grid.extent**grid.dim
        grad_sq = grid.cell_volume * float(np.sum(grid.laplacian_symbol * np.abs(modal.data) ** 2))
        quart = float(np.mean(phys.data**4)) * vol
        out["mass"] = _mass(grid, modal.data)
        out["lyapunov"] = 0.5 * grad_sq + 0.25 * quart
    elif spec.name == "nse_2d_vorticity":
        lam = grid.laplacian_symbol
        nz = lam > 0
        spec_energy = np.zeros(grid.shape)
        spec_energy[nz] = np.abs(modal.data[nz]) ** 2 / lam[nz]
        out["kinetic"] = 0.5 * grid.cell_volume * float(np.sum(spec_energy))
        out["enstrophy"] = 0.5 * grid.cell_volume * float(np.sum(np.abs(modal.data) ** 2))
    return out
