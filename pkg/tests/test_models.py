import numpy as np
import pytest
from dataclasses import replace

from nudgelab import ConfigError, Field, Grid, derivative, l2_norm
from nudgelab.models import (
    active_mask,
    check_grid,
    coercivity_constant,
    diagnostics,
    eval_nonlinearity,
    growth_condition_margin,
    linear_symbol,
    lipschitz_probe,
    make_model,
    model_names,
    nonlinear_modal,
    streamfunction_modal,
    velocity_modal,
)
from nudgelab.spectral import inverse_transform, to_modal, to_physical


def grid_for(spec, n=32):
    return Grid(spec.dim, n, spec.bc)


def zero_state(spec, grid):
    shape = grid.shape if spec.components == 1 else (spec.components, *grid.shape)
    return Field(grid, np.zeros(shape), "physical", spec.components)


def random_state(spec, grid, rng, amplitude=0.1):
    shape = grid.shape if spec.components == 1 else (spec.components, *grid.shape)
    modal = np.zeros(shape, dtype=grid.modal_dtype())
    # populate a smooth low band only; keeps products well inside the grid
    kmax = max(2, grid.n // 8)
    band = grid.mode_magnitude_sq <= kmax * kmax
    if spec.name == "nse_2d_vorticity":
        band &= grid.mode_magnitude_sq > 0
    vals = rng.standard_normal(shape)
    if grid.bc == "periodic":
        vals = vals + 1j * rng.standard_normal(shape)
    modal[..., band] = vals[..., band] if spec.components > 1 else vals[band]
    f = Field(grid, modal, "modal", spec.components)
    f = to_physical(f)
    f = f.with_data(np.real(f.data))
    scale = amplitude / l2_norm(f)
    return f.with_data(f.data * scale)


def test_registry_contents():
    assert model_names() == (
        "allen_cahn_1d",
        "bidomain_fhn",
        "cahn_hilliard_1d",
        "cahn_hilliard_2d",
        "nse_2d_vorticity",
    )


def test_nonlinearity_vanishes_at_zero():
    for name in model_names():
        spec = make_model(name)
        grid = grid_for(spec, 16)
        out = eval_nonlinearity(spec, zero_state(spec, grid))
        assert np.max(np.abs(out.data)) == 0.0


def test_allen_cahn_single_mode_projection():
    # u - u^3 for u = A sin(pi x) has exact modal content
    # (A - 3 A^3/4) sin(pi x) + (A^3/4) sin(3 pi x)
    # via the cube identity sin^3 = (3 sin - sin3)/4.
    spec = make_model("allen_cahn_1d")
    grid = grid_for(spec, 64)
    amp = 0.4
    u = Field(grid, amp * np.sin(np.pi * grid.nodes()), "physical")
    out = to_modal(eval_nonlinearity(spec, u))
    coeffs = out.data * np.sqrt(2.0 / grid.n)  # orthonormal -> amplitude units
    k = grid.axis_modes
    expect = np.zeros_like(coeffs)
    expect[k == 1] = amp - 3.0 * amp**3 / 4.0
    expect[k == 3] = amp**3 / 4.0
    assert np.max(np.abs(coeffs - expect)) <= 1e-13


def test_allen_cahn_cubic_mode_support():
    spec = make_model("allen_cahn_1d")
    grid = grid_for(spec, 64)
    x = grid.nodes()
    u = Field(grid, 0.3 * np.sin(4 * np.pi * x), "physical")
    out = to_modal(eval_nonlinearity(spec, u))
    k = grid.axis_modes
    keep = (k == 4) | (k == 12)
    assert np.max(np.abs(out.data[~keep])) <= 1e-13 * np.max(np.abs(out.data))


def test_cahn_hilliard_symbol_and_shift():
    spec = make_model("cahn_hilliard_1d")
    grid = grid_for(spec, 64)
    sym = linear_symbol(spec, grid)
    k = grid.axis_modes
    assert sym[k == 2][0] == pytest.approx((2 * np.pi) ** 4 + 1.0, rel=1e-13)
    assert sym[k == 0][0] == pytest.approx(1.0)
    unshifted = linear_symbol(spec, grid, include_shift=False)
    assert unshifted[k == 0][0] == 0.0
    assert np.all(sym >= unshifted)


def test_cahn_hilliard_nonlinearity_single_mode():
    # F(u) = Lap(u^3 - u); for u = A cos(pi x) the k=1 content is
    # -(pi^2) * (3A^3/4 - A) and k=3 gets -(9 pi^2) * (A^3/4).
    spec = make_model("cahn_hilliard_1d")
    grid = grid_for(spec, 64)
    amp = 0.5
    u = Field(grid, amp * np.cos(np.pi * grid.nodes()), "physical")
    out = to_modal(eval_nonlinearity(spec, u))
    coeffs = out.data.copy()
    coeffs[0] /= np.sqrt(grid.n)
    coeffs[1:] /= np.sqrt(grid.n / 2.0)
    k = grid.axis_modes
    assert coeffs[k == 1][0] == pytest.approx(-(np.pi**2) * (3 * amp**3 / 4 - amp), rel=1e-12)
    assert coeffs[k == 3][0] == pytest.approx(-(9 * np.pi**2) * amp**3 / 4, rel=1e-12)
    assert abs(coeffs[k == 0][0]) <= 1e-15


def test_cahn_hilliard_nonlinearity_conserves_mass():
    spec = make_model("cahn_hilliard_2d")
    grid = grid_for(spec, 32)
    rng = np.random.default_rng(0)
    u = random_state(spec, grid, rng, amplitude=0.5)
    out = to_physical(eval_nonlinearity(spec, u))
    assert abs(np.mean(out.data)) <= 1e-14


def test_nse_eigenstate_advection_vanishes():
    # A single Laplacian eigenmode has parallel streamfunction and
    # vorticity gradients, so its self-advection is identically zero.
    spec = make_model("nse_2d_vorticity")
    grid = grid_for(spec, 32)
    x = grid.nodes()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    w = Field(grid, np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy), "physical")
    out = to_physical(eval_nonlinearity(spec, w))
    assert np.max(np.abs(out.data)) <= 1e-12


def test_nse_two_mode_advection_against_analytic_formula():
    spec = make_model("nse_2d_vorticity")
    grid = grid_for(spec, 32)
    x = grid.nodes()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    wa = np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy)
    wb = np.cos(2 * np.pi * (2 * xx - yy))
    w = Field(grid, wa + wb, "physical")
    # streamfunction solves -Lap psi = w mode by mode: lam_a = 8 pi^2,
    # lam_b = 20 pi^2; velocities and gradients below are hand derivatives.
    u = np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy) / (4 * np.pi) \
        + np.sin(2 * np.pi * (2 * xx - yy)) / (10 * np.pi)
    v = -np.cos(2 * np.pi * xx) * np.sin(2 * np.pi * yy) / (4 * np.pi) \
        + np.sin(2 * np.pi * (2 * xx - yy)) / (5 * np.pi)
    wx = 2 * np.pi * np.cos(2 * np.pi * xx) * np.sin(2 * np.pi * yy) \
        - 4 * np.pi * np.sin(2 * np.pi * (2 * xx - yy))
    wy = 2 * np.pi * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy) \
        + 2 * np.pi * np.sin(2 * np.pi * (2 * xx - yy))
    expect = -(u * wx + v * wy)
    out = to_physical(eval_nonlinearity(spec, w))
    assert np.max(np.abs(out.data - expect)) <= 1e-8


def test_nse_advection_is_mean_free():
    spec = make_model("nse_2d_vorticity")
    grid = grid_for(spec, 32)
    rng = np.random.default_rng(4)
    w = random_state(spec, grid, rng, amplitude=1.0)
    out = nonlinear_modal(spec, grid, to_modal(w).data)
    assert out[0, 0] == 0.0


def test_streamfunction_residual_and_divergence():
    spec = make_model("nse_2d_vorticity")
    grid = grid_for(spec, 64)
    rng = np.random.default_rng(9)
    w = to_modal(random_state(spec, grid, rng, amplitude=1.0))
    psi = Field(grid, streamfunction_modal(spec, grid, w.data), "modal")
    lap_psi = derivative(psi, 0, 2).data + derivative(psi, 1, 2).data
    assert np.max(np.abs(-lap_psi - w.data)) <= 1e-10 * np.max(np.abs(w.data))
    ux, uy = velocity_modal(spec, grid, w.data)
    div = derivative(Field(grid, ux, "modal"), 0).data + derivative(Field(grid, uy, "modal"), 1).data
    assert np.max(np.abs(div)) <= 1e-12 * max(np.max(np.abs(ux)), 1.0)


def test_bidomain_pointwise_kinetics():
    spec = make_model("bidomain_fhn")
    grid = grid_for(spec, 16)
    p = spec.params
    c1, c2 = 0.3, -0.2
    state = Field(grid, np.stack([np.full(grid.shape, c1), np.full(grid.shape, c2)]),
                  "physical", components=2)
    out = to_physical(eval_nonlinearity(spec, state))
    fu = -c1**3 + (p["a"] + 1) * c1**2 - c2 - (p["a"] - p["eps"] + p["delta_fh"]) * c1
    fw = p["c"] * c1
    assert np.max(np.abs(out.data[0] - fu)) <= 1e-12
    assert np.max(np.abs(out.data[1] - fw)) <= 1e-12


def test_bidomain_symbol_components():
    spec = make_model("bidomain_fhn", params={"sigma_i": 2.0, "sigma_e": 2.0})
    grid = grid_for(spec, 16)
    sym = linear_symbol(spec, grid)
    assert sym.shape == (2, *grid.shape)
    # harmonic mean of the conductivities scales the Laplacian
    assert sym[0][1, 0] == pytest.approx(1.0 * np.pi**2 + spec.params["eps"], rel=1e-13)
    assert np.all(sym[1] == spec.params["b"])


def test_bidomain_kinetics_constraint_enforced():
    with pytest.raises(ConfigError):
        make_model("bidomain_fhn", params={"eps": 1.0})
    # boundary case passes: a - eps + delta_fh == (a+1)^2/4
    a = 0.1
    delta_fh = (a + 1.0) ** 2 / 4.0 - a + 0.1
    make_model("bidomain_fhn", params={"a": a, "eps": 0.1, "delta_fh": delta_fh})


def test_model_validation_errors():
    with pytest.raises(ConfigError):
        make_model("heat_equation")
    with pytest.raises(ConfigError):
        make_model("allen_cahn_1d", bc="periodic")
    with pytest.raises(ConfigError):
        make_model("nse_2d_vorticity", params={"nu": -1.0})
    with pytest.raises(ConfigError):
        make_model("nse_2d_vorticity", params={"viscosity": 1.0})
    spec = make_model("cahn_hilliard_2d")
    with pytest.raises(ConfigError):
        check_grid(spec, Grid(1, 32, "neumann"))
    with pytest.raises(ConfigError):
        check_grid(spec, Grid(2, 32, "periodic"))


def test_coercivity_allen_cahn_exact():
    spec = make_model("allen_cahn_1d")
    alpha, omega = coercivity_constant(spec, grid_for(spec, 128))
    assert omega == 0.0
    assert alpha == pytest.approx(np.pi**2 / (1.0 + np.pi**2), rel=1e-12)


def test_coercivity_matches_rayleigh_quotient_oracle():
    # Independent check: evaluate <(A + omega) u, u> / ||u||_V^2 through
    # the derivative operator and quadrature for single modes; the stored
    # constant must be a lower bound, attained at the minimizing mode.
    spec = make_model("allen_cahn_1d")
    grid = grid_for(spec, 64)
    alpha, omega = coercivity_constant(spec, grid)
    x = grid.nodes()
    ratios = []
    for k in range(1, 6):
        u = Field(grid, np.sin(k * np.pi * x), "physical")
        au = -derivative(u, 0, 2).data + omega * u.data
        num = float(np.sum(au * u.data)) * grid.cell_volume
        den = (1.0 + (k * np.pi) ** 2) * 0.5  # analytic H1 norm squared
        ratios.append(num / den)
    assert min(ratios) == pytest.approx(alpha, rel=1e-10)
    assert all(r >= alpha - 1e-12 for r in ratios)


def test_coercivity_positive_for_all_models():
    for name in model_names():
        spec = make_model(name)
        alpha, omega = coercivity_constant(spec, grid_for(spec, 32))
        assert alpha > 0.0
        assert omega == spec.shift


def test_coercivity_bidomain_value():
    spec = make_model("bidomain_fhn")
    alpha, _ = coercivity_constant(spec, grid_for(spec, 32))
    # the undiffused component contributes b=1; the diffusive one is
    # minimized at the zero mode where only eps survives
    assert alpha == pytest.approx(0.1, rel=1e-12)


def test_growth_condition_margins():
    # all shipped exponent combinations sit inside the admissible region
    expect = {"allen_cahn_1d": 0.0, "cahn_hilliard_1d": 0.0, "cahn_hilliard_2d": 0.0,
              "nse_2d_vorticity": 0.0, "bidomain_fhn": 1.0}
    for name in model_names():
        spec = make_model(name)
        assert growth_condition_margin(spec) == pytest.approx(expect[name], abs=1e-12)
        assert growth_condition_margin(spec) >= 0.0
    fabricated = replace(make_model("allen_cahn_1d"), beta=0.9, beta_j=0.9, rho=2.0)
    assert growth_condition_margin(fabricated) < 0.0


def test_lipschitz_probe_properties():
    rng = np.random.default_rng(2)
    for name in model_names():
        spec = make_model(name)
        grid = grid_for(spec, 32 if spec.dim == 1 else 16)
        u = random_state(spec, grid, rng)
        same = lipschitz_probe(spec, u, u)
        assert same.ratio == 0.0
        ratios_big, ratios_small = [], []
        for _ in range(10):
            a = random_state(spec, grid, rng, amplitude=0.1)
            b = random_state(spec, grid, rng, amplitude=0.1)
            ratios_big.append(lipschitz_probe(spec, a, b).ratio)
            c = a.with_data(a.data * 0.1)
            d = b.with_data(b.data * 0.1)
            ratios_small.append(lipschitz_probe(spec, c, d).ratio)
        assert all(np.isfinite(r) and r > 0 for r in ratios_big + ratios_small)
        # the assumed growth form should not degrade as amplitude shrinks
        assert max(ratios_small) <= 2.0 * max(ratios_big) + 1e-12


def test_linear_only_and_flip_sign_hooks():
    rng = np.random.default_rng(12)
    spec = make_model("allen_cahn_1d")
    grid = grid_for(spec, 32)
    u = random_state(spec, grid, rng)
    silent = make_model("allen_cahn_1d", linear_only=True)
    assert np.max(np.abs(eval_nonlinearity(silent, u).data)) == 0.0
    flipped = make_model("allen_cahn_1d", flip_sign=True)
    assert np.max(np.abs(eval_nonlinearity(flipped, u).data + eval_nonlinearity(spec, u).data)) <= 1e-15


def test_active_mask():
    nse = make_model("nse_2d_vorticity")
    grid = grid_for(nse, 16)
    mask = active_mask(nse, grid)
    assert not mask[0, 0] and mask.sum() == mask.size - 1
    ac = make_model("allen_cahn_1d")
    assert active_mask(ac, grid_for(ac, 16)).all()


def test_diagnostics_cahn_hilliard_constant_state():
    spec = make_model("cahn_hilliard_2d")
    grid = grid_for(spec, 32)
    c = 0.7
    d = diagnostics(spec, Field(grid, np.full(grid.shape, c), "physical"))
    assert d["mass"] == pytest.approx(c, rel=1e-13)
    assert d["lyapunov"] == pytest.approx(c**4 / 4.0, rel=1e-13)
    assert d["l2"] == pytest.approx(c, rel=1e-13)


def test_diagnostics_nse_single_mode():
    spec = make_model("nse_2d_vorticity")
    grid = grid_for(spec, 32)
    x = grid.nodes()
    xx, yy = np.meshgrid(x, x, indexing="ij")
    w = Field(grid, np.sin(2 * np.pi * xx) * np.sin(2 * np.pi * yy), "physical")
    d = diagnostics(spec, w)
    assert d["enstrophy"] == pytest.approx(1.0 / 8.0, rel=1e-12)
    assert d["kinetic"] == pytest.approx(1.0 / (8.0 * 8.0 * np.pi**2), rel=1e-12)


def test_diagnostics_keys():
    for name, extra in (
        ("allen_cahn_1d", set()),
        ("cahn_hilliard_1d", {"mass", "lyapunov"}),
        ("nse_2d_vorticity", {"kinetic", "enstrophy"}),
        ("bidomain_fhn", set()),
    ):
        spec = make_model(name)
        grid = grid_for(spec, 16)
        d = diagnostics(spec, zero_state(spec, grid))
        assert set(d) == {"l2", "h1"} | extra


def test_eval_rep_consistency():
    rng = np.random.default_rng(31)
    spec = make_model("cahn_hilliard_1d")
    grid = grid_for(spec, 64)
    u = random_state(spec, grid, rng, amplitude=0.5)
    via_phys = to_modal(eval_nonlinearity(spec, u))
    via_modal = eval_nonlinearity(spec, to_modal(u))
    assert np.max(np.abs(via_phys.data - via_modal.data)) <= 1e-12
