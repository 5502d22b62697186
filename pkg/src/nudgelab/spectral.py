"""Spectral grids, fields, transforms and Sobolev norms.

Three bases are supported on the unit box (extent configurable):

* ``periodic``  -- complex Fourier modes ``exp(2*pi*i*k.x)``, nodes ``j/n``;
* ``dirichlet`` -- sine modes ``sin(k*pi*x)``, interior nodes ``j/n``;
* ``neumann``   -- cosine modes ``cos(k*pi*x)``, midpoint nodes ``(j+1/2)/n``.

All transforms use orthonormal scaling, so the discrete quadrature with
weight ``(extent/n)**dim`` reproduces the continuous ``L^2`` inner product
exactly for band-limited fields.  Modal and physical arrays share the same
shape in every basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft

from .errors import ConfigError, ParityError

__all__ = [
    "Grid",
    "Field",
    "forward_transform",
    "inverse_transform",
    "to_modal",
    "to_physical",
    "derivative",
    "sobolev_norm",
    "l2_norm",
    "dealiased_apply",
    "hermitian_symmetrize",
]

BCS = ("periodic", "dirichlet", "neumann")

#: Sobolev exponent aliases used by the norm helpers.
NORM_EXPONENTS = {"l2": 0.0, "h1": 1.0, "vstar": -1.0}


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Tensor-product collocation grid with a fixed boundary condition.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    n : int
        Resolution parameter per axis, a power of two.  The number of
        stored points per axis is ``n`` (periodic, neumann) or ``n - 1``
        (dirichlet, interior nodes only).
    bc : str
        One of ``periodic``, ``dirichlet``, ``neumann``.
    extent : float
        Box side length.  Defaults to the unit box.
    """

    dim: int
    n: int
    bc: str
    extent: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"grid dim must be 1 or 2, got {self.dim}")
        if not _is_power_of_two(self.n) or self.n < 4:
            raise ConfigError(f"grid n must be a power of two >= 4, got {self.n}")
        if self.bc not in BCS:
            raise ConfigError(f"unknown bc {self.bc!r}, expected one of {BCS}")
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ConfigError(f"grid extent must be positive, got {self.extent}")

    @property
    def npts(self) -> int:
        """Stored points per axis."""
        return self.n - 1 if self.bc == "dirichlet" else self.n

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of a scalar field (physical and modal alike)."""
        return (self.npts,) * self.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight per node."""
        return (self.extent / self.n) ** self.dim

    def nodes(self, axis: int = 0) -> np.ndarray:
        """Collocation coordinates along ``axis``."""
        h = self.extent / self.n
        if self.bc == "periodic":
            return h * np.arange(self.n)
        if self.bc == "dirichlet":
            return h * np.arange(1, self.n)
        return h * (np.arange(self.n) + 0.5)

    @cached_property
    def axis_modes(self) -> np.ndarray:
        """Integer mode indices along one axis, in storage order."""
        if self.bc == "periodic":
            return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        if self.bc == "dirichlet":
            return np.arange(1, self.n, dtype=np.int64)
        return np.arange(self.n, dtype=np.int64)

    @cached_property
    def mode_magnitude_sq(self) -> np.ndarray:
        """Squared Euclidean mode magnitude ``|k|^2`` on the modal lattice."""
        k = self.axis_modes
        if self.dim == 1:
            return k * k
        return (k * k)[:, None] + (k * k)[None, :]

    @cached_property
    def laplacian_symbol(self) -> np.ndarray:
        """Symbol of ``-Laplacian`` on the modal lattice (entries >= 0)."""
        factor = 2.0 * np.pi / self.extent if self.bc == "periodic" else np.pi / self.extent
        return factor**2 * self.mode_magnitude_sq.astype(np.float64)

    def modal_dtype(self) -> type:
        return np.complex128 if self.bc == "periodic" else np.float64


@dataclass(frozen=True)
class Field:
    """A scalar or multi-component field bound to a grid.

    ``rep`` is ``"physical"`` (node values) or ``"modal"`` (transform
    coefficients).  Multi-component data carries the component axis first:
    shape ``(components, *grid.shape)``.
    """

    grid: Grid
    data: np.ndarray
    rep: str
    components: int = 1

    def __post_init__(self):
        if self.rep not in ("physical", "modal"):
            raise ConfigError(f"unknown rep {self.rep!r}")
        expected = self.grid.shape if self.components == 1 else (self.components, *self.grid.shape)
        if tuple(self.data.shape) != expected:
            raise ConfigError(
                f"field shape {self.data.shape} does not match grid shape {expected}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite entries")

    def component(self, i: int) -> np.ndarray:
        return self.data if self.components == 1 else self.data[i]

    def with_data(self, data: np.ndarray, rep: str | None = None) -> Field:
        return Field(self.grid, data, self.rep if rep is None else rep, self.components)

    def __sub__(self, other: Field) -> Field:
        if other.grid != self.grid or other.rep != self.rep:
            raise ConfigError("fields live on different grids or representations")
        return self.with_data(self.data - other.data)


def _spatial_axes(grid: Grid, components: int) -> tuple[int, ...]:
    off = 0 if components == 1 else 1
    return tuple(range(off, off + grid.dim))


def _forward_raw(bc: str, values: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    if bc == "periodic":
        return scipy.fft.fftn(values, axes=axes, norm="ortho")
    if bc == "dirichlet":
        return scipy.fft.dstn(values, type=1, axes=axes, norm="ortho")
    return scipy.fft.dctn(values, type=2, axes=axes, norm="ortho")


def _inverse_raw(bc: str, coeffs: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    if bc == "periodic":
        return scipy.fft.ifftn(coeffs, axes=axes, norm="ortho").real
    if bc == "dirichlet":
        return scipy.fft.idstn(coeffs, type=1, axes=axes, norm="ortho")
    return scipy.fft.idctn(coeffs, type=2, axes=axes, norm="ortho")


def forward_transform(f: Field) -> Field:
    """Physical node values to modal coefficients."""
    if f.rep != "physical":
        raise ConfigError("forward_transform expects a physical-space field")
    axes = _spatial_axes(f.grid, f.components)
    return f.with_data(_forward_raw(f.grid.bc, f.data, axes), rep="modal")


def inverse_transform(f: Field) -> Field:
    """Modal coefficients to physical node values."""
    if f.rep != "modal":
        raise ConfigError("inverse_transform expects a modal field")
    axes = _spatial_axes(f.grid, f.components)
    return f.with_data(_inverse_raw(f.grid.bc, f.data, axes), rep="physical")


def to_modal(f: Field) -> Field:
    return f if f.rep == "modal" else forward_transform(f)


def to_physical(f: Field) -> Field:
    return f if f.rep == "physical" else inverse_transform(f)


def derivative(f: Field, axis: int = 0, order: int = 1) -> Field:
    """Exact spectral derivative along ``axis``, returned in the input rep.

    Sine and cosine bases only admit even orders; odd orders would leave
    the span of the basis and raise :class:`ParityError`.
    """
    grid = f.grid
    if not 0 <= axis < grid.dim:
        raise ConfigError(f"axis {axis} out of range for dim {grid.dim}")
    if order < 1:
        raise ConfigError(f"derivative order must be >= 1, got {order}")
    if grid.bc != "periodic" and order % 2 != 0:
        raise ParityError(
            f"odd-order derivative not representable in the {grid.bc} basis"
        )
    k = grid.axis_modes
    if grid.bc == "periodic":
        mult = (2j * np.pi / grid.extent * k) ** order
    else:
        mult = (-((np.pi / grid.extent * k) ** 2)) ** (order // 2)
    shape = [1] * grid.dim
    shape[axis] = k.size
    mult = mult.reshape(shape)
    if f.components > 1:
        mult = mult[None, ...]
    coeffs = to_modal(f).data * mult
    out = f.with_data(coeffs.astype(grid.modal_dtype()), rep="modal")
    return out if f.rep == "modal" else inverse_transform(out)


def sobolev_norm(f: Field, s: float) -> float:
    """Discrete Sobolev norm of exponent ``s`` in ``[-2, 2]``.

    Computed as ``sqrt(dV * sum((1 + lambda_k)**s * |c_k|^2))`` where
    ``lambda_k`` is the grid Laplacian symbol; components are combined in
    quadrature.  ``s = 0`` is the plain ``L^2`` norm, ``s = 1`` the ``H^1``
    norm and ``s = -1`` the dual-space surrogate.
    """
    if not -2.0 <= s <= 2.0:
        raise ConfigError(f"sobolev exponent must lie in [-2, 2], got {s}")
    coeffs = to_modal(f).data
    weights = (1.0 + f.grid.laplacian_symbol) ** s
    total = float(np.sum(weights * np.abs(coeffs) ** 2))
    return math.sqrt(f.grid.cell_volume * total)


def l2_norm(f: Field) -> float:
    return sobolev_norm(f, 0.0)


def hermitian_symmetrize(coeffs: np.ndarray) -> np.ndarray:
    """Project a full Fourier coefficient array onto the real-field subspace.

    Averages each coefficient with the conjugate at the negated index.
    Every axis is treated as an fftn axis, so pass scalar (per-component)
    arrays only.
    """
    flipped = coeffs
    for ax in range(coeffs.ndim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return 0.5 * (coeffs + np.conj(flipped))


# -- dealiased products ------------------------------------------------------
#
# Nonlinear terms are evaluated by zero-padding the modal coefficients to a
# finer grid, multiplying pointwise there, and truncating back.  A factor of
# 2 removes aliasing from cubic products, 3/2 from quadratic ones.  The
# sine/cosine bases close under products of their parity extensions, so the
# same padding argument applies verbatim.


def _pad_factor_grid(grid: Grid, factor: float) -> int:
    m = grid.n * factor
    if abs(m - round(m)) > 1e-12:
        raise ConfigError(f"pad factor {factor} does not give an integer grid from n={grid.n}")
    return int(round(m))


def _embed_indices(bc: str, n: int, m: int) -> np.ndarray:
    """Positions of the coarse-grid modes inside the fine modal layout."""
    if bc == "periodic":
        return np.concatenate([np.arange(n // 2), np.arange(m - n // 2, m)])
    if bc == "dirichlet":
        return np.arange(n - 1)
    return np.arange(n)


def _padded_physical(grid: Grid, modal: np.ndarray, m: int) -> np.ndarray:
    """Evaluate a modal array on the ``m``-point fine grid."""
    fine_pts = m - 1 if grid.bc == "dirichlet" else m
    pos = _embed_indices(grid.bc, grid.n, m)
    fine = np.zeros((fine_pts,) * grid.dim, dtype=modal.dtype)
    if grid.dim == 1:
        fine[pos] = modal
    else:
        fine[np.ix_(pos, pos)] = modal
    # Orthonormal transforms rescale with grid size; compensate so the
    # fine-grid values agree with the coarse-grid function pointwise.
    fine *= (m / grid.n) ** (grid.dim / 2.0)
    return _inverse_raw(grid.bc, fine, tuple(range(grid.dim)))


def _truncated_modal(grid: Grid, fine_values: np.ndarray, m: int) -> np.ndarray:
    """Transform fine-grid values and project back onto the coarse band."""
    fine = _forward_raw(grid.bc, fine_values, tuple(range(grid.dim)))
    pos = _embed_indices(grid.bc, grid.n, m)
    if grid.dim == 1:
        coarse = fine[pos]
    else:
        coarse = fine[np.ix_(pos, pos)]
    return np.ascontiguousarray(coarse * (grid.n / m) ** (grid.dim / 2.0))


def dealiased_apply(
    grid: Grid,
    modal_inputs: list[np.ndarray],
    pointwise: Callable[..., np.ndarray],
    factor: float,
) -> np.ndarray:
    """Apply ``pointwise`` to modal inputs on a padded grid; return modal output.

    ``factor`` is the padding ratio: 2 suffices for cubic nonlinearities,
    3/2 for quadratic ones.
    """
    m = _pad_factor_grid(grid, factor)
    with np.errstate(over="ignore", invalid="ignore"):
        values = [_padded_physical(grid, c, m) for c in modal_inputs]
        product = pointwise(*values)
    return _truncated_modal(grid, product, m)
