"""Numerical laboratory for nudging-based data assimilation of parabolic PDEs."""

from .errors import BlowUpError, ConfigError, FitError, NudgeLabError, ParityError
from .spectral import (
    Field,
    Grid,
    derivative,
    forward_transform,
    inverse_transform,
    l2_norm,
    sobolev_norm,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "ConfigError",
    "FitError",
    "NudgeLabError",
    "ParityError",
    "Field",
    "Grid",
    "derivative",
    "forward_transform",
    "inverse_transform",
    "l2_norm",
    "sobolev_norm",
    "__version__",
]
