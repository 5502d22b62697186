"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "NudgeLabError",
    "ConfigError",
    "ParityError",
    "BlowUpError",
    "FitError",
]


class NudgeLabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(NudgeLabError):
    """Invalid or inconsistent configuration (bad key, value, or combination)."""


class ParityError(NudgeLabError):
    """Operation incompatible with the parity of the spectral basis.

    Raised e.g. for odd-order derivatives in sine/cosine bases, where the
    result would leave the span of the basis.
    """


class BlowUpError(NudgeLabError):
    """Solution left the finite range during time integration.

    Carries the detection time and, when raised by the harness, the
    trajectory recorded up to the last finite sample.
    """

    def __init__(self, message: str, time: float | None = None, record=None):
        super().__init__(message)
        self.time = time
        self.record = record


class FitError(NudgeLabError):
    """Decay-rate fit could not be performed (too few usable points)."""
