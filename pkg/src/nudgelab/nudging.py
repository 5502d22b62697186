"""Nudging feedback term and the gain/resolution feasibility region.

The nudged system relaxes the observed part of the state toward the
reference trajectory:

    v' + A v = F(v) - mu * (I_delta v - I_delta u)

The convergence analysis admits any pair ``(mu, delta)`` with
``1 + mu^2 delta^2 - mu < 0``; :func:`feasible_mu_interval` returns the
resulting open interval of gains, which is nonempty iff ``delta < 1/2``
and collapses to ``(1, inf)`` as ``delta -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .observation import ObservationOperator, observe
from .spectral import Field

__all__ = [
    "NudgeConfig",
    "FeasibleInterval",
    "feasible_mu_interval",
    "nudge_tendency",
]


@dataclass(frozen=True)
class NudgeConfig:
    """Gain and observation operator of one nudged run.

    ``mu = 0`` disables the feedback entirely.  Spectral observers are
    folded into the implicit solve; cell-average observers are treated
    explicitly, which is what makes the ``dt * mu <= 1`` step guard
    necessary.
    """

    mu: float
    observer: ObservationOperator

    def __post_init__(self):
        if not (self.mu >= 0.0 and math.isfinite(self.mu)):
            raise ConfigError(f"nudging gain mu must be finite and >= 0, got {self.mu}")

    @property
    def implicit(self) -> bool:
        return self.observer.kind == "low_pass"

    @property
    def delta(self) -> float:
        return self.observer.delta


@dataclass(frozen=True)
class FeasibleInterval:
    """Open interval of admissible gains for a given delta."""

    delta: float
    feasible: bool
    lower: float
    upper: float

    def contains(self, mu: float) -> bool:
        return self.feasible and self.lower < mu < self.upper


def feasible_mu_interval(delta: float) -> FeasibleInterval:
    """Gains satisfying ``1 + mu^2 delta^2 - mu < 0``, as an open interval.

    The quadratic has real roots only for ``delta < 1/2``.  The lower root
    is evaluated in the rationalized form ``2 / (1 + sqrt(1 - 4 delta^2))``
    which stays accurate as ``delta -> 0`` (limit interval ``(1, inf)``).
    """
    if not (delta > 0.0 and math.isfinite(delta)):
        raise ConfigError(f"delta must be positive and finite, got {delta}")
    disc = 1.0 - 4.0 * delta * delta
    if disc <= 0.0:
        return FeasibleInterval(delta, False, math.nan, math.nan)
    root = math.sqrt(disc)
    lower = 2.0 / (1.0 + root)
    upper = (1.0 + root) / (2.0 * delta * delta)
    return FeasibleInterval(delta, True, lower, upper)


def nudge_tendency(cfg: NudgeConfig, v: Field, u_ref: Field) -> Field:
    """Feedback term ``-mu * I_delta(v - u_ref)`` in the rep of ``v``.

    Computed from the single difference field, so a synchronized pair
    returns exact zeros regardless of rounding.
    """
    if cfg.mu == 0.0:
        return v.with_data(v.data * 0.0)
    diff = observe(cfg.observer, v - u_ref)
    return diff.with_data(-cfg.mu * diff.data)
