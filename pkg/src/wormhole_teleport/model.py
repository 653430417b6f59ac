"""Channel parameters, unit conventions and the regime taxonomy.

Energies are measured with the intra-system coupling fixed at ``J = 1/4``;
all times are in the corresponding units.  The temperature is infinite
throughout, so no inverse temperature appears anywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

J_UNIT = 0.25

#: largest |g| accepted; the coupling unitary is 2*pi-periodic in g
G_LIMIT = math.pi


class Regime(enum.IntEnum):
    """Teleportation regime, ordered ``QUANTUM > CLASSICAL > NO_SIGNAL``."""

    NO_SIGNAL = 0
    CLASSICAL = 1
    QUANTUM = 2

    @property
    def label(self) -> str:
        return {0: "NoSignal", 1: "Classical", 2: "Quantum"}[int(self)]


@dataclass(frozen=True)
class ModelParams:
    """Large-N channel parameters.

    Parameters
    ----------
    gamma : float
        System-environment coupling ratio ``V / J``, non-negative.
    g : float
        Teleportation coupling, ``|g| <= pi``.
    """

    gamma: float
    g: float
    j_unit: float = field(default=J_UNIT, init=False)

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise DomainError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not math.isfinite(self.g) or abs(self.g) > G_LIMIT:
            raise DomainError(f"|g| must be <= pi, got {self.g!r}")

    @property
    def v_coupling(self) -> float:
        return self.gamma * self.j_unit

    @property
    def decay_rate(self) -> float:
        return 4.0 * (self.j_unit + self.v_coupling)

    @property
    def lyapunov(self) -> float:
        return 1.0 - self.gamma


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` for ``k = 0 .. n_steps``."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise DomainError(f"t_max must be positive, got {self.t_max!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps!r}")

    @classmethod
    def from_step(cls, t_max: float, dt: float) -> "TimeGrid":
        """Grid reaching exactly ``t_max`` with step no larger than ``dt``."""
        if not dt > 0:
            raise DomainError(f"dt must be positive, got {dt!r}")
        n = max(1, math.ceil(t_max / dt - 1e-9))
        return cls(t_max=float(t_max), n_steps=n)

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    def points(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps + 1)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_max, self.n_steps * factor)


def derived_rates(params: ModelParams) -> tuple[float, float]:
    """Return ``(Gamma, kappa) = (1 + gamma, 1 - gamma)``.

    ``Gamma = 4 (J + V)`` with ``V = gamma J`` and ``J = 1/4``; ``kappa`` is
    the quantum Lyapunov exponent.
    """
    return 1.0 + params.gamma, 1.0 - params.gamma


def critical_points() -> tuple[float, float]:
    """Quantum-classical point ``3 - 2 sqrt(2)`` and no-signal point ``1``."""
    return 3.0 - 2.0 * math.sqrt(2.0), 1.0


#: negativity threshold on |K|
K_QUANTUM = math.sqrt(2.0) - 1.0
