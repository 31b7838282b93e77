"""Frequency to wavevector mapping.

Every other module works with ``(k, chi)`` pairs and never with a dispersion
relation directly, so a photonic model only has to be added here.

Units are natural: hbar = 1 and 2m = 1, hence E = omega = k**2 outside the
barriers and chi = sqrt(V0 - omega) inside them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError


class DispersionKind(str, Enum):
    NONRELATIVISTIC_PARTICLE = "nonrelativistic-particle"


@dataclass(frozen=True)
class DispersionModel:
    """Dispersion of the free and barrier regions.

    ``barrier_height`` may be zero, which describes free propagation
    everywhere; the tunneling interval is then empty.
    """

    barrier_height: float
    kind: DispersionKind = DispersionKind.NONRELATIVISTIC_PARTICLE

    def __post_init__(self):
        object.__setattr__(self, "kind", DispersionKind(self.kind))
        v0 = float(self.barrier_height)
        if not math.isfinite(v0) or v0 < 0.0:
            raise DomainError(f"barrier_height must be finite and >= 0, got {v0!r}")
        object.__setattr__(self, "barrier_height", v0)

    @property
    def tunneling_interval(self) -> tuple[float, float]:
        return (0.0, self.barrier_height)

    def free_wavenumber(self, omega):
        """Propagating wavevector k(omega) in the barrier-free regions."""
        return np.sqrt(omega)

    def barrier_rate(self, omega):
        """Complex decay rate inside a barrier.

        Real and positive below the barrier top, purely imaginary (propagating)
        above it.
        """
        return np.sqrt(self.barrier_height - np.asarray(omega, dtype=float) + 0j)

    def omega_of_k(self, k):
        return np.asarray(k, dtype=float) ** 2

    def dk_domega(self, omega):
        return 0.5 / np.sqrt(omega)

    def dchi_domega(self, omega):
        return -0.5 / np.sqrt(self.barrier_height - np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class Wavevectors:
    k: float
    chi: float
    group_velocity: float
    dchi_domega: float

    @property
    def dk_domega(self) -> float:
        return 1.0 / self.group_velocity


def dispersion_eval(model: DispersionModel, omega: float) -> Wavevectors:
    """Wavevectors at ``omega`` in the tunneling regime 0 < omega < V0.

    The endpoints are excluded because downstream formulas divide by both
    k and chi.
    """
    lo, hi = model.tunneling_interval
    omega = float(omega)
    if not (lo < omega < hi):
        raise DomainError(
            f"omega={omega!r} outside the admissible open interval ({lo}, {hi})"
        )
    k = float(model.free_wavenumber(omega))
    chi = float(model.barrier_rate(omega).real)
    return Wavevectors(
        k=k,
        chi=chi,
        group_velocity=1.0 / float(model.dk_domega(omega)),
        dchi_domega=float(model.dchi_domega(omega)),
    )
