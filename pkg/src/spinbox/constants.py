"""Physical constants (SI, CODATA 2018) and default species data."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    planck: float = 6.62607015e-34           # J s, exact since the 2019 SI
    bohr_radius: float = 5.29177210903e-11   # m
    atomic_mass_unit: float = 1.66053906660e-27  # kg

    def __post_init__(self):
        assert self.planck > 0.0
        assert self.bohr_radius > 0.0
        assert self.atomic_mass_unit > 0.0

    @property
    def hbar(self) -> float:
        return self.planck / (2.0 * math.pi)


CONSTANTS = PhysicalConstants()

PLANCK = CONSTANTS.planck
HBAR = CONSTANTS.hbar
BOHR_RADIUS = CONSTANTS.bohr_radius

#: Mass of one rubidium-87 atom in kg (86.909180531 u).
RB87_MASS = 86.909180531 * CONSTANTS.atomic_mass_unit
