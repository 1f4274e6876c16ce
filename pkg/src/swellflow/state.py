"""Species constants and thermodynamic state points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import FARADAY
from .errors import DomainError


@dataclass(frozen=True)
class SpeciesSpec:
    """Per-species constants.

    ``specific_density`` is the intrinsic density (kg of j per m^3 of j).
    It may be ``math.inf`` for a species whose partial volume is neglected
    (ions in a dilute electrolyte).  ``charge`` is in C/kg.
    """

    name: str
    molar_mass: float
    specific_density: float
    charge: float = 0.0

    def __post_init__(self):
        if not self.molar_mass > 0:
            raise DomainError(f"species {self.name!r}: molar_mass must be > 0")
        if not self.specific_density > 0:
            raise DomainError(f"species {self.name!r}: specific_density must be > 0")
        if not math.isfinite(self.charge):
            raise DomainError(f"species {self.name!r}: charge must be finite")

    @classmethod
    def from_valence(cls, name, molar_mass, specific_density, valence):
        return cls(name, molar_mass, specific_density, valence * FARADAY / molar_mass)

    @property
    def specific_volume(self) -> float:
        return 1.0 / self.specific_density


WATER = SpeciesSpec("water", 0.018015, 997.0)
SODIUM = SpeciesSpec.from_valence("Na+", 0.022990, math.inf, +1)
CHLORIDE = SpeciesSpec.from_valence("Cl-", 0.035453, math.inf, -1)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError("partial_densities must be a 1-D sequence")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MixtureState:
    """One thermodynamic state point of the liquid phase.

    ``partial_densities`` are kg of species j per m^3 of liquid phase; the last
    entry is the solvent.  ``pressure`` is only read by models with a
    volume-filling constraint, where it is the liquid pressure that acts as the
    constraint's Lagrange multiplier; compressible models derive pressure from
    the densities and ignore it.
    """

    temperature: float
    volume_fraction: float
    partial_densities: np.ndarray
    electric_potential: float = 0.0
    pressure: float | None = None
    _rho: float = field(init=False, repr=False)

    def __post_init__(self):
        rho_j = _frozen_array(self.partial_densities)
        object.__setattr__(self, "partial_densities", rho_j)
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 < self.volume_fraction <= 1.0:
            raise DomainError(f"volume_fraction must lie in (0, 1], got {self.volume_fraction}")
        if rho_j.size == 0 or not np.all(np.isfinite(rho_j)):
            raise DomainError("partial_densities must be finite and non-empty")
        if np.any(rho_j < 0) or not np.any(rho_j > 0):
            raise DomainError("partial_densities must be >= 0 with at least one > 0")
        if not math.isfinite(self.electric_potential):
            raise DomainError("electric_potential must be finite")
        if self.pressure is not None and not math.isfinite(self.pressure):
            raise DomainError("pressure must be finite")
        object.__setattr__(self, "_rho", float(rho_j.sum()))

    @property
    def n_species(self) -> int:
        return self.partial_densities.size

    @property
    def density(self) -> float:
        return self._rho

    @property
    def mass_fractions(self) -> np.ndarray:
        return self.partial_densities / self._rho

    def replace(self, **changes) -> "MixtureState":
        return replace(self, **changes)

    @classmethod
    def from_mass_fractions(cls, temperature, volume_fraction, density, mass_fractions,
                            electric_potential=0.0, pressure=None):
        c = np.asarray(mass_fractions, dtype=float)
        return cls(temperature, volume_fraction, density * c, electric_potential, pressure)


def mole_fractions(species, partial_densities) -> np.ndarray:
    moles = np.asarray(partial_densities, dtype=float) / np.array([s.molar_mass for s in species])
    return moles / moles.sum()


def charge_density(species, partial_densities) -> float:
    """Liquid charge density q_e = sum_j rho_j z_j (C per m^3 of liquid)."""
    return float(sum(s.charge * r for s, r in zip(species, partial_densities)))
