"""Helmholtz-potential constitutive models of the liquid phase.

A model maps a :class:`MixtureState` to the intensive Helmholtz potential
psi (J/kg).  Partial derivatives are exposed in two parameterizations:

* direct: psi(T, rho_1..rho_N, eps), partials w.r.t. each partial density
  (others fixed) and w.r.t. eps (all densities fixed);
* tilde: psi~(T, rho, C_1..C_{N-1}, eps), partials w.r.t. total density at
  fixed mass fractions and w.r.t. each independent mass fraction at fixed
  total density (the solvent fraction C_N absorbs the change).

Subclasses override whichever partials they know analytically; the rest fall
back to central differences.  Models are immutable after construction.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import optimize, special

from . import fd
from .constants import GAS_CONSTANT, STANDARD_PRESSURE
from .errors import DomainError, PreconditionError
from .state import WATER, MixtureState, SpeciesSpec, mole_fractions

_ANALYTIC_HOOKS = ("dpsi_drho", "dpsi_deps", "dpsi_tilde_drho", "dpsi_tilde_dc")


class ConstitutiveModel:
    """Base class.  Subclasses must implement :meth:`psi`."""

    incompressible = False
    fd_policy = fd.DEFAULT_STEP

    def __init__(self, species: Sequence[SpeciesSpec], name: str | None = None):
        if len(species) < 1:
            raise DomainError("a model needs at least one species")
        self.species = tuple(species)
        self.name = name or type(self).__name__

    def __repr__(self):
        return f"{self.name}({', '.join(s.name for s in self.species)})"

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def solvent(self) -> SpeciesSpec:
        return self.species[-1]

    @property
    def molar_masses(self) -> np.ndarray:
        return np.array([s.molar_mass for s in self.species])

    @property
    def specific_volumes(self) -> np.ndarray:
        return np.array([1.0 / s.specific_density for s in self.species])

    @property
    def charges(self) -> np.ndarray:
        return np.array([s.charge for s in self.species])

    def has_analytic(self, hook: str) -> bool:
        if hook not in _ANALYTIC_HOOKS:
            raise KeyError(hook)
        return getattr(type(self), hook) is not getattr(ConstitutiveModel, hook)

    # -- potential and partials ---------------------------------------------

    def psi(self, state: MixtureState) -> float:
        raise NotImplementedError

    def closed_form_pressure(self, state: MixtureState) -> float | None:
        """Liquid pressure when the model knows it without differentiating psi."""
        return None

    def dpsi_drho(self, state: MixtureState) -> np.ndarray:
        return np.array([fd.fd_partial(self.psi, fd.partial_density(j), state,
                                       self.fd_policy).value
                         for j in range(self.n_species)])

    def dpsi_deps(self, state: MixtureState) -> float:
        return fd.fd_partial(self.psi, fd.volume_fraction(), state, self.fd_policy).value

    def dpsi_tilde_drho(self, state: MixtureState) -> float:
        return fd.fd_partial(self.psi, fd.total_density(), state, self.fd_policy).value

    def dpsi_tilde_dc(self, state: MixtureState) -> np.ndarray:
        return np.array([fd.fd_partial(self.psi, fd.mass_fraction(k), state,
                                       self.fd_policy).value
                         for k in range(self.n_species - 1)])

    # -- state construction ---------------------------------------------------

    def validate(self, state: MixtureState) -> None:
        if state.n_species != self.n_species:
            raise PreconditionError(
                f"{self.name} has {self.n_species} species, state has {state.n_species}")

    def state_at(self, temperature, pressure, mass_fractions, volume_fraction,
                 electric_potential=0.0) -> MixtureState:
        """State with the given liquid pressure, found by inverting p(rho) at fixed C."""
        c = np.asarray(mass_fractions, dtype=float)

        def excess(log_rho):
            st = MixtureState(temperature, volume_fraction, c * math.exp(log_rho),
                              electric_potential)
            rho = st.density
            return rho * rho * self.dpsi_tilde_drho(st) - pressure

        lo, hi = math.log(1e-3), math.log(1e4)
        for _ in range(60):
            if excess(lo) < 0:
                break
            lo -= 2.0
        for _ in range(60):
            if excess(hi) > 0:
                break
            hi += 2.0
        if not (excess(lo) < 0 < excess(hi)):
            raise DomainError(f"{self.name}: no density reproduces pressure {pressure} Pa")
        log_rho = optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                  maxiter=200)
        return MixtureState(temperature, volume_fraction, c * math.exp(log_rho),
                            electric_potential)

    def bulk_reference(self, j: int, temperature: float) -> tuple[float, float]:
        """(p0, mu0_j(T, p0)) of the incompressible bulk counterpart of species j."""
        raise PreconditionError(f"{self.name} defines no incompressible bulk reference")


class SyntheticPolynomial(ConstitutiveModel):
    """Smooth polynomial psi~(T, rho, C, eps) with cross terms (preset P1).

    Coefficients keep dpsi~/drho > 0 and dpsi~/dC_k > 0 on the sampling box,
    so pressures and potential differences never pass through zero.
    """

    def __init__(self, species: Sequence[SpeciesSpec] | None = None):
        if species is None:
            species = (SpeciesSpec("a", 0.060, 1320.0), SpeciesSpec("b", 0.046, 789.0),
                       SpeciesSpec("solvent", 0.018015, 997.0))
        super().__init__(species, "P1")
        n_free = self.n_species - 1
        self.b = 0.3 + 0.1 * np.arange(n_free)
        self.c = 40.0 * (np.arange(n_free) + 1.0)

    def _tilde(self, T, rho, c, eps):
        """psi~ and its tilde partials (value, d/drho, d/dC_k, d/deps)."""
        b, cc = self.b, self.c
        a1 = 0.5 + T / 1000.0
        val = 50.0 + a1 * rho + 1e-4 * rho**2 + float(b @ c) * rho + float(cc @ c**2) + 200.0 * eps**2
        d_rho = a1 + 2e-4 * rho + float(b @ c)
        d_c = b * rho + 2.0 * cc * c
        d_eps = 400.0 * eps
        if c.size:
            val += 0.2 * eps * rho * c[0] + 30.0 * eps**2 * c[0]
            d_rho += 0.2 * eps * c[0]
            d_c[0] += 0.2 * eps * rho + 30.0 * eps**2
            d_eps += 0.2 * rho * c[0] + 60.0 * eps * c[0]
        return val, d_rho, d_c, d_eps

    def _eval(self, s):
        return self._tilde(s.temperature, s.density, s.mass_fractions[:-1], s.volume_fraction)

    def psi(self, state):
        return self._eval(state)[0]

    def dpsi_tilde_drho(self, state):
        return self._eval(state)[1]

    def dpsi_tilde_dc(self, state):
        return self._eval(state)[2]

    def dpsi_deps(self, state):
        return self._eval(state)[3]

    def dpsi_drho(self, state):
        _, d_rho, d_c, _ = self._eval(state)
        c = state.mass_fractions[:-1]
        rho = state.density
        # chain rule through rho = sum rho_j and C_k = rho_k / rho
        out = np.full(self.n_species, d_rho - float(d_c @ c) / rho)
        out[:-1] += d_c / rho
        return out


def swelling_energy(eps, p0):
    """Volume-fraction term f(eps) (J per m^3 of liquid) with f(1) = 0.

    eps * f'(eps) = p0 * (exp(1/eps - 1) - 1), i.e. the exponential hydration
    law with the parallel-platelet map lambda_s / lambda_l = 1/eps - 1.
    """
    return -p0 * ((special.expi(1.0 / eps) - special.expi(1.0)) / math.e + math.log(eps))


def swelling_energy_derivative(eps, p0):
    return p0 * math.expm1(1.0 / eps - 1.0) / eps


class IdealIncompressibleSolution(ConstitutiveModel):
    """Mixture of incompressible species (preset P2).

    Volume filling, sum_j rho_j / rho0_j = 1, is enforced with the liquid
    pressure as Lagrange multiplier, so every chemical potential takes the form

        mu_j = mu0_j + (p - p0) / rho0_j + (R T / m_j) ln a_j

    ``mixing="raoult"`` uses a_j = x_j (ideal solution).  ``mixing="dilute"``
    gives solutes the free energy R T phi c (ln(c / c_ref) - 1) per unit liquid
    volume, which makes the solvent obey the modified van't Hoff law
    p - p_B = R T phi sum c + pi0 with p_B a pure-solvent reservoir pressure.
    """

    incompressible = True
    manifold_tol = 1e-8

    def __init__(self, species: Sequence[SpeciesSpec] | None = None, *,
                 mixing: str = "raoult", reference_pressure: float = STANDARD_PRESSURE,
                 reference_potentials: Sequence[float] | None = None,
                 osmotic_coefficient: float = 1.0, pi0: float = 0.0,
                 reference_concentration: float = 1000.0):
        if species is None:
            species = (SpeciesSpec("urea", 0.060056, 1320.0), SpeciesSpec("ethanol", 0.046069, 789.0),
                       WATER)
        super().__init__(species, getattr(self, "_preset_name", "P2"))
        if mixing not in ("raoult", "dilute"):
            raise DomainError(f"unknown mixing rule {mixing!r}")
        if not any(math.isfinite(s.specific_density) for s in self.species):
            raise DomainError("at least one species must occupy volume")
        self.mixing = mixing
        self.p0 = float(reference_pressure)
        mu0 = np.zeros(self.n_species) if reference_potentials is None else reference_potentials
        self.mu0 = np.array(mu0, dtype=float)
        if self.mu0.shape != (self.n_species,):
            raise DomainError("reference_potentials must have one entry per species")
        self.osmotic_coefficient = float(osmotic_coefficient)
        self.pi0 = float(pi0)
        self.c_ref = float(reference_concentration)

    # volume-fraction contribution; zero here, overridden by the swelling preset
    def _f(self, eps):
        return 0.0

    def _df(self, eps):
        return 0.0

    def validate(self, state):
        super().validate(state)
        if state.pressure is None:
            raise PreconditionError(f"{self.name}: incompressible models need state.pressure")
        fill = self.volume_filling(state)
        if abs(fill - 1.0) > self.manifold_tol:
            raise PreconditionError(
                f"{self.name}: state violates volume filling (sum rho_j/rho0_j = {fill!r})")

    def volume_filling(self, state) -> float:
        return float(self.specific_volumes @ state.partial_densities)

    def incompressible_density(self, mass_fractions) -> float:
        return 1.0 / float(self.specific_volumes @ np.asarray(mass_fractions, dtype=float))

    def state_at(self, temperature, pressure, mass_fractions, volume_fraction,
                 electric_potential=0.0):
        c = np.asarray(mass_fractions, dtype=float)
        return MixtureState(temperature, volume_fraction, c * self.incompressible_density(c),
                            electric_potential, pressure)

    def bulk_reference(self, j, temperature):
        return self.p0, float(self.mu0[j])

    def closed_form_pressure(self, state):
        # the multiplier variable is the pressure itself
        self.validate(state)
        return float(state.pressure)

    # -- internals --------------------------------------------------------------

    def _concentrations(self, rho_j):
        return rho_j / self.molar_masses

    def _osmotic(self, state) -> float:
        """Pressure carried by the solutes (dilute mixing only)."""
        if self.mixing != "dilute":
            return 0.0
        c = self._concentrations(state.partial_densities)[:-1]
        return GAS_CONSTANT * state.temperature * self.osmotic_coefficient * float(c.sum()) + self.pi0

    def multiplier(self, state) -> float:
        """Lagrange multiplier of the volume-filling constraint."""
        if state.pressure is None:
            raise PreconditionError(f"{self.name}: incompressible models need state.pressure")
        return state.pressure - self.p0 - self._osmotic(state) + self._f(state.volume_fraction)

    def _free_mixing(self, state) -> float:
        """Mixing free energy per unit liquid volume."""
        T = state.temperature
        rho_j = state.partial_densities
        if self.mixing == "raoult":
            n = self._concentrations(rho_j)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(n > 0, n * np.log(n / n.sum()), 0.0)
            return GAS_CONSTANT * T * float(terms.sum())
        c = self._concentrations(rho_j)[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(c > 0, c * (np.log(c / self.c_ref) - 1.0), 0.0)
        return GAS_CONSTANT * T * self.osmotic_coefficient * float(terms.sum()) - self.pi0

    def _mixing_potentials(self, state) -> np.ndarray:
        """d(mixing free energy)/d rho_j, J/kg."""
        T = state.temperature
        rho_j = state.partial_densities
        m = self.molar_masses
        with np.errstate(divide="ignore"):
            if self.mixing == "raoult":
                return GAS_CONSTANT * T / m * np.log(mole_fractions(self.species, rho_j))
            out = np.zeros(self.n_species)
            c = self._concentrations(rho_j)[:-1]
            out[:-1] = GAS_CONSTANT * T * self.osmotic_coefficient / m[:-1] * np.log(c / self.c_ref)
            return out

    # -- potential and partials ---------------------------------------------------

    def psi(self, state):
        rho_j = state.partial_densities
        lam = self.multiplier(state)
        fill = float(self.specific_volumes @ rho_j)
        rho_psi = (float(self.mu0 @ rho_j) - self.p0 + lam * (fill - 1.0)
                   + self._free_mixing(state) + self._f(state.volume_fraction))
        return rho_psi / state.density

    def chemical_potentials(self, state) -> np.ndarray:
        """d(rho psi)/d rho_j in closed form."""
        return self.mu0 + self.multiplier(state) * self.specific_volumes + self._mixing_potentials(state)

    def dpsi_drho(self, state):
        return (self.chemical_potentials(state) - self.psi(state)) / state.density

    def dpsi_deps(self, state):
        return self._df(state.volume_fraction) / state.density

    def dpsi_tilde_drho(self, state):
        # psi~ = sum C mu0 - p0/rho + lam (v(C) - 1/rho) + F_mix/rho + f/rho
        rho = state.density
        num = self.p0 + self.multiplier(state) - self._f(state.volume_fraction)
        if self.mixing == "dilute":
            num += self._osmotic(state)
        return num / rho**2

    def dpsi_tilde_dc(self, state):
        lam = self.multiplier(state)
        v = self.specific_volumes
        m = self.molar_masses
        T = state.temperature
        out = self.mu0[:-1] - self.mu0[-1] + lam * (v[:-1] - v[-1])
        if self.mixing == "raoult":
            lnx = np.log(mole_fractions(self.species, state.partial_densities))
            out = out + GAS_CONSTANT * T * (lnx[:-1] / m[:-1] - lnx[-1] / m[-1])
        else:
            c = self._concentrations(state.partial_densities)[:-1]
            out = out + GAS_CONSTANT * T * self.osmotic_coefficient * np.log(c / self.c_ref) / m[:-1]
        return out


class ExponentialSwelling(IdealIncompressibleSolution):
    """Incompressible solution plus a volume-fraction term (preset P3).

    The term f(eps)/rho in psi gives the swelling pressure
    pi = p0_s (exp(1/eps - 1) - 1), the exponential hydration law evaluated at
    lambda_s/lambda_l = 1/eps - 1.  At fixed chemical potential the liquid
    pressure exceeds the pressure of an equilibrated pure reservoir by
    -f(eps) = int_eps^1 pi(s)/s ds.
    """

    _preset_name = "P3"

    def __init__(self, species: Sequence[SpeciesSpec] | None = None, *,
                 swelling_p0: float = STANDARD_PRESSURE, **kwargs):
        if species is None:
            species = (WATER,)
        if not swelling_p0 > 0:
            raise DomainError("swelling_p0 must be > 0")
        self.swelling_p0 = float(swelling_p0)
        super().__init__(species, **kwargs)

    def _f(self, eps):
        return swelling_energy(eps, self.swelling_p0)

    def _df(self, eps):
        return swelling_energy_derivative(eps, self.swelling_p0)

    def swelling_offset(self, eps) -> float:
        """p_l - p_B for a single neutral species at equilibrium."""
        return -self._f(eps)


class CompressibleLiquid(ConstitutiveModel):
    """Single-species liquid with p = p_ref + K ln(rho/rho_ref), optionally swelling.

    Used where a bulk Helmholtz potential depending on density alone is needed.
    """

    def __init__(self, species: SpeciesSpec = WATER, *, bulk_modulus: float = 2.2e9,
                 reference_density: float | None = None,
                 reference_pressure: float = STANDARD_PRESSURE,
                 swelling_p0: float | None = None):
        super().__init__((species,), "compressible")
        self.K = float(bulk_modulus)
        self.rho_ref = float(reference_density or species.specific_density)
        self.p_ref = float(reference_pressure)
        self.swelling_p0 = swelling_p0

    def _f(self, eps):
        return 0.0 if self.swelling_p0 is None else swelling_energy(eps, self.swelling_p0)

    def psi(self, state):
        rho = state.density
        lr = math.log(rho / self.rho_ref)
        return (-self.p_ref - self.K * (lr + 1.0) + self._f(state.volume_fraction)) / rho

    def bulk_pressure(self, rho):
        return self.p_ref + self.K * math.log(rho / self.rho_ref)

    def dpsi_tilde_drho(self, state):
        rho = state.density
        return (self.bulk_pressure(rho) - self._f(state.volume_fraction)) / rho**2

    def dpsi_drho(self, state):
        return np.array([self.dpsi_tilde_drho(state)])

    def dpsi_tilde_dc(self, state):
        return np.zeros(0)

    def dpsi_deps(self, state):
        if self.swelling_p0 is None:
            return 0.0
        return swelling_energy_derivative(state.volume_fraction, self.swelling_p0) / state.density

    def gibbs_bulk(self, rho):
        """G = psi + p/rho of the non-swelling liquid at density rho."""
        return (-self.p_ref - self.K * (math.log(rho / self.rho_ref) + 1.0) + self.bulk_pressure(rho)) / rho


PRESETS = {
    "P1": SyntheticPolynomial,
    "P2": IdealIncompressibleSolution,
    "P3": ExponentialSwelling,
    "compressible": CompressibleLiquid,
}


def make_preset(name: str, **kwargs) -> ConstitutiveModel:
    try:
        cls = PRESETS[name]
    except KeyError:
        raise PreconditionError(f"unknown model preset {name!r}; choose from {sorted(PRESETS)}") from None
    return cls(**kwargs)
