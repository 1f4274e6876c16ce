"""Darcy-type driving forces for a swelling porous medium.

Every formulation returns the right-hand side of ``R . v = force`` where ``v``
is the liquid velocity relative to the solid, as a :class:`DrivingForce`
with a per-term breakdown.  Vectors are 3-D; 1-D problems put their
gradients on the x axis.

Units: the resistivity ``R`` is in Pa s/m^2, ``Q_j`` is chosen so that
``Q_j . grad(mu_j)`` is a velocity (m/s) and ``r_j`` is in kg/(m^3 s), which
makes every hydration term ``r_j Q_j . grad(mu_j)`` a force density (N/m^3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from . import thermo
from .constants import GAS_CONSTANT
from .errors import DomainError, PreconditionError
from .fd import StepPolicy, fd_gradient
from .models import ConstitutiveModel
from .state import MixtureState

EX = np.array([1.0, 0.0, 0.0])


class Formulation(str, Enum):
    PRESSURE = "PressureForm"
    GIBBS = "GibbsForm"
    POTENTIAL = "PotentialForm"
    BULK = "BulkForm"
    SINGLE_COMPONENT_BULK = "SingleComponentBulk"


def _vec3(v, name) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr * EX
    if arr.shape != (3,):
        raise DomainError(f"{name} must be a scalar or a 3-vector")
    return arr


def _per_species(v, n, name) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 1 and arr.shape == (n,):
        arr = arr[:, None] * EX
    if arr.shape != (n, 3):
        raise DomainError(f"{name} must have shape ({n},) or ({n}, 3)")
    return arr


@dataclass(frozen=True)
class FlowCoefficients:
    """Resistivity tensor plus optional per-species Fick mobility and hydration coefficients.

    Units: resistivity R in kg/(m^3 s), so R v is a force density; mobility Q_j
    in s, so Q_j grad(mu_j) is a velocity; hydration r_j in kg/(m^3 s), so
    r_j Q_j grad(mu_j) is again a force density.
    """

    resistivity: np.ndarray
    fick_mobility: np.ndarray | None = None
    hydration_coeff: np.ndarray | None = None

    def __post_init__(self):
        R = np.asarray(self.resistivity, dtype=float)
        if R.ndim == 0:
            R = float(R) * np.eye(3)
        if R.shape != (3, 3) or not np.all(np.isfinite(R)):
            raise DomainError("resistivity must be a finite scalar or 3x3 tensor")
        if not np.allclose(R, R.T, rtol=1e-12, atol=0.0):
            raise DomainError("resistivity must be symmetric")
        try:
            np.linalg.cholesky(R)
        except np.linalg.LinAlgError:
            raise DomainError("resistivity must be positive definite") from None
        object.__setattr__(self, "resistivity", R)
        if self.fick_mobility is not None:
            Q = np.asarray(self.fick_mobility, dtype=float)
            if Q.ndim == 1:
                Q = Q[:, None, None] * np.eye(3)
            if Q.ndim != 3 or Q.shape[1:] != (3, 3) or not np.all(np.isfinite(Q)):
                raise DomainError("fick_mobility must be finite with shape (N,) or (N, 3, 3)")
            object.__setattr__(self, "fick_mobility", Q)
        if self.hydration_coeff is not None:
            r = np.asarray(self.hydration_coeff, dtype=float)
            if r.ndim != 1 or not np.all(np.isfinite(r)):
                raise DomainError("hydration_coeff must be a finite 1-D array")
            object.__setattr__(self, "hydration_coeff", r)
        if (self.fick_mobility is not None and self.hydration_coeff is not None
                and len(self.fick_mobility) != len(self.hydration_coeff)):
            raise DomainError("fick_mobility and hydration_coeff disagree on species count")

    @classmethod
    def isotropic(cls, resistivity: float, mobility=None, hydration=None) -> "FlowCoefficients":
        return cls(resistivity * np.eye(3), mobility, hydration)

    def diffusive_velocities(self, grad_mu: np.ndarray) -> np.ndarray:
        """v_j - v_l = Q_j . grad(mu_j), one row per species."""
        if self.fick_mobility is None:
            return np.zeros_like(grad_mu)
        if len(self.fick_mobility) != len(grad_mu):
            raise PreconditionError("fick_mobility species count does not match the model")
        return np.einsum("jab,jb->ja", self.fick_mobility, grad_mu)

    def hydration_force(self, grad_mu: np.ndarray) -> np.ndarray:
        """sum_j r_j Q_j . grad(mu_j)."""
        if self.hydration_coeff is None or self.fick_mobility is None:
            return np.zeros(3)
        if len(self.hydration_coeff) != len(grad_mu):
            raise PreconditionError("hydration_coeff species count does not match the model")
        return self.hydration_coeff @ self.diffusive_velocities(grad_mu)


@dataclass(frozen=True)
class LocalGradients:
    """Spatial gradients at one point (isothermal).

    Bulk entries (``grad_pB``, ``grad_a``, ``E_bulk``) describe the reservoir
    in electrochemical equilibrium with the vicinal liquid and may be ``None``
    when no formulation needing them is evaluated.
    """

    grad_p: np.ndarray
    grad_eps: np.ndarray
    grad_rho: np.ndarray
    grad_C: np.ndarray
    grad_mu: np.ndarray
    grad_G: np.ndarray
    E_field: np.ndarray = field(default_factory=lambda: np.zeros(3))
    grad_pB: np.ndarray | None = None
    grad_a: np.ndarray | None = None
    E_bulk: np.ndarray | None = None

    @classmethod
    def raw(cls, n_species, *, grad_p=0.0, grad_eps=0.0, grad_rho=None, grad_C=None,
            grad_mu=None, grad_G=0.0, E_field=0.0, grad_pB=None, grad_a=None, E_bulk=None):
        """Gradients supplied directly; scalars go on the x axis, missing arrays are zero."""
        zeros = np.zeros((n_species, 3))

        def sp(v, name):
            return zeros.copy() if v is None else _per_species(v, n_species, name)

        return cls(_vec3(grad_p, "grad_p"), _vec3(grad_eps, "grad_eps"), sp(grad_rho, "grad_rho"),
                   sp(grad_C, "grad_C"), sp(grad_mu, "grad_mu"), _vec3(grad_G, "grad_G"),
                   _vec3(E_field, "E_field"),
                   None if grad_pB is None else _vec3(grad_pB, "grad_pB"),
                   None if grad_a is None else _per_species(grad_a, n_species, "grad_a"),
                   None if E_bulk is None else _vec3(E_bulk, "E_bulk"))

    @staticmethod
    def _profile(model, state, bulk):
        n = model.n_species
        parts = [[thermo.liquid_pressure(model, state), state.volume_fraction],
                 state.partial_densities, state.mass_fractions,
                 thermo.chemical_potentials(model, state),
                 [thermo.gibbs_potential(model, state), state.electric_potential]]
        if bulk is not None:
            b = bulk(state)
            acts = np.asarray(b.activities, dtype=float)
            if acts.shape != (n,):
                raise PreconditionError("bulk map returned the wrong number of activities")
            parts += [[b.pressure], acts, [b.electric_potential]]
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    @classmethod
    def _unpack(cls, n, d, with_bulk):
        i = 0

        def take(k):
            nonlocal i
            out = d[i:i + k]
            i += k
            return out

        p, eps = take(2)
        rho, C, mu = take(n), take(n), take(n)
        G, phi = take(2)
        kw = {}
        if with_bulk:
            (pB,), a, (phiB,) = take(1), take(n), take(1)
            kw = dict(grad_pB=pB, grad_a=a, E_bulk=-phiB)
        return cls.raw(n, grad_p=p, grad_eps=eps, grad_rho=rho, grad_C=C, grad_mu=mu,
                       grad_G=G, E_field=-phi, **kw)

    @classmethod
    def from_path(cls, model: ConstitutiveModel, path: Callable[[float], MixtureState], x: float,
                  *, step: float = 1e-3, bulk: Callable | str | None = "auto") -> "LocalGradients":
        """Gradients along x of a smooth state path s(x) by Richardson-extrapolated FD.

        ``bulk="auto"`` attaches the open-membrane reservoir of
        :func:`thermo.bulk_equilibrium_map` for incompressible models; pass a
        callable ``state -> BulkState`` to use another reservoir, or ``None``.
        """
        if bulk == "auto":
            bulk = (lambda s: thermo.bulk_equilibrium_map(model, s)) if model.incompressible else None
        policy = StepPolicy(rel=0.0, abs=step)
        d = fd_gradient(lambda xx: cls._profile(model, path(xx), bulk), x, policy)
        return cls._unpack(model.n_species, d, bulk is not None)

    @classmethod
    def from_state_pair(cls, model: ConstitutiveModel, left: MixtureState, right: MixtureState,
                        dx: float, *, bulk: Callable | str | None = "auto") -> "LocalGradients":
        """Two-point differences between neighbouring states a distance ``dx`` apart."""
        if not dx > 0:
            raise DomainError("dx must be > 0")
        if bulk == "auto":
            bulk = (lambda s: thermo.bulk_equilibrium_map(model, s)) if model.incompressible else None
        d = (cls._profile(model, right, bulk) - cls._profile(model, left, bulk)) / dx
        return cls._unpack(model.n_species, d, bulk is not None)


@dataclass(frozen=True)
class DrivingForce:
    total: np.ndarray
    breakdown: dict
    warnings: tuple = ()

    @classmethod
    def from_terms(cls, terms: dict, warnings=()) -> "DrivingForce":
        total = np.zeros(3)
        for v in terms.values():
            total = total + v
        return cls(total, dict(terms), tuple(warnings))


def _lorentz(model, state, E):
    return state.volume_fraction * thermo.charge_density(model, state) * E


def _pressure_form(model, state, grads, coeffs, **_):
    eps = state.volume_fraction
    return {"pressure": -eps * grads.grad_p,
            "swelling": -thermo.swelling_pressure(model, state) * grads.grad_eps,
            "lorentz": _lorentz(model, state, grads.E_field),
            "hydration": -coeffs.hydration_force(grads.grad_mu)}


def _gibbs_form(model, state, grads, coeffs, **_):
    eps, rho = state.volume_fraction, state.density
    model.validate(state)
    d_rho = np.asarray(model.dpsi_drho(state), dtype=float)
    return {"pressure": -eps * rho * grads.grad_G,
            "concentration": eps * rho**2 * (d_rho @ grads.grad_C),
            "lorentz": _lorentz(model, state, grads.E_field),
            # the vicinal mu_j gradient stands in for the diffusive-potential gradient
            "hydration": -coeffs.hydration_force(grads.grad_mu)}


def _potential_form(model, state, grads, coeffs, **_):
    eps = state.volume_fraction
    return {"potential": -eps * (state.partial_densities @ grads.grad_mu),
            "lorentz": _lorentz(model, state, grads.E_field),
            "hydration": -coeffs.hydration_force(grads.grad_mu)}


def assert_volume_filling(model: ConstitutiveModel, state: MixtureState, tol: float = 1e-8) -> float:
    """Return eps * sum_j rho_j/rho0_j after checking sum_j rho_j/rho0_j = 1."""
    fill = float(model.specific_volumes @ state.partial_densities)
    if abs(fill - 1.0) > tol:
        raise PreconditionError(f"BulkForm requires incompressible volume filling; "
                                f"sum rho_j/rho0_j = {fill!r}")
    return state.volume_fraction * fill


def bulk_potential_gradients(model: ConstitutiveModel, state: MixtureState, grads: LocalGradients,
                             activities) -> np.ndarray:
    """grad(mu_Bj) = grad(p_B)/rho0_j + R T/(m_j a_j) grad(a_j) for constant specific densities."""
    a = np.asarray(activities, dtype=float)
    rt_ma = GAS_CONSTANT * state.temperature / (model.molar_masses * np.where(a > 0, a, np.inf))
    active = a > 0
    ga = np.where(active[:, None], grads.grad_a, 0.0)
    return np.outer(model.specific_volumes, grads.grad_pB) + rt_ma[:, None] * ga


def _need(grads, names, formulation):
    missing = [n for n in names if getattr(grads, n) is None]
    if missing:
        raise PreconditionError(f"{formulation} needs {', '.join(missing)}")


def _bulk_form(model, state, grads, coeffs, *, bulk_activities=None, **_):
    _need(grads, ("grad_pB", "grad_a"), "BulkForm")
    if bulk_activities is None:
        raise PreconditionError("BulkForm needs bulk_activities (see thermo.bulk_equilibrium_map)")
    a = np.asarray(bulk_activities, dtype=float)
    if a.shape != (model.n_species,):
        raise PreconditionError("BulkForm: bulk_activities has the wrong length")
    coef = assert_volume_filling(model, state)
    eps_rho = state.volume_fraction * state.partial_densities
    active = a > 0
    rt_ma = np.zeros_like(a)
    rt_ma[active] = GAS_CONSTANT * state.temperature / (model.molar_masses[active] * a[active])
    E_b = grads.E_bulk if grads.E_bulk is not None else np.zeros(3)
    grad_mu_b = bulk_potential_gradients(model, state, grads, a)
    return {"pressure": -coef * grads.grad_pB,
            "activity": -(eps_rho * rt_ma) @ grads.grad_a,
            "lorentz": _lorentz(model, state, E_b),
            "hydration": -coeffs.hydration_force(grad_mu_b)}


def _single_component_bulk(model, state, grads, coeffs, *, bulk_density=None, **_):
    if model.n_species != 1:
        raise PreconditionError("SingleComponentBulk needs a single-species liquid")
    _need(grads, ("grad_pB",), "SingleComponentBulk")
    if bulk_density is None:
        rho0 = model.species[0].specific_density
        if not (model.incompressible and math.isfinite(rho0)):
            raise PreconditionError("SingleComponentBulk needs bulk_density for a compressible bulk")
        bulk_density = rho0
    if not bulk_density > 0:
        raise DomainError("bulk_density must be > 0")
    return {"pressure": -state.volume_fraction * state.density / bulk_density * grads.grad_pB,
            "lorentz": _lorentz(model, state, grads.E_field)}


_FORMS = {
    Formulation.PRESSURE: _pressure_form,
    Formulation.GIBBS: _gibbs_form,
    Formulation.POTENTIAL: _potential_form,
    Formulation.BULK: _bulk_form,
    Formulation.SINGLE_COMPONENT_BULK: _single_component_bulk,
}


def rhs(formulation, model: ConstitutiveModel, state: MixtureState, grads: LocalGradients,
        coeffs: FlowCoefficients, **extra) -> DrivingForce:
    """Force density driving the liquid through the solid under one formulation.

    Extra keywords: ``bulk_activities`` (BulkForm), ``bulk_density``
    (SingleComponentBulk with a compressible bulk liquid).
    """
    try:
        form = Formulation(formulation)
    except ValueError:
        raise PreconditionError(f"unknown formulation {formulation!r}") from None
    if grads.grad_mu.shape[0] != model.n_species:
        raise PreconditionError(f"{form.value}: gradients carry {grads.grad_mu.shape[0]} species, "
                                f"model has {model.n_species}")
    return DrivingForce.from_terms(_FORMS[form](model, state, grads, coeffs, **extra))


def velocity(coeffs: FlowCoefficients, force: DrivingForce | np.ndarray) -> np.ndarray:
    """Solve R . v = force for the liquid velocity relative to the solid."""
    f = force.total if isinstance(force, DrivingForce) else np.asarray(force, dtype=float)
    try:
        c = np.linalg.cholesky(coeffs.resistivity)
    except np.linalg.LinAlgError:
        raise DomainError("resistivity is not positive definite") from None
    return np.linalg.solve(c.T, np.linalg.solve(c, f))


def threshold_gradient(model: ConstitutiveModel, state: MixtureState, grad_eps) -> float:
    """Largest vicinal pressure gradient the swelling term can hold back, pi |grad eps| / eps."""
    g = np.linalg.norm(np.atleast_1d(np.asarray(grad_eps, dtype=float)))
    return float(thermo.swelling_pressure(model, state) * g / state.volume_fraction)


def apparent_bulk_pressure_gradient(model, state, grads) -> np.ndarray:
    """grad(P_b) = grad(p) - q_e E: the apparent bulk pressure absorbs the Lorentz force."""
    return grads.grad_p - thermo.charge_density(model, state) * grads.E_field


def reduce_moyne_murad(model: ConstitutiveModel, state: MixtureState, grads: LocalGradients,
                       bulk_activities, *, dilute_threshold: float = 0.01,
                       water_activity_tol: float = 1e-3) -> DrivingForce:
    """Bulk-variable force for water plus two ions with unit water activity.

    Returns -(sum_j eps rho_j/rho0_j) grad(p_B) - sum_{ions} n_j R T/(a_j V) grad(a_j)
    plus the bulk Lorentz term, with n_j/V = eps rho_j/m_j.  Hydration is
    neglected.  A state outside the dilute regime is annotated, not rejected.
    """
    if model.n_species != 3:
        raise PreconditionError("the Moyne-Murad reduction needs exactly water, a cation and an anion")
    _need(grads, ("grad_pB", "grad_a"), "reduce_moyne_murad")
    a = np.asarray(bulk_activities, dtype=float)
    warnings = []
    ion_x = a[:-1]
    if np.any(ion_x > dilute_threshold):
        warnings.append(f"not dilute: ion activities {ion_x.tolist()} exceed {dilute_threshold}")
    if abs(a[-1] - 1.0) > water_activity_tol:
        warnings.append(f"water activity {a[-1]:.6g} differs from 1")
    coef = assert_volume_filling(model, state)
    n_per_v = state.volume_fraction * state.partial_densities[:-1] / model.molar_masses[:-1]
    RT = GAS_CONSTANT * state.temperature
    E_b = grads.E_bulk if grads.E_bulk is not None else np.zeros(3)
    terms = {"pressure": -coef * grads.grad_pB,
             "activity": -(n_per_v * RT / ion_x) @ grads.grad_a[:-1],
             "lorentz": _lorentz(model, state, E_b)}
    return DrivingForce.from_terms(terms, warnings)


def osmotic_pressure_bar(temperature: float, osmotic_coefficient: float, pi0: float,
                         ion_concentrations) -> float:
    """Modified van't Hoff osmotic pressure R T phi (c+ + c-) + pi0."""
    c = np.asarray(ion_concentrations, dtype=float)
    if np.any(c < 0):
        raise DomainError("ion concentrations must be >= 0")
    return GAS_CONSTANT * temperature * osmotic_coefficient * float(c.sum()) + pi0


def huyghe_janssen_permeability(coeffs: FlowCoefficients, eps: float) -> np.ndarray:
    """K with eps v = -K . [...] equivalent to R . v = -eps [...], i.e. K = eps^2 R^-1."""
    return eps**2 * np.linalg.inv(coeffs.resistivity)


def reduce_huyghe_janssen(state: MixtureState, grads: LocalGradients, osmotic_coefficient: float,
                          pi0: float, ion_concentrations, coeffs: FlowCoefficients, *,
                          model: ConstitutiveModel, ion_indices=(0, 1)) -> DrivingForce:
    """Quadriphasic Darcy law rewritten as a force density R . v.

    eps v = -K . [grad(p - pi_bar) + n+ grad(mu~+) + n- grad(mu~-)] with K =
    eps^2 R^-1 (rigid skeleton, F = I).  ``n`` are the ion mass concentrations
    and ``mu~`` their electrochemical potentials per unit mass; the solvent is
    taken at its specific density.  ``ion_concentrations`` (mol/m^3) set
    pi_bar; its gradient follows from ``grads.grad_rho``.
    """
    idx = list(ion_indices)
    c_state = state.partial_densities[idx] / model.molar_masses[idx]
    c = np.asarray(ion_concentrations, dtype=float)
    if np.any(c < 0):
        raise DomainError("ion concentrations must be >= 0")
    warnings = []
    if not np.allclose(c, c_state, rtol=1e-9, atol=1e-12):
        warnings.append(f"ion_concentrations {c.tolist()} differ from the state's {c_state.tolist()}")
    T = state.temperature
    eps = state.volume_fraction
    grad_c = grads.grad_rho[idx] / model.molar_masses[idx][:, None]
    grad_pi_bar = GAS_CONSTANT * T * osmotic_coefficient * grad_c.sum(axis=0)
    z = model.charges[idx]
    grad_mu_tilde = grads.grad_mu[idx] - z[:, None] * grads.E_field
    K = huyghe_janssen_permeability(coeffs, eps)
    # convert eps v = -K [...] back to R . v
    scale = coeffs.resistivity @ K / eps
    terms = {"pressure": -scale @ (grads.grad_p - grad_pi_bar),
             "ions": -scale @ (state.partial_densities[idx] @ grad_mu_tilde)}
    return DrivingForce.from_terms(terms, warnings)


def force_scale(*forces: DrivingForce) -> float:
    """Largest norm among the terms and totals of the given forces.

    Gradient errors enter each term, so when the terms nearly cancel this, not
    the net force, is the magnitude a discrepancy should be compared with.
    """
    vecs = [v for f in forces for v in (*f.breakdown.values(), f.total)]
    return max((float(np.linalg.norm(v)) for v in vecs), default=0.0)


def relative_difference(a, b, scale: float | None = None) -> float:
    """|a - b| / max(|a|, |b|) for vectors (0 when both vanish), or |a - b| / scale."""
    a = a.total if isinstance(a, DrivingForce) else np.asarray(a, dtype=float)
    b = b.total if isinstance(b, DrivingForce) else np.asarray(b, dtype=float)
    if scale is None:
        scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return 0.0 if scale == 0 else float(np.linalg.norm(a - b) / scale)
