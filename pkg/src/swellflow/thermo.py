"""Pressures, potentials and osmotic relations derived from a Helmholtz model.

Sign convention: the Gibbs potential is G = psi + p/rho, the form under which
G equals the mass-fraction-weighted sum of chemical potentials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .constants import FARADAY, GAS_CONSTANT
from .errors import DomainError, EvaluationError, PreconditionError, SolverError
from .models import ConstitutiveModel
from .state import MixtureState, SpeciesSpec, mole_fractions


@dataclass(frozen=True)
class PressureDecomposition:
    classical_pressure: float
    swelling_pressure: float
    total: float


@dataclass(frozen=True)
class BulkState:
    """Hypothetical reservoir in electrochemical equilibrium with a vicinal state."""

    pressure: float
    activities: np.ndarray
    electric_potential: float = 0.0
    iterations: int = 0
    max_residual: float = 0.0
    infeasible: bool = False


@dataclass(frozen=True)
class SolverOptions:
    tolerance_scale: float = 1e-10  # times R T / m_solvent
    max_iterations: int = 50
    max_halvings: int = 20


def _density_partials(model: ConstitutiveModel, state: MixtureState) -> np.ndarray:
    model.validate(state)
    d = np.asarray(model.dpsi_drho(state), dtype=float)
    bad = np.flatnonzero(~np.isfinite(d))
    if bad.size:
        raise EvaluationError(f"{model.name}: non-finite dpsi/drho for species index {int(bad[0])}")
    return d


def liquid_pressure(model: ConstitutiveModel, state: MixtureState) -> float:
    """p = sum_j rho rho_j dpsi/drho_j at fixed eps."""
    closed = model.closed_form_pressure(state)
    if closed is not None:
        return closed
    d = _density_partials(model, state)
    return state.density * float(state.partial_densities @ d)


def swelling_pressure(model: ConstitutiveModel, state: MixtureState) -> float:
    """pi = eps rho dpsi/deps at fixed partial densities."""
    model.validate(state)
    d = model.dpsi_deps(state)
    if not math.isfinite(d):
        raise EvaluationError(f"{model.name}: non-finite dpsi/deps")
    return state.volume_fraction * state.density * d


def pressure_decomposition(model: ConstitutiveModel, state: MixtureState) -> PressureDecomposition:
    """Split p into -eps rho dpsi/deps|_{eps rho} and the swelling pressure."""
    # dpsi/deps at fixed eps*rho_j = dpsi/deps - sum_j (rho_j/eps) dpsi/drho_j,
    # so the classical part is the content term minus the swelling pressure
    total = liquid_pressure(model, state)
    swelling = swelling_pressure(model, state)
    return PressureDecomposition(total - swelling, swelling, total)


def chemical_potential(model: ConstitutiveModel, state: MixtureState, species_index: int) -> float:
    """mu_j = d(rho psi)/d rho_j = psi + rho dpsi/drho_j."""
    if not 0 <= species_index < model.n_species:
        raise PreconditionError(f"species index {species_index} out of range")
    d = _density_partials(model, state)
    return model.psi(state) + state.density * float(d[species_index])


def chemical_potentials(model: ConstitutiveModel, state: MixtureState) -> np.ndarray:
    d = _density_partials(model, state)
    return model.psi(state) + state.density * d


def chemical_potentials_tilde(model: ConstitutiveModel, state: MixtureState) -> np.ndarray:
    """All mu_j from the (rho, C) parameterization.

    mu_j = psi + p/rho - sum_{k<N} C_k dpsi~/dC_k + dpsi~/dC_j (j < N).
    """
    model.validate(state)
    rho = state.density
    p = rho * rho * model.dpsi_tilde_drho(state)
    d_c = np.asarray(model.dpsi_tilde_dc(state), dtype=float)
    c = state.mass_fractions[:-1]
    base = model.psi(state) + p / rho - float(c @ d_c)
    out = np.full(model.n_species, base)
    out[:-1] += d_c
    return out


def electrochemical_potential(model: ConstitutiveModel, state: MixtureState, species_index: int) -> float:
    mu = chemical_potential(model, state, species_index)
    return mu + model.species[species_index].charge * state.electric_potential


def electrochemical_potentials(model: ConstitutiveModel, state: MixtureState) -> np.ndarray:
    return chemical_potentials(model, state) + model.charges * state.electric_potential


def gibbs_potential(model: ConstitutiveModel, state: MixtureState) -> float:
    return model.psi(state) + liquid_pressure(model, state) / state.density


def charge_density(model: ConstitutiveModel, state: MixtureState) -> float:
    return float(model.charges @ state.partial_densities)


# -- closed-form relations ---------------------------------------------------------

def _check_activity(activity):
    if not activity > 0:
        raise DomainError(f"activity must be > 0, got {activity}")
    if activity > 1:
        raise DomainError(f"activity must be <= 1, got {activity}")


def incompressible_chemical_potential(spec: SpeciesSpec, temperature: float, pressure: float,
                                      activity: float, reference: tuple[float, float]) -> float:
    """mu = mu0 + (p - p0)/rho0 + (R T/m) ln a for an incompressible species."""
    _check_activity(activity)
    if not math.isfinite(pressure):
        raise DomainError("pressure must be finite")
    p0, mu0 = reference
    return (mu0 + (pressure - p0) / spec.specific_density
            + GAS_CONSTANT * temperature / spec.molar_mass * math.log(activity))


def osmotic_pressure_exact(solvent: SpeciesSpec, temperature: float, activity_solvent: float) -> float:
    """pi = -(R T rho0_N / m_N) ln a_N, assuming constant solvent density.

    With Raoult's law a_N is the solvent mole fraction.
    """
    _check_activity(activity_solvent)
    return -GAS_CONSTANT * temperature * solvent.specific_density / solvent.molar_mass * math.log(activity_solvent)


def vant_hoff(temperature: float, molar_concentration: float) -> float:
    """Dilute limit pi = R T c.

    ``molar_concentration`` is moles of solute per m^3 of solution; the
    ratio-of-moles reading is not a pressure dimensionally.
    """
    if molar_concentration < 0:
        raise DomainError("molar_concentration must be >= 0")
    return GAS_CONSTANT * temperature * molar_concentration


def dilute_molar_concentration(solvent: SpeciesSpec, solute_mole_fraction: float) -> float:
    """Solute moles per m^3 when the solution's moles are counted as solvent moles."""
    return solute_mole_fraction * solvent.specific_density / solvent.molar_mass


def low_swelling_pressure(p0: float, lambda_s: float, lambda_l: float) -> float:
    """Exponential hydration law pi = p0 exp(lambda_s/lambda_l) - p0."""
    if not lambda_l > 0:
        raise DomainError("lambda_l must be > 0")
    if lambda_s < 0:
        raise DomainError("lambda_s must be >= 0")
    if not p0 > 0:
        raise DomainError("p0 must be > 0")
    return p0 * math.expm1(lambda_s / lambda_l)


def platelet_volume_fraction(lambda_s: float, lambda_l: float) -> float:
    """Liquid fraction of a stack of platelets of thickness lambda_s spaced lambda_l."""
    return lambda_l / (lambda_l + lambda_s)


# -- bulk equilibrium --------------------------------------------------------------

def bulk_potentials(model: ConstitutiveModel, temperature: float, bulk: BulkState) -> np.ndarray:
    """Electrochemical potentials of every species in the reservoir."""
    out = np.empty(model.n_species)
    for j, spec in enumerate(model.species):
        a = float(bulk.activities[j])
        if not a > 0:
            raise DomainError(f"bulk activity of species {j} must be > 0")
        p0, mu0 = model.bulk_reference(j, temperature)
        out[j] = (mu0 + (bulk.pressure - p0) / spec.specific_density
                  + GAS_CONSTANT * temperature / spec.molar_mass * math.log(a)
                  + spec.charge * bulk.electric_potential)
    return out


def bulk_equilibrium_map(model: ConstitutiveModel, state: MixtureState,
                         solver_opts: SolverOptions | None = None,
                         membrane: str = "open") -> BulkState:
    """Reservoir state whose potentials equal the vicinal electrochemical potentials.

    ``membrane="open"``: every species equilibrates; the reservoir is an ideal
    (Raoult) incompressible solution, charge neutral, with its own electric
    potential as an extra unknown when any species is charged.  Solved by
    damped Newton on (p_B, ln a_j[, phi_B]).

    ``membrane="semipermeable"``: only the solvent crosses; the reservoir is
    pure solvent (a = 1) and p_B follows in closed form.
    """
    opts = solver_opts or SolverOptions()
    T = state.temperature
    mu_v = electrochemical_potentials(model, state)
    refs = [model.bulk_reference(j, T) for j in range(model.n_species)]
    rt_m = GAS_CONSTANT * T / model.molar_masses
    vol = model.specific_volumes
    z = model.charges
    scale = GAS_CONSTANT * T / model.solvent.molar_mass
    tol = opts.tolerance_scale * scale

    if membrane == "semipermeable":
        p0, mu0 = refs[-1]
        if not math.isfinite(model.solvent.specific_density):
            raise PreconditionError("solvent must have finite specific density")
        p_b = p0 + model.solvent.specific_density * (mu_v[-1] - mu0)
        acts = np.zeros(model.n_species)
        acts[-1] = 1.0
        return BulkState(p_b, acts, 0.0, 0, 0.0, False)
    if membrane != "open":
        raise PreconditionError(f"unknown membrane {membrane!r}")

    charged = bool(np.any(z != 0.0))
    n = model.n_species
    mu0 = np.array([r[1] for r in refs])
    p0 = np.array([r[0] for r in refs])
    m = model.molar_masses
    def residual(u):
        p_b, ln_a = u[0], u[1:n + 1]
        phi_b = u[n + 1] if charged else 0.0
        a = np.exp(ln_a)
        r = mu0 + (p_b - p0) * vol + rt_m * ln_a + z * phi_b - mu_v
        extra = [scale * (a.sum() - 1.0)]
        if charged:
            extra.append(scale * float(z @ (m * a)) / FARADAY)
        return np.concatenate([r, extra])

    def jacobian(u):
        a = np.exp(u[1:n + 1])
        size = n + 1 + (1 if charged else 0)
        J = np.zeros((size, size))
        J[:n, 0] = vol
        J[:n, 1:n + 1] = np.diag(rt_m)
        J[n, 1:n + 1] = scale * a
        if charged:
            J[:n, n + 1] = z
            J[n + 1, 1:n + 1] = scale * z * m * a / FARADAY
        return J

    x = np.clip(mole_fractions(model.species, state.partial_densities), 1e-300, None)
    p_guess = state.pressure if state.pressure is not None else 0.0
    u = np.concatenate([[p_guess], np.log(x)] + ([[state.electric_potential]] if charged else []))
    r = residual(u)
    history = [float(np.max(np.abs(r)))]
    for it in range(1, opts.max_iterations + 1):
        if history[-1] < tol:
            break
        try:
            step = np.linalg.solve(jacobian(u), -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"bulk equilibrium Jacobian singular: {exc}", history) from exc
        norm0 = np.linalg.norm(r)
        lam = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = u + lam * step
            r_trial = residual(trial)
            if np.all(np.isfinite(r_trial)) and np.linalg.norm(r_trial) < norm0:
                break
            lam *= 0.5
        u, r = trial, r_trial
        history.append(float(np.max(np.abs(r))))
    else:
        if history[-1] >= tol:
            raise SolverError(f"bulk equilibrium did not converge in {opts.max_iterations} "
                              f"iterations (max |residual| = {history[-1]:.3e})", history)
    # polish: quadratic convergence makes one or two extra steps nearly free and
    # keeps p_B smooth enough to difference
    for _ in range(3):
        try:
            trial = u + np.linalg.solve(jacobian(u), -r)
        except np.linalg.LinAlgError:
            break
        r_trial = residual(trial)
        if not (np.all(np.isfinite(r_trial)) and np.max(np.abs(r_trial)) < history[-1]):
            break
        u, r = trial, r_trial
        history.append(float(np.max(np.abs(r))))
    a = np.exp(u[1:n + 1])
    phi_b = float(u[n + 1]) if charged else 0.0
    # With the solute activities fixed, ln a_w = log1p(-sum) and the solvent
    # equation give p_B without the Newton residual or the cancellation in a_w
    # near 1; both otherwise dominate the noise of p_B along a path.
    w = n - 1
    solutes = float(a[:w].sum())
    if n > 1 and solutes < 1.0:
        u[n] = math.log1p(-solutes)
        a[w] = math.exp(u[n])
    p_b = p0[w] + (mu_v[w] - mu0[w] - rt_m[w] * u[n] - z[w] * phi_b) / vol[w]
    if math.isfinite(p_b):
        u[0] = p_b
    return BulkState(float(u[0]), a, phi_b,
                     len(history) - 1, history[-1], bool(np.any(a > 1.0 + 1e-12)))


def bulk_state_from_gibbs(bulk_model: ConstitutiveModel, temperature: float,
                          gibbs: float) -> tuple[float, float]:
    """(rho_B, p_B) of a single-species bulk liquid whose Gibbs potential equals ``gibbs``.

    The bulk liquid is evaluated at eps = 1; its Gibbs potential must increase
    with density.
    """
    if bulk_model.n_species != 1:
        raise PreconditionError("bulk_state_from_gibbs needs a single-species model")

    def state_of(log_rho):
        return MixtureState(temperature, 1.0, [math.exp(log_rho)])

    def excess(log_rho):
        return gibbs_potential(bulk_model, state_of(log_rho)) - gibbs

    lo, hi = math.log(1e-3), math.log(1e5)
    if not excess(lo) < 0 < excess(hi):
        raise DomainError("no bulk density reproduces the requested Gibbs potential")
    log_rho = optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    st = state_of(log_rho)
    return st.density, liquid_pressure(bulk_model, st)
