"""Numerical certification of thermodynamic identities against FD oracles.

Each registered identity evaluates a left side through the analytic path in
:mod:`swellflow.thermo` and a right side through an independent
finite-difference oracle built from ``model.psi`` alone (algebraic identities
compare two analytic expressions).  Tolerances are registered per identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import fd, thermo
from .errors import PreconditionError
from .fd import FDResult, StepPolicy, fd_derivative, fd_partial  # noqa: F401  (re-exported)
from .models import ConstitutiveModel
from .state import MixtureState

ORACLE_STEP = StepPolicy(rel=3e-3, abs=1e-9)
NESTED_STEP = StepPolicy(rel=2e-3, abs=1e-7)


@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    max_rel_error: float
    states_tested: int
    passed: bool
    tolerance: float

    @property
    def pass_(self) -> bool:
        return self.passed

    def as_row(self) -> dict:
        return {"identity_id": self.identity_id, "states_tested": self.states_tested,
                "max_rel_error": f"{self.max_rel_error:.3e}",
                "pass": "true" if self.passed else "false"}


# -- oracle helpers -----------------------------------------------------------------

def _scaled_fd(g, x0, scale, policy=None) -> float:
    """dg/dx at x0 with the step taken relative to ``scale`` rather than |x0|."""
    policy = policy or ORACLE_STEP
    return fd_derivative(lambda t: g(x0 + t * scale), 0.0,
                         StepPolicy(rel=0.0, abs=policy.rel)).value / scale


def _fraction_scale(c_free, k):
    # C_k moves against the solvent fraction, so the step must respect both
    c_solvent = 1.0 - float(np.sum(c_free))
    return max(min(c_free[k], c_solvent), 1e-12)


def _oracle_tilde_drho(model, state):
    sel = fd.total_density()
    return _scaled_fd(lambda v: model.psi(sel.set(state, v)), state.density, state.density)


def _oracle_tilde_dc(model, state):
    c_free = state.mass_fractions[:-1]
    out = np.empty(c_free.size)
    for k in range(c_free.size):
        sel = fd.mass_fraction(k)
        out[k] = _scaled_fd(lambda v: model.psi(sel.set(state, v)), c_free[k],
                            _fraction_scale(c_free, k))
    return out


def _gibbs_at(model, state, pressure, c_free):
    """g(T, p, C, eps) = psi + p/rho at the state with that pressure and composition."""
    c = np.empty(model.n_species)
    c[:-1] = c_free
    c[-1] = 1.0 - float(np.sum(c_free))
    st = model.state_at(state.temperature, pressure, c, state.volume_fraction,
                        state.electric_potential)
    return model.psi(st) + pressure / st.density


def _require_mixture(model, identity_id):
    if model.n_species < 2:
        raise PreconditionError(f"{identity_id} needs at least two species")


# -- identities: each returns (lhs, rhs) or (lhs, rhs, scale) -------------------------------------

def _a10(model, state):
    lhs = thermo.liquid_pressure(model, state)
    rhs = state.density**2 * _oracle_tilde_drho(model, state)
    return lhs, rhs


def _a20(model, state):
    lhs = thermo.chemical_potentials(model, state)
    rho = state.density
    p = rho**2 * _oracle_tilde_drho(model, state)
    d_c = _oracle_tilde_dc(model, state)
    base = model.psi(state) + p / rho - float(state.mass_fractions[:-1] @ d_c)
    rhs = np.full(model.n_species, base)
    rhs[:-1] += d_c
    return lhs, rhs


def _a34(model, state):
    _require_mixture(model, "A34_mu_difference")
    mu = thermo.chemical_potentials(model, state)
    lhs = mu[:-1] - mu[-1]
    if model.has_analytic("dpsi_tilde_dc"):
        rhs = np.asarray(model.dpsi_tilde_dc(state))
    else:
        rhs = _oracle_tilde_dc(model, state)
    return lhs, rhs


def _a40(model, state):
    _require_mixture(model, "A40_mu_gibbs")
    lhs = thermo.chemical_potentials(model, state)
    p = thermo.liquid_pressure(model, state)
    c_free = state.mass_fractions[:-1].copy()
    g0 = _gibbs_at(model, state, p, c_free)
    dg = np.empty(c_free.size)
    for k in range(c_free.size):
        def g_of(v, k=k):
            cc = c_free.copy()
            cc[k] = v
            return _gibbs_at(model, state, p, cc)
        dg[k] = _scaled_fd(g_of, c_free[k], _fraction_scale(c_free, k))
    rhs = np.full(model.n_species, g0 - float(c_free @ dg))
    rhs[:-1] += dg
    return lhs, rhs


def _a46(model, state):
    lhs = 1.0 / state.density
    p = thermo.liquid_pressure(model, state)
    c_free = state.mass_fractions[:-1].copy()
    rhs = fd_derivative(lambda pp: _gibbs_at(model, state, pp, c_free), p, ORACLE_STEP).value
    return lhs, rhs


def _a50(model, state):
    lhs = float(state.mass_fractions @ thermo.chemical_potentials(model, state))
    rhs = thermo.gibbs_potential(model, state)
    return lhs, rhs


def _a62(model, state):
    if not model.incompressible:
        raise PreconditionError("A62_A64_dmu_dp_incompressible requires an incompressible model")
    sel = fd.pressure(model)
    lhs = np.array([fd_partial(lambda s, j=j: thermo.chemical_potential(model, s, j), sel, state,
                               ORACLE_STEP).value for j in range(model.n_species)])
    rhs = model.specific_volumes
    return lhs, rhs


def _a4(model, state):
    _require_mixture(model, "A4_mixed_partials")
    p = thermo.liquid_pressure(model, state)
    c_free = state.mass_fractions[:-1].copy()

    def g(pp, cc):
        return _gibbs_at(model, state, pp, cc)

    lhs, rhs = [], []
    for k in range(c_free.size):
        def shifted(v, k=k):
            cc = c_free.copy()
            cc[k] = v
            return cc

        scale = _fraction_scale(c_free, k)
        # d/dp of dg/dC_k
        d_c_of_p = lambda pp, k=k: _scaled_fd(lambda v: g(pp, shifted(v)), c_free[k], scale, NESTED_STEP)
        # d/dC_k of dg/dp
        d_p_of_c = lambda v, k=k: _scaled_fd(lambda pp: g(pp, shifted(v)), p, abs(p), NESTED_STEP)
        lhs.append(_scaled_fd(d_c_of_p, p, abs(p), NESTED_STEP))
        rhs.append(_scaled_fd(d_p_of_c, c_free[k], scale, NESTED_STEP))
    return np.array(lhs), np.array(rhs)


def _e318(model, state):
    # classical part re-derived from the density partials, not from the decomposition
    rho = state.density
    content = rho * float(state.partial_densities @ np.asarray(model.dpsi_drho(state)))
    swelling = thermo.swelling_pressure(model, state)
    classical = content - swelling
    p = thermo.liquid_pressure(model, state)
    # a sum of terms is judged against the largest term
    return p, classical + swelling, max(abs(p), abs(classical), abs(swelling))


@dataclass(frozen=True)
class IdentitySpec:
    identity_id: str
    evaluate: Callable
    tolerance: float
    algebraic: bool


REGISTRY: dict[str, IdentitySpec] = {
    spec.identity_id: spec for spec in (
        IdentitySpec("A4_mixed_partials", _a4, 1e-6, False),
        IdentitySpec("A10_pressure_two_forms", _a10, 1e-6, False),
        IdentitySpec("A20_mu_helmholtz", _a20, 1e-6, False),
        IdentitySpec("A34_mu_difference", _a34, 1e-10, True),
        IdentitySpec("A40_mu_gibbs", _a40, 1e-6, False),
        IdentitySpec("A46_dg_dp", _a46, 1e-6, False),
        IdentitySpec("A50_weighted_sum", _a50, 1e-10, True),
        IdentitySpec("A62_A64_dmu_dp_incompressible", _a62, 1e-6, False),
        IdentitySpec("E318_pressure_decomposition", _e318, 1e-10, True),
    )
}

A_SERIES_IDENTITIES = tuple(k for k in REGISTRY if k.startswith("A"))


def relative_error(lhs, rhs, scale=None) -> float:
    """Worst componentwise |lhs - rhs| / max(|lhs|, |rhs|), floored at 1e-12 of the largest value.

    With ``scale`` given, every component is measured against that magnitude instead.
    """
    a = np.atleast_1d(np.asarray(lhs, dtype=float))
    b = np.atleast_1d(np.asarray(rhs, dtype=float))
    if scale is not None:
        return float(np.max(np.abs(a - b))) / scale if scale > 0 else 0.0
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    if scale == 0.0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-12 * scale)
    return float(np.max(np.abs(a - b) / denom))


def registered_tolerance(identity_id: str, model: ConstitutiveModel | None = None) -> float:
    spec = _lookup(identity_id)
    if identity_id == "A34_mu_difference" and model is not None and not model.has_analytic("dpsi_tilde_dc"):
        return 1e-6
    return spec.tolerance


def _lookup(identity_id):
    try:
        return REGISTRY[identity_id]
    except KeyError:
        raise PreconditionError(f"unknown identity {identity_id!r}") from None


def verify_identity(identity_id: str, model: ConstitutiveModel,
                    states: Iterable[MixtureState], tolerance: float | None = None) -> IdentityReport:
    spec = _lookup(identity_id)
    tol = registered_tolerance(identity_id, model) if tolerance is None else tolerance
    worst, count = 0.0, 0
    for state in states:
        err = relative_error(*spec.evaluate(model, state))
        if not math.isfinite(err):
            err = math.inf
        worst = max(worst, err)
        count += 1
    return IdentityReport(identity_id, worst, count, worst < tol, tol)


def sample_states(model: ConstitutiveModel, n: int, seed: int = 0,
                  pressure_range: Sequence[float] = (1.0e5, 2.0e6)) -> list[MixtureState]:
    """Seeded admissible states.

    Densities are log-uniform in [1, 2000] kg/m^3 per species, T uniform in
    [273, 373] K, eps uniform in [0.05, 0.95].  Incompressible models keep the
    sampled composition, rescale onto the volume-filling constraint and draw
    the liquid pressure uniformly from ``pressure_range``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        rho_j = np.exp(rng.uniform(math.log(1.0), math.log(2000.0), model.n_species))
        T = rng.uniform(273.0, 373.0)
        eps = rng.uniform(0.05, 0.95)
        if model.incompressible:
            c = rho_j / rho_j.sum()
            p = rng.uniform(*pressure_range)
            out.append(model.state_at(T, p, c, eps))
        else:
            out.append(MixtureState(T, eps, rho_j))
    return out


def verify_all(model: ConstitutiveModel, n_states: int = 100, seed: int = 0,
               identity_ids: Sequence[str] | None = None) -> list[IdentityReport | str]:
    """Run every applicable identity; inapplicable ones are returned as their id string."""
    states = sample_states(model, n_states, seed)
    out = []
    for identity_id in identity_ids or tuple(REGISTRY):
        try:
            out.append(verify_identity(identity_id, model, states))
        except PreconditionError:
            out.append(identity_id)
    return out
