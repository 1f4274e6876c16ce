"""One-dimensional finite-volume column of a swelling porous medium.

Conserved unknowns are the liquid contents ``m_j = eps * rho_j`` of every
cell.  The solid is rigid and every liquid species is incompressible, so the
liquid volume fraction follows from the contents through volume filling,
``eps = sum_j m_j / rho0_j``.  The liquid pressure and electric potential of
each cell are prescribed (an applied load and an imposed potential profile)
and stay fixed while the contents evolve.

Face velocities come from the electrochemical-potential form of the Darcy
law using two-point differences; species fluxes are
``eps rho_j (v + Q_j grad(mu_j))``.  Positive flux points left to right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import flowlaws, thermo
from .errors import DomainError, PreconditionError, SolverError
from .flowlaws import FlowCoefficients, LocalGradients
from .models import ConstitutiveModel
from .state import MixtureState


@dataclass(frozen=True)
class ColumnGrid:
    cell_count: int
    cell_width: float

    def __post_init__(self):
        if int(self.cell_count) != self.cell_count or self.cell_count < 2:
            raise DomainError("cell_count must be an integer >= 2")
        if not self.cell_width > 0:
            raise DomainError("cell_width must be > 0")

    @classmethod
    def uniform(cls, length: float, cell_count: int) -> "ColumnGrid":
        if not length > 0:
            raise DomainError("column length must be > 0")
        return cls(cell_count, length / cell_count)

    @property
    def length(self) -> float:
        return self.cell_count * self.cell_width

    @property
    def faces(self) -> np.ndarray:
        return np.arange(self.cell_count + 1) * self.cell_width

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cell_count) + 0.5) * self.cell_width


@dataclass(frozen=True)
class NoFlux:
    pass


@dataclass(frozen=True)
class Reservoir:
    """Charge-neutral bulk liquid of the given pressure and activities behind a boundary."""

    pressure: float
    activities: tuple
    electric_potential: float = 0.0

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.activities))
        if not all(0.0 < v <= 1.0 for v in a):
            raise DomainError("reservoir activities must lie in (0, 1]; "
                              "membranes that block a species are not supported")
        if not math.isfinite(self.pressure):
            raise DomainError("reservoir pressure must be finite")
        object.__setattr__(self, "activities", a)

    @classmethod
    def pure_solvent(cls, pressure: float, n_species: int = 1) -> "Reservoir":
        if n_species != 1:
            raise PreconditionError("a pure-solvent reservoir needs a single-species liquid")
        return cls(pressure, (1.0,))

    def potentials(self, model: ConstitutiveModel, temperature: float) -> np.ndarray:
        if len(self.activities) != model.n_species:
            raise PreconditionError("reservoir activities do not match the model's species")
        bulk = thermo.BulkState(self.pressure, np.array(self.activities), self.electric_potential)
        if abs(float(model.charges @ (model.molar_masses * bulk.activities))) > 1e-9 * (
                np.abs(model.charges) @ (model.molar_masses * bulk.activities) + 1e-300):
            raise PreconditionError("reservoir must be charge neutral")
        return thermo.bulk_potentials(model, temperature, bulk)


Boundary = Reservoir | NoFlux


@dataclass(frozen=True)
class ColumnState:
    cells: tuple
    left: Boundary
    right: Boundary
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if len(self.cells) < 2:
            raise DomainError("a column needs at least two cells")

    @property
    def contents(self) -> np.ndarray:
        """eps * rho_j per cell, shape (cells, species)."""
        return np.array([c.volume_fraction * c.partial_densities for c in self.cells])

    def replace(self, **kw) -> "ColumnState":
        return replace(self, **kw)


@dataclass(frozen=True)
class StepReport:
    dt: float
    max_flux: float
    total_liquid_mass: float
    total_species_masses: np.ndarray
    newton_iterations: int = 0
    next_dt: float | None = None
    retries: int = 0


@dataclass(frozen=True)
class SolverSettings:
    newton_tol: float = 1e-12
    newton_max_iter: int = 25
    max_retries: int = 12
    grow_factor: float = 1.5
    grow_max_iterations: int = 4
    max_dt: float = math.inf

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise DomainError("newton_tol must be > 0")
        if self.newton_max_iter < 1 or self.max_retries < 0:
            raise DomainError("iteration limits must be positive")


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


class Column:
    """Discrete operator for one model, coefficient set and grid.

    ``resistivity_scale`` optionally multiplies the resistivity cell by cell;
    faces use the harmonic mean of neighbouring multipliers.
    """

    def __init__(self, model: ConstitutiveModel, coeffs: FlowCoefficients, grid: ColumnGrid,
                 resistivity_scale: Sequence[float] | None = None):
        if not model.incompressible:
            raise PreconditionError("the column simulator needs an incompressible-species model")
        vol = model.specific_volumes
        if not np.any(vol > 0):
            raise PreconditionError("at least one species must occupy volume")
        n = model.n_species
        if coeffs.fick_mobility is not None and len(coeffs.fick_mobility) != n:
            raise PreconditionError("fick_mobility does not match the model's species")
        if coeffs.hydration_coeff is not None and len(coeffs.hydration_coeff) != n:
            raise PreconditionError("hydration_coeff does not match the model's species")
        self.model, self.coeffs, self.grid = model, coeffs, grid
        scale = np.ones(grid.cell_count) if resistivity_scale is None else np.asarray(
            resistivity_scale, dtype=float)
        if scale.shape != (grid.cell_count,) or not np.all(scale > 0):
            raise DomainError("resistivity_scale needs one positive value per cell")
        self.cell_scale = scale
        self.face_scale = np.concatenate([[scale[0]], _harmonic(scale[:-1], scale[1:]), [scale[-1]]])
        R_inv = np.linalg.inv(coeffs.resistivity)
        self._rxx = R_inv[0, 0]
        # x-velocity per unit grad(mu_j) through the hydration term
        Q = coeffs.fick_mobility
        r = coeffs.hydration_coeff
        self._qxx = np.zeros(n) if Q is None else Q[:, 0, 0]
        self._hyd = np.zeros(n) if (Q is None or r is None) else r * (R_inv[0] @ Q[:, :, 0].T)

    # -- state <-> contents -----------------------------------------------------------

    def cells_from_contents(self, m: np.ndarray, template: ColumnState) -> list[MixtureState]:
        vol = self.model.specific_volumes
        out = []
        for i, (row, cell) in enumerate(zip(m, template.cells)):
            if np.any(row < 0) or not np.all(np.isfinite(row)):
                raise DomainError(f"cell {i}: negative or non-finite liquid content")
            eps = float(row @ vol)
            if not 0.0 < eps <= 1.0 + 1e-12:
                raise DomainError(f"cell {i}: liquid volume fraction {eps!r} outside (0, 1]")
            eps = min(eps, 1.0)
            out.append(MixtureState(cell.temperature, eps, row / eps, cell.electric_potential,
                                    cell.pressure))
        return out

    def _potentials(self, cells) -> np.ndarray:
        mu = np.empty((len(cells), self.model.n_species))
        for i, c in enumerate(cells):
            try:
                mu[i] = thermo.chemical_potentials(self.model, c)
            except DomainError as exc:
                raise type(exc)(f"cell {i}: {exc}") from exc
        return mu

    # -- fluxes ----------------------------------------------------------------------------

    def face_velocities(self, state: ColumnState, cells=None):
        """Face velocities (m/s) and species fluxes (kg/(m^2 s)), faces left to right."""
        cells = list(state.cells) if cells is None else cells
        n_cells, dx = len(cells), self.grid.cell_width
        z = self.model.charges
        mu = self._potentials(cells)
        phi = np.array([c.electric_potential for c in cells])
        content = np.array([c.volume_fraction * c.partial_densities for c in cells])
        mu_t = mu + phi[:, None] * z

        g_t = np.zeros((n_cells + 1, self.model.n_species))     # grad of mu tilde
        g_mu = np.zeros_like(g_t)                                # grad of mu
        face_m = np.zeros_like(g_t)
        g_t[1:-1] = (mu_t[1:] - mu_t[:-1]) / dx
        g_mu[1:-1] = (mu[1:] - mu[:-1]) / dx
        face_m[1:-1] = 0.5 * (content[1:] + content[:-1])
        open_face = np.zeros(n_cells + 1, dtype=bool)
        open_face[1:-1] = True
        for side, bc, k, sign in (("left", state.left, 0, 1.0), ("right", state.right, -1, -1.0)):
            if isinstance(bc, NoFlux):
                continue
            f = 0 if side == "left" else n_cells
            cell = cells[k]
            mu_b_t = bc.potentials(self.model, cell.temperature)
            mu_b = mu_b_t - z * bc.electric_potential
            half = 0.5 * dx
            # grad points left to right: (inside - reservoir) on the left, reverse on the right
            g_t[f] = sign * (mu_t[k] - mu_b_t) / half
            g_mu[f] = sign * (mu[k] - mu_b) / half
            face_m[f] = content[k]
            open_face[f] = True
        force = -np.einsum("fj,fj->f", face_m, g_t)
        v = (self._rxx * force - g_mu @ self._hyd) / self.face_scale
        v = np.where(open_face, v, 0.0)
        J = face_m * (v[:, None] + self._qxx[None, :] * g_mu)
        J[~open_face] = 0.0
        return v, J

    def divergence(self, state, m):
        """d m / d t for contents ``m`` (flux divergence with a minus sign)."""
        cells = self.cells_from_contents(m, state)
        _, J = self.face_velocities(state, cells)
        return -(J[1:] - J[:-1]) / self.grid.cell_width

    def _jacobian(self, state, m, f0, func):
        """Column-colored FD Jacobian of ``func`` (which couples nearest neighbours only)."""
        n_cells, n_sp = m.shape
        size = n_cells * n_sp
        Jac = np.zeros((size, size))
        scale = max(float(np.max(np.abs(m))), 1e-30)
        for color in range(3):
            for k in range(n_sp):
                cols = np.arange(color, n_cells, 3)
                h = 1e-7 * np.maximum(np.abs(m[cols, k]), 1e-3 * scale)
                mp = m.copy()
                sign = -1.0 if self._near_full(m, cols, k, h) else 1.0
                mp[cols, k] += sign * h
                df = func(mp) - f0
                for c_i, i in enumerate(cols):
                    for nb in (i - 1, i, i + 1):
                        if 0 <= nb < n_cells:
                            Jac[nb * n_sp:(nb + 1) * n_sp, i * n_sp + k] = df[nb] / (sign * h[c_i])
        return Jac

    def _near_full(self, m, cols, k, h):
        vol = self.model.specific_volumes
        eps = m[cols] @ vol
        return bool(np.any(eps + h * vol[k] > 1.0))

    def stability_bound(self, state: ColumnState) -> float:
        """Explicit Euler limit 2 / max_i sum_k |d(dm_i/dt)/dm_k| (Gershgorin)."""
        m = state.contents
        f0 = self.divergence(state, m)
        Jac = self._jacobian(state, m, f0, lambda mm: self.divergence(state, mm))
        rho = float(np.max(np.sum(np.abs(Jac), axis=1)))
        return math.inf if rho == 0 else 2.0 / rho


def _totals(column: Column, m: np.ndarray):
    species = m.sum(axis=0) * column.grid.cell_width
    return float(species.sum()), species


def face_flux(model: ConstitutiveModel, coeffs: FlowCoefficients, left_cell: MixtureState,
              right_cell: MixtureState, dx: float) -> float:
    """Liquid velocity (m/s, positive left to right) across the face between two cells."""
    if not dx > 0:
        raise DomainError("dx must be > 0")
    n = model.n_species
    for i, c in enumerate((left_cell, right_cell)):
        try:
            model.validate(c)
        except (DomainError, PreconditionError) as exc:
            raise type(exc)(f"cell {i}: {exc}") from exc
    mu_l = thermo.chemical_potentials(model, left_cell)
    mu_r = thermo.chemical_potentials(model, right_cell)
    grad_mu = (mu_r - mu_l) / dx
    grad_phi = (right_cell.electric_potential - left_cell.electric_potential) / dx
    eps = 0.5 * (left_cell.volume_fraction + right_cell.volume_fraction)
    content = 0.5 * (left_cell.volume_fraction * left_cell.partial_densities
                     + right_cell.volume_fraction * right_cell.partial_densities)
    face = MixtureState(left_cell.temperature, eps, content / eps,
                        0.5 * (left_cell.electric_potential + right_cell.electric_potential),
                        None if left_cell.pressure is None else 0.5 * (left_cell.pressure + right_cell.pressure))
    grads = LocalGradients.raw(n, grad_mu=grad_mu, E_field=-grad_phi)
    force = flowlaws.rhs("PotentialForm", model, face, grads, coeffs)
    return float(flowlaws.velocity(coeffs, force)[0])


def _newton(column: Column, state: ColumnState, m_old: np.ndarray, dt: float,
            settings: SolverSettings):
    tol = settings.newton_tol * max(float(np.max(np.abs(m_old))), 1e-300)

    def residual(m):
        return m - m_old - dt * column.divergence(state, m)

    m = m_old.copy()
    r = residual(m)
    history = [float(np.max(np.abs(r)))]
    for it in range(1, settings.newton_max_iter + 1):
        if history[-1] <= tol:
            return m, it - 1, history
        Jac = column._jacobian(state, m, r, residual)
        try:
            delta = np.linalg.solve(Jac, -r.ravel()).reshape(m.shape)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Newton matrix: {exc}", history) from exc
        step_size = float(np.max(np.abs(delta)))
        lam = 1.0
        accepted = False
        for _ in range(30):
            trial = m + lam * delta
            try:
                r_trial = residual(trial)
                accepted = float(np.max(np.abs(r_trial))) < history[-1]
            except DomainError:
                accepted = False
            if accepted:
                break
            lam *= 0.5
        if not accepted:
            # at the round-off floor the residual cannot decrease any further
            if step_size <= 1e3 * tol:
                return m, it, history
            raise SolverError("Newton line search failed", history)
        m, r = trial, r_trial
        history.append(float(np.max(np.abs(r))))
        if step_size <= tol:
            return m, it, history
    if history[-1] <= tol:
        return m, settings.newton_max_iter, history
    raise SolverError(f"Newton did not converge (|residual| = {history[-1]:.3e}, "
                      f"tolerance {tol:.3e})", history)


def step(state: ColumnState, column: Column, dt: float, mode: str = "implicit",
         settings: SolverSettings | None = None) -> tuple[ColumnState, StepReport]:
    """Advance the column by ``dt`` (implicit may take a smaller dt after rejections)."""
    settings = settings or SolverSettings()
    if not dt > 0:
        raise DomainError("dt must be > 0")
    m_old = state.contents
    if mode == "explicit":
        bound = column.stability_bound(state)
        if dt > bound:
            raise PreconditionError(f"explicit dt {dt:.6g} s exceeds the stability bound {bound:.6g} s")
        m_new = m_old + dt * column.divergence(state, m_old)
        new = state.replace(cells=tuple(column.cells_from_contents(m_new, state)), time=state.time + dt)
        v, _ = column.face_velocities(new)
        total, species = _totals(column, m_new)
        return new, StepReport(dt, float(np.max(np.abs(v))), total, species, 0, dt, 0)
    if mode != "implicit":
        raise PreconditionError(f"unknown time-stepping mode {mode!r}")
    retries = 0
    history = []
    while True:
        try:
            m_new, iters, history = _newton(column, state, m_old, dt, settings)
            break
        except (SolverError, DomainError) as exc:
            history = getattr(exc, "residuals", history)
            retries += 1
            if retries > settings.max_retries:
                raise SolverError(f"implicit step rejected {retries} times; last: {exc}",
                                  history) from exc
            dt *= 0.5
    new = state.replace(cells=tuple(column.cells_from_contents(m_new, state)), time=state.time + dt)
    v, _ = column.face_velocities(new)
    total, species = _totals(column, m_new)
    next_dt = dt * settings.grow_factor if iters <= settings.grow_max_iterations else dt
    next_dt = min(next_dt, settings.max_dt)
    return new, StepReport(dt, float(np.max(np.abs(v))), total, species, iters, next_dt, retries)


def solve_equilibrium(state: ColumnState, column: Column,
                      solver_opts: SolverSettings | None = None) -> ColumnState:
    """Cell contents whose electrochemical potentials match the reservoir everywhere.

    With two reservoirs their potentials must agree.  Each cell is solved on
    its own (its pressure and electric potential are prescribed), after
    which every face flux vanishes.
    """
    opts = solver_opts or SolverSettings()
    res = [bc for bc in (state.left, state.right) if isinstance(bc, Reservoir)]
    if not res:
        raise PreconditionError("solve_equilibrium needs at least one Reservoir boundary")
    model = column.model
    T0 = state.cells[0].temperature
    targets = [bc.potentials(model, T0) for bc in res]
    if len(targets) == 2 and not np.allclose(targets[0], targets[1], rtol=1e-12, atol=1e-9):
        raise PreconditionError("the two reservoirs are not in equilibrium with each other")
    target = targets[0]
    vol = model.specific_volumes
    n = model.n_species
    cells = []
    for i, cell in enumerate(state.cells):
        mu_target = target - model.charges * cell.electric_potential
        x = np.log(cell.volume_fraction * cell.partial_densities + 1e-300)
        scale = np.abs(mu_target) + 1.0

        def make(u):
            m = np.exp(u)
            eps = float(m @ vol)
            if not 0.0 < eps <= 1.0:
                raise DomainError(f"cell {i}: equilibrium needs eps = {eps!r} outside (0, 1]")
            return MixtureState(cell.temperature, eps, m / eps, cell.electric_potential, cell.pressure)

        def resid(u):
            return (thermo.chemical_potentials(model, make(u)) - mu_target) / scale

        r = resid(x)
        history = [float(np.max(np.abs(r)))]
        for _ in range(100):
            if history[-1] < opts.newton_tol:
                break
            J = np.empty((n, n))
            for k in range(n):
                h = 1e-7
                xp = x.copy()
                xp[k] += h
                try:
                    J[:, k] = (resid(xp) - r) / h
                except DomainError:
                    xp[k] -= 2 * h
                    J[:, k] = (r - resid(xp)) / h
            try:
                d = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError as exc:
                raise SolverError(f"cell {i}: singular equilibrium Jacobian", history) from exc
            lam = 1.0
            for _ in range(40):
                try:
                    rt = resid(x + lam * d)
                    if np.max(np.abs(rt)) < history[-1]:
                        break
                except DomainError:
                    pass
                lam *= 0.5
            else:
                if np.max(np.abs(d)) < 1e-12:
                    break  # round-off floor
                raise SolverError(f"cell {i}: no admissible equilibrium (line search failed)", history)
            x, r = x + lam * d, rt
            history.append(float(np.max(np.abs(r))))
        else:
            raise SolverError(f"cell {i}: equilibrium solve did not converge", history)
        cells.append(make(x))
    return state.replace(cells=tuple(cells))


# -- diagnostics ----------------------------------------------------------------------------

def snapshot_rows(column: Column, state: ColumnState) -> list[dict]:
    """One row per cell with the quantities written to snapshot CSVs."""
    model = column.model
    v, _ = column.face_velocities(state)
    rows = []
    for i, (x, cell) in enumerate(zip(column.grid.centers, state.cells)):
        mu_t = thermo.electrochemical_potentials(model, cell)
        row = {"time": state.time, "cell_index": i, "x": float(x), "eps_l": cell.volume_fraction}
        for s, r in zip(model.species, cell.partial_densities):
            row[f"rho_{s.name}"] = float(r)
        row["p_l"] = thermo.liquid_pressure(model, cell)
        row["pi_l"] = thermo.swelling_pressure(model, cell)
        for s, mu in zip(model.species, mu_t):
            row[f"mu_tilde_{s.name}"] = float(mu)
        row["p_B_equiv"] = thermo.bulk_equilibrium_map(model, cell).pressure
        row["face_flux_left"] = float(v[i])
        rows.append(row)
    return rows


def summary_row(column: Column, state: ColumnState) -> dict:
    v, _ = column.face_velocities(state)
    _, species = _totals(column, state.contents)
    row = {"time": state.time}
    for s, mass in zip(column.model.species, species):
        row[f"total_mass_{s.name}"] = float(mass)
    row["max_abs_flux"] = float(np.max(np.abs(v)))
    return row


@dataclass
class RunResult:
    scenario: str
    snapshots: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    final: ColumnState | None = None
    flux_scale: float = 1.0
    sweep: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def integrate(column: Column, state: ColumnState, *, t_end: float, dt: float, mode: str = "implicit",
              settings: SolverSettings | None = None, steady_tol: float | None = None,
              max_steps: int = 10000, snapshot_every: int = 0, on_step=None):
    """Step until ``t_end`` or until max |face velocity| drops below ``steady_tol``.

    Returns (final state, snapshots, reports); snapshots include the initial
    and final states and every ``snapshot_every``-th step.
    """
    snapshots = [state]
    reports = []
    for k in range(1, max_steps + 1):
        if state.time >= t_end * (1 - 1e-12):
            break
        dt_k = min(dt, t_end - state.time)
        state, rep = step(state, column, dt_k, mode, settings)
        reports.append(rep)
        if on_step is not None:
            on_step(state, rep)
        if mode == "implicit" and rep.next_dt is not None:
            dt = rep.next_dt
        if snapshot_every and k % snapshot_every == 0:
            snapshots.append(state)
        if steady_tol is not None and rep.max_flux < steady_tol:
            break
    if snapshots[-1] is not state:
        snapshots.append(state)
    return state, snapshots, reports


# -- scenarios ----------------------------------------------------------------------------

SCENARIOS = ("fig5a", "fig5b", "fig5c", "threshold_sweep")


@dataclass(frozen=True)
class ScenarioSettings:
    """Parameters shared by the shipped scenarios (single-species swelling column).

    ``pressure_contrast`` is the applied vicinal pressure drop across the
    column (fig5b); ``reservoir_contrast`` raises the left reservoir pressure
    (fig5c); ``grad_eps_max`` caps the volume-fraction gradient the medium
    can develop (threshold_sweep).
    """

    temperature: float = 298.15
    eps_initial: float = 0.5
    reservoir_pressure: float = 1.0e5
    pressure_contrast: float = 4.0e4
    reservoir_contrast: float = 2.0e4
    t_end: float = 1.0e8
    dt_initial: float = 1.0
    snapshot_every: int = 10
    max_steps: int = 2000
    steady_tol: float = 1e-10
    mode: str = "implicit"
    sweep_points: int = 21
    sweep_max_factor: float = 2.0
    grad_eps_max: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eps_initial < 1.0:
            raise DomainError("eps_initial must lie in (0, 1)")
        for name in ("t_end", "dt_initial", "steady_tol", "temperature", "grad_eps_max",
                     "sweep_max_factor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.sweep_points < 2 or self.max_steps < 1 or self.snapshot_every < 0:
            raise DomainError("sweep_points >= 2, max_steps >= 1, snapshot_every >= 0 required")
        if self.mode not in ("implicit", "explicit"):
            raise DomainError(f"unknown mode {self.mode!r}")


def _equilibrium_pressure(model, eps, p_bulk):
    """Vicinal pressure in equilibrium with a pure-solvent reservoir at p_bulk."""
    if not hasattr(model, "swelling_offset"):
        return p_bulk
    return p_bulk + model.swelling_offset(eps)


def _scenario_setup(scenario_id, model, grid, sc: ScenarioSettings):
    if model.n_species != 1:
        raise PreconditionError("the shipped scenarios use a single-species liquid")
    T, eps0, pB = sc.temperature, sc.eps_initial, sc.reservoir_pressure
    p_eq = _equilibrium_pressure(model, eps0, pB)
    L = grid.length
    if scenario_id == "fig5a":
        p = np.full(grid.cell_count, p_eq)
        left, right = Reservoir(pB, (1.0,)), Reservoir(pB, (1.0,))
    elif scenario_id == "fig5b":
        p = p_eq + sc.pressure_contrast * (grid.centers / L - 0.5)
        left, right = Reservoir(pB, (1.0,)), Reservoir(pB, (1.0,))
    elif scenario_id == "fig5c":
        p = np.full(grid.cell_count, p_eq)
        left, right = Reservoir(pB + sc.reservoir_contrast, (1.0,)), NoFlux()
    else:
        raise PreconditionError(f"unknown scenario {scenario_id!r}")
    cells = [model.state_at(T, float(pi), [1.0], eps0) for pi in p]
    return ColumnState(cells, left, right)


def _flux_scale(model, coeffs, grid, sc):
    state = model.state_at(sc.temperature, _equilibrium_pressure(model, sc.eps_initial,
                                                                 sc.reservoir_pressure),
                           [1.0], sc.eps_initial)
    p_scale = max(thermo.swelling_pressure(model, state), sc.pressure_contrast,
                  sc.reservoir_contrast, 1.0)
    r_xx = 1.0 / np.linalg.inv(coeffs.resistivity)[0, 0]
    return float(sc.eps_initial * p_scale / (r_xx * grid.length))


def threshold_sweep(model, coeffs, sc: ScenarioSettings) -> list[dict]:
    """Steady flux at a representative face versus applied pressure gradient.

    The medium answers an applied vicinal gradient G (pressure falling left to
    right) with the volume-fraction gradient that balances it, up to the cap
    ``grad_eps_max``; the residual force drives the flow.  For comparison the
    same gradient applied to the reservoir (bulk) pressure is evaluated with
    the single-component bulk form, which has no swelling term.
    """
    if model.n_species != 1:
        raise PreconditionError("threshold_sweep uses a single-species liquid")
    eps = sc.eps_initial
    state = model.state_at(sc.temperature, _equilibrium_pressure(model, eps, sc.reservoir_pressure),
                           [1.0], eps)
    pi = thermo.swelling_pressure(model, state)
    g_max = sc.grad_eps_max
    thr = flowlaws.threshold_gradient(model, state, g_max)
    top = sc.sweep_max_factor * (thr if thr > 0 else sc.pressure_contrast)
    gradients = sorted(set(np.linspace(0.0, top, sc.sweep_points).tolist()) | {thr})
    rows = []
    for G in gradients:
        s = min(eps * G / pi, g_max) if pi > 0 else 0.0
        grads = LocalGradients.raw(1, grad_p=-G, grad_eps=s, grad_pB=-G)
        v_l = flowlaws.velocity(coeffs, flowlaws.rhs("PressureForm", model, state, grads, coeffs))[0]
        v_b = flowlaws.velocity(coeffs, flowlaws.rhs("SingleComponentBulk", model, state, grads,
                                                     coeffs))[0]
        rows.append({"applied_gradient": G, "threshold_gradient": thr, "grad_eps": s,
                     "vicinal_flux": float(v_l), "bulk_flux": float(v_b)})
    return rows


def run_scenario(scenario_id: str, config, write: bool = True) -> RunResult:
    """Run one shipped scenario from a :class:`swellflow.config.RunConfig`."""
    if scenario_id not in SCENARIOS:
        raise PreconditionError(f"unknown scenario {scenario_id!r}; choose from {', '.join(SCENARIOS)}")
    model, coeffs, grid = config.model, config.coeffs, config.grid
    sc = config.scenario
    result = RunResult(scenario_id, metadata={"seed": config.seed})
    if scenario_id == "threshold_sweep":
        result.sweep = threshold_sweep(model, coeffs, sc)
        result.flux_scale = _flux_scale(model, coeffs, grid, sc)
    else:
        column = Column(model, coeffs, grid)
        state = _scenario_setup(scenario_id, model, grid, sc)
        result.flux_scale = _flux_scale(model, coeffs, grid, sc)
        min_face = []

        def watch(st, rep):
            v, _ = column.face_velocities(st)
            min_face.append(float(np.min(v)))

        final, snaps, reports = integrate(
            column, state, t_end=sc.t_end, dt=sc.dt_initial, mode=sc.mode, settings=config.solver,
            steady_tol=sc.steady_tol * result.flux_scale, max_steps=sc.max_steps,
            snapshot_every=sc.snapshot_every, on_step=watch)
        result.final = final
        for snap in snaps:
            result.snapshots.extend(snapshot_rows(column, snap))
            result.summary.append(summary_row(column, snap))
        result.metadata.update(steps=len(reports), min_face_flux=min(min_face, default=0.0),
                               final_max_flux=result.summary[-1]["max_abs_flux"])
    if write and config.output_dir is not None:
        from .io import write_run
        result.metadata["files"] = write_run(result, config)
    return result
