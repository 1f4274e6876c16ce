import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swellflow import make_preset, thermo
from swellflow import flowlaws as F
from swellflow import simulator as S
from swellflow.errors import DomainError, PreconditionError
from swellflow.state import WATER

T = 298.15
COEFFS = F.FlowCoefficients.isotropic(1e12)


def column(model, cells=6, length=0.1, coeffs=COEFFS):
    return S.Column(model, coeffs, S.ColumnGrid.uniform(length, cells))


def profile(model, n, p=(2e5, 3e5), eps=(0.4, 0.6), c=None):
    xs = np.linspace(0.0, 1.0, n)
    out = []
    for x in xs:
        frac = [1.0] if c is None else [c[0] + (c[1] - c[0]) * x, 1 - c[0] - (c[1] - c[0]) * x]
        out.append(model.state_at(T, p[0] + (p[1] - p[0]) * x, frac, eps[0] + (eps[1] - eps[0]) * x))
    return out


def test_grid():
    g = S.ColumnGrid.uniform(0.1, 4)
    np.testing.assert_allclose(g.faces, [0, 0.025, 0.05, 0.075, 0.1])
    np.testing.assert_allclose(g.centers, [0.0125, 0.0375, 0.0625, 0.0875])
    with pytest.raises(DomainError):
        S.ColumnGrid.uniform(0.1, 1)


def test_reservoir_validation(p3):
    with pytest.raises(DomainError):
        S.Reservoir(1e5, (0.0,))
    with pytest.raises(DomainError):
        S.Reservoir(1e5, (1.2,))
    with pytest.raises(PreconditionError):
        S.Reservoir(1e5, (0.5, 0.5)).potentials(p3, T)


def test_column_needs_incompressible_model(p1):
    with pytest.raises(PreconditionError):
        column(p1)


# -- face flux -------------------------------------------------------------------------

def test_face_flux_identical_cells(p3):
    a = p3.state_at(T, 2e5, [1.0], 0.5)
    assert S.face_flux(p3, COEFFS, a, a, 0.01) == 0.0


def test_face_flux_balanced_cells(p3):
    # two cells at the same chemical potential with different pressure and eps
    pb = 1e5
    a = p3.state_at(T, pb + p3.swelling_offset(0.45), [1.0], 0.45)
    b = p3.state_at(T, pb + p3.swelling_offset(0.55), [1.0], 0.55)
    assert thermo.liquid_pressure(p3, a) != thermo.liquid_pressure(p3, b)
    v = S.face_flux(p3, COEFFS, a, b, 0.01)
    assert abs(v) < 1e-12 * 1e5 / (1e12 * 0.01)


def test_face_flux_direction_and_magnitude(p3):
    a = p3.state_at(T, 2.1e5, [1.0], 0.5)
    b = p3.state_at(T, 2.0e5, [1.0], 0.5)
    v = S.face_flux(p3, COEFFS, a, b, 0.01)
    # same eps, so the hand value is the pressure term alone: eps * dp/dx / R
    assert v > 0
    assert v == pytest.approx(0.5 * 1e4 / 0.01 / 1e12, rel=1e-10)


@given(st.floats(1e5, 5e5), st.floats(1e5, 5e5), st.floats(0.2, 0.8), st.floats(0.2, 0.8))
@settings(max_examples=25)
def test_face_flux_antisymmetric(pa, pb, ea, eb):
    m = make_preset("P3")
    a = m.state_at(T, pa, [1.0], ea)
    b = m.state_at(T, pb, [1.0], eb)
    assert S.face_flux(m, COEFFS, a, b, 0.01) == pytest.approx(-S.face_flux(m, COEFFS, b, a, 0.01),
                                                                rel=1e-12, abs=1e-30)


def test_vectorised_fluxes_match_face_flux(p3):
    col = column(p3)
    cells = profile(p3, 6)
    state = S.ColumnState(cells, S.NoFlux(), S.NoFlux())
    v, _ = col.face_velocities(state)
    for i in range(5):
        assert v[i + 1] == pytest.approx(S.face_flux(p3, COEFFS, cells[i], cells[i + 1],
                                                     col.grid.cell_width), rel=1e-12)
    assert v[0] == v[-1] == 0.0


# -- stepping ----------------------------------------------------------------------------

def test_uniform_noflux_is_fixed_point(p3):
    col = column(p3)
    cells = [p3.state_at(T, 2e5, [1.0], 0.5)] * 6
    state = S.ColumnState(cells, S.NoFlux(), S.NoFlux())
    m0 = state.contents
    for _ in range(100):
        state, rep = S.step(state, col, 10.0)
    assert np.max(np.abs(state.contents - m0)) <= 1e-12 * np.max(m0)


@pytest.mark.parametrize("mode", ["implicit", "explicit"])
def test_noflux_conserves_mass(p3_urea, mode):
    col = column(p3_urea, coeffs=F.FlowCoefficients.isotropic(1e12, mobility=[1e-13, 1e-13]))
    state = S.ColumnState(profile(p3_urea, 6, c=(0.05, 0.1)), S.NoFlux(), S.NoFlux())
    dt = 0.5 * col.stability_bound(state) if mode == "explicit" else 5.0
    prev = state.contents.sum(axis=0)
    for _ in range(20):
        state, rep = S.step(state, col, dt, mode)
        cur = state.contents.sum(axis=0)
        assert np.max(np.abs(cur - prev) / prev) < 1e-10
        np.testing.assert_allclose(rep.total_species_masses, cur * col.grid.cell_width, rtol=1e-14)
        prev = cur


def test_explicit_step_checks_stability(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.NoFlux(), S.NoFlux())
    with pytest.raises(PreconditionError, match="stability"):
        S.step(state, col, 10.0 * col.stability_bound(state), "explicit")


def test_implicit_explicit_agree_to_second_order(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.NoFlux(), S.NoFlux())
    dt0 = 0.2 * col.stability_bound(state)
    diffs = []
    for k in range(3):
        dt = dt0 / 2**k
        a, _ = S.step(state, col, dt, "implicit", S.SolverSettings(newton_tol=1e-14))
        b, _ = S.step(state, col, dt, "explicit")
        diffs.append(np.max(np.abs(a.contents - b.contents)))
    ratios = [diffs[i] / diffs[i + 1] for i in range(2)]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


def test_bad_mode(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.NoFlux(), S.NoFlux())
    with pytest.raises(PreconditionError):
        S.step(state, col, 1.0, "leapfrog")
    with pytest.raises(DomainError):
        S.step(state, col, -1.0)


def test_relaxation_is_monotone(p3):
    col = column(p3, cells=10)
    pb = 1e5
    p_eq = pb + p3.swelling_offset(0.5)
    cells = [p3.state_at(T, p_eq + 4e4 * (x / 0.1 - 0.5), [1.0], 0.5) for x in col.grid.centers]
    state = S.ColumnState(cells, S.Reservoir(pb, (1.0,)), S.Reservoir(pb, (1.0,)))
    _, _, reports = S.integrate(col, state, t_end=1e7, dt=1.0, max_steps=60)
    flux = [r.max_flux for r in reports]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(flux, flux[1:]))
    assert flux[-1] < 1e-6 * flux[0]


# -- equilibrium -----------------------------------------------------------------------------

def test_equilibrium_without_swelling_is_uniform():
    m = make_preset("P2", species=(WATER,))
    col = column(m)
    cells = [m.state_at(T, 2e5, [1.0], e) for e in np.linspace(0.3, 0.7, 6)]
    state = S.ColumnState(cells, S.Reservoir(2e5, (1.0,)), S.Reservoir(2e5, (1.0,)))
    eq = S.solve_equilibrium(state, col)
    # without swelling mu does not see eps: uniform pressure and potential, eps left as given
    mu = [thermo.chemical_potential(m, c, 0) for c in eq.cells]
    assert max(mu) - min(mu) <= 1e-14 * abs(mu[0])
    assert {thermo.liquid_pressure(m, c) for c in eq.cells} == {2e5}
    assert np.max(np.abs(col.face_velocities(eq)[0])) < 1e-10 * 2e5 / (1e12 * 0.1)


def test_equilibrium_matches_bulk_map(p3):
    col = column(p3, cells=8)
    pb = 1e5
    cells = [p3.state_at(T, pb + 3e5 + 2e5 * x / 0.1, [1.0], 0.5) for x in col.grid.centers]
    state = S.ColumnState(cells, S.Reservoir(pb, (1.0,)), S.NoFlux())
    eq = S.solve_equilibrium(state, col)
    v, _ = col.face_velocities(eq)
    assert np.max(np.abs(v)) < 1e-12 * 3e5 / (1e12 * 0.1)
    eps = [c.volume_fraction for c in eq.cells]
    assert len(set(np.round(eps, 10))) == len(eps)           # nonuniform eps
    mu_res = S.Reservoir(pb, (1.0,)).potentials(p3, T)
    for c in eq.cells:
        assert thermo.chemical_potential(p3, c, 0) == pytest.approx(mu_res[0], rel=1e-12, abs=1e-9)
        p_b = thermo.bulk_equilibrium_map(p3, c).pressure
        assert thermo.liquid_pressure(p3, c) - p_b == pytest.approx(p3.swelling_offset(c.volume_fraction),
                                                                    rel=1e-8)
        assert p_b == pytest.approx(pb, rel=1e-10)


def test_equilibrium_needs_reservoir(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.NoFlux(), S.NoFlux())
    with pytest.raises(PreconditionError):
        S.solve_equilibrium(state, col)


def test_equilibrium_rejects_mismatched_reservoirs(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.Reservoir(1e5, (1.0,)), S.Reservoir(2e5, (1.0,)))
    with pytest.raises(PreconditionError):
        S.solve_equilibrium(state, col)


# -- scenarios ----------------------------------------------------------------------------

class Cfg:
    def __init__(self, model, cells=20, **sc):
        self.model, self.coeffs = model, COEFFS
        self.grid = S.ColumnGrid.uniform(0.1, cells)
        self.scenario = S.ScenarioSettings(**sc)
        self.solver = S.SolverSettings()
        self.seed, self.output_dir, self.plot_data = 0, None, False


def test_unknown_scenario(p3):
    with pytest.raises(PreconditionError):
        S.run_scenario("fig6", Cfg(p3))


def test_scenarios_need_single_species(p3_urea):
    with pytest.raises(PreconditionError):
        S.run_scenario("fig5a", Cfg(p3_urea))


def test_fig5a_flat(p3):
    r = S.run_scenario("fig5a", Cfg(p3, t_end=1e4))
    assert all(abs(row["face_flux_left"]) < 1e-12 * r.flux_scale for row in r.snapshots)
    mu = {row["mu_tilde_water"] for row in r.snapshots}
    assert max(mu) - min(mu) <= 1e-12 * max(abs(x) for x in mu) + 1e-12


def test_fig5b_steady_gradient(p3):
    r = S.run_scenario("fig5b", Cfg(p3))
    assert r.summary[-1]["max_abs_flux"] < 1e-10 * r.flux_scale
    final = [row for row in r.snapshots if row["time"] == r.final.time]
    p = [row["p_l"] for row in final]
    eps = [row["eps_l"] for row in final]
    assert p[0] - p[-1] < 0 and eps[0] > eps[-1]


def test_fig5c_flows_towards_low_potential(p3):
    r = S.run_scenario("fig5c", Cfg(p3))
    assert r.metadata["min_face_flux"] >= -1e-12 * r.flux_scale
    assert r.summary[0]["max_abs_flux"] > 1e-3 * r.flux_scale
    assert r.summary[-1]["max_abs_flux"] < 1e-10 * r.flux_scale


def test_threshold_sweep_rows(p3):
    rows = S.threshold_sweep(p3, COEFFS, S.ScenarioSettings())
    thr = rows[0]["threshold_gradient"]
    assert any(row["applied_gradient"] == thr for row in rows)
    assert rows[0]["applied_gradient"] == 0.0 and rows[-1]["applied_gradient"] > thr


def test_snapshot_columns(p3):
    col = column(p3)
    state = S.ColumnState(profile(p3, 6), S.Reservoir(1e5, (1.0,)), S.NoFlux())
    row = S.snapshot_rows(col, state)[0]
    assert list(row) == ["time", "cell_index", "x", "eps_l", "rho_water", "p_l", "pi_l", "mu_tilde_water",
                         "p_B_equiv", "face_flux_left"]
    assert list(S.summary_row(col, state)) == ["time", "total_mass_water", "max_abs_flux"]
