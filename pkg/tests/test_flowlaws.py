import numpy as np
import pytest
from hypothesis import given, strategies as st

from swellflow import MixtureState, make_preset, thermo
from swellflow import flowlaws as F
from swellflow.errors import DomainError, PreconditionError
from swellflow.state import CHLORIDE, SODIUM, WATER

from paths import electrolyte_path, incompressible_path, p1_path, single_species_path

FORMS = ("PressureForm", "GibbsForm", "PotentialForm")


def coeffs_for(model, hydration=True):
    n = model.n_species
    return F.FlowCoefficients.isotropic(1e9, mobility=np.full(n, 1e-12),
                                        hydration=np.arange(1.0, n + 1) if hydration else None)


# -- coefficients -----------------------------------------------------------------

def test_resistivity_must_be_spd():
    with pytest.raises(DomainError):
        F.FlowCoefficients(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(DomainError):
        F.FlowCoefficients(np.array([[1.0, 0.5, 0], [0, 1.0, 0], [0, 0, 1.0]]))


def test_scalar_resistivity_is_isotropic():
    c = F.FlowCoefficients(5.0)
    np.testing.assert_array_equal(c.resistivity, 5.0 * np.eye(3))


def test_velocity_scalar_inverse():
    c = F.FlowCoefficients.isotropic(4.0)
    np.testing.assert_allclose(F.velocity(c, np.array([8.0, -4.0, 2.0])), [2.0, -1.0, 0.5])
    np.testing.assert_array_equal(F.velocity(c, np.zeros(3)), np.zeros(3))


@given(st.lists(st.floats(-1.0, 1.0), min_size=9, max_size=9), st.lists(st.floats(-1e3, 1e3), min_size=3,
                                                                           max_size=3))
def test_velocity_solves_random_spd(entries, f):
    A = np.array(entries).reshape(3, 3)
    R = A @ A.T + 0.5 * np.eye(3)
    c = F.FlowCoefficients(R)
    v = F.velocity(c, np.array(f))
    assert np.max(np.abs(R @ v - f)) <= 1e-10 * max(1.0, np.max(np.abs(f)))


# -- single-point behaviour --------------------------------------------------------------

@pytest.mark.parametrize("form", FORMS)
def test_zero_gradients_give_zero_force(p3_urea, form):
    s = p3_urea.state_at(300.0, 2e5, [0.1, 0.9], 0.5)
    g = F.LocalGradients.raw(2)
    assert np.all(F.rhs(form, p3_urea, s, g, coeffs_for(p3_urea)).total == 0.0)


def test_breakdown_sums_to_total(p3):
    s = p3.state_at(300.0, 2e5, [1.0], 0.5)
    g = F.LocalGradients.raw(1, grad_p=-3e4, grad_eps=0.2, grad_mu=[1.0])
    force = F.rhs("PressureForm", p3, s, g, coeffs_for(p3))
    np.testing.assert_allclose(sum(force.breakdown.values()), force.total, rtol=1e-12)
    assert set(force.breakdown) == {"pressure", "swelling", "lorentz", "hydration"}


def test_missing_bulk_inputs_name_the_formulation(p3):
    s = p3.state_at(300.0, 2e5, [1.0], 0.5)
    g = F.LocalGradients.raw(1)
    with pytest.raises(PreconditionError, match="BulkForm"):
        F.rhs("BulkForm", p3, s, g, coeffs_for(p3), bulk_activities=[1.0])
    with pytest.raises(PreconditionError, match="SingleComponentBulk"):
        F.rhs("SingleComponentBulk", p3, s, g, coeffs_for(p3))


def test_single_component_bulk_needs_one_species(p3_urea):
    s = p3_urea.state_at(300.0, 2e5, [0.1, 0.9], 0.5)
    g = F.LocalGradients.raw(2, grad_pB=1.0)
    with pytest.raises(PreconditionError):
        F.rhs("SingleComponentBulk", p3_urea, s, g, coeffs_for(p3_urea))


def test_unknown_formulation(p3):
    s = p3.state_at(300.0, 2e5, [1.0], 0.5)
    with pytest.raises(PreconditionError):
        F.rhs("DarcyForm", p3, s, F.LocalGradients.raw(1), coeffs_for(p3))


def test_threshold_value():
    # pi = 1e5 Pa at eps = 0.5: the P3 state whose swelling pressure is 1e5
    m = make_preset("P3", swelling_p0=1e5 / np.expm1(1.0))
    s = m.state_at(300.0, 2e5, [1.0], 0.5)
    assert thermo.swelling_pressure(m, s) == pytest.approx(1e5, rel=1e-12)
    assert F.threshold_gradient(m, s, 0.1) == pytest.approx(2e4, rel=1e-12)


def test_threshold_zero_without_swelling():
    m = make_preset("P2", species=(WATER,))
    s = m.state_at(300.0, 2e5, [1.0], 0.5)
    assert F.threshold_gradient(m, s, 0.3) == 0.0


def test_pressure_force_vanishes_at_threshold(p3):
    s = p3.state_at(300.0, 2e5, [1.0], 0.5)
    thr = F.threshold_gradient(p3, s, 0.1)
    c = F.FlowCoefficients.isotropic(1e12)
    at = F.rhs("PressureForm", p3, s, F.LocalGradients.raw(1, grad_p=-thr, grad_eps=0.1), c)
    assert np.max(np.abs(at.total)) <= 1e-12 * thr
    beyond = F.rhs("PressureForm", p3, s, F.LocalGradients.raw(1, grad_p=-1.01 * thr, grad_eps=0.1), c)
    assert beyond.total[0] > 0


# -- equivalence along consistent paths ----------------------------------------------------

def _pairwise(model, path, x=0.1, bulk=True):
    st_ = path(x)
    g = F.LocalGradients.from_path(model, path, x)
    c = coeffs_for(model)
    forces = [F.rhs(f, model, st_, g, c) for f in FORMS]
    out = [F.relative_difference(a, b) for i, a in enumerate(forces) for b in forces[i + 1:]]
    if bulk and model.incompressible:
        b = thermo.bulk_equilibrium_map(model, st_)
        out.append(F.relative_difference(F.rhs("BulkForm", model, st_, g, c, bulk_activities=b.activities),
                                         forces[2]))
    return max(out)


@pytest.mark.parametrize("k", range(3))
def test_equivalence_p1(p1, k):
    assert _pairwise(p1, p1_path(p1, np.random.default_rng(k))) < 1e-8


@pytest.mark.parametrize("k", range(3))
def test_equivalence_p2(p2, k):
    assert _pairwise(p2, incompressible_path(p2, np.random.default_rng(k))) < 1e-8


@pytest.mark.parametrize("k", range(3))
def test_equivalence_p3_mixture(p3_urea, k):
    assert _pairwise(p3_urea, incompressible_path(p3_urea, np.random.default_rng(k))) < 1e-8


@pytest.mark.parametrize("k", range(2))
def test_equivalence_electrolyte(k):
    rng = np.random.default_rng(k)
    m = make_preset("P2", species=(SODIUM, CHLORIDE, WATER), mixing="dilute")
    assert _pairwise(m, electrolyte_path(m, rng)) < 1e-8


def test_single_component_bulk_matches_pressure_form(p3, rng):
    path = single_species_path(p3, rng)
    s = path(0.2)
    g = F.LocalGradients.from_path(p3, path, 0.2)
    c = coeffs_for(p3, hydration=False)
    a = F.rhs("PressureForm", p3, s, g, c)
    b = F.rhs("SingleComponentBulk", p3, s, g, c)
    assert F.relative_difference(a, b) < 1e-8


def test_single_component_bulk_compressible():
    vic = make_preset("compressible", swelling_p0=5e4)
    bulk_model = make_preset("compressible")

    def path(x):
        return MixtureState(300.0, 0.5 + 0.1 * x, [1000.0 * (1 + 1e-3 * x)])

    def bulk_of(s):
        _, p_b = thermo.bulk_state_from_gibbs(bulk_model, s.temperature, thermo.gibbs_potential(vic, s))
        return thermo.BulkState(p_b, np.array([1.0]))

    s = path(0.3)
    g = F.LocalGradients.from_path(vic, path, 0.3, bulk=bulk_of)
    rho_b, _ = thermo.bulk_state_from_gibbs(bulk_model, 300.0, thermo.gibbs_potential(vic, s))
    c = F.FlowCoefficients.isotropic(1e9)
    a = F.rhs("PressureForm", vic, s, g, c)
    b = F.rhs("SingleComponentBulk", vic, s, g, c, bulk_density=rho_b)
    assert F.relative_difference(a, b) < 1e-8


def test_state_pair_gradients_are_consistent(p3):
    a = p3.state_at(300.0, 2.0e5, [1.0], 0.50)
    b = p3.state_at(300.0, 2.1e5, [1.0], 0.52)
    g = F.LocalGradients.from_state_pair(p3, a, b, 0.01)
    assert g.grad_p[0] == pytest.approx(1e6)
    assert g.grad_eps[0] == pytest.approx(2.0)
    mu = [thermo.chemical_potential(p3, s, 0) for s in (a, b)]
    assert g.grad_mu[0, 0] == pytest.approx((mu[1] - mu[0]) / 0.01)


def test_bulk_form_asserts_volume_filling(p3):
    s = MixtureState(300.0, 0.5, [500.0], pressure=2e5)
    with pytest.raises(PreconditionError):
        F.assert_volume_filling(p3, s)


def test_apparent_bulk_pressure_gradient():
    m = make_preset("P2", species=(SODIUM, CHLORIDE, WATER), mixing="dilute")
    rho = np.array([20 * SODIUM.molar_mass, 10 * CHLORIDE.molar_mass, 997.0])
    s = m.state_at(300.0, 3e5, rho / rho.sum(), 0.5)
    g = F.LocalGradients.raw(3, grad_p=100.0, E_field=3.0)
    q = thermo.charge_density(m, s)
    np.testing.assert_allclose(F.apparent_bulk_pressure_gradient(m, s, g), [100.0 - 3.0 * q, 0, 0])


# -- reductions ---------------------------------------------------------------------------

def _electrolyte_state(rng, c=20.0):
    m = make_preset("P2", species=(SODIUM, CHLORIDE, WATER), mixing="dilute")
    rho = np.array([c * SODIUM.molar_mass, c * rng.uniform(0.5, 1.0) * CHLORIDE.molar_mass, 997.0])
    return m, m.state_at(300.0, rng.uniform(1e5, 1e6), rho / rho.sum(), rng.uniform(0.2, 0.8))


def test_moyne_murad_matches_bulk_form(rng):
    m, s = _electrolyte_state(rng)
    a = np.array([4e-4, 3e-4, 1.0])
    g = F.LocalGradients.raw(3, grad_pB=2e4, grad_a=[1e-4, -2e-4, 0.0], E_bulk=-5.0)
    mm = F.reduce_moyne_murad(m, s, g, a)
    bulk = F.rhs("BulkForm", m, s, g, F.FlowCoefficients.isotropic(1e12), bulk_activities=a)
    assert F.relative_difference(mm, bulk) < 1e-8
    assert mm.warnings == ()


def test_moyne_murad_zero_ion_gradients(rng):
    m, s = _electrolyte_state(rng)
    g = F.LocalGradients.raw(3, grad_pB=2e4, grad_a=[0.0, 0.0, 0.0])
    mm = F.reduce_moyne_murad(m, s, g, [1e-4, 1e-4, 1.0])
    np.testing.assert_allclose(mm.total, -s.volume_fraction * np.array([2e4, 0, 0]), rtol=1e-12)


def test_moyne_murad_flags_non_dilute(rng):
    m, s = _electrolyte_state(rng)
    g = F.LocalGradients.raw(3, grad_pB=1.0, grad_a=[0.0, 0.0, 0.0])
    mm = F.reduce_moyne_murad(m, s, g, [0.05, 0.05, 0.9])
    assert len(mm.warnings) == 2


def test_osmotic_pressure_bar_value():
    assert F.osmotic_pressure_bar(300.0, 1.0, 0.0, [1.0, 1.0]) == pytest.approx(4988.4, rel=1e-4)
    assert F.osmotic_pressure_bar(300.0, 1.0, 0.0, [0.0, 0.0]) == 0.0


def test_huyghe_janssen_matches_potential_form(rng):
    m = make_preset("P2", species=(SODIUM, CHLORIDE, WATER), mixing="dilute", osmotic_coefficient=0.93,
                    pi0=1500.0)
    path = electrolyte_path(m, rng)
    s = path(0.1)
    g = F.LocalGradients.from_path(m, path, 0.1)
    c_ions = s.partial_densities[:2] / m.molar_masses[:2]
    coeffs = F.FlowCoefficients.isotropic(1e12)
    hj = F.reduce_huyghe_janssen(s, g, 0.93, 1500.0, c_ions, coeffs, model=m)
    pot = F.rhs("PotentialForm", m, s, g, coeffs)
    assert F.relative_difference(hj, pot) < 1e-8
    assert hj.warnings == ()
    pi_bar = F.osmotic_pressure_bar(300.0, 0.93, 1500.0, c_ions)
    p_b = thermo.bulk_equilibrium_map(m, s, membrane="semipermeable").pressure
    assert thermo.liquid_pressure(m, s) - pi_bar == pytest.approx(p_b, rel=1e-8)


def test_huyghe_janssen_without_ions_is_darcy():
    m = make_preset("P2", species=(SODIUM, CHLORIDE, WATER), mixing="dilute")
    s = m.state_at(300.0, 2e5, [0.0, 0.0, 1.0], 0.4)
    coeffs = F.FlowCoefficients.isotropic(2e11)
    g = F.LocalGradients.raw(3, grad_p=-1e3)
    hj = F.reduce_huyghe_janssen(s, g, 1.0, 0.0, [0.0, 0.0], coeffs, model=m)
    K = F.huyghe_janssen_permeability(coeffs, 0.4)
    # eps v = -K grad p
    np.testing.assert_allclose(0.4 * F.velocity(coeffs, hj), -K @ np.array([-1e3, 0, 0]), rtol=1e-12)


def test_relative_difference_against_a_scale():
    a = F.DrivingForce.from_terms({"x": np.array([100.0, 0, 0]), "y": np.array([-99.0, 0, 0])})
    b = F.DrivingForce.from_terms({"x": np.array([100.0, 0, 0]), "y": np.array([-98.0, 0, 0])})
    assert F.force_scale(a, b) == 100.0
    assert F.relative_difference(a, b) == pytest.approx(0.5)
    assert F.relative_difference(a, b, F.force_scale(a, b)) == pytest.approx(0.01)
