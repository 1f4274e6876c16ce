import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from swellflow import MixtureState, make_preset, thermo
from swellflow import identities as ids
from swellflow.errors import PreconditionError
from swellflow.fd import fd_derivative, fd_partial, partial_density, total_density


def test_fd_square():
    assert fd_derivative(lambda x: x * x, 3.0).value == pytest.approx(6.0, abs=1e-10)


def test_fd_tilde_density_partial_matches_symbolic(p1):
    s = MixtureState(320.0, 0.4, [300.0, 150.0, 700.0])
    r = fd_partial(p1.psi, total_density(), s)
    assert r.value == pytest.approx(p1.dpsi_tilde_drho(s), rel=1e-8)


def test_selector_families_differ(p1):
    s = MixtureState(320.0, 0.4, [300.0, 150.0, 700.0])
    a = fd_partial(p1.psi, partial_density(0), s).value
    b = fd_partial(p1.psi, total_density(), s).value
    assert abs(a - b) > 1e-3 * abs(b)


def test_registry_lists_all_identities():
    assert set(ids.A_SERIES_IDENTITIES) == {
        "A4_mixed_partials", "A10_pressure_two_forms", "A20_mu_helmholtz", "A34_mu_difference",
        "A40_mu_gibbs", "A46_dg_dp", "A50_weighted_sum", "A62_A64_dmu_dp_incompressible"}
    assert ids.registered_tolerance("A50_weighted_sum") == 1e-10
    assert ids.registered_tolerance("A10_pressure_two_forms") == 1e-6


def test_unknown_identity():
    with pytest.raises(PreconditionError):
        ids.verify_identity("A99", make_preset("P1"), [])


def test_a62_needs_incompressible(p1):
    with pytest.raises(PreconditionError):
        ids.verify_identity("A62_A64_dmu_dp_incompressible", p1, ids.sample_states(p1, 2))


def test_mixture_identity_needs_two_species(p3):
    with pytest.raises(PreconditionError):
        ids.verify_identity("A34_mu_difference", p3, ids.sample_states(p3, 2))


def test_a62_gives_specific_volumes(p2):
    s = ids.sample_states(p2, 1, seed=5)[0]
    lhs, rhs = ids._a62(p2, s)
    np.testing.assert_allclose(lhs, 1.0 / np.array([sp.specific_density for sp in p2.species]), rtol=1e-6)


def test_sample_states_are_admissible_and_reproducible(p2):
    a = ids.sample_states(p2, 20, seed=3)
    b = ids.sample_states(p2, 20, seed=3)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.partial_densities, y.partial_densities)
        assert 0.05 <= x.volume_fraction <= 0.95
        assert 273.0 <= x.temperature <= 373.0
        p2.validate(x)


@pytest.mark.parametrize("preset", ["P1", "P2", "P3u"])
def test_every_identity_passes(preset, p3_urea):
    model = p3_urea if preset == "P3u" else make_preset(preset)
    for rep in ids.verify_all(model, n_states=12, seed=11):
        if isinstance(rep, str):
            assert preset == "P1" and rep == "A62_A64_dmu_dp_incompressible"
            continue
        assert rep.passed, rep
        assert rep.states_tested == 12


def test_report_pass_tracks_tolerance(p1):
    states = ids.sample_states(p1, 3)
    good = ids.verify_identity("A50_weighted_sum", p1, states)
    assert good.passed and good.max_rel_error < 1e-10
    strict = ids.verify_identity("A10_pressure_two_forms", p1, states, tolerance=1e-300)
    assert not strict.passed
    assert strict.as_row()["pass"] == "false"


def test_e318_uses_independent_content_term(p3):
    s = p3.state_at(300.0, 2e5, [1.0], 0.07)
    lhs, rhs, scale = ids._e318(p3, s)
    assert ids.relative_error(lhs, rhs, scale) < 1e-10
    assert scale >= abs(thermo.swelling_pressure(p3, s))


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=5))
def test_relative_error_zero_on_equal(v):
    assert ids.relative_error(v, v) == 0.0


@given(st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=2, max_size=2))
def test_relative_error_symmetric_and_bounded(a, b):
    e = ids.relative_error(a, b)
    assert e == ids.relative_error(b, a)
    assert e <= 2.0 / 1e-12 or math.isinf(e)
    if max(map(abs, a + b)) > 0 and all(x * y >= 0 for x, y in zip(a, b)):
        assert e <= 1.0 + 1e-15
