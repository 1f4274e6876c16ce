import configparser
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from swellflow import config as C
from swellflow.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults_fill_minimal_config(tmp_path):
    cfg = C.load_config(write(tmp_path, "[run]\nseed = 7\n"))
    assert cfg.seed == 7
    assert cfg.model.name == "P3"
    assert cfg.grid.cell_count == 50 and cfg.grid.length == pytest.approx(0.1)
    assert cfg.solver.newton_tol == 1e-12
    assert cfg.scenario.mode == "implicit"
    assert cfg.output_dir == "swellflow_out" and cfg.plot_data is False


def test_print_config_documents_every_default():
    text = C.default_config_text()
    for section, keys in C.DEFAULTS.items():
        assert f"[{section}]" in text
        for key in keys:
            assert f"{key} = " in text


def test_printed_defaults_load(tmp_path):
    cfg = C.load_config(write(tmp_path, C.default_config_text()))
    assert cfg.model.name == "P3"


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.ini")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    cfg = C.load_config(path)
    assert cfg.source == str(path)


def test_scenario_configs_cover_every_scenario():
    ids = {C.load_config(p).scenario_id for p in CONFIGS.glob("*.ini")}
    assert {"fig5a", "fig5b", "fig5c", "threshold_sweep"} <= ids


@pytest.mark.parametrize("text, key", [
    ("[solver]\nnewton_tol = -1e-9\n", "newton_tol"),
    ("[solver]\nnewton_tol = 0\n", "newton_tol"),
    ("[scenario]\nsteady_tol = -1\n", "steady_tol"),
    ("[solver]\nbogus = 1\n", "bogus"),
    ("[mystery]\na = 1\n", "mystery"),
    ("[column]\ncells = 1\n", "cells"),
    ("[column]\ncells = many\n", "cells"),
    ("[flow]\nresistivity = -5\n", "resistivity"),
    ("[model]\npreset = P9\n", "preset"),
    ("[model]\npreset = P1\nswelling_p0 = 1\n", "swelling_p0"),
    ("[output]\nplot_data = maybe\n", "plot_data"),
    ("[run]\nscenario = fig9\n", "scenario"),
])
def test_validation_names_the_key(tmp_path, text, key):
    with pytest.raises(ConfigError, match=key):
        C.load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        C.load_config(tmp_path / "absent.ini")


def test_parse_error(tmp_path):
    with pytest.raises(ConfigError):
        C.load_config(write(tmp_path, "no section header\n"))


def test_species_must_be_defined(tmp_path):
    with pytest.raises(ConfigError, match="salt"):
        C.load_config(write(tmp_path, "[model]\nspecies = salt, water\n[species.water]\n"
                                      "molar_mass = 0.018\nspecific_density = 997\n"))


def test_unreferenced_species_is_an_error(tmp_path):
    text = ("[model]\nspecies = water\n[species.water]\nmolar_mass = 0.018\nspecific_density = 997\n"
            "[species.extra]\nmolar_mass = 0.05\nspecific_density = 1000\n")
    with pytest.raises(ConfigError, match="extra"):
        C.load_config(write(tmp_path, text))


def test_species_table_builds_model(tmp_path):
    text = ("[model]\npreset = P2\nmixing = dilute\nspecies = na, cl, water\n"
            "[species.na]\nmolar_mass = 0.02299\nspecific_density = inf\nvalence = 1\n"
            "[species.cl]\nmolar_mass = 0.035453\nspecific_density = inf\nvalence = -1\n"
            "[species.water]\nmolar_mass = 0.018015\nspecific_density = 997\n"
            "[flow]\nfick_mobility = 1e-12, 2e-12, 0\n")
    cfg = C.load_config(write(tmp_path, text))
    assert [s.name for s in cfg.model.species] == ["na", "cl", "water"]
    assert cfg.model.charges[0] > 0 > cfg.model.charges[1]
    assert cfg.coeffs.fick_mobility[1, 0, 0] == 2e-12


def test_anisotropic_resistivity(tmp_path):
    cfg = C.load_config(write(tmp_path, "[flow]\nresistivity = 2 0 0  0 3 0  0 0 4\n"))
    np.testing.assert_array_equal(np.diag(cfg.coeffs.resistivity), [2, 3, 4])


def test_override(tmp_path):
    cfg = C.load_config(write(tmp_path, "[run]\nseed = 1\n"), {"scenario.pressure_contrast": "123"})
    assert cfg.scenario.pressure_contrast == 123.0
    with pytest.raises(ConfigError):
        C.load_config(write(tmp_path, "[run]\nseed = 1\n"), {"nodot": "1"})


@given(st.integers(2, 500), st.floats(1e-3, 10.0), st.integers(0, 2**31))
def test_round_trip_values(cells, length, seed):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_dict({"run": {"seed": str(seed)}, "column": {"cells": str(cells), "length": repr(length)}})
    cfg = C.parse(parser)
    assert cfg.seed == seed and cfg.grid.cell_count == cells
    assert cfg.grid.length == pytest.approx(length, rel=1e-14)


def test_state_section(tmp_path):
    cfg = C.load_config(write(tmp_path, "[state]\nvolume_fraction = 0.3\npressure = 2e5\n"
                                        "mass_fractions = 1\n"))
    s = C.build_state(cfg.model, cfg.state_section)
    assert s.volume_fraction == 0.3 and s.pressure == 2e5
    with pytest.raises(ConfigError, match="state"):
        C.build_state(cfg.model, dict(cfg.state_section, pressure=""))


def test_path_section(tmp_path):
    cfg = C.load_config(CONFIGS / "flow_compare.ini")
    s0 = cfg.path.state(cfg.model, 0.0)
    s1 = cfg.path.state(cfg.model, cfg.path.length)
    assert s0.pressure == 3.0e5 and s1.pressure == 2.5e5
    np.testing.assert_allclose(s1.mass_fractions, [0.02, 0.98])
