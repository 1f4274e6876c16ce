"""INI run configuration with strict key checking.

Sections: ``[run]``, ``[model]``, ``[species.NAME]``, ``[flow]``, ``[column]``,
``[scenario]``, ``[solver]``, ``[path]``, ``[state]``, ``[output]``.  Every
section and key is optional; anything not listed in :data:`DEFAULTS` is an
error.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, SwellflowError
from .flowlaws import FlowCoefficients
from .models import ConstitutiveModel, make_preset
from .simulator import ColumnGrid, ScenarioSettings, SolverSettings, SCENARIOS
from .state import SpeciesSpec

DEFAULTS: dict[str, dict[str, str]] = {
    "run": {"seed": "0", "scenario": "fig5a"},
    "model": {"preset": "P3", "species": "", "mixing": "raoult",
              "reference_pressure": "101325", "osmotic_coefficient": "1.0", "pi0": "0",
              "reference_concentration": "1000", "swelling_p0": "101325",
              "bulk_modulus": "2.2e9"},
    "flow": {"resistivity": "1e12", "fick_mobility": "0", "hydration_coeff": "0"},
    "column": {"cells": "50", "length": "0.1"},
    "scenario": {f.name: str(f.default) for f in fields(ScenarioSettings) if f.name != "mode"},
    "solver": {"mode": "implicit", "newton_tol": "1e-12", "newton_max_iter": "25",
               "max_retries": "12", "grow_factor": "1.5", "grow_max_iterations": "4",
               "max_dt": "inf"},
    "path": {"temperature": "298.15", "x": "0.05", "length": "0.1", "p_start": "3.0e5",
             "p_end": "2.5e5", "eps_start": "0.45", "eps_end": "0.55",
             "mass_fractions_start": "", "mass_fractions_end": "",
             "phi_start": "0", "phi_end": "0", "step": "1e-3"},
    "state": {"temperature": "298.15", "volume_fraction": "0.5", "partial_densities": "",
              "pressure": "", "mass_fractions": "", "electric_potential": "0"},
    "output": {"directory": "swellflow_out", "plot_data": "false"},
}
SPECIES_KEYS = {"molar_mass": None, "specific_density": None, "valence": "0"}

# keyword arguments each preset accepts from [model]
_PRESET_KEYS = {
    "P1": (),
    "P2": ("mixing", "reference_pressure", "osmotic_coefficient", "pi0", "reference_concentration"),
    "P3": ("mixing", "reference_pressure", "osmotic_coefficient", "pi0", "reference_concentration",
           "swelling_p0"),
    "compressible": ("reference_pressure", "swelling_p0", "bulk_modulus"),
}
_FLOAT_MODEL_KEYS = {"reference_pressure", "osmotic_coefficient", "pi0", "reference_concentration",
                     "swelling_p0", "bulk_modulus"}


@dataclass(frozen=True)
class PathSettings:
    """Linear state path for flow comparisons: endpoints at x = 0 and x = length."""

    temperature: float
    x: float
    length: float
    p_start: float
    p_end: float
    eps_start: float
    eps_end: float
    mass_fractions_start: tuple | None
    mass_fractions_end: tuple | None
    phi_start: float
    phi_end: float
    step: float

    def state(self, model: ConstitutiveModel, x: float):
        t = x / self.length
        n = model.n_species
        c0 = np.ones(n) / n if self.mass_fractions_start is None else np.array(self.mass_fractions_start)
        c1 = c0 if self.mass_fractions_end is None else np.array(self.mass_fractions_end)
        if c0.shape != (n,) or c1.shape != (n,):
            raise ConfigError(f"[path] mass fractions need {n} entries")
        c = (1 - t) * c0 + t * c1
        return model.state_at(self.temperature, (1 - t) * self.p_start + t * self.p_end, c / c.sum(),
                              (1 - t) * self.eps_start + t * self.eps_end,
                              (1 - t) * self.phi_start + t * self.phi_end)


@dataclass(frozen=True)
class RunConfig:
    model: ConstitutiveModel
    coeffs: FlowCoefficients
    grid: ColumnGrid
    scenario: ScenarioSettings
    scenario_id: str
    solver: SolverSettings
    path: PathSettings
    state_section: dict
    output_dir: str | None
    plot_data: bool
    seed: int
    source: str | None = None


def _float(section, key, raw):
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None
    if math.isnan(v):
        raise ConfigError(f"[{section}] {key}: NaN is not allowed")
    return v


def _int(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None


def _bool(section, key, raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected true/false, got {raw!r}")


def _floats(section, key, raw):
    parts = [p for p in raw.replace(",", " ").split() if p]
    return tuple(_float(section, key, p) for p in parts)


def _positive(section, key, value, allow_zero=False):
    if not (value >= 0 if allow_zero else value > 0):
        raise ConfigError(f"[{section}] {key} must be {'>= 0' if allow_zero else '> 0'}, got {value!r}")
    return value


def _check_keys(parser):
    for section in parser.sections():
        if section.startswith("species."):
            allowed = SPECIES_KEYS
        elif section in DEFAULTS:
            allowed = DEFAULTS[section]
        else:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in allowed:
                raise ConfigError(f"[{section}] unknown key {key!r}")


def _get(parser, section, key):
    if parser.has_option(section, key):
        return parser.get(section, key)
    return DEFAULTS[section][key]


def _species(parser, names):
    out = []
    for name in names:
        sec = f"species.{name}"
        if not parser.has_section(sec):
            raise ConfigError(f"species {name!r} is listed in [model] but has no [{sec}] section")
        raw = parser[sec]
        for key in ("molar_mass", "specific_density"):
            if key not in raw:
                raise ConfigError(f"[{sec}] missing required key {key!r}")
        m = _positive(sec, "molar_mass", _float(sec, "molar_mass", raw["molar_mass"]))
        rho = _positive(sec, "specific_density", _float(sec, "specific_density", raw["specific_density"]))
        z = _float(sec, "valence", raw.get("valence", "0"))
        out.append(SpeciesSpec.from_valence(name, m, rho, z))
    unused = [s[len("species."):] for s in parser.sections()
              if s.startswith("species.") and s[len("species."):] not in names]
    if unused:
        raise ConfigError(f"species sections not referenced by [model] species: {', '.join(unused)}")
    return out


def _build_model(parser):
    preset = _get(parser, "model", "preset")
    if preset not in _PRESET_KEYS:
        raise ConfigError(f"[model] preset: unknown preset {preset!r}")
    allowed = set(_PRESET_KEYS[preset]) | {"preset", "species"}
    if parser.has_section("model"):
        for key in parser["model"]:
            if key not in allowed:
                raise ConfigError(f"[model] key {key!r} does not apply to preset {preset}")
    kwargs = {}
    for key in _PRESET_KEYS[preset]:
        raw = _get(parser, "model", key)
        kwargs[key] = _float("model", key, raw) if key in _FLOAT_MODEL_KEYS else raw
    for key in ("swelling_p0", "bulk_modulus", "reference_concentration"):
        if key in kwargs:
            _positive("model", key, kwargs[key])
    names = [n.strip() for n in _get(parser, "model", "species").split(",") if n.strip()]
    if names:
        species = _species(parser, names)
        kwargs["species"] = species[0] if preset == "compressible" else tuple(species)
        if preset == "compressible" and len(species) != 1:
            raise ConfigError("[model] the compressible preset takes exactly one species")
    elif any(s.startswith("species.") for s in parser.sections()):
        raise ConfigError("[species.*] sections need a [model] species list")
    try:
        return make_preset(preset, **kwargs)
    except SwellflowError as exc:
        raise ConfigError(f"[model] {exc}") from exc


def _per_species(section, key, raw, n):
    vals = _floats(section, key, raw)
    if len(vals) == 1:
        return np.full(n, vals[0])
    if len(vals) != n:
        raise ConfigError(f"[{section}] {key}: expected 1 or {n} values, got {len(vals)}")
    return np.array(vals)


def _build_flow(parser, n):
    vals = _floats("flow", "resistivity", _get(parser, "flow", "resistivity"))
    if len(vals) == 1:
        R = _positive("flow", "resistivity", vals[0]) * np.eye(3)
    elif len(vals) == 9:
        R = np.array(vals).reshape(3, 3)
    else:
        raise ConfigError("[flow] resistivity: give one value or nine (row-major 3x3)")
    Q = _per_species("flow", "fick_mobility", _get(parser, "flow", "fick_mobility"), n)
    r = _per_species("flow", "hydration_coeff", _get(parser, "flow", "hydration_coeff"), n)
    try:
        return FlowCoefficients(R, Q, r)
    except SwellflowError as exc:
        raise ConfigError(f"[flow] {exc}") from exc


def _build_scenario(parser, mode):
    kw = {}
    for f in fields(ScenarioSettings):
        if f.name == "mode":
            continue
        raw = _get(parser, "scenario", f.name)
        kw[f.name] = _int("scenario", f.name, raw) if f.type in ("int", int) else _float("scenario", f.name, raw)
    for key in ("t_end", "dt_initial", "steady_tol", "temperature", "grad_eps_max", "sweep_max_factor"):
        _positive("scenario", key, kw[key])
    _positive("scenario", "pressure_contrast", kw["pressure_contrast"], allow_zero=True)
    _positive("scenario", "reservoir_contrast", kw["reservoir_contrast"], allow_zero=True)
    try:
        return ScenarioSettings(mode=mode, **kw)
    except SwellflowError as exc:
        raise ConfigError(f"[scenario] {exc}") from exc


def _build_solver(parser):
    mode = _get(parser, "solver", "mode")
    if mode not in ("implicit", "explicit"):
        raise ConfigError(f"[solver] mode must be implicit or explicit, got {mode!r}")
    tol = _positive("solver", "newton_tol", _float("solver", "newton_tol", _get(parser, "solver", "newton_tol")))
    it = _int("solver", "newton_max_iter", _get(parser, "solver", "newton_max_iter"))
    if it < 1:
        raise ConfigError("[solver] newton_max_iter must be >= 1")
    retries = _int("solver", "max_retries", _get(parser, "solver", "max_retries"))
    if retries < 0:
        raise ConfigError("[solver] max_retries must be >= 0")
    grow = _float("solver", "grow_factor", _get(parser, "solver", "grow_factor"))
    if grow < 1:
        raise ConfigError("[solver] grow_factor must be >= 1")
    grow_it = _int("solver", "grow_max_iterations", _get(parser, "solver", "grow_max_iterations"))
    max_dt = _positive("solver", "max_dt", _float("solver", "max_dt", _get(parser, "solver", "max_dt")))
    return mode, SolverSettings(tol, it, retries, grow, grow_it, max_dt)


def _build_path(parser):
    g = lambda k: _float("path", k, _get(parser, "path", k))  # noqa: E731
    fr = {}
    for k in ("mass_fractions_start", "mass_fractions_end"):
        raw = _get(parser, "path", k)
        fr[k] = _floats("path", k, raw) if raw.strip() else None
    path = PathSettings(g("temperature"), g("x"), g("length"), g("p_start"), g("p_end"), g("eps_start"),
                        g("eps_end"), fr["mass_fractions_start"], fr["mass_fractions_end"],
                        g("phi_start"), g("phi_end"), g("step"))
    for k in ("temperature", "length", "step"):
        _positive("path", k, getattr(path, k))
    for k in ("eps_start", "eps_end"):
        if not 0 < getattr(path, k) <= 1:
            raise ConfigError(f"[path] {k} must lie in (0, 1]")
    if not 0 <= path.x <= path.length:
        raise ConfigError("[path] x must lie within [0, length]")
    return path


def parse(parser: configparser.ConfigParser, source: str | None = None) -> RunConfig:
    _check_keys(parser)
    seed = _int("run", "seed", _get(parser, "run", "seed"))
    scenario_id = _get(parser, "run", "scenario")
    if scenario_id not in SCENARIOS:
        raise ConfigError(f"[run] scenario must be one of {', '.join(SCENARIOS)}")
    model = _build_model(parser)
    coeffs = _build_flow(parser, model.n_species)
    cells = _int("column", "cells", _get(parser, "column", "cells"))
    length = _float("column", "length", _get(parser, "column", "length"))
    if cells < 2:
        raise ConfigError("[column] cells must be >= 2")
    _positive("column", "length", length)
    mode, solver = _build_solver(parser)
    scenario = _build_scenario(parser, mode)
    state_section = {k: _get(parser, "state", k) for k in DEFAULTS["state"]}
    out_dir = _get(parser, "output", "directory").strip() or None
    plot = _bool("output", "plot_data", _get(parser, "output", "plot_data"))
    return RunConfig(model, coeffs, ColumnGrid.uniform(length, cells), scenario, scenario_id, solver,
                     _build_path(parser), state_section, out_dir, plot, seed, source)


def read_parser(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parser


def apply_override(parser: configparser.ConfigParser, key: str, value: str) -> None:
    """Set ``section.key`` (section names may contain dots, e.g. species.water.valence)."""
    if "." not in key:
        raise ConfigError(f"parameter {key!r} must look like section.key")
    section, name = key.rsplit(".", 1)
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, name, value)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a config file (``None`` gives the defaults)."""
    if path is None:
        parser = configparser.ConfigParser(interpolation=None, strict=True)
        parser.optionxform = str
    else:
        parser = read_parser(path)
    for k, v in (overrides or {}).items():
        apply_override(parser, k, v)
    return parse(parser, None if path is None else str(path))


def default_config_text() -> str:
    """Every section with its default values, as printed by ``--print-config``."""
    lines = ["# swellflow run configuration; every key is optional",
             "# [species.NAME] sections (molar_mass, specific_density, valence) are added",
             "# for each name listed in [model] species", ""]
    preset = DEFAULTS["model"]["preset"]
    for section, values in DEFAULTS.items():
        lines.append(f"[{section}]")
        for k, v in values.items():
            if section == "model" and k not in (*_PRESET_KEYS[preset], "preset", "species"):
                users = [name for name, keys in _PRESET_KEYS.items() if k in keys]
                lines.append(f"# {k} = {v}    ({', '.join(users)} only)")
            else:
                lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)


def build_state(model: ConstitutiveModel, section: dict):
    """A state from ``[state]`` keys: partial densities, or pressure plus mass fractions."""
    from .state import MixtureState

    T = _positive("state", "temperature", _float("state", "temperature", section["temperature"]))
    eps = _float("state", "volume_fraction", section["volume_fraction"])
    phi = _float("state", "electric_potential", section["electric_potential"])
    p_raw = section["pressure"].strip()
    p = _float("state", "pressure", p_raw) if p_raw else None
    rho_raw, c_raw = section["partial_densities"].strip(), section["mass_fractions"].strip()
    if rho_raw and c_raw:
        raise ConfigError("[state] give partial_densities or mass_fractions, not both")
    try:
        if rho_raw:
            rho = _floats("state", "partial_densities", rho_raw)
            if len(rho) != model.n_species:
                raise ConfigError(f"[state] partial_densities needs {model.n_species} values")
            return MixtureState(T, eps, np.array(rho), phi, p)
        if not c_raw or p is None:
            raise ConfigError("[state] needs partial_densities, or pressure with mass_fractions")
        c = np.array(_floats("state", "mass_fractions", c_raw))
        if c.shape != (model.n_species,):
            raise ConfigError(f"[state] mass_fractions needs {model.n_species} values")
        return model.state_at(T, p, c / c.sum(), eps, phi)
    except ConfigError:
        raise
    except SwellflowError as exc:
        raise ConfigError(f"[state] {exc}") from exc
