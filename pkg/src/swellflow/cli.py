"""Command-line front end.

Exit codes: 0 success, 1 domain or solver failure (including failed identity
checks), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import sys

import numpy as np

from . import __version__, flowlaws, thermo
from .config import (apply_override, build_state, default_config_text, load_config, parse,
                     read_parser)
from .errors import ConfigError, SwellflowError
from .identities import IdentityReport, verify_all
from .io import unique_stem, write_csv
from .models import PRESETS, make_preset
from .simulator import SCENARIOS, run_scenario

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _emit(rows, fieldnames, out_dir, name, header=()):
    """Print rows as CSV and, with an output directory, write them to a file too."""
    buf = _stdio.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    sys.stdout.write(buf.getvalue())
    if out_dir is not None:
        path = write_csv(f"{unique_stem(out_dir, name)}.csv", rows, header, fieldnames)
        print(f"wrote {path}", file=sys.stderr)


def _thermo_rows(model, state):
    rows = [("density", "", state.density)]
    dec = thermo.pressure_decomposition(model, state)
    rows += [("liquid_pressure", "", dec.total), ("classical_pressure", "", dec.classical_pressure),
             ("swelling_pressure", "", dec.swelling_pressure),
             ("helmholtz", "", model.psi(state)), ("gibbs", "", thermo.gibbs_potential(model, state)),
             ("charge_density", "", thermo.charge_density(model, state))]
    mu = thermo.chemical_potentials(model, state)
    mu_e = thermo.electrochemical_potentials(model, state)
    for s, a, b in zip(model.species, mu, mu_e):
        rows.append(("chemical_potential", s.name, a))
        rows.append(("electrochemical_potential", s.name, b))
    return [{"quantity": q, "component": c, "value": float(v)} for q, c, v in rows]


def cmd_thermo_eval(args):
    parser = read_parser(args.state)
    apply_override(parser, "model.preset", args.model)
    cfg = parse(parser, args.state)
    state = build_state(cfg.model, cfg.state_section)
    _emit(_thermo_rows(cfg.model, state), ["quantity", "component", "value"], args.output_dir,
          "thermo_eval", [f"model={cfg.model.name}"])
    return EXIT_OK


def cmd_verify(args):
    if args.states < 1:
        raise _UsageError("--states must be >= 1")
    if args.model not in PRESETS:
        raise ConfigError(f"unknown model preset {args.model!r}; choose from {', '.join(sorted(PRESETS))}")
    model = make_preset(args.model)
    reports = verify_all(model, args.states, args.seed)
    rows = []
    for rep in reports:
        if isinstance(rep, IdentityReport):
            rows.append(rep.as_row())
        else:
            print(f"{rep}: not applicable to {model.name}, skipped", file=sys.stderr)
    _emit(rows, ["identity_id", "states_tested", "max_rel_error", "pass"], args.output_dir,
          f"identities_{model.name}", [f"model={model.name}", f"seed={args.seed}"])
    return EXIT_OK if all(r["pass"] == "true" for r in rows) else EXIT_FAILURE


def _flow_rows(cfg):
    model, coeffs, path = cfg.model, cfg.coeffs, cfg.path
    at = lambda x: path.state(model, x)  # noqa: E731
    state = at(path.x)
    grads = flowlaws.LocalGradients.from_path(model, at, path.x, step=path.step * path.length)
    extra = {}
    forms = [flowlaws.Formulation.PRESSURE, flowlaws.Formulation.GIBBS, flowlaws.Formulation.POTENTIAL]
    if model.incompressible:
        extra["bulk_activities"] = thermo.bulk_equilibrium_map(model, state).activities
        forms.append(flowlaws.Formulation.BULK)
        if model.n_species == 1:
            forms.append(flowlaws.Formulation.SINGLE_COMPONENT_BULK)
    rows = []
    for form in forms:
        force = flowlaws.rhs(form, model, state, grads, coeffs, **extra)
        terms = dict(force.breakdown, total=force.total, velocity=flowlaws.velocity(coeffs, force))
        for term, vec in terms.items():
            for axis, value in zip("xyz", np.asarray(vec, dtype=float)):
                rows.append({"formulation": form.value, "term": term, "component": axis,
                             "value": float(value)})
    return rows


def cmd_flow_compare(args):
    cfg = load_config(args.config)
    _emit(_flow_rows(cfg), ["formulation", "term", "component", "value"], cfg.output_dir,
          "flow_compare", [f"seed={cfg.seed}", f"model={cfg.model.name}"])
    return EXIT_OK


def _with_plot(cfg, flag):
    if flag and not cfg.plot_data:
        from dataclasses import replace
        cfg = replace(cfg, plot_data=True)
    return cfg


def _report_run(result):
    for f in result.metadata.get("files", ()):
        print(f"wrote {f}", file=sys.stderr)
    print(f"{result.scenario}: flux_scale={result.flux_scale!r} "
          f"max_abs_flux={result.metadata.get('final_max_flux', float('nan'))!r} "
          f"steps={result.metadata.get('steps', 0)}")


def cmd_simulate(args):
    cfg = _with_plot(load_config(args.config, {"run.scenario": args.scenario}), args.plot_data)
    _report_run(run_scenario(args.scenario, cfg))
    return EXIT_OK


def cmd_sweep(args):
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise _UsageError("--values needs a comma-separated list")
    configs = [_with_plot(load_config(args.config, {args.param: v}), args.plot_data) for v in values]
    rows = []
    for value, cfg in zip(values, configs):
        result = run_scenario(cfg.scenario_id, cfg)
        _report_run(result)
        rows.append({"param": args.param, "value": value, "scenario": cfg.scenario_id,
                     "flux_scale": result.flux_scale,
                     "final_max_flux": result.metadata.get("final_max_flux", float("nan")),
                     "steps": result.metadata.get("steps", 0)})
    out_dir = configs[0].output_dir
    _emit(rows, list(rows[0]), out_dir, "sweep", [f"seed={configs[0].seed}", f"param={args.param}"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swellflow", description="Flow in swelling porous media.")
    p.add_argument("--version", action="version", version=f"swellflow {__version__}")
    p.add_argument("--print-config", action="store_true",
                   help="print every config key with its default and exit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("thermo-eval", help="evaluate thermodynamic quantities at one state")
    s.add_argument("--model", required=True, choices=sorted(PRESETS))
    s.add_argument("--state", required=True, help="INI file with a [state] section")
    s.add_argument("--output-dir", default=None)
    s.set_defaults(func=cmd_thermo_eval)

    s = sub.add_parser("verify", help="check thermodynamic identities on random states")
    s.add_argument("--model", required=True)
    s.add_argument("--states", required=True, type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output-dir", default=None)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("flow-compare", help="driving force of each flow law along a state path")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_flow_compare)

    s = sub.add_parser("simulate", help="run a column scenario")
    s.add_argument("--scenario", required=True, choices=SCENARIOS)
    s.add_argument("--config", default=None, help="INI file; defaults are used when omitted")
    s.add_argument("--plot-data", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="repeat a scenario over values of one config key")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="section.key, e.g. scenario.pressure_contrast")
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--plot-data", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.print_config:
            sys.stdout.write(default_config_text())
            return EXIT_OK
        if args.command is None:
            raise _UsageError("a subcommand is required")
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SwellflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
