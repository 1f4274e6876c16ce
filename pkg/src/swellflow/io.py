"""CSV writers.  Content is deterministic; only file names carry a timestamp."""
from __future__ import annotations

import csv
import datetime as _dt
import os
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, rows, header_comments=(), fieldnames=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fieldnames)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in fieldnames])
    return path


def timestamp() -> str:
    return _dt.datetime.now().strftime("%Y%m%dT%H%M%S")


def unique_stem(directory, name: str) -> Path:
    """``directory/<name>_<timestamp>``, suffixed when that stem is already taken."""
    directory = Path(directory)
    base = f"{name}_{timestamp()}"
    stem, k = base, 1
    while (directory / f"{stem}.csv").exists():
        stem = f"{base}_{k}"
        k += 1
    return directory / stem


def write_series(stem: Path, label: str, x, y, x_name="x", y_name="y") -> Path:
    return write_csv(f"{stem}_plot_{label}.csv",
                     ({x_name: float(a), y_name: float(b)} for a, b in zip(x, y)))


def write_run(result, config) -> list[str]:
    """Write the snapshot (or sweep) CSV, the summary CSV and optional plot series."""
    out_dir = Path(config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    stem = unique_stem(out_dir, result.scenario)
    header = [f"scenario={result.scenario}", f"seed={config.seed}",
              f"model={config.model.name}", f"flux_scale={result.flux_scale!r}"]
    files = []
    if result.sweep:
        files.append(write_csv(f"{stem}.csv", result.sweep, header))
        if config.plot_data:
            g = [r["applied_gradient"] for r in result.sweep]
            files.append(write_series(stem, "vicinal_flux", g, [r["vicinal_flux"] for r in result.sweep],
                                      "applied_gradient", "vicinal_flux"))
            files.append(write_series(stem, "bulk_flux", g, [r["bulk_flux"] for r in result.sweep],
                                      "applied_gradient", "bulk_flux"))
    else:
        files.append(write_csv(f"{stem}.csv", result.snapshots, header))
        files.append(write_csv(f"{stem}_summary.csv", result.summary, header))
        if config.plot_data:
            final_t = result.snapshots[-1]["time"]
            last = [r for r in result.snapshots if r["time"] == final_t]
            x = [r["x"] for r in last]
            keys = ["eps_l", "p_l", "pi_l", "p_B_equiv", "face_flux_left"] + [
                k for k in last[0] if k.startswith("mu_tilde_")]
            for k in keys:
                files.append(write_series(stem, k, x, [r[k] for r in last], "x", k))
    return [str(f) for f in files]
