"""File formats: CSV fields and tables, JSON summaries, ASCII PPM heatmaps.

Floats are written with ``repr`` so every file round-trips exactly and
re-runs are byte-identical.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .femref import PressureField
from .metrics import Comparison


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _f(x) -> str:
    return repr(float(x))


def write_json(path, doc: dict):
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_grid_csv(path, header: tuple, x: np.ndarray, y: np.ndarray, values: np.ndarray):
    """Row-major (Y outer, X inner) three-column CSV."""
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(header)
        for j, yv in enumerate(y):
            for i, xv in enumerate(x):
                w.writerow((_f(xv), _f(yv), _f(values[j, i])))


def write_surface_csv(path, surface, nx: int, ny: int):
    x = np.linspace(0.0, 1.0, nx)
    y = np.linspace(0.0, 1.0, ny)
    XX, YY = np.meshgrid(x, y)
    write_grid_csv(path, ("x", "y", "h"), x, y, surface.thickness(XX, YY))


def write_field_csv(path, field: PressureField):
    write_grid_csv(path, ("x", "y", "p"), field.x, field.y, field.values)


def read_field_csv(path) -> PressureField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected columns x,y,p")
    nx = int(np.unique(data[:, 0]).size)
    ny = int(np.unique(data[:, 1]).size)
    if nx * ny != data.shape[0]:
        raise ValueError(f"{path}: not a full rectangular grid")
    field = PressureField(nx, ny, data[:, 2].reshape(ny, nx))
    if not (np.allclose(data[:nx, 0], field.x, atol=1e-12) and np.allclose(data[::nx, 1], field.y, atol=1e-12)):
        raise ValueError(f"{path}: grid is not the uniform node grid of the unit square")
    return field


def write_comparison_csv(path, comp: Comparison):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("metric", "reference", "candidate", "rel_error_pct"))
        for r in comp.rows:
            w.writerow((r.metric, _f(r.reference), _f(r.candidate), _f(r.rel_error_pct)))


def write_centerline_csv(path, comp: Comparison):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("x", "p_ref", "p_cand"))
        for x, pr, pc in comp.centerline:
            w.writerow((_f(x), _f(pr), _f(pc)))


def write_ppm(path, values: np.ndarray) -> dict:
    """Linear grayscale P3 image (top row = largest Y) plus a ``{min, max}`` sidecar."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo
    g = np.zeros(v.shape, dtype=int) if span == 0 else np.rint((v - lo) / span * 255).astype(int)
    g = g[::-1]
    with open(path, "w") as fh:
        fh.write(f"P3\n{g.shape[1]} {g.shape[0]}\n255\n")
        for row in g:
            fh.write(" ".join(f"{p} {p} {p}" for p in row))
            fh.write("\n")
    meta = {"min": lo, "max": hi}
    write_json(str(path) + ".json", meta)
    return meta


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_f(c) if isinstance(c, (float, np.floating)) else c for c in row])
