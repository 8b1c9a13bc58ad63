"""File formats: grid densities, sample clouds, analytic specs and snapshot runs.

* density CSV: header ``x,f``; one row per cell center, uniform spacing.
* sample CSV: header ``x`` or ``x1,...,xn``, optional trailing ``weight``.
* analytic JSON: ``{"kind": ..., parameters}`` as produced by ``to_json``.
* snapshot CSV: header ``t,x,f``, rows grouped by time; the run manifest
  (``manifest.json``) records model, configuration, diagnostics and hash.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .density import Grid1D, GridDensity1D, SampleCloud, analytic_from_json
from .errors import ValidationError

MANIFEST_SCHEMA = "evolve-manifest/1"


def _fmt(v: float) -> str:
    return repr(float(v))


def write_density_csv(f: GridDensity1D, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x", "f"))
        for x, v in zip(f.grid.centers, f.values):
            w.writerow((_fmt(x), _fmt(v)))


def grid_from_centers(x: np.ndarray, rtol: float = 1e-9) -> Grid1D:
    if x.size < 8:
        raise ValidationError("a grid density needs at least 8 cells")
    h = (x[-1] - x[0]) / (x.size - 1)
    if not h > 0 or np.max(np.abs(np.diff(x) - h)) > rtol * max(1.0, abs(x).max()):
        raise ValidationError("cell centers must be increasing and equally spaced")
    return Grid1D(float(x[0] - h / 2), float(x[-1] + h / 2), int(x.size))


def read_density_csv(path, normalize: bool = False) -> GridDensity1D:
    """Grid density from an ``x,f`` file; mass must already be 1 unless ``normalize``."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or [h.strip() for h in header] != ["x", "f"]:
            raise ValidationError(f"{path}: expected header 'x,f'")
        rows = [(float(a), float(b)) for a, b in r]
    x, v = (np.array(c) for c in zip(*rows)) if rows else (np.array([]), np.array([]))
    grid = grid_from_centers(x)
    if normalize:
        return GridDensity1D.from_values(grid, v)
    return GridDensity1D(grid, v)


def write_samples_csv(cloud: SampleCloud, path) -> None:
    n = cloud.dim
    names = ["x"] if n == 1 else [f"x{k + 1}" for k in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["weight"])
        for p, wt in zip(cloud.points, cloud.weights):
            w.writerow([_fmt(c) for c in p] + [_fmt(wt)])


def read_samples_csv(path) -> SampleCloud:
    """Weighted cloud; equal weights when no ``weight`` column is present."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = [h.strip() for h in next(r, [])]
        rows = [list(map(float, row)) for row in r if row]
    has_w = bool(header) and header[-1] == "weight"
    coords = header[:-1] if has_w else header
    if coords != ["x"] and coords != [f"x{k + 1}" for k in range(len(coords))]:
        raise ValidationError(f"{path}: expected header 'x' or 'x1,...,xn' (optionally ',weight')")
    if not rows:
        raise ValidationError(f"{path}: no samples")
    A = np.array(rows)
    pts = A[:, : len(coords)]
    w = A[:, -1] if has_w else np.full(len(rows), 1.0 / len(rows))
    return SampleCloud(pts, w / w.sum())


def read_analytic_json(path):
    return analytic_from_json(json.loads(Path(path).read_text()))


def write_snapshots(snapshots, out_dir, manifest: dict) -> dict:
    """Write ``snapshots.csv`` and ``manifest.json`` into ``out_dir``.

    The density at the last snapshot is also written as ``final.csv`` in the
    density format, so it can be fed back to the metric command.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "snapshots.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "x", "f"))
        for s in snapshots:
            t = _fmt(s.t)
            for x, v in zip(s.density.grid.centers, s.density.values):
                w.writerow((t, _fmt(x), _fmt(v)))
    if snapshots:
        write_density_csv(snapshots[-1].density, out / "final.csv")
    mass0 = snapshots[0].mass if snapshots else 1.0
    doc = {
        "schema": MANIFEST_SCHEMA,
        **manifest,
        "diagnostics": [
            {"t": s.t, "mass": s.mass, "mean": s.mean, "min": s.min_value} for s in snapshots
        ],
        "max_mass_drift": max((abs(s.mass - mass0) for s in snapshots), default=0.0),
        "files": ["snapshots.csv", "final.csv"],
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2))
    return doc


def read_snapshots(path) -> list[tuple[float, GridDensity1D]]:
    groups: dict = {}
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != ["t", "x", "f"]:
            raise ValidationError(f"{path}: expected header 't,x,f'")
        for row in r:
            groups.setdefault(float(row["t"]), []).append((float(row["x"]), float(row["f"])))
    out = []
    for t, rows in groups.items():
        x, v = map(np.array, zip(*rows))
        out.append((t, GridDensity1D(grid_from_centers(x), v)))
    return out
