"""CSV / PGM / JSON artifact writers with embedded provenance.

Numeric text output uses 17 significant digits so values round-trip exactly;
PGM images follow the plain (P2) format with white = superradiant and
gray = not, rows running down increasing y.
"""

from __future__ import annotations

import json

import numpy as np

from .scan import RegionMap

WHITE = 255
GRAY = 128


def _fmt(x):
    return f"{float(x):.17g}"


def _comment_lines(provenance):
    if not provenance:
        return []
    lines = []
    for key in sorted(provenance):
        lines.append(f"{key}: {provenance[key]}")
    return lines


def write_region_csv(region_map, path, provenance=None):
    """Cell-per-row dump with header x,y,value,mask plus axis metadata."""
    with open(path, "w") as fh:
        for line in _comment_lines(provenance):
            fh.write(f"# {line}\n")
        fh.write(f"# x_name: {region_map.x_name}\n")
        fh.write(f"# y_name: {region_map.y_name}\n")
        if region_map.label:
            fh.write(f"# label: {region_map.label}\n")
        fh.write("x,y,value,mask\n")
        mask = region_map.mask
        for iy, y in enumerate(region_map.y_values):
            for ix, x in enumerate(region_map.x_values):
                fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(region_map.values[iy, ix])},"
                         f"{int(mask[iy, ix])}\n")


def read_region_csv(path):
    """Rebuild a RegionMap written by write_region_csv."""
    x_name, y_name, label = "x", "y", ""
    xs, ys, vals = [], [], []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("x_name:"):
                    x_name = body.split(":", 1)[1].strip()
                elif body.startswith("y_name:"):
                    y_name = body.split(":", 1)[1].strip()
                elif body.startswith("label:"):
                    label = body.split(":", 1)[1].strip()
                continue
            if line.startswith("x,"):
                continue
            fx, fy, fv, _fm = line.split(",")
            xs.append(float(fx))
            ys.append(float(fy))
            vals.append(float(fv))
    x_values = np.unique(xs)
    y_values = np.unique(ys)
    grid = np.full((len(y_values), len(x_values)), np.nan)
    for x, y, v in zip(xs, ys, vals):
        iy = int(np.searchsorted(y_values, y))
        ix = int(np.searchsorted(x_values, x))
        grid[iy, ix] = v
    if np.any(np.isnan(grid)):
        raise ValueError(f"{path}: incomplete region grid")
    return RegionMap(x_name=x_name, x_values=x_values, y_name=y_name,
                     y_values=y_values, values=grid, label=label)


def write_region_pgm(region_map, path, provenance=None):
    """Plain-PGM (P2) image of the mask: white where superradiant."""
    mask = region_map.mask
    ny, nx = mask.shape
    if ny == 0 or nx == 0:
        raise ValueError("cannot render an empty map")
    with open(path, "w") as fh:
        fh.write("P2\n")
        for line in _comment_lines(provenance):
            fh.write(f"# {line}\n")
        if region_map.label:
            fh.write(f"# label: {region_map.label}\n")
        fh.write(f"{nx} {ny}\n255\n")
        for iy in range(ny):
            row = " ".join(str(WHITE if m else GRAY) for m in mask[iy])
            fh.write(row + "\n")


def write_json(record, path, provenance=None):
    """JSON artifact; floats use Python's round-trip repr."""
    out = dict(record)
    if provenance:
        out["provenance"] = provenance
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_coupling_csv(coupling, path, provenance=None):
    """All ordered index pairs with header n,m,Gamma,Omega (0-based)."""
    n = coupling.n_atoms
    with open(path, "w") as fh:
        for line in _comment_lines(provenance):
            fh.write(f"# {line}\n")
        fh.write("n,m,Gamma,Omega\n")
        for i in range(n):
            for j in range(n):
                fh.write(f"{i},{j},{_fmt(coupling.gamma[i, j])},"
                         f"{_fmt(coupling.omega[i, j])}\n")


def write_trajectory_csv(trajectory, path, provenance=None):
    """Sampled rates with header t,gamma_total,gamma_dir (nan when absent)."""
    gdir = trajectory.gamma_directional
    with open(path, "w") as fh:
        for line in _comment_lines(provenance):
            fh.write(f"# {line}\n")
        fh.write("t,gamma_total,gamma_dir\n")
        for i, t in enumerate(trajectory.times):
            dval = _fmt(gdir[i]) if gdir is not None else "nan"
            fh.write(f"{_fmt(t)},{_fmt(trajectory.gamma_total[i])},{dval}\n")
