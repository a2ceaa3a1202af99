"""Readers and writers for diagrams, samples, point clouds, fields and curves.

Formats
-------
diagram CSV
    header ``birth,death,dim``; one pair per row; ``inf`` marks an essential
    class.
sample
    a directory of diagram CSVs (read in sorted filename order) or a JSON
    file ``{"L": <float>, "diagrams": [[[b, d, dim], ...], ...]}``.
point CSV
    header ``x,y`` or ``x,y,z``.
field CSV
    two comment lines, ``# origin_x,origin_y,cell,nx,ny`` and ``# <values>``,
    then ``ny`` rows of ``nx`` comma-separated values (row ``j`` is death
    index ``j``).
curve CSV
    header ``x,mean,q_lo,q_hi``.

Floats are written with ``repr`` so files round-trip exactly.
"""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .core import DiagramSample, OmegaBox, PersistenceDiagram
from .errors import PDError
from .kde import ScalarField
from .vr import PointCloud


def _fmt(x):
    return repr(float(x))


def read_diagram_csv(path, box, *, cap_essential=False):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["birth", "death", "dim"]:
            raise PDError(f"{path}: expected header 'birth,death,dim'")
        rows = [(float(r["birth"]), float(r["death"]), int(r["dim"])) for r in reader]
    return PersistenceDiagram.from_pairs(rows, box, cap_essential=cap_essential)


def write_diagram_csv(diagram, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("birth,death,dim\n")
        for b, d, k in diagram:
            fh.write(f"{_fmt(b)},{_fmt(d)},{k}\n")


def read_sample(path, L=None, *, cap_essential=False):
    """Load a :class:`DiagramSample` from a directory of CSVs or a JSON file."""
    path = Path(path)
    if path.is_dir():
        if L is None:
            raise PDError("L must be given for a directory sample")
        box = OmegaBox(float(L))
        files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".csv")
        if not files:
            raise PDError(f"{path}: no diagram CSV files")
        return DiagramSample(
            tuple(read_diagram_csv(p, box, cap_essential=cap_essential) for p in files), box
        )
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    file_L = float(data["L"])
    if L is not None and float(L) != file_L:
        raise PDError(f"{path}: file declares L={file_L}, expected L={L}")
    box = OmegaBox(file_L)
    diagrams = tuple(
        PersistenceDiagram.from_pairs(
            [(float(b), float(d), int(k)) for b, d, k in dg], box, cap_essential=cap_essential
        )
        for dg in data["diagrams"]
    )
    return DiagramSample(diagrams, box)


def write_sample_json(sample, path):
    data = {
        "L": sample.box.L,
        "diagrams": [[[float(b), float(d), int(k)] for b, d, k in dg] for dg in sample],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)


def write_sample_dir(sample, path):
    os.makedirs(path, exist_ok=True)
    width = max(4, len(str(sample.n)))
    for i, dg in enumerate(sample):
        write_diagram_csv(dg, Path(path) / f"diagram_{i:0{width}d}.csv")


def read_points_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header not in (["x", "y"], ["x", "y", "z"]):
            raise PDError(f"{path}: expected header 'x,y' or 'x,y,z'")
        rows = [[float(v) for v in row] for row in reader if row]
    return PointCloud(rows)


def write_points_csv(cloud, path):
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud)
    names = ["x", "y", "z"][: pts.shape[1]]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in pts:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_field_csv(field, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# origin_x,origin_y,cell,nx,ny\n")
        fh.write(
            f"# {_fmt(field.origin[0])},{_fmt(field.origin[1])},{_fmt(field.cell)},{field.nx},{field.ny}\n"
        )
        for row in field.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_field_csv(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        second = fh.readline()
        if not first.startswith("#") or not second.startswith("#"):
            raise PDError(f"{path}: missing field header lines")
        parts = second.lstrip("#").strip().split(",")
        ox, oy, cell = (float(v) for v in parts[:3])
        nx, ny = int(parts[3]), int(parts[4])
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    values = np.array(rows, dtype=float)
    if values.shape != (ny, nx):
        raise PDError(f"{path}: expected {ny}x{nx} values, found {values.shape}")
    return ScalarField((ox, oy), cell, nx, ny, values)


def write_curve_csv(curve, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,mean,q_lo,q_hi\n")
        for row in curve.rows():
            fh.write(",".join("nan" if math.isnan(v) else _fmt(v) for v in row) + "\n")


def read_curve_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)
