"""Convergence-rate studies and figure-data reproduction.

A convergence study sweeps either the number of diagrams ``n`` (fixed ``h``)
or the bandwidth ``h``:

* an ``n`` sweep measures the stochastic error ``sup |estimate - E estimate|``
  over fresh synthetic samples, where ``E estimate`` is the true density
  (or intensity) convolved numerically with ``K_h``;
* an ``h`` sweep measures the smoothing bias ``sup |K_h * truth - truth|``,
  which involves no sampling at all.

Per sweep point the errors are averaged and a line is fitted to
``(log sweep value, log mean error)``.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .core import OmegaBox
from .errors import DegenerateSweep, NonPositiveInput, PDError
from .generators import (
    CircleSpec,
    OrbitSpec,
    SyntheticMeasureSpec,
    gen_circle,
    gen_orbit,
    gen_synthetic_sample,
)
from .kde import (
    GridSpec,
    KernelSpec,
    density_with_skipped,
    estimate_intensity,
    smoothed,
    weighted_sup_error,
)
from .representations import betti_curve, field_mass_in
from .vr import FiltrationSpec, batch_rips

log = logging.getLogger(__name__)

TARGETS = ("intensity", "density", "betti_curve")


def fit_rate(points):
    """Least squares line through ``(ln x, ln y)``.

    Returns ``(slope, intercept, r2)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise PDError("fit_rate needs at least 3 (x, y) pairs")
    if np.any(pts <= 0):
        raise NonPositiveInput("fit_rate needs positive coordinates")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def support_grid(spec, pad, cells=256):
    """Square grid covering every support disc of ``spec`` plus ``pad``."""
    lo = np.array([np.inf, np.inf])
    hi = -lo
    for _, b in spec.components:
        c = np.asarray(b.center)
        lo = np.minimum(lo, c - b.radius - pad)
        hi = np.maximum(hi, c + b.radius + pad)
    side = float((hi - lo).max())
    return GridSpec(tuple(lo), side / cells, cells, cells)


def _support(spec):
    return [(b.center, b.radius) for _, b in spec.components]


def _derived_seed(*parts):
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


@dataclass
class ConvergenceConfig:
    target: str = "density"
    n_values: Optional[list] = None
    h_values: Optional[list] = None
    h: float = 0.08  # fixed bandwidth of an n sweep
    replicates: int = 10
    seed: int = 0
    generator: SyntheticMeasureSpec = field(default_factory=SyntheticMeasureSpec)
    kernel: str = "epanechnikov2d"
    grid: object = 128  # int (cells over [0, L]^2) or GridSpec; h sweeps default to the support
    q: float = 1.0  # weight exponent for the intensity target
    betti_resolution: int = 128

    def __post_init__(self):
        if self.target not in TARGETS:
            raise PDError(f"target must be one of {TARGETS}")
        if (self.n_values is None) == (self.h_values is None):
            raise PDError("give exactly one of n_values or h_values")
        sweep = self.sweep_values
        if len(sweep) < 3 or any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise PDError("sweep must be strictly increasing with at least 3 values")
        if self.replicates < 5:
            raise PDError("replicates must be at least 5")
        if self.h_values is not None and self.target == "betti_curve":
            raise PDError("the betti_curve target supports n sweeps only")
        if isinstance(self.generator, dict):
            self.generator = SyntheticMeasureSpec(**self.generator)
        if isinstance(self.grid, dict):
            self.grid = GridSpec(tuple(self.grid["origin"]), self.grid["cell"], self.grid["nx"], self.grid["ny"])

    @property
    def sweep_kind(self):
        return "n" if self.n_values is not None else "h"

    @property
    def sweep_values(self):
        return list(self.n_values if self.n_values is not None else self.h_values)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_dict(self):
        d = dataclasses.asdict(self)
        if isinstance(self.grid, GridSpec):
            d["grid"] = dataclasses.asdict(self.grid)
        return d


@dataclass
class RateReport:
    sweep_kind: str
    sweep: list
    mean: list
    std: list
    errors: list  # per sweep point, the raw per-replicate errors
    slope: float
    intercept: float
    r2: float
    config: dict = field(default_factory=dict)

    def to_json(self, path=None):
        text = json.dumps(dataclasses.asdict(self), indent=2)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _grid_for(config, h_max):
    g = config.grid
    if isinstance(g, GridSpec):
        return g
    if config.sweep_kind == "h":
        return support_grid(config.generator, h_max)
    return GridSpec.over_box(config.generator.L, int(g))


def _truth(config):
    gen = config.generator
    return gen.intensity if config.target == "intensity" else gen.density


def _field_error(config, estimate, reference, h):
    if config.target == "intensity":
        return weighted_sup_error(estimate, reference, q=config.q, h=h, box=config.generator.box).value
    return weighted_sup_error(estimate, reference, q=0.0, h=h, domain="full").value


def expected_betti_curve(spec, xs, cells=512):
    """``lam * integral of f over [0, x) x (x, L]`` by midpoint quadrature."""
    grid = GridSpec.over_box(spec.L, cells)
    dens = grid.field(spec.intensity(grid.nodes()))
    return np.array([field_mass_in(dens, x, x) for x in xs])


def run_convergence(config):
    """Run the sweep described by ``config`` and fit the log-log rate."""
    gen = config.generator
    sweep = config.sweep_values
    h_max = max(sweep) if config.sweep_kind == "h" else config.h
    grid = _grid_for(config, h_max)
    truth = _truth(config)
    errors = []
    if config.sweep_kind == "h":
        exact = grid.field(truth(grid.nodes()))
        for h in sweep:
            ref = smoothed(truth, KernelSpec(config.kernel, h), grid, support=_support(gen))
            err = _field_error(config, ref, exact, h)
            # deterministic: every replicate has the same value
            errors.append([err] * config.replicates)
    else:
        kernel = KernelSpec(config.kernel, config.h)
        if config.target == "betti_curve":
            xs = np.linspace(0.0, gen.L, config.betti_resolution)
            ref_curve = expected_betti_curve(gen, xs)
        else:
            ref = smoothed(truth, kernel, grid, support=_support(gen))
        for k, n in enumerate(sweep):
            errs = []
            for r in range(config.replicates):
                spec = dataclasses.replace(gen, seed=_derived_seed(config.seed, k, r))
                sample = gen_synthetic_sample(spec, int(n))
                if config.target == "betti_curve":
                    curve = betti_curve(sample, "raw", config.betti_resolution)
                    errs.append(float(np.abs(curve.mean - ref_curve).max()))
                elif config.target == "density":
                    est, _ = density_with_skipped(sample, kernel, grid, skip_empty=True)
                    errs.append(_field_error(config, est, ref, config.h))
                else:
                    est = estimate_intensity(sample, kernel, grid)
                    errs.append(_field_error(config, est, ref, config.h))
            errors.append(errs)
            log.info("n=%d mean error %.4g", n, math.fsum(sorted(errs)) / len(errs))
    means = [math.fsum(sorted(e)) / len(e) for e in errors]
    stds = [float(np.std(sorted(e))) for e in errors]
    if any(m <= 0 for m in means):
        raise DegenerateSweep("a sweep point has zero mean error; log-log fit undefined")
    slope, intercept, r2 = fit_rate(list(zip(sweep, means)))
    return RateReport(config.sweep_kind, sweep, means, stds, errors, slope, intercept, r2,
                      config.to_dict())


# -- figure data ---------------------------------------------------------------

SETUPS = {
    "orbit_r25": {"kind": "orbit", "r": 2.5, "n_points": 1000, "L": 1.0, "h": 0.02},
    "orbit_r40": {"kind": "orbit", "r": 4.0, "n_points": 1000, "L": 1.0, "h": 0.02},
    "circle_uniform": {"kind": "circle", "distribution": "uniform", "mu": math.pi / 2,
                       "kappa": 1.0, "noise_sd": 0.05, "n_points": 1000, "L": 2.0, "h": 0.04},
    "circle_power": {"kind": "circle", "distribution": "power_spherical", "mu": math.pi / 2,
                     "kappa": 1.0, "noise_sd": 0.05, "n_points": 1000, "L": 2.0, "h": 0.04},
}


def setup_clouds(setup, n_samples, seed, n_points=None):
    """Point clouds for a named setup, one independent seed per cloud."""
    params = dict(SETUPS[setup])
    if n_points is not None:
        params["n_points"] = int(n_points)
    seeds = [_derived_seed(seed, i) for i in range(n_samples)]
    if params["kind"] == "orbit":
        clouds = [gen_orbit(OrbitSpec(params["r"], params["n_points"], s)) for s in seeds]
    else:
        clouds = [
            gen_circle(CircleSpec(params["distribution"], params["mu"], params["kappa"],
                                  params["noise_sd"], params["n_points"], s))
            for s in seeds
        ]
    return clouds, params


def reproduce_figure(setup, n_samples, out_dir, *, seed=0, n_points=None, h=None, dim=1,
                     grid=128, resolution=256, kernel="epanechnikov2d"):
    """Generator -> VR diagrams -> estimators -> CSV files plus a JSON manifest.

    Writes ``diagrams.json``, ``intensity.csv``, ``density.csv``,
    ``betti_raw.csv``, ``betti_normalized.csv`` and ``manifest.json`` into
    ``out_dir``; returns the manifest dict.  Everything except the timings in
    the manifest is a deterministic function of the arguments.
    """
    if setup not in SETUPS:
        raise PDError(f"unknown setup {setup!r}; choose from {sorted(SETUPS)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    clouds, params = setup_clouds(setup, n_samples, seed, n_points)
    timings["generate"] = time.perf_counter() - t0

    box = OmegaBox(params["L"])
    t0 = time.perf_counter()
    full = batch_rips(clouds, FiltrationSpec(max_dim=1), box)
    timings["rips"] = time.perf_counter() - t0
    sample = full.select_dim(dim)

    bandwidth = params["h"] if h is None else float(h)
    kspec = KernelSpec(kernel, bandwidth)
    g = GridSpec.over_box(box.L, grid)
    t0 = time.perf_counter()
    intensity = estimate_intensity(sample, kspec, g)
    density, skipped = density_with_skipped(sample, kspec, g, skip_empty=True)
    raw = betti_curve(sample, "raw", resolution)
    normalized = betti_curve(sample, "normalized", resolution, skip_empty=True)
    timings["estimate"] = time.perf_counter() - t0

    files = {
        "diagrams": "diagrams.json",
        "intensity": "intensity.csv",
        "density": "density.csv",
        "betti_raw": "betti_raw.csv",
        "betti_normalized": "betti_normalized.csv",
    }
    io.write_sample_json(full, out / files["diagrams"])
    io.write_field_csv(intensity, out / files["intensity"])
    io.write_field_csv(density, out / files["density"])
    io.write_curve_csv(raw, out / files["betti_raw"])
    io.write_curve_csv(normalized, out / files["betti_normalized"])

    params = {k: v for k, v in params.items()}
    params.update(seed=seed, n_samples=n_samples, h=bandwidth, dim=dim, kernel=kspec.family,
                  grid=grid, resolution=resolution)
    manifest = {
        "setup": setup,
        "parameters": params,
        "n_diagrams": sample.n,
        "points_per_diagram": [int(c) for c in sample.counts],
        "empty_diagrams_skipped_for_density": skipped,
        "fields": [files["intensity"], files["density"]],
        "curves": [files["betti_raw"], files["betti_normalized"]],
        "files": files,
        "timings_seconds": timings,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest
