"""Linear representations of persistence measures.

Betti numbers count points in ``B = [0, x1) x (x2, L]`` (strict on both
sides; ``x1 = x2 = x`` for the ordinary Betti number).  They can be read off
a sample directly (empirical average of the measures) or integrated from an
estimated intensity/density field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DiagramSample, diag_distance
from .errors import EmptyDiagramInSample, PDError
from .kde import KernelSpec, ScalarField, _as_grid, kernel_sum

MODES = ("raw", "normalized")


@dataclass(frozen=True)
class BettiQuery:
    """Rectangle ``[0, x) x (x2, L]``; ``x2`` defaults to ``x``."""

    x: float
    x2: Optional[float] = None
    mode: str = "raw"

    def __post_init__(self):
        if self.mode not in MODES:
            raise PDError(f"mode must be one of {MODES}")
        if self.x2 is not None and not self.x < self.x2:
            raise PDError("persistent Betti query needs x1 < x2")

    @property
    def bounds(self):
        return self.x, (self.x if self.x2 is None else self.x2)


def _query(query, mode=None):
    if isinstance(query, BettiQuery):
        return query
    if np.ndim(query) == 0:
        return BettiQuery(float(query), mode=mode or "raw")
    x1, x2 = query
    return BettiQuery(float(x1), float(x2), mode=mode or "raw")


def _check_normalizable(sample, skip_empty):
    counts = sample.counts
    if np.any(counts == 0):
        if not skip_empty:
            raise EmptyDiagramInSample(int(np.argmax(counts == 0)))
        sample, _ = sample.drop_empty()
    return sample


def _per_diagram(sample, x1s, x2s, mode):
    """``(n, len(x1s))`` array of per-diagram Betti values."""
    x1s = np.atleast_1d(np.asarray(x1s, dtype=float))
    x2s = np.atleast_1d(np.asarray(x2s, dtype=float))
    out = np.zeros((sample.n, x1s.size))
    for i, dg in enumerate(sample):
        if len(dg) == 0:
            continue
        inside = (dg.births[:, None] < x1s[None, :]) & (dg.deaths[:, None] > x2s[None, :])
        out[i] = inside.sum(axis=0)
        if mode == "normalized":
            out[i] /= len(dg)
    return out


def betti_empirical(sample, query, *, mode=None, skip_empty=False):
    """Betti number of the empirical average measure.

    Raw mode averages counts over the ``n`` diagrams; normalized mode
    averages the per-diagram fraction of points in the rectangle.
    """
    q = _query(query, mode)
    if q.mode == "normalized":
        sample = _check_normalizable(sample, skip_empty)
    x1, x2 = q.bounds
    return float(_per_diagram(sample, x1, x2, q.mode).mean())


def field_mass_in(field, x1, x2):
    """Midpoint-rule mass of ``field`` over ``[0, x1) x (x2, inf)``."""
    xs = field.grid.xs
    ys = field.grid.ys
    cols = (xs >= 0) & (xs < x1)
    rows = ys > x2
    return float(field.values[np.ix_(rows, cols)].sum() * field.cell**2)


def betti_from_field(field, query):
    """Integral of an estimated intensity (or density) over the Betti rectangle."""
    x1, x2 = _query(query).bounds
    return field_mass_in(field, x1, x2)


@dataclass(frozen=True, eq=False)
class BettiCurve:
    x: np.ndarray
    mean: np.ndarray
    q_lo: Optional[np.ndarray] = None
    q_hi: Optional[np.ndarray] = None
    levels: tuple = (0.05, 0.95)

    def rows(self):
        lo = self.q_lo if self.q_lo is not None else np.full_like(self.mean, np.nan)
        hi = self.q_hi if self.q_hi is not None else np.full_like(self.mean, np.nan)
        return np.column_stack([self.x, self.mean, lo, hi])


def betti_curve(source, mode="raw", resolution=256, *, L=None, quantiles=(0.05, 0.95),
                skip_empty=False):
    """Betti curve on ``resolution`` evenly spaced points of ``[0, L]``.

    ``source`` is a :class:`DiagramSample` (empirical curve, with pointwise
    quantile bands across diagrams, linear interpolation between order
    statistics) or a :class:`ScalarField` (kernel curve, no bands; ``L``
    must then be given).
    """
    if resolution < 2:
        raise PDError("resolution must be at least 2")
    if mode not in MODES:
        raise PDError(f"mode must be one of {MODES}")
    if isinstance(source, DiagramSample):
        L = source.box.L if L is None else L
        xs = np.linspace(0.0, L, resolution)
        if mode == "normalized":
            source = _check_normalizable(source, skip_empty)
        per = _per_diagram(source, xs, xs, mode)
        lo, hi = np.quantile(per, quantiles, axis=0)
        return BettiCurve(xs, per.mean(axis=0), lo, hi, tuple(quantiles))
    if L is None:
        raise PDError("L is required for a curve read from a field")
    xs = np.linspace(0.0, L, resolution)
    vals = np.array([field_mass_in(source, x, x) for x in xs])
    return BettiCurve(xs, vals, None, None, tuple(quantiles))


@dataclass(frozen=True)
class SurfaceSpec:
    """Weight exponent and kernel of a persistence surface."""

    weight_q: float = 1.0
    kernel: KernelSpec = KernelSpec()
    grid: object = None

    def __post_init__(self):
        if not self.weight_q > 0:
            raise PDError("weight_q must be positive")


def persistence_surface(sample, spec):
    """Surface of the empirical average measure with weight ``dist ** q``.

    Node value ``(1/n) sum_i sum_r diag_distance(r)**q * K_h(r - node)``.
    """
    grid = _as_grid(spec.grid, sample.box)
    pts, _ = sample.pooled()
    w = diag_distance(pts) ** spec.weight_q / sample.n if len(pts) else np.empty(0)
    return grid.field(kernel_sum(pts, w, spec.kernel, grid))


def linear_functional(field, f):
    """``cell**2 * sum(f(node) * field(node))``; ``f`` is a callable or a field."""
    if isinstance(f, ScalarField):
        field.check_geometry(f)
        fv = f.values
    else:
        fv = np.asarray(f(field.nodes()), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise PDError("weight function is not finite at every node")
    return float((fv * field.values).sum() * field.cell**2)
