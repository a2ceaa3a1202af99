"""Compactly supported kernels and grid estimators of the persistence
intensity and persistence density functions.

Fields live on regular grids of square cells.  A value is attached to each
cell centre and integrals use the midpoint rule, ``cell**2 * sum(values)``,
everywhere in the package.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np

from .core import OmegaBox, diag_distance
from .errors import EmptyDiagramInSample, GridMismatch, PDError

KERNEL_FAMILIES = ("epanechnikov2d", "quartic2d")
DEFAULT_GRID = 128

_ALIASES = {"epanechnikov": "epanechnikov2d", "quartic": "quartic2d", "biweight": "quartic2d"}


def _profile(family, r2):
    """Radial profile K evaluated at squared radius ``r2``."""
    inside = r2 <= 1.0
    one_minus = np.where(inside, 1.0 - r2, 0.0)
    if family == "epanechnikov2d":
        return (2.0 / math.pi) * one_minus
    return (3.0 / math.pi) * one_minus**2


@functools.lru_cache(maxsize=None)
def _quadrature_mass(family, n=512):
    c = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    X, Y = np.meshgrid(c, c)
    return float(_profile(family, X**2 + Y**2).sum() * (2.0 / n) ** 2)


@dataclass(frozen=True)
class KernelSpec:
    """Radially symmetric kernel supported on the unit disc, bandwidth ``h``."""

    family: str = "epanechnikov2d"
    h: float = 0.05

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in KERNEL_FAMILIES:
            raise PDError(f"unknown kernel {self.family!r}; choose from {KERNEL_FAMILIES}")
        object.__setattr__(self, "family", family)
        if not self.h > 0:
            raise PDError("bandwidth h must be positive")
        mass = _quadrature_mass(family)
        if abs(mass - 1.0) > 1e-4:
            raise PDError(f"kernel {family} integrates to {mass}, not 1")

    def unit(self, x):
        """K(x), unscaled; ``x`` has trailing dimension 2."""
        x = np.asarray(x, dtype=float)
        return _profile(self.family, (x**2).sum(axis=-1))

    def scaled(self, x):
        """K_h(x) = K(x / h) / h**2."""
        x = np.asarray(x, dtype=float)
        return self.unit(x / self.h) / self.h**2

    @property
    def sup(self):
        return float(_profile(self.family, np.float64(0.0)))


def kernel_eval(spec, x):
    out = spec.unit(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of ``nx * ny`` square cells of side ``cell``.

    Cell ``(j, i)`` (row ``j``, column ``i``) has centre
    ``(origin[0] + (i + 0.5) * cell, origin[1] + (j + 0.5) * cell)``; the
    first coordinate is birth, the second death.
    """

    origin: tuple
    cell: float
    nx: int
    ny: int

    def __post_init__(self):
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if not self.cell > 0 or self.nx < 1 or self.ny < 1:
            raise PDError("grid needs a positive cell size and at least one cell")

    @classmethod
    def over_box(cls, L, n=DEFAULT_GRID):
        return cls((0.0, 0.0), L / n, n, n)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def xs(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.cell

    @property
    def ys(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.cell

    def nodes(self):
        """``(ny, nx, 2)`` array of cell centres."""
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.stack([X, Y], axis=-1)

    def field(self, values=None):
        if values is None:
            values = np.zeros(self.shape)
        return ScalarField(self.origin, self.cell, self.nx, self.ny, values)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values of a function on the cell centres of a :class:`GridSpec`."""

    origin: tuple
    cell: float
    nx: int
    ny: int
    values: np.ndarray

    def __post_init__(self):
        grid = GridSpec(self.origin, self.cell, self.nx, self.ny)
        vals = np.array(self.values, dtype=float).reshape(grid.shape)
        if not np.all(np.isfinite(vals)):
            raise PDError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "origin", grid.origin)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self):
        return GridSpec(self.origin, self.cell, self.nx, self.ny)

    def nodes(self):
        return self.grid.nodes()

    def integral(self):
        return float(self.values.sum() * self.cell**2)

    def sup(self):
        return float(np.abs(self.values).max())

    def same_geometry(self, other):
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and self.cell == other.cell
            and self.origin == other.origin
        )

    def check_geometry(self, other):
        if not self.same_geometry(other):
            raise GridMismatch(
                f"grids differ: {self.grid} vs {other.grid}"
            )

    def with_values(self, values):
        return ScalarField(self.origin, self.cell, self.nx, self.ny, values)

    def __sub__(self, other):
        self.check_geometry(other)
        return self.with_values(self.values - other.values)


def _as_grid(grid, box):
    if grid is None:
        return GridSpec.over_box(box.L)
    if isinstance(grid, int):
        return GridSpec.over_box(box.L, grid)
    if isinstance(grid, ScalarField):
        return grid.grid
    return grid


def kernel_sum(points, weights, spec, grid):
    """Sum of ``weights[m] * K_h(points[m] - node)`` at every node of ``grid``.

    Each point only touches the square stencil of nodes within ``h``;
    contributions are accumulated with ``np.bincount`` in point order, so
    the result is deterministic.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    out = np.zeros(grid.nx * grid.ny)
    if points.shape[0] == 0:
        return out.reshape(grid.shape)
    cell = grid.cell
    k = int(math.ceil(spec.h / cell)) + 1
    off = np.arange(-k, k + 1)
    oi, oj = np.meshgrid(off, off)
    oi, oj = oi.ravel(), oj.ravel()
    chunk = max(1, 4_000_000 // oi.size)
    inv_h2 = 1.0 / spec.h**2
    for start in range(0, points.shape[0], chunk):
        p = points[start : start + chunk]
        w = weights[start : start + chunk]
        ci = np.floor((p[:, 0] - grid.origin[0]) / cell).astype(np.int64)
        cj = np.floor((p[:, 1] - grid.origin[1]) / cell).astype(np.int64)
        I = ci[:, None] + oi[None, :]
        J = cj[:, None] + oj[None, :]
        dx = (grid.origin[0] + (I + 0.5) * cell - p[:, 0:1]) / spec.h
        dy = (grid.origin[1] + (J + 0.5) * cell - p[:, 1:2]) / spec.h
        kv = _profile(spec.family, dx * dx + dy * dy) * (w[:, None] * inv_h2)
        ok = (I >= 0) & (I < grid.nx) & (J >= 0) & (J < grid.ny) & (kv != 0.0)
        out += np.bincount((J[ok] * grid.nx + I[ok]), weights=kv[ok], minlength=out.size)
    return out.reshape(grid.shape)


def estimate_intensity(sample, spec, grid=None):
    """Kernel estimate of the persistence intensity function.

    ``(1/n) * sum_i sum_{r in D_i} K_h(r - node)`` at each node.  Empty
    diagrams contribute nothing but still count in ``n``.
    """
    grid = _as_grid(grid, sample.box)
    pts, _ = sample.pooled()
    w = np.full(pts.shape[0], 1.0 / sample.n)
    return grid.field(kernel_sum(pts, w, spec, grid))


def estimate_density(sample, spec, grid=None, *, skip_empty=False):
    """Kernel estimate of the persistence density function.

    Same as :func:`estimate_intensity` with each point of ``D_i`` weighted
    by ``1 / N(D_i)``.  An empty diagram raises
    :class:`~pdintensity.errors.EmptyDiagramInSample` unless ``skip_empty``
    is set, in which case it is dropped and ``n`` shrinks accordingly.
    """
    field, _ = density_with_skipped(sample, spec, grid, skip_empty=skip_empty)
    return field


def density_with_skipped(sample, spec, grid=None, *, skip_empty=False):
    """Like :func:`estimate_density`, also returning the count of dropped diagrams."""
    grid = _as_grid(grid, sample.box)
    counts = sample.counts
    skipped = 0
    if np.any(counts == 0):
        if not skip_empty:
            raise EmptyDiagramInSample(int(np.argmax(counts == 0)))
        sample, skipped = sample.drop_empty()
        counts = sample.counts
    pts, owner = sample.pooled()
    w = 1.0 / (sample.n * counts[owner])
    return grid.field(kernel_sum(pts, w, spec, grid)), skipped


class SupError(NamedTuple):
    value: float
    empty: bool


def evaluate_on(truth, field):
    """Node values of ``truth`` (callable on ``(..., 2)`` arrays, or a field)."""
    if isinstance(truth, ScalarField):
        field.check_geometry(truth)
        return truth.values
    return np.asarray(truth(field.nodes()), dtype=float)


def weighted_sup_error(estimate, truth, q=0.0, h=0.0, *, domain="omega_2h", box=None):
    """Weighted sup-norm distance between an estimate and the truth.

    With ``domain="omega_2h"`` the maximum of ``l**q * |estimate - truth|``
    runs over nodes at least ``2h`` from the diagonal (and inside the box
    when ``box`` is given), where ``l = diag_distance(node) - h``.  With
    ``domain="full"`` every node counts and ``q`` should be 0, giving the
    plain sup norm.  The ``empty`` flag is set when no node qualifies.
    """
    if h < 0:
        raise PDError("h must be non-negative")
    diff = np.abs(estimate.values - evaluate_on(truth, estimate))
    nodes = estimate.nodes()
    if domain == "full":
        weight = np.ones_like(diff) if q == 0 else np.maximum(diag_distance(nodes) - h, 0.0) ** q
        mask = np.ones(diff.shape, dtype=bool)
    elif domain == "omega_2h":
        dist = np.where(nodes[..., 1] > nodes[..., 0], diag_distance(nodes), 0.0)
        mask = (nodes[..., 1] > nodes[..., 0]) & (dist >= 2.0 * h)
        if box is not None:
            mask &= box.contains(nodes[..., 0], nodes[..., 1])
        weight = (dist - h) ** q if q != 0 else np.ones_like(diff)
    else:
        raise PDError(f"unknown domain {domain!r}")
    if not mask.any():
        return SupError(0.0, True)
    return SupError(float((weight * diff)[mask].max()), False)


@functools.lru_cache(maxsize=16)
def _disc_rule(n_radial, n_angular):
    g, gw = np.polynomial.legendre.leggauss(n_radial)
    rho = 0.5 * (g + 1.0)
    rw = 0.5 * gw * rho  # polar Jacobian
    phi = 2.0 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    pw = np.full(n_angular, 2.0 * np.pi / n_angular)
    R, P = np.meshgrid(rho, phi, indexing="ij")
    W = np.outer(rw, pw)
    u = np.stack([R * np.cos(P), R * np.sin(P)], axis=-1).reshape(-1, 2)
    return u, W.ravel(), R.ravel()


def smoothed(func, spec, grid, *, support=None, n_radial=32, n_angular=64):
    """Numerical convolution ``(K_h * func)`` at the nodes of ``grid``.

    Polar Gauss-Legendre quadrature over the kernel's unit disc.  When
    ``support`` is a list of ``(centre, radius)`` discs outside of which
    ``func`` vanishes, nodes farther than ``radius + h`` from every disc are
    set to zero without evaluation.
    """
    if isinstance(grid, ScalarField):
        grid = grid.grid
    u, w, rho = _disc_rule(n_radial, n_angular)
    kw = w * _profile(spec.family, rho**2)
    nodes = grid.nodes().reshape(-1, 2)
    active = np.ones(nodes.shape[0], dtype=bool)
    if support is not None:
        active[:] = False
        for centre, radius in support:
            d = np.hypot(nodes[:, 0] - centre[0], nodes[:, 1] - centre[1])
            active |= d <= radius + spec.h
    out = np.zeros(nodes.shape[0])
    idx = np.flatnonzero(active)
    chunk = max(1, 2_000_000 // u.shape[0])
    for start in range(0, idx.size, chunk):
        sel = idx[start : start + chunk]
        pts = nodes[sel, None, :] + spec.h * u[None, :, :]
        out[sel] = np.asarray(func(pts)) @ kw
    return grid.field(out.reshape(grid.shape))
