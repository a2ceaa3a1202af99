"""Synthetic inputs: linked-twist-map orbits, noisy circle samples, and
Poisson persistence measures with a known intensity.

Randomness comes from numpy's PCG64 bit generator seeded with a 64-bit
integer.  Only ``Generator.random`` (53-bit uniform doubles) and
``Generator.poisson`` are drawn from it; Gaussians are produced by
Box-Muller from the uniforms, so streams do not depend on numpy's
normal-sampling algorithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SQRT2, DiagramSample, OmegaBox, PersistenceDiagram, diag_distance
from .errors import PDError, ResolutionTooCoarse
from .kde import ScalarField
from .vr import PointCloud


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def box_muller(rng, size):
    """``size`` standard normal draws from pairs of uniforms."""
    m = (size + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1]
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[:size]


# -- linked twist map ---------------------------------------------------------


@dataclass(frozen=True)
class OrbitSpec:
    r: float
    n_points: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.r > 0:
            raise PDError("r must be positive")
        if self.n_points < 1:
            raise PDError("n_points must be at least 1")


def twist_orbit(x0, y0, r, n_points):
    """Iterate the linked twist map from ``(x0, y0)``; row 0 is the start."""
    out = np.empty((n_points, 2))
    x, y = float(x0), float(y0)
    out[0] = x, y
    for k in range(1, n_points):
        x = (x + r * y * (1.0 - y)) % 1.0
        y = (y + r * x * (1.0 - x)) % 1.0
        out[k] = x, y
    return out


def gen_orbit(spec):
    """Orbit of ``spec.n_points`` points started uniformly in the unit square."""
    rng = make_rng(spec.seed)
    x0, y0 = rng.random(2)
    return PointCloud(twist_orbit(x0, y0, spec.r, spec.n_points))


# -- circle -------------------------------------------------------------------


@dataclass(frozen=True)
class CircleSpec:
    distribution: str = "uniform"
    mu_angle: float = math.pi / 2
    kappa: float = 1.0
    noise_sd: float = 0.05
    n_points: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in ("uniform", "power_spherical"):
            raise PDError(f"unknown circle distribution {self.distribution!r}")
        if self.kappa < 0 or self.noise_sd < 0:
            raise PDError("kappa and noise_sd must be non-negative")
        if self.n_points < 1:
            raise PDError("n_points must be at least 1")


_TABLE_SIZE = 4096


def power_spherical_quantile(u, kappa):
    """Inverse CDF of the offset ``t`` in ``(-pi, pi]`` with density
    proportional to ``(1 + cos t) ** kappa``.

    Tabulated on 4096 points (cumulative trapezoid) and inverted by linear
    interpolation.
    """
    t = np.linspace(-np.pi, np.pi, _TABLE_SIZE)
    dens = (1.0 + np.cos(t)) ** kappa
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    cdf /= cdf[-1]
    return np.interp(u, cdf, t)


def gen_circle(spec):
    rng = make_rng(spec.seed)
    u = rng.random(spec.n_points)
    if spec.distribution == "uniform":
        theta = 2.0 * np.pi * u
    else:
        theta = spec.mu_angle + power_spherical_quantile(u, spec.kappa)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    if spec.noise_sd > 0:
        pts = pts + spec.noise_sd * box_muller(rng, 2 * spec.n_points).reshape(-1, 2)
    return PointCloud(pts)


# -- synthetic persistence measures -------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Isotropic Gaussian truncated to the disc of radius ``radius``."""

    center: tuple
    sigma: float
    radius: float

    @property
    def mass(self):
        # Gaussian mass inside the truncation disc
        return 1.0 - math.exp(-0.5 * (self.radius / self.sigma) ** 2)

    def pdf(self, pts):
        d2 = ((pts - np.asarray(self.center)) ** 2).sum(axis=-1)
        g = np.exp(-0.5 * d2 / self.sigma**2) / (2 * np.pi * self.sigma**2 * self.mass)
        return np.where(d2 <= self.radius**2, g, 0.0)

    def sample(self, rng, size):
        # truncated radius by inversion, uniform angle
        u = rng.random(size)
        rad = self.sigma * np.sqrt(-2.0 * np.log(1.0 - u * self.mass))
        ang = 2.0 * np.pi * rng.random(size)
        return np.column_stack(
            [self.center[0] + rad * np.cos(ang), self.center[1] + rad * np.sin(ang)]
        )


def _densities(L):
    # Every support disc stays at least 0.15 L away from the triangle's sides.
    return {
        "bump": [(1.0, Bump((0.3 * L, 0.7 * L), 0.026 * L, 0.13 * L))],
        "two_bumps": [
            (0.5, Bump((0.23 * L, 0.77 * L), 0.015 * L, 0.06 * L)),
            (0.5, Bump((0.40 * L, 0.77 * L), 0.015 * L, 0.06 * L)),
        ],
    }


DENSITY_IDS = ("two_bumps", "bump")
SUPPORT_MARGIN = 0.15


@dataclass(frozen=True)
class SyntheticMeasureSpec:
    """Poisson(``lam``) points per diagram, i.i.d. from a known density.

    The true intensity is ``lam * f`` and the true normalized density is
    ``f``, both available via :meth:`intensity` and :meth:`density`.
    """

    lam: float = 5.0
    density_id: str = "two_bumps"
    seed: int = 0
    L: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise PDError("lam must be positive")
        if self.density_id not in DENSITY_IDS:
            raise PDError(f"unknown density {self.density_id!r}; choose from {DENSITY_IDS}")
        OmegaBox(self.L)

    @property
    def box(self):
        return OmegaBox(self.L)

    @property
    def components(self):
        return _densities(self.L)[self.density_id]

    def density(self, pts):
        pts = np.asarray(pts, dtype=float)
        return sum(w * b.pdf(pts) for w, b in self.components)

    def intensity(self, pts):
        return self.lam * self.density(pts)

    def support_margin(self):
        """Smallest distance from a support disc to the triangle's sides."""
        gaps = []
        for _, b in self.components:
            cx, cy = b.center
            gaps += [
                cx - b.radius,
                self.L - cy - b.radius,
                diag_distance((cx, cy)) - b.radius,
            ]
        return min(gaps)

    def draw_points(self, rng, size):
        weights = np.array([w for w, _ in self.components])
        which = np.searchsorted(np.cumsum(weights), rng.random(size) * weights.sum(), side="right")
        which = np.minimum(which, len(weights) - 1)
        out = np.empty((size, 2))
        for k, (_, b) in enumerate(self.components):
            idx = np.flatnonzero(which == k)
            if idx.size:
                out[idx] = b.sample(rng, idx.size)
        return out


def gen_synthetic_sample(spec, n):
    """``n`` independent diagrams drawn from ``spec``."""
    if n < 1:
        raise PDError("n must be at least 1")
    rng = make_rng(spec.seed)
    counts = rng.poisson(spec.lam, size=n)
    pts = spec.draw_points(rng, int(counts.sum()))
    box = spec.box
    dims = np.ones(len(pts), dtype=np.int64)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    diagrams = tuple(
        PersistenceDiagram(pts[a:b], dims[a:b], box) for a, b in zip(bounds[:-1], bounds[1:])
    )
    return DiagramSample(diagrams, box)


# -- counterexample -----------------------------------------------------------


def counterexample_geometry(n, L):
    """Centres and l1 radius of the two adjacent balls at level ``n``."""
    a = SQRT2 * L / 4.0
    r = SQRT2 * L / 2.0 ** (n + 1)
    return (a, a + r), (a - r, a), r


def gen_counterexample_pair(n, L, cells_per_radius=8):
    """Gridded intensities ``4**n / L**2`` on two adjacent l1 balls.

    The grid is aligned so that every ball edge runs through cell corners
    and centres in a staggered pattern; the node-centre integral of each
    field is then exactly one.  The field covers only the bounding box of
    the two balls.  For ``n = 1`` the balls reach past ``b = 0`` and
    ``d = L``; the field follows the formulas and extends there too.
    """
    if n < 1:
        raise PDError("n must be at least 1")
    if cells_per_radius < 8:
        raise ResolutionTooCoarse(
            f"{cells_per_radius} cells per ball radius; at least 8 are required"
        )
    u, d, r = counterexample_geometry(n, L)
    k = int(cells_per_radius)
    cell = r / k
    # lower-left corner; birth offset by half a cell relative to the ball vertices
    x0 = d[0] - r - 0.5 * cell
    y0 = d[1] - r
    nx = 3 * k + 1
    ny = 3 * k
    height = 4.0**n / L**2
    # Node (i, j) sits at (i - k, j - k + 1/2) cells from d and
    # (i - 2k, j - 2k + 1/2) cells from u; test membership in doubled
    # integer units so no rounding enters.
    I, J = np.meshgrid(np.arange(nx), np.arange(ny))
    in_nu = 2 * np.abs(I - k) + np.abs(2 * (J - k) + 1) < 2 * k
    in_mu = 2 * np.abs(I - 2 * k) + np.abs(2 * (J - 2 * k) + 1) < 2 * k
    origin = (x0, y0)
    p_mu = ScalarField(origin, cell, nx, ny, np.where(in_mu, height, 0.0))
    p_nu = ScalarField(origin, cell, nx, ny, np.where(in_nu, height, 0.0))
    return p_mu, p_nu
