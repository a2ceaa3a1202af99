"""Geometry of the persistence domain and persistence diagrams as measures.

The domain is the triangle ``{(b, d) : 0 <= b < d <= L}`` above the diagonal.
Diagrams are finite multisets of (birth, death) points in it, stored flat
(no multiplicity compression) together with their homology dimension.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidDiagram, InvalidQ, PDError

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class OmegaBox:
    """Bounding triangle of side ``L``."""

    L: float

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise PDError(f"L must be a positive finite number, got {self.L!r}")

    def contains(self, birth, death):
        """Membership test, vectorised over array arguments."""
        birth = np.asarray(birth, dtype=float)
        death = np.asarray(death, dtype=float)
        return (birth >= 0) & (birth < death) & (death <= self.L)


class PersistencePair(NamedTuple):
    birth: float
    death: float
    dim: int


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite persistence diagram with points in ``box``.

    ``points`` is a read-only ``(k, 2)`` array of (birth, death) and ``dims``
    the matching homology dimensions.  Use :meth:`from_pairs` to build one
    from raw filtration output; the plain constructor only validates.
    """

    points: np.ndarray
    dims: np.ndarray
    box: OmegaBox

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        dims = np.array(self.dims, dtype=np.int64).reshape(-1)
        if dims.shape[0] != pts.shape[0]:
            raise InvalidDiagram("points and dims differ in length")
        if np.any(dims < 0):
            raise InvalidDiagram("homology dimensions must be non-negative")
        bad = ~self.box.contains(pts[:, 0], pts[:, 1])
        if np.any(bad):
            b, d = pts[np.argmax(bad)]
            raise InvalidDiagram(
                f"pair ({b!r}, {d!r}) lies outside 0 <= b < d <= L={self.box.L}"
            )
        object.__setattr__(self, "points", _readonly(pts))
        object.__setattr__(self, "dims", _readonly(dims))

    @classmethod
    def from_pairs(cls, pairs, box, *, cap_essential=False):
        """Build a diagram from ``(birth, death, dim)`` rows.

        Zero-persistence rows are discarded.  Rows with infinite death are
        dropped, or get death ``L`` when ``cap_essential`` is set.
        """
        rows = [tuple(r) for r in pairs]
        if not rows:
            return cls.empty(box)
        arr = np.array([(float(b), float(d)) for b, d, _ in rows], dtype=float)
        dims = np.array([int(k) for _, _, k in rows], dtype=np.int64)
        inf = np.isinf(arr[:, 1]) & (arr[:, 1] > 0)
        if cap_essential:
            arr[inf, 1] = box.L
            keep = np.ones(len(arr), dtype=bool)
        else:
            keep = ~inf
        keep &= arr[:, 0] != arr[:, 1]
        return cls(arr[keep], dims[keep], box)

    @classmethod
    def empty(cls, box):
        return cls(np.empty((0, 2)), np.empty(0, dtype=np.int64), box)

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        for (b, d), k in zip(self.points, self.dims):
            yield PersistencePair(float(b), float(d), int(k))

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            self.box == other.box
            and self.sorted_rows() == other.sorted_rows()
        )

    def __repr__(self):
        return f"PersistenceDiagram(n={len(self)}, L={self.box.L})"

    @property
    def births(self):
        return self.points[:, 0]

    @property
    def deaths(self):
        return self.points[:, 1]

    def select_dim(self, dim):
        mask = self.dims == dim
        return PersistenceDiagram(self.points[mask], self.dims[mask], self.box)

    def concat(self, other):
        if other.box != self.box:
            raise InvalidDiagram("cannot concatenate diagrams with different L")
        return PersistenceDiagram(
            np.vstack([self.points, other.points]),
            np.concatenate([self.dims, other.dims]),
            self.box,
        )

    def sorted_rows(self):
        """Canonical multiset view: sorted list of (birth, death, dim)."""
        return sorted(self)


@dataclass(frozen=True)
class DiagramSample:
    """Ordered collection of diagrams sharing one box, treated as i.i.d."""

    diagrams: tuple
    box: OmegaBox = field(default=None)

    def __post_init__(self):
        diagrams = tuple(self.diagrams)
        if not diagrams:
            raise PDError("a diagram sample needs at least one diagram")
        box = self.box if self.box is not None else diagrams[0].box
        for i, dg in enumerate(diagrams):
            if dg.box != box:
                raise InvalidDiagram(
                    f"diagram {i} has L={dg.box.L}, sample uses L={box.L}"
                )
        object.__setattr__(self, "diagrams", diagrams)
        object.__setattr__(self, "box", box)

    def __len__(self):
        return len(self.diagrams)

    def __iter__(self):
        return iter(self.diagrams)

    def __getitem__(self, i):
        return self.diagrams[i]

    @property
    def n(self):
        return len(self.diagrams)

    @property
    def counts(self):
        return np.array([len(d) for d in self.diagrams], dtype=np.int64)

    def select_dim(self, dim):
        return DiagramSample(tuple(d.select_dim(dim) for d in self.diagrams), self.box)

    def concat(self, other):
        return DiagramSample(self.diagrams + tuple(other.diagrams), self.box)

    def drop_empty(self):
        """Return ``(sample, n_dropped)`` without the empty diagrams."""
        kept = tuple(d for d in self.diagrams if len(d))
        return DiagramSample(kept, self.box), len(self.diagrams) - len(kept)

    def pooled(self):
        """All points stacked, with the index of the owning diagram."""
        pts = [d.points for d in self.diagrams]
        owner = np.repeat(np.arange(self.n), [len(d) for d in self.diagrams])
        return np.vstack(pts) if pts else np.empty((0, 2)), owner


def diag_distance(point):
    """Euclidean distance from ``(b, d)`` to the diagonal ``b = d``.

    Accepts a single point or an ``(..., 2)`` array.
    """
    p = np.asarray(point, dtype=float)
    out = np.abs(p[..., 1] - p[..., 0]) / SQRT2
    return float(out) if out.ndim == 0 else out


def diag_projection(point):
    """Closest point of the diagonal, ``((b + d) / 2, (b + d) / 2)``."""
    p = np.asarray(point, dtype=float)
    mid = 0.5 * (p[..., 0] + p[..., 1])
    out = np.stack([mid, mid], axis=-1)
    return tuple(float(v) for v in out) if out.ndim == 1 else out


def total_persistence(diagram, q):
    """Sum of ``diag_distance(r) ** q`` over the points of ``diagram``."""
    if not q > 0:
        raise InvalidQ("q must be positive")
    if len(diagram) == 0:
        return 0.0
    return math.fsum(diag_distance(diagram.points) ** q)


def mass_above(diagram, ell):
    """Number of points at distance at least ``ell`` from the diagonal."""
    if len(diagram) == 0:
        return 0
    return int(np.count_nonzero(diag_distance(diagram.points) >= ell))


def omega_weighted_volume(q, L):
    """Closed form of the integral of ``diag_distance ** q`` over the triangle.

    Equals ``2 / ((q + 1)(q + 2)) * (L / sqrt(2)) ** (q + 2)``; ``q = 0`` gives
    the triangle's area ``L**2 / 2``.
    """
    if q < 0:
        raise PDError("q must be non-negative")
    if not L > 0:
        raise PDError("L must be positive")
    return 2.0 / ((q + 1.0) * (q + 2.0)) * (L / SQRT2) ** (q + 2.0)
