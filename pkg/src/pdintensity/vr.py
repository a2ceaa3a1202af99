"""Vietoris-Rips persistence (H0 and H1) of small point clouds.

Two independent paths compute the same diagram:

* :func:`rips_persistence` -- union-find for H0 and a cohomology reduction
  with clearing and apparent pairs for H1, compiled with numba.  Triangles
  are never materialised; coboundaries are generated on the fly.
* :func:`rips_persistence_oracle` -- every simplex up to dimension
  ``max_dim + 1`` listed explicitly and the boundary matrix reduced over Z/2
  with the textbook column algorithm.  Only for ``N <= 8``.

Simplices are ordered by (filtration value, dimension, sorted vertex tuple).
Filtration values are entries of one shared distance matrix, so both paths
report bit-identical birth and death values.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np
from numba import types
from numba.typed import Dict
from scipy.spatial.distance import pdist, squareform

from .core import DiagramSample, OmegaBox, PersistenceDiagram
from .errors import DimensionMismatch, EmptyCloud, PDError, TooLarge

MAX_POINTS = 4000
ORACLE_MAX_POINTS = 8


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = self.points
        if not isinstance(pts, np.ndarray):
            rows = list(pts)
            if rows and len({len(r) for r in rows}) > 1:
                raise DimensionMismatch("points have differing dimensions")
            pts = np.array(rows, dtype=float)
        pts = np.asarray(pts, dtype=float)
        if pts.size == 0:
            raise EmptyCloud("point cloud is empty")
        if pts.ndim != 2:
            raise DimensionMismatch(f"expected an (N, d) array, got shape {pts.shape}")
        if pts.shape[1] not in (2, 3):
            raise DimensionMismatch(f"points must be 2- or 3-dimensional, got d={pts.shape[1]}")
        if not np.all(np.isfinite(pts)):
            raise PDError("point coordinates must be finite")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class FiltrationSpec:
    max_dim: int = 1
    max_edge: Optional[float] = None  # None means L
    cap_essential: bool = False

    def __post_init__(self):
        if self.max_dim not in (0, 1):
            raise PDError("max_dim must be 0 or 1")
        if self.max_edge is not None and not self.max_edge > 0:
            raise PDError("max_edge must be positive")

    def threshold(self, box):
        t = box.L if self.max_edge is None else self.max_edge
        if t > box.L:
            raise PDError(f"max_edge={t} exceeds L={box.L}")
        return float(t)


def _as_cloud(cloud):
    return cloud if isinstance(cloud, PointCloud) else PointCloud(cloud)


def distance_matrix(points):
    return squareform(pdist(np.asarray(points, dtype=float)))


def _sorted_edges(dist, threshold):
    n = dist.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    vals = dist[iu, ju]
    keep = vals <= threshold
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ju, iu, vals))
    return iu[order].astype(np.int64), ju[order].astype(np.int64), vals[order]


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _kruskal(n, ei, ej):
    parent = np.arange(n)
    is_mst = np.zeros(ei.shape[0], dtype=np.bool_)
    merged = 0
    for e in range(ei.shape[0]):
        a = _find(parent, ei[e])
        b = _find(parent, ej[e])
        if a != b:
            # older root (smaller index) survives; irrelevant for H0 with all births 0
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            is_mst[e] = True
            merged += 1
            if merged == n - 1:
                break
    return is_mst, n - merged


@numba.njit(cache=True)
def _coboundary(e, ei, ej, dist, rank, n):
    """Triangles containing edge ``e``, sorted by (value, vertex code)."""
    i = ei[e]
    j = ej[e]
    v = dist[i, j]
    vals = np.empty(n, dtype=np.float64)
    codes = np.empty(n, dtype=np.int64)
    m = 0
    for k in range(n):
        if k == i or k == j:
            continue
        if rank[i, k] < 0 or rank[j, k] < 0:
            continue
        t = v
        if dist[i, k] > t:
            t = dist[i, k]
        if dist[j, k] > t:
            t = dist[j, k]
        a, b, c = i, j, k
        if c < a:
            a, b, c = c, a, b
        elif c < b:
            b, c = c, b
        vals[m] = t
        codes[m] = (a * n + b) * n + c
        m += 1
    vals = vals[:m]
    codes = codes[:m]
    order = np.argsort(codes, kind="mergesort")
    vals = vals[order]
    codes = codes[order]
    order = np.argsort(vals, kind="mergesort")
    return vals[order], codes[order]


@numba.njit(cache=True)
def _oldest_coface(e, ei, ej, dist, rank, n):
    """(value, vertex code) of the first triangle on edge ``e``; code -1 if none."""
    i = ei[e]
    j = ej[e]
    v = dist[i, j]
    best_v = np.inf
    best_c = -1
    for k in range(n):
        if k == i or k == j:
            continue
        if rank[i, k] < 0 or rank[j, k] < 0:
            continue
        t = v
        if dist[i, k] > t:
            t = dist[i, k]
        if dist[j, k] > t:
            t = dist[j, k]
        if t > best_v:
            continue
        a, b, c = i, j, k
        if c < a:
            a, b, c = c, a, b
        elif c < b:
            b, c = c, b
        code = (a * n + b) * n + c
        if t < best_v or code < best_c:
            best_v = t
            best_c = code
    return best_v, best_c


@numba.njit(cache=True)
def _symdiff(av, ac, bv, bc):
    out_v = np.empty(av.shape[0] + bv.shape[0], dtype=np.float64)
    out_c = np.empty(av.shape[0] + bv.shape[0], dtype=np.int64)
    p = 0
    q = 0
    m = 0
    while p < av.shape[0] and q < bv.shape[0]:
        if av[p] == bv[q] and ac[p] == bc[q]:
            p += 1
            q += 1
        elif av[p] < bv[q] or (av[p] == bv[q] and ac[p] < bc[q]):
            out_v[m] = av[p]
            out_c[m] = ac[p]
            m += 1
            p += 1
        else:
            out_v[m] = bv[q]
            out_c[m] = bc[q]
            m += 1
            q += 1
    while p < av.shape[0]:
        out_v[m] = av[p]
        out_c[m] = ac[p]
        m += 1
        p += 1
    while q < bv.shape[0]:
        out_v[m] = bv[q]
        out_c[m] = bc[q]
        m += 1
        q += 1
    return out_v[:m].copy(), out_c[:m].copy()


@numba.njit(cache=True)
def _h1_cohomology(n, ei, ej, dist, rank, is_mst):
    n_edges = ei.shape[0]
    births = np.empty(n_edges, dtype=np.float64)
    deaths = np.empty(n_edges, dtype=np.float64)
    n_pairs = 0
    ess = np.empty(n_edges, dtype=np.float64)
    n_ess = 0
    pivot_owner = Dict.empty(key_type=types.int64, value_type=types.int64)
    stored_v = Dict.empty(key_type=types.int64, value_type=types.float64[:])
    stored_c = Dict.empty(key_type=types.int64, value_type=types.int64[:])
    for e in range(n_edges - 1, -1, -1):
        if is_mst[e]:
            continue
        tv, code = _oldest_coface(e, ei, ej, dist, rank, n)
        if code < 0:
            ess[n_ess] = dist[ei[e], ej[e]]
            n_ess += 1
            continue
        # apparent pair: e is the youngest face of its oldest coface
        a = code // (n * n)
        b = (code // n) % n
        c = code % n
        youngest = max(rank[a, b], max(rank[a, c], rank[b, c]))
        if youngest == e:
            pivot_owner[code] = e
            if tv > dist[ei[e], ej[e]]:
                births[n_pairs] = dist[ei[e], ej[e]]
                deaths[n_pairs] = tv
                n_pairs += 1
            continue
        cv, cc = _coboundary(e, ei, ej, dist, rank, n)
        while cv.shape[0] > 0 and cc[0] in pivot_owner:
            owner = pivot_owner[cc[0]]
            if owner in stored_v:
                ov = stored_v[owner]
                oc = stored_c[owner]
            else:
                # apparent columns are never reduced, so recomputing is exact
                ov, oc = _coboundary(owner, ei, ej, dist, rank, n)
            cv, cc = _symdiff(cv, cc, ov, oc)
        if cv.shape[0] == 0:
            ess[n_ess] = dist[ei[e], ej[e]]
            n_ess += 1
            continue
        stored_v[e] = cv
        stored_c[e] = cc
        pivot_owner[cc[0]] = e
        if cv[0] > dist[ei[e], ej[e]]:
            births[n_pairs] = dist[ei[e], ej[e]]
            deaths[n_pairs] = cv[0]
            n_pairs += 1
    return births[:n_pairs].copy(), deaths[:n_pairs].copy(), ess[:n_ess].copy()


def _assemble(rows, box, spec):
    return PersistenceDiagram.from_pairs(rows, box, cap_essential=spec.cap_essential)


def rips_persistence(cloud, spec=None, box=None):
    """Vietoris-Rips persistence diagram in dimensions ``0..spec.max_dim``.

    Parameters
    ----------
    cloud : PointCloud or array_like, shape (N, d)
        At most ``MAX_POINTS`` points with ``d`` in {2, 3}.
    spec : FiltrationSpec
        Edges longer than ``max_edge`` (default ``L``) never enter.
    box : OmegaBox

    Returns
    -------
    PersistenceDiagram
        Finite pairs plus essential classes handled per ``spec.cap_essential``
        (dropped, or given death ``L``).  Zero-persistence pairs are removed.
    """
    cloud = _as_cloud(cloud)
    spec = spec or FiltrationSpec()
    if box is None:
        raise PDError("an OmegaBox is required")
    if cloud.n > MAX_POINTS:
        raise TooLarge(f"{cloud.n} points exceeds the limit of {MAX_POINTS}")
    threshold = spec.threshold(box)
    n = cloud.n
    dist = distance_matrix(cloud.points)
    ei, ej, vals = _sorted_edges(dist, threshold)
    is_mst, n_components = _kruskal(n, ei, ej)

    rows = [(0.0, v, 0) for v in vals[is_mst]]
    rows += [(0.0, math.inf, 0)] * int(n_components)
    if spec.max_dim >= 1 and ei.size:
        rank = np.full((n, n), -1, dtype=np.int64)
        idx = np.arange(ei.size, dtype=np.int64)
        rank[ei, ej] = idx
        rank[ej, ei] = idx
        b, d, ess = _h1_cohomology(n, ei, ej, dist, rank, is_mst)
        rows += [(bb, dd, 1) for bb, dd in zip(b.tolist(), d.tolist())]
        rows += [(bb, math.inf, 1) for bb in ess.tolist()]
    return _assemble(rows, box, spec)


def rips_persistence_oracle(cloud, spec=None, box=None):
    """Reference diagram by explicit reduction of the full boundary matrix."""
    cloud = _as_cloud(cloud)
    spec = spec or FiltrationSpec()
    if box is None:
        raise PDError("an OmegaBox is required")
    n = cloud.n
    if n > ORACLE_MAX_POINTS:
        raise TooLarge(f"oracle handles at most {ORACLE_MAX_POINTS} points, got {n}")
    threshold = spec.threshold(box)
    dist = distance_matrix(cloud.points)

    simplices = []
    for k in range(1, spec.max_dim + 3):
        for s in itertools.combinations(range(n), k):
            value = max((dist[a, b] for a, b in itertools.combinations(s, 2)), default=0.0)
            if value <= threshold:
                simplices.append((value, k - 1, s))
    simplices.sort()
    index = {s: i for i, (_, _, s) in enumerate(simplices)}

    low_owner = {}
    paired = set()
    pairs = []
    for j, (value, dim, s) in enumerate(simplices):
        col = set()
        if dim > 0:
            col = {index[f] for f in itertools.combinations(s, dim)}
        while col:
            low = max(col)
            if low not in low_owner:
                break
            col ^= low_owner[low]
        if col:
            low = max(col)
            low_owner[low] = col
            paired.add(low)
            paired.add(j)
            birth = simplices[low]
            if birth[1] <= spec.max_dim:
                pairs.append((birth[0], value, birth[1]))
    for i, (value, dim, s) in enumerate(simplices):
        if i not in paired and dim <= spec.max_dim:
            pairs.append((value, math.inf, dim))
    return _assemble(pairs, box, spec)


def batch_rips(clouds, spec=None, box=None):
    """Apply :func:`rips_persistence` to each cloud; order preserved."""
    clouds = list(clouds)
    if not clouds:
        raise PDError("batch_rips needs at least one cloud")
    diagrams = []
    for i, cloud in enumerate(clouds):
        try:
            diagrams.append(rips_persistence(cloud, spec, box))
        except PDError as exc:
            raise type(exc)(f"cloud {i}: {exc}") from exc
    return DiagramSample(tuple(diagrams), box)
