"""
The delta-rotation process on Platonic solids.

A unit sphere touches the edge midpoints of a Platonic solid; every edge
line is turned by the same angle ``delta`` about the radius through its
midpoint, and the minimal line distance ``D`` is tracked as a function of
``delta``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .cyl_clusters import LineCluster, min_distance
from .geom3 import DomainError, closest_points, rotate_about_radii
from .ball_clusters import GOLDEN

SKELETON_TOL = 1e-7
REFINE_XTOL = 1e-10

KINDS = ("tetrahedron", "octahedron", "cube", "icosahedron", "dodecahedron")
EDGE_COUNTS = {"tetrahedron": 6, "octahedron": 12, "cube": 12, "icosahedron": 30, "dodecahedron": 30}


def _raw_vertices(kind: str) -> np.ndarray:
    if kind == "tetrahedron":
        return np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    if kind == "octahedron":
        return np.vstack([np.eye(3), -np.eye(3)])
    if kind == "cube":
        return np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
    if kind == "icosahedron":
        v = []
        for a in (-1, 1):
            for b in (-GOLDEN, GOLDEN):
                v += [(0, a, b), (a, b, 0), (b, 0, a)]
        return np.array(v, dtype=float)
    if kind == "dodecahedron":
        g, h = GOLDEN, 1 / GOLDEN
        v = list(itertools.product((-1.0, 1.0), repeat=3))
        for a in (-1, 1):
            for b in (-1, 1):
                v += [(0, a * h, b * g), (a * h, b * g, 0), (b * g, 0, a * h)]
        return np.array(v, dtype=float)
    raise DomainError(f"unknown solid {kind!r}; known: {', '.join(KINDS)}")


def _edges(v: np.ndarray) -> list[tuple[int, int]]:
    d = np.linalg.norm(v[:, None] - v[None], axis=-1)
    iu = np.triu_indices(len(v), 1)
    shortest = d[iu].min()
    return [(int(i), int(j)) for i, j in zip(*iu) if d[i, j] < shortest * (1 + 1e-9)]


@dataclass(frozen=True, eq=False)
class PlatonicSolid:
    """Platonic solid scaled so that its edge midpoints lie on the unit sphere."""

    kind: str
    vertices: np.ndarray = field(repr=False)
    edges: tuple = field(repr=False)

    @classmethod
    def make(cls, kind: str) -> "PlatonicSolid":
        v = _raw_vertices(kind)
        e = _edges(v)
        i, j = e[0]
        v = v / np.linalg.norm((v[i] + v[j]) / 2)
        return cls(kind, v, tuple(e))

    @property
    def midpoints(self) -> np.ndarray:
        i, j = np.array(self.edges).T
        return (self.vertices[i] + self.vertices[j]) / 2


def edge_lines(s: PlatonicSolid) -> LineCluster:
    """One tangent line per edge, touching the unit sphere at the edge midpoint."""
    i, j = np.array(s.edges).T
    t = s.vertices[j] - s.vertices[i]
    return LineCluster(s.midpoints, t / np.linalg.norm(t, axis=1, keepdims=True), s.kind)


def rotate_edges(c: LineCluster, delta: float, mirror: bool = False) -> LineCluster:
    """Turn every line by ``delta`` about the radius through its touch point.

    The sense is counterclockwise seen from outside the sphere; ``mirror``
    flips it for all lines at once.
    """
    a = -delta if mirror else delta
    t = rotate_about_radii(c.points, c.directions, np.full(len(c), float(a)))
    return LineCluster(c.points, t, c.label, c.names)


def distance_at(s: PlatonicSolid | LineCluster, delta: float, mirror: bool = False) -> float:
    c = edge_lines(s) if isinstance(s, PlatonicSolid) else s
    return min_distance(rotate_edges(c, delta, mirror))


@dataclass
class Extremum:
    kind: str  # "max" or "min"
    delta: float
    value: float


@dataclass
class SweepResult:
    solid: str
    deltas: np.ndarray
    values: np.ndarray
    extrema: list = field(default_factory=list)

    def minima(self) -> list[Extremum]:
        return [e for e in self.extrema if e.kind == "min"]

    def maxima(self) -> list[Extremum]:
        return [e for e in self.extrema if e.kind == "max"]


def _refine(f, a: float, b: float, sign: float) -> tuple[float, float]:
    """Golden-section search for the extremum of ``f`` on ``[a, b]``."""
    g = (np.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while b - a > REFINE_XTOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sign * f(d)
    x = c if fc < fd else d
    return float(x), float(f(x))


def sweep(s: PlatonicSolid, delta_from: float = 0.0, delta_to: float = np.pi / 2,
          samples: int = 721, mirror: bool = False) -> SweepResult:
    """Evaluate ``D`` on a uniform grid in ``delta`` and refine the interior extrema.

    Each grid local extremum is refined by golden-section search on its two
    neighbouring cells.  A flat run of equal values counts once.
    """
    if samples < 2:
        raise DomainError("a sweep needs at least two samples")
    c = edge_lines(s)
    ds = np.linspace(delta_from, delta_to, samples)
    vals = np.array([distance_at(c, d, mirror) for d in ds])
    f = lambda d: distance_at(c, d, mirror)  # noqa: E731
    out = []
    for k in range(1, samples - 1):
        lo, mid, hi = vals[k - 1], vals[k], vals[k + 1]
        if mid >= lo and mid > hi:
            kind, sign = "max", -1.0
        elif mid <= lo and mid < hi:
            kind, sign = "min", 1.0
        else:
            continue
        x, y = _refine(f, ds[k - 1], ds[k + 1], sign)
        out.append(Extremum(kind, x, y))
    return SweepResult(s.kind, ds, vals, out)


@dataclass
class Skeleton:
    components: list  # list of lists of line indices
    vertices: list  # per component, array of intersection points
    lengths: list  # per component, sorted distances between its intersection points


def _dedupe(points: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return np.array(kept)


def skeleton_structure(c: LineCluster, tol: float = SKELETON_TOL) -> Skeleton:
    """Groups of mutually concurrent lines of a degenerate cluster and the figure they span.

    Two lines are joined when their distance is below ``tol``.  Intersection
    points are midpoints of the common perpendicular; within a component they
    are merged at ``sqrt(tol)`` and their pairwise distances reported.
    """
    d = c.distance_matrix()
    n = len(c)
    if d[np.triu_indices(n, 1)].min() >= tol:
        raise DomainError(f"cluster is not degenerate: D >= {tol}")
    adj = (d < tol) & ~np.eye(n, dtype=bool)
    ncomp, lab = connected_components(adj, directed=False)
    comps, verts, lengths = [], [], []
    for k in range(ncomp):
        idx = [int(i) for i in np.flatnonzero(lab == k)]
        if len(idx) < 2:
            continue
        pts = []
        for i, j in itertools.combinations(idx, 2):
            if adj[i, j]:
                a, b = closest_points(c.points[i], c.directions[i], c.points[j], c.directions[j])
                pts.append((a + b) / 2)
        pts = _dedupe(np.array(pts), np.sqrt(tol))
        comps.append(idx)
        verts.append(pts)
        iu = np.triu_indices(len(pts), 1)
        lengths.append(np.sort(np.linalg.norm(pts[:, None] - pts[None], axis=-1)[iu]))
    return Skeleton(comps, verts, lengths)
