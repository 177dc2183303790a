"""
Clusters of tangent lines (axes of cylinders touching the unit ball).

A cluster of ``L`` lines is a point of ``M^L``.  Local coordinates are the
per-line chart ``(phi, kappa, alpha)``, flattened line by line into a
``3L`` vector ``[phi_1, kappa_1, alpha_1, phi_2, ...]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geom3 import (
    ChartError,
    DomainError,
    TangentLine,
    chart_from_vectors,
    chart_to_vectors,
    pairwise_line_distances,
    rotate_about_radii,
)

CONTACT_TOL_EXACT = 1e-9
CONTACT_TOL_NUMERIC = 1e-6

C6_LINE_NAMES = ("A", "D", "B", "E", "C", "F")


@dataclass(frozen=True, eq=False)
class LineCluster:
    points: np.ndarray
    directions: np.ndarray
    label: str | None = None
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.points) < 2:
            raise DomainError("a cluster needs at least two lines")

    @classmethod
    def from_lines(cls, lines: Sequence[TangentLine], label=None, names=None) -> "LineCluster":
        x = np.array([ln.point for ln in lines])
        t = np.array([ln.direction for ln in lines])
        return cls(x, t, label, names)

    @classmethod
    def from_chart(cls, phi, kappa, alpha, label=None, names=None) -> "LineCluster":
        phi = np.asarray(phi, dtype=float)
        if np.any(np.abs(phi) >= np.pi / 2 - 1e-6):
            raise ChartError("chart requires every touch point off the poles")
        x, t = chart_to_vectors(phi, kappa, alpha)
        return cls(x, t, label, names)

    @classmethod
    def from_chart_vector(cls, z, label=None, names=None) -> "LineCluster":
        z = np.asarray(z, dtype=float).reshape(-1, 3)
        return cls.from_chart(z[:, 0], z[:, 1], z[:, 2], label, names)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lines(self) -> list[TangentLine]:
        return [TangentLine(x, t) for x, t in zip(self.points, self.directions)]

    def chart(self):
        return chart_from_vectors(self.points, self.directions)

    def chart_vector(self) -> np.ndarray:
        return np.column_stack(self.chart()).ravel()

    def distance_matrix(self) -> np.ndarray:
        return pairwise_line_distances(self.points, self.directions)

    def pair_distances(self) -> np.ndarray:
        """Distances of all pairs ``i < j`` in ``np.triu_indices`` order."""
        return self.distance_matrix()[np.triu_indices(len(self), 1)]

    def rotated(self, R) -> "LineCluster":
        R = np.asarray(R, dtype=float)
        return LineCluster(self.points @ R.T, self.directions @ R.T, self.label, self.names)

    def subset(self, indices, label=None) -> "LineCluster":
        idx = list(indices)
        names = tuple(self.names[i] for i in idx) if self.names else None
        return LineCluster(self.points[idx], self.directions[idx], label or self.label, names)


@dataclass(frozen=True)
class ContactGraph:
    edges: frozenset = field(default_factory=frozenset)
    tolerance: float = CONTACT_TOL_EXACT
    value: float = 0.0

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degrees(self, n: int) -> list[int]:
        deg = [0] * n
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def min_distance(c: LineCluster) -> float:
    """The function D: smallest distance between two lines of the cluster."""
    return float(c.pair_distances().min())


def c6_configuration(phi: float, delta: float, kappa: float) -> LineCluster:
    """The three-parameter family C6(phi, delta, kappa); lines ordered A, D, B, E, C, F."""
    if abs(phi) >= np.pi / 2:
        raise ChartError("|phi| must be below pi/2")
    lat = np.array([phi, -phi, phi, -phi, phi, -phi])
    lon = np.array([
        np.pi / 6 - kappa,
        np.pi / 2 + kappa,
        5 * np.pi / 6 - kappa,
        7 * np.pi / 6 + kappa,
        3 * np.pi / 2 - kappa,
        11 * np.pi / 6 + kappa,
    ])
    label = "c6" if phi == delta == kappa == 0 else f"c6({phi:.6g},{delta:.6g},{kappa:.6g})"
    return LineCluster.from_chart(lat, lon, np.full(6, float(delta)), label, C6_LINE_NAMES)


def gamma(x: float) -> tuple[float, float, float]:
    """Parameters ``(phi, delta, kappa)`` of the unlocking curve at ``x`` in (0, 1].

    ``x = 1`` is C6 itself and ``x = 1/2`` the record cluster.
    """
    if not 0.0 < x <= 1.0:
        raise DomainError(f"gamma is defined for 0 < x <= 1, got {x}")
    q = 1.0 + 7.0 * x + 4.0 * x * x
    phi = np.arcsin(min(1.0, 2.0 * np.sqrt((1.0 - x) * x * (1.0 + x) / q)))
    delta = np.arctan(np.sqrt((1.0 - x) * (1.0 + 3.0 * x) / (x * q)))
    kappa = np.arctan((x - 1.0) / np.sqrt((1.0 + x) * (1.0 + 3.0 * x)))
    return float(phi), float(delta), float(kappa)


def gamma_cluster(x: float) -> LineCluster:
    c = c6_configuration(*gamma(x))
    return LineCluster(c.points, c.directions, f"gamma({x:.6g})", c.names)


def record_cluster() -> LineCluster:
    """C_m, the sharp local maximum at ``x = 1/2`` with D = sqrt(12/11)."""
    c = gamma_cluster(0.5)
    return LineCluster(c.points, c.directions, "c_m", c.names)


TETRAHEDRON = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)


def _tetrahedron_edge_lines():
    i, j = np.triu_indices(4, 1)
    mid = (TETRAHEDRON[i] + TETRAHEDRON[j]) / 2
    t = TETRAHEDRON[j] - TETRAHEDRON[i]
    return mid, t / np.linalg.norm(t, axis=1, keepdims=True)


def o6_configuration() -> LineCluster:
    """Six lines touching at the octahedron vertices (Kuperberg's O6), D = 1.

    Each line is a regular-tetrahedron edge turned by pi/4 about the radius
    through its midpoint.
    """
    x, t = _tetrahedron_edge_lines()
    return LineCluster(x, rotate_about_radii(x, t, np.full(6, np.pi / 4)), "o6")


def c4_saddle() -> LineCluster:
    """O6 without its two lines at the poles: two vertical lines interlaced with two horizontal."""
    c = o6_configuration()
    keep = [i for i in range(6) if abs(c.points[i, 2]) < 0.5]
    return c.subset(keep, "c4_saddle")


def c4_parallel() -> LineCluster:
    """Four vertical lines at longitudes 0, pi/2, pi, 3pi/2; D = sqrt(2)."""
    lon = np.arange(4) * np.pi / 2
    return LineCluster.from_chart(np.zeros(4), lon, np.zeros(4), "c4_parallel")


def contact_graph(c: LineCluster, tol: float = CONTACT_TOL_EXACT) -> ContactGraph:
    """Pairs whose distance is within ``tol`` of the minimum."""
    if tol <= 0:
        raise DomainError("contact tolerance must be positive")
    d = c.distance_matrix()
    iu = np.triu_indices(len(c), 1)
    D = d[iu].min()
    edges = frozenset((int(i), int(j)) for i, j in zip(*iu) if d[i, j] <= D + tol)
    return ContactGraph(edges, tol, float(D))


def perturb(c: LineCluster, v, t: float) -> LineCluster:
    """Shift the chart coordinates of every line by ``t * v``."""
    z = c.chart_vector() + t * np.asarray(v, dtype=float)
    return LineCluster.from_chart_vector(z, c.label, c.names)


def _wrap_chart_difference(dz):
    dz = np.array(dz, dtype=float).reshape(-1, 3)
    dz[:, 1] = (dz[:, 1] + np.pi) % (2 * np.pi) - np.pi
    dz[:, 2] = (dz[:, 2] + np.pi / 2) % np.pi - np.pi / 2
    return dz.ravel()


def _axis_rotation(axis: int, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    R = np.eye(3)
    a, b = [k for k in range(3) if k != axis]
    R[a, a], R[a, b], R[b, a], R[b, b] = c, -s, s, c
    return R


def rotation_generators(c: LineCluster, h: float = 1e-4) -> np.ndarray:
    """Chart images of the three infinitesimal rotations about x, y, z; shape (3, 3L).

    Five-point central differences of the chart coordinates of rotated clusters.
    """
    z0 = c.chart_vector()
    gens = []
    for axis in range(3):
        f = {s: _wrap_chart_difference(c.rotated(_axis_rotation(axis, s * h)).chart_vector() - z0)
             for s in (-2, -1, 1, 2)}
        gens.append((8 * (f[1] - f[-1]) - (f[2] - f[-2])) / (12 * h))
    return np.array(gens)


def off_pole(c: LineCluster, margin: float = 0.2) -> LineCluster:
    """A rotated copy of ``c`` whose touch points all keep ``margin`` away from the poles.

    The rotation is drawn from a fixed seeded sequence, so the result is
    deterministic.
    """
    from scipy.spatial.transform import Rotation

    lat = np.arcsin(np.clip(c.points[:, 2], -1, 1))
    if np.all(np.abs(lat) < np.pi / 2 - margin):
        return c
    rng = np.random.default_rng(20240613)
    best, best_R = -1.0, np.eye(3)
    for _ in range(64):
        R = Rotation.random(random_state=rng).as_matrix()
        lat = np.arcsin(np.clip((c.points @ R.T)[:, 2], -1, 1))
        slack = np.pi / 2 - np.abs(lat).max()
        if slack > best:
            best, best_R = slack, R
        if slack >= margin:
            break
    return c.rotated(best_R)


def same_line_set(a: LineCluster, b: LineCluster, tol: float = 1e-9) -> bool:
    """True if the two clusters contain the same unoriented lines, in any order."""
    if len(a) != len(b):
        return False
    unused = list(range(len(b)))
    for la in a.lines:
        hit = next((k for k in unused if la.same_line(b.lines[k], tol)), None)
        if hit is None:
            return False
        unused.remove(hit)
    return True
