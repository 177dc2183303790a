"""
Clusters of equal balls around the unit ball, encoded by their touch points.

A configuration of ``n`` touch points is a point of ``P_n``; ``delta`` is
the smallest chordal distance between two touch points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial.distance import cdist
from scipy.spatial.transform import Rotation

from .geom3 import DomainError, SpherePoint, angle_from_chord, ball_radius_from_angle, latlon
from . import min_morse

DEFAULT_SEED = 42
QUOTIENT_STARTS = 32


@dataclass(frozen=True, eq=False)
class BallTouchConfig:
    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len(x) < 2:
            raise DomainError("a configuration needs at least two points")
        object.__setattr__(self, "points", x / np.linalg.norm(x, axis=1, keepdims=True))

    @classmethod
    def from_latlon(cls, phi, kappa, label=None) -> "BallTouchConfig":
        from .geom3 import embed

        return cls(embed(phi, kappa), label)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def sphere_points(self) -> list[SpherePoint]:
        phi, kappa = latlon(self.points)
        return [SpherePoint(float(a), float(b)) for a, b in zip(phi, kappa)]

    def rotated(self, R) -> "BallTouchConfig":
        return BallTouchConfig(self.points @ np.asarray(R).T, self.label)

    def distance_matrix(self) -> np.ndarray:
        return cdist(self.points, self.points)


class UnlockStructureError(RuntimeError):
    """The null space modulo rotations is not one-dimensional."""

    def __init__(self, dim: int):
        super().__init__(f"null space modulo SO(3) has dimension {dim}, expected 1")
        self.dim = dim


def delta(p: BallTouchConfig) -> float:
    """Smallest chordal distance between two touch points."""
    d = p.distance_matrix()
    return float(d[np.triu_indices(len(p), 1)].min())


def touching_radius(p: BallTouchConfig) -> float:
    """Radius of the equal balls for which the closest pair touches."""
    return ball_radius_from_angle(angle_from_chord(delta(p)))


def contact_pairs(p: BallTouchConfig, tol: float = 1e-9) -> list[tuple[int, int]]:
    d = p.distance_matrix()
    iu = np.triu_indices(len(p), 1)
    dmin = d[iu].min()
    return [(int(i), int(j)) for i, j in zip(*iu) if d[i, j] <= dmin + tol]


def hausdorff_distance(p: BallTouchConfig, q: BallTouchConfig) -> float:
    d = cdist(p.points, q.points)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def quotient_distance(p: BallTouchConfig, q: BallTouchConfig, starts: int = QUOTIENT_STARTS,
                      seed: int = DEFAULT_SEED) -> float:
    """Upper bound on ``inf_g hausdorff(p, g q)`` over rotations ``g``.

    Local Nelder-Mead descent over rotation vectors from the identity and
    ``starts`` seeded random rotations.
    """
    rng = np.random.default_rng(seed)
    x0s = [np.zeros(3)] + [Rotation.random(random_state=rng).as_rotvec() for _ in range(starts)]

    def f(r):
        Rm = Rotation.from_rotvec(r).as_matrix()
        return hausdorff_distance(p, BallTouchConfig(q.points @ Rm.T))

    best = f(np.zeros(3))
    for x0 in x0s:
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000,
                                "initial_simplex": x0 + 0.05 * np.vstack([np.zeros(3), np.eye(3)])})
        best = min(best, res.fun)
    return float(best)


# ------------------------------------------------------------ named clusters

GOLDEN = (1 + np.sqrt(5)) / 2


def _icosahedron():
    v = []
    for a in (-1, 1):
        for b in (-GOLDEN, GOLDEN):
            v += [(0, a, b), (a, b, 0), (b, 0, a)]
    return np.array(v, dtype=float)


def antiprism_latitude(n: int = 6) -> float:
    """Ring latitude of the uniform ``n``-antiprism inscribed in the unit sphere.

    Bisection for equal ring and cross edges.
    """
    def gap(phi):
        ring = 2 * np.cos(phi) * np.sin(np.pi / n)
        a = np.array([np.cos(phi), 0.0, np.sin(phi)])
        b = np.array([np.cos(phi) * np.cos(np.pi / n), np.cos(phi) * np.sin(np.pi / n), -np.sin(phi)])
        return ring - np.linalg.norm(a - b)

    lo, hi = 0.0, np.pi / 2
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if gap(lo) * gap(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _ring(n, phi, offset=0.0):
    k = offset + 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(phi) * np.cos(k), np.cos(phi) * np.sin(k), np.full(n, np.sin(phi))])


def _shell(lower_offset):
    phi = np.arcsin(np.sqrt(2.0 / 3.0))
    return np.vstack([
        _ring(6, 0.0),
        _ring(3, phi, np.pi / 6),
        _ring(3, -phi, lower_offset),
    ])


def _fcc():
    v = []
    for a in (-1, 1):
        for b in (-1, 1):
            v += [(a, b, 0), (a, 0, b), (0, a, b)]
    return np.array(v, dtype=float) / np.sqrt(2)


BALL_CLUSTERS: dict[str, Callable[[], np.ndarray]] = {
    "I12": _icosahedron,
    "A66": lambda: np.vstack([_ring(6, antiprism_latitude(6)), _ring(6, -antiprism_latitude(6), np.pi / 6)]),
    "necklace12": lambda: _ring(12, 0.0),
    "FCC": _fcc,
    # upper and lower triangles sit over the same hollows of the hexagon
    "HCP": lambda: _shell(np.pi / 6),
    "T3": lambda: _ring(3, 0.0),
    "flex5": lambda: np.vstack([[0, 0, 1], [0, 0, -1], _ring(3, 0.0)]),
}


def named_ball_cluster(name: str) -> BallTouchConfig:
    try:
        pts = BALL_CLUSTERS[name]()
    except KeyError:
        raise KeyError(f"unknown ball cluster {name!r}; known: {', '.join(BALL_CLUSTERS)}") from None
    return BallTouchConfig(pts, name)


# ------------------------------------------------------------ perturbations

def perturb_config(p: BallTouchConfig, v, t: float, w=None) -> BallTouchConfig:
    """Move along ``t v + t^2 w`` in the tangent-frame chart of every point."""
    frames = min_morse.tangent_frames(p.points)
    y = t * np.asarray(v, dtype=float)
    if w is not None:
        y = y + t * t * np.asarray(w, dtype=float)
    return BallTouchConfig(min_morse.ball_chart_points(p.points, frames, y), p.label)


def _rotation_free_directions(p: BallTouchConfig, count: int, rng) -> np.ndarray:
    frames = min_morse.tangent_frames(p.points)
    G = min_morse.ball_rotation_generators(p.points, frames)
    V = rng.normal(size=(count, 2 * len(p)))
    Q, _ = np.linalg.qr(G.T)
    V -= (V @ Q) @ Q.T
    return V


@dataclass
class DecayReport:
    min_ratio: float
    max_ratio: float
    exponent: float
    exponents: np.ndarray
    samples: int


def pl_maximality_probe(p: BallTouchConfig, samples: int = 64, radius: float = 1e-3,
                        seed: int = DEFAULT_SEED, scales=(1.0, 0.5, 0.25, 0.125)) -> DecayReport:
    """Statistics of ``(delta(p) - delta(p')) / d(p, p')`` for random ``p'`` near ``p``.

    Each random rotation-free direction is scaled so the largest point
    displacement equals ``radius * scale``; ``d`` is :func:`quotient_distance`
    started at the identity.  The exponent is the median log-log slope of
    the decay against ``d`` across the scales.
    """
    rng = np.random.default_rng(seed)
    V = _rotation_free_directions(p, samples, rng)
    d0 = delta(p)
    ratios, slopes = [], []
    for v in V:
        v = v / np.linalg.norm(v.reshape(-1, 2), axis=1).max()
        dec, dist = [], []
        for s in scales:
            q = perturb_config(p, v, radius * s)
            dq = quotient_distance(p, q, starts=0)
            dec.append(d0 - delta(q))
            dist.append(dq)
        dec, dist = np.array(dec), np.array(dist)
        ratios.extend(dec / dist)
        if np.all(dec > 0):
            slopes.append(np.polyfit(np.log(dist), np.log(dec), 1)[0])
    slopes = np.array(slopes)
    return DecayReport(float(min(ratios)), float(max(ratios)),
                       float(np.median(slopes)) if len(slopes) else float("nan"), slopes, samples)


def decay_along_curve(p: BallTouchConfig, curve: Callable[[float], BallTouchConfig], ts) -> float:
    """Log-log slope of ``delta(p) - delta(curve(t))`` against ``t``."""
    ts = np.asarray(ts, dtype=float)
    dec = np.array([delta(p) - delta(curve(t)) for t in ts])
    if np.any(dec <= 0):
        raise DomainError("delta does not decrease along the curve")
    return float(np.polyfit(np.log(ts), np.log(dec), 1)[0])


def t3_lift_curve(t: float) -> BallTouchConfig:
    """T3 with its first point lifted to latitude ``t``."""
    p = named_ball_cluster("T3").points.copy()
    p[0] = [np.cos(t), 0.0, np.sin(t)]
    return BallTouchConfig(p, "T3")


def flex5_motion(theta: float) -> BallTouchConfig:
    """flex5 with one equatorial point turned by ``theta`` along the equator."""
    p = named_ball_cluster("flex5").points.copy()
    p[2] = [np.cos(theta), np.sin(theta), 0.0]
    return BallTouchConfig(p, "flex5")


# ------------------------------------------------------------ unlocking

@dataclass
class UnlockReport:
    direction: np.ndarray
    correction: np.ndarray
    motion: np.ndarray
    fixed_points: list
    fixed_count: int
    null_index_mod_so3: int
    exponents: np.ndarray
    growth_ok: bool
    rotation: np.ndarray


def _max_fixed_representative(points, frames, v, tol):
    """Add an infinitesimal rotation to ``v`` so that as many points as possible stand still."""
    n = len(points)
    V = np.einsum("nk,nki->ni", v.reshape(n, 2), frames)  # ambient velocities
    best_w, best_count = np.zeros(3), int((np.linalg.norm(V, axis=1) < tol).sum())
    for i in range(n):
        for j in range(i + 1, n):
            # w x p_k = -V_k for k in {i, j}
            A = np.vstack([_cross_matrix(points[i]), _cross_matrix(points[j])])
            w, *_ = np.linalg.lstsq(-A, np.concatenate([V[i], V[j]]), rcond=None)
            U = V + np.cross(w, points)
            count = int((np.linalg.norm(U, axis=1) < tol).sum())
            if count > best_count:
                best_count, best_w = count, w
    U = V + np.cross(best_w, points)
    return np.einsum("ni,nki->nk", U, frames).ravel(), best_w


def _cross_matrix(p):
    # matrix of w -> w x p
    return -np.array([[0, -p[2], p[1]], [p[2], 0, -p[0]], [-p[1], p[0], 0]])


def _second_order_correction(L, qv, fixed):
    """Smallest ``w`` (1-norm) with ``L w + qv >= s/2``, ``s`` the best achievable margin.

    Components of ``w`` belonging to ``fixed`` balls are pinned to zero, so
    those balls stay put along ``t v + t^2 w``.  Returns zeros if no positive
    margin exists.
    """
    m, n = L.shape
    pinned = set()
    for i in fixed:
        pinned.update((2 * i, 2 * i + 1))
    box = [(0.0, 0.0) if k in pinned else (-10.0, 10.0) for k in range(n)]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([-L, np.ones((m, 1))]), b_ub=qv,
                  bounds=box + [(None, 1.0)], method="highs")
    if not res.success or res.x[-1] <= 0:
        return np.zeros(n)
    s = res.x[-1] / 2
    # split w = w+ - w-, minimise sum(w+ + w-)
    free = [(0.0, 0.0) if k in pinned else (0.0, None) for k in range(n)]
    res = linprog(np.ones(2 * n), A_ub=np.hstack([-L, L]), b_ub=qv - s,
                  bounds=free + free, method="highs")
    return res.x[:n] - res.x[n:] if res.success else np.zeros(n)


def unlock_direction(p: BallTouchConfig, tol: float = 1e-9, fixed_tol: float = 1e-9,
                     ts=None) -> UnlockReport:
    """The unique first-order unlocking direction of a critical configuration.

    The direction spans the null space of the active distance differentials
    modulo rotations.  A rotation is added so the largest possible number
    of balls stays fixed.  A second-order correction ``w`` (from a small
    linear program, vanishing on the fixed balls) makes every active distance
    grow like ``t^2`` along ``t v + t^2 w``.  Pairs of two fixed balls are
    exempt, their exponent is reported as NaN.
    """
    b = min_morse.bundle_from_ball_config(p, tol)
    E = min_morse.quotient_by(min_morse.null_space_basis(b), b.rotation_generators)
    if len(E) != 1:
        raise UnlockStructureError(len(E))
    frames = min_morse.tangent_frames(p.points)
    v = E[0] / np.linalg.norm(E[0])
    v, w_rot = _max_fixed_representative(p.points, frames, v, fixed_tol)
    v = v / np.linalg.norm(v)
    motion = np.linalg.norm(v.reshape(-1, 2), axis=1)
    fixed = [int(i) for i in np.flatnonzero(motion < fixed_tol)]

    qv = np.einsum("i,uij,j->u", v, b.quadratic, v)
    # pairs of two fixed balls keep their distance; only the others must grow
    fixed_set = set(fixed)
    rows = [k for k, (i, j) in enumerate(b.pairs) if not (i in fixed_set and j in fixed_set)]
    w = _second_order_correction(b.linear[rows], qv[rows], fixed)

    ts = np.geomspace(1e-2, 1e-4, 9) if ts is None else np.asarray(ts)
    x0 = p.points
    growth = []
    for t in ts:
        q = perturb_config(p, v, t, w)
        growth.append([np.linalg.norm(q.points[i] - q.points[j]) - np.linalg.norm(x0[i] - x0[j])
                       for i, j in b.pairs])
    growth = np.array(growth)
    exps = np.full(len(b.pairs), np.nan)
    g = growth[:, rows]
    ok = bool(np.all(g > 0))
    if ok:
        exps[rows] = [np.polyfit(np.log(ts), np.log(col), 1)[0] for col in g.T]
        ok = bool(np.all((exps[rows] >= 1.8) & (exps[rows] <= 2.2)))
    return UnlockReport(v, w, motion, fixed, len(fixed), len(E), exps, ok, w_rot)
