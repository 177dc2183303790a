"""
Derivative-free ascent of ``D`` and random perturbation probes.

``D`` is a minimum of smooth functions.  The ascent is a pattern search
with shrinking steps: each iteration polls many directions in one batch and
adds one search point from a linear program over the linearized pair distances,
which is what gets it across kinks quickly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .cyl_clusters import LineCluster, min_distance, off_pole, perturb, rotation_generators
from .geom3 import POLE_MARGIN, DomainError, chart_to_vectors, line_distance_vectors

DEFAULT_SEED = 42
INITIAL_STEP = 0.1
SHRINK = 0.5
MIN_STEP = 1e-9
FLAT_TOL = 1e-12
# re-rotate the full-chart ascent once a touch point comes this close to a pole
CHART_SLACK = 0.2


@dataclass
class AscentResult:
    argmax: np.ndarray | LineCluster
    value: float
    trace: list = field(default_factory=list)  # (evaluations, value, step) after each accepted move
    evaluations: int = 0
    converged: bool = True
    flat_polls: int = 0
    restarts: int = 0


def chart_pair_distances(Z) -> np.ndarray:
    """All pair distances for rows of flattened charts ``Z`` of shape (N, 3L); shape (N, L(L-1)/2).

    Rows with a touch point within the pole margin get ``-inf`` everywhere.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    L = Z.shape[1] // 3
    z = Z.reshape(len(Z), L, 3)
    x, t = chart_to_vectors(z[..., 0], z[..., 1], z[..., 2])
    i, j = np.triu_indices(L, 1)
    d = line_distance_vectors(x[:, i], t[:, i], x[:, j], t[:, j])
    bad = np.any(np.abs(z[..., 0]) >= np.pi / 2 - POLE_MARGIN, axis=1)
    d[bad] = -np.inf
    return d


def _family_charts(Z) -> np.ndarray:
    """Flattened charts of C6(phi, delta, kappa), lines ordered A, D, B, E, C, F."""
    phi, delta, kappa = np.atleast_2d(np.asarray(Z, dtype=float)).T[:, :, None]
    sign = np.array([1, -1, 1, -1, 1, -1])
    base = np.array([1, 3, 5, 7, 9, 11]) * np.pi / 6
    lat = phi * sign
    return np.stack([lat, base - kappa * sign, np.broadcast_to(delta, lat.shape)], axis=-1).reshape(len(lat), 18)


def family_pair_distances(Z) -> np.ndarray:
    """The 15 pair distances of C6(phi, delta, kappa) for every row of ``Z``."""
    return chart_pair_distances(_family_charts(Z))


def family_values(Z) -> np.ndarray:
    """``D`` of C6(phi, delta, kappa) for every row of ``Z`` (vectorized)."""
    return family_pair_distances(Z).min(axis=1)


def _lp_search(pairs: Callable, z, B, step, h=1e-7):
    """Search point ``z + B y`` from linear models of the pair distances.

    Maximizes the smallest linearized distance over the box ``|y| <= step``.
    """
    d0 = pairs(z)[0]
    if not np.all(np.isfinite(d0)):
        return None
    k = B.shape[1]
    E = np.vstack([B.T, -B.T]) * h
    fd = pairs(z + E)
    if not np.all(np.isfinite(fd)):
        return None
    G = ((fd[:k] - fd[k:]) / (2 * h)).T
    res = linprog(np.r_[np.zeros(k), -1.0], A_ub=np.hstack([-G, np.ones((len(G), 1))]), b_ub=d0,
                  bounds=[(-step, step)] * k + [(None, None)], method="highs")
    return z + B @ res.x[:k] if res.success else None


def _ascend(pairs: Callable, z, basis: Callable, rng, budget, poll_size, recenter=None):
    """Shared loop of :func:`ascend_family` and :func:`ascend_full`."""
    f = float(pairs(z).min())
    evals, step, flat, restarts = 1, INITIAL_STEP, 0, 0
    trace = [(evals, f, step)]
    while step >= MIN_STEP:
        if evals >= budget:
            return z, f, trace, evals, False, flat, restarts
        if recenter is not None:
            z2 = recenter(z)
            if z2 is not None:
                z, restarts = z2, restarts + 1
        B = basis(z)
        R = rng.normal(size=(poll_size, B.shape[1]))
        Q, _ = np.linalg.qr(rng.normal(size=(B.shape[1], B.shape[1])))
        dirs = np.vstack([Q, R / np.linalg.norm(R, axis=1, keepdims=True)]) @ B.T
        cand = z + step * np.vstack([dirs, -dirs])
        trial = _lp_search(pairs, z, B, step)
        if trial is not None:
            cand = np.vstack([trial, cand])
        vals = pairs(cand).min(axis=1)
        evals += len(cand) + 2 * B.shape[1] + 1
        flat += int(np.sum(np.abs(vals - f) <= FLAT_TOL))
        k = int(np.argmax(vals))
        if vals[k] > f:
            z, f = cand[k], float(vals[k])
            step = min(2 * step, INITIAL_STEP)
            trace.append((evals, f, step))
        else:
            step *= SHRINK
    return z, f, trace, evals, True, flat, restarts


def ascend_family(start=(0.1, 0.1, -0.05), budget: int = 100_000_000, seed: int = DEFAULT_SEED,
                  poll_size: int = 2048) -> AscentResult:
    """Maximize ``D`` over the three-parameter family C6(phi, delta, kappa).

    Each poll tries a random orthonormal frame and ``poll_size`` fresh seeded
    random unit directions in both senses.  The wide poll finds the narrow
    escape cone at the saddle C6(0, 0, 0).  A failed poll halves the step; a
    successful one doubles it (capped at the initial step).  The search stops
    below :data:`MIN_STEP`.
    """
    rng = np.random.default_rng(seed)
    z, f, trace, evals, ok, flat, _ = _ascend(
        family_pair_distances, np.asarray(start, dtype=float), lambda z: np.eye(3),
        rng, budget, poll_size)
    return AscentResult(z, f, trace, evals, ok, flat)


def _rotation_complement(c: LineCluster) -> np.ndarray:
    """Orthonormal basis (columns) of the chart directions orthogonal to rotations."""
    return null_space(rotation_generators(c))


def ascend_full(start: LineCluster, budget: int = 1_000_000, seed: int = DEFAULT_SEED,
                poll_size: int = 256) -> AscentResult:
    """Pattern search over the full chart of ``L`` lines, never moving along rotations.

    Poll and search directions are drawn from the orthogonal complement of
    the rotation generators at the current cluster.  When a touch point comes
    near a pole the cluster is rotated away from it and the search goes on
    in the new chart.
    """
    if min_distance(start) <= 0:
        raise DomainError("ascent needs a cluster with D > 0")
    rng = np.random.default_rng(seed)
    names, label = start.names, start.label
    c0 = off_pole(start, CHART_SLACK)

    def as_cluster(z):
        return LineCluster.from_chart_vector(z, label, names)

    def recenter(z):
        if np.abs(z[0::3]).max() < np.pi / 2 - CHART_SLACK:
            return None
        return off_pole(as_cluster(z), 2 * CHART_SLACK).chart_vector()

    z, f, trace, evals, ok, flat, restarts = _ascend(
        chart_pair_distances, c0.chart_vector(), lambda z: _rotation_complement(as_cluster(z)),
        rng, budget, poll_size, recenter)
    return AscentResult(as_cluster(z), f, trace, evals, ok, flat, restarts)


@dataclass
class ProbeResult:
    base_value: float
    max_value: float
    quartiles: np.ndarray
    values: np.ndarray = field(repr=False)

    def count_above(self, level: float) -> int:
        return int(np.sum(self.values > level))


def random_free_directions(c: LineCluster, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Seeded random unit chart vectors orthogonal to the rotation generators."""
    B = _rotation_complement(c)
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(count, B.shape[1])) @ B.T
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def perturbation_probe(c: LineCluster, N: int = 10_000, t: float = 1e-3,
                       seed: int = DEFAULT_SEED) -> ProbeResult:
    """Evaluate ``D`` at ``N`` random chart perturbations of size ``t``.

    Straight chart rays only: a cluster can beat every ray and still fail to
    be a local maximum (see :func:`min_morse.certify_local_max` for a
    certificate).  Clusters touching at a pole are rotated first.
    """
    if t <= 0:
        raise DomainError("probe radius must be positive")
    c = off_pole(c)
    V = random_free_directions(c, N, seed)
    z0 = c.chart_vector()
    vals = np.concatenate([chart_pair_distances(z0 + t * V[k:k + 4096]).min(axis=1)
                           for k in range(0, N, 4096)])
    return ProbeResult(min_distance(c), float(vals.max()),
                       np.quantile(vals, [0.25, 0.5, 0.75]), vals)


@dataclass
class DecayScan:
    exponent: float
    decays: np.ndarray
    ts: np.ndarray
    refuted: bool


def decay_order_scan(c: LineCluster, v, t_grid=None) -> DecayScan:
    """Log-log slope of ``D(c) - D(perturb(c, v, t))`` against ``t``.

    A non-positive decay at some ``t`` means ``D`` does not drop along ``v``;
    the scan then reports ``refuted`` and a NaN slope.
    """
    ts = np.geomspace(1e-2, 1e-4, 9) if t_grid is None else np.asarray(t_grid, dtype=float)
    v = np.asarray(v, dtype=float)
    base = min_distance(c)
    dec = np.array([base - min_distance(perturb(c, v, t)) for t in ts])
    if np.any(dec <= 0):
        return DecayScan(float("nan"), dec, ts, True)
    return DecayScan(float(np.polyfit(np.log(ts), np.log(dec), 1)[0]), dec, ts, False)


def gamma_parameters(xs) -> np.ndarray:
    """Rows ``(phi, delta, kappa)`` of the curve gamma at each ``x`` in (0, 1] (vectorized)."""
    x = np.asarray(xs, dtype=float)
    if np.any((x <= 0) | (x > 1)):
        raise DomainError("gamma is defined for 0 < x <= 1")
    q = 1 + 7 * x + 4 * x * x
    phi = np.arcsin(np.minimum(1.0, 2 * np.sqrt((1 - x) * x * (1 + x) / q)))
    delta = np.arctan(np.sqrt((1 - x) * (1 + 3 * x) / (x * q)))
    kappa = np.arctan((x - 1) / np.sqrt((1 + x) * (1 + 3 * x)))
    return np.column_stack([phi, delta, kappa])


def gamma_profile(xs) -> np.ndarray:
    """``D`` along gamma at every ``x``."""
    return family_values(gamma_parameters(xs))
