"""
Criticality of MIN functions ``F(x) = min_u F_u(x)`` at the origin.

Every ``F_u`` vanishes at 0 and is known through its second-order jet
``F_u(x) = l_u(x) + q_u(x) + o(|x|^2)``.  The quadratic part is stored as a
symmetric matrix ``S_u`` with ``q_u(x) = x @ S_u @ x`` (half the Hessian).

The checks here are numerical: every rank decision is a singular-value
threshold relative to the largest singular value (:data:`RANK_RTOL`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize, nnls
from scipy.stats import qmc, norm as normal_dist

from .geom3 import DomainError

RANK_RTOL = 1e-8
RELATION_TOL = 1e-9
CERT_TOL = 1e-8
MAX_CERT_DIM = 12

CERTIFIED = "certified_max"
NOT_CERTIFIED = "not_certified"
REFUTED = "refuted"


@dataclass(frozen=True, eq=False)
class LinearQuadraticBundle:
    linear: np.ndarray
    quadratic: np.ndarray
    rotation_generators: np.ndarray | None = None
    pairs: tuple | None = None

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.linear, dtype=float))
        S = np.asarray(self.quadratic, dtype=float)
        if S.ndim == 2:
            S = S[None]
        if L.shape[0] < 1 or L.shape[1] < 1:
            raise DomainError("a bundle needs m >= 1 forms on n >= 1 variables")
        if S.shape != (L.shape[0], L.shape[1], L.shape[1]):
            raise DomainError(f"quadratic forms have shape {S.shape}, expected {(L.shape[0],) + (L.shape[1],) * 2}")
        if np.abs(S - S.transpose(0, 2, 1)).max(initial=0.0) > 1e-10 * max(1.0, np.abs(S).max(initial=0.0)):
            raise DomainError("quadratic forms must be symmetric")
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "quadratic", 0.5 * (S + S.transpose(0, 2, 1)))

    @property
    def m(self) -> int:
        return self.linear.shape[0]

    @property
    def n(self) -> int:
        return self.linear.shape[1]

    def model(self, z) -> np.ndarray:
        """Values ``l_u(z) + q_u(z)`` of the quadratic models, one per form."""
        z = np.asarray(z, dtype=float)
        return self.linear @ z + np.einsum("i,uij,j->u", z, self.quadratic, z)

    def model_min(self, z) -> float:
        return float(self.model(z).min())

    def scaled(self, c: float) -> "LinearQuadraticBundle":
        return LinearQuadraticBundle(c * self.linear, c * self.quadratic, self.rotation_generators, self.pairs)

    def subset(self, idx) -> "LinearQuadraticBundle":
        idx = list(idx)
        pairs = tuple(self.pairs[i] for i in idx) if self.pairs else None
        return LinearQuadraticBundle(self.linear[idx], self.quadratic[idx], self.rotation_generators, pairs)


def pl_differential(b: LinearQuadraticBundle, v) -> float:
    """The PL-differential ``min_u l_u(v)``."""
    return float((b.linear @ np.asarray(v, dtype=float)).min())


def _rank(A, rtol=RANK_RTOL) -> int:
    A = np.atleast_2d(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > rtol * s[0]).sum())


def _caratheodory(V, lam, tol=RELATION_TOL):
    """Prune ``lam`` until the support vectors (with a row of ones) are independent."""
    lam = lam.copy()
    while True:
        S = np.flatnonzero(lam > tol)
        A = np.vstack([V[S].T, np.ones(len(S))])
        if len(S) <= 1 or _rank(A) == len(S):
            lam[lam <= tol] = 0.0
            return lam / lam.sum()
        mu = null_space(A, rcond=RANK_RTOL)[:, 0]
        if mu.max() <= 0:
            mu = -mu
        pos = mu > tol
        ratios = lam[S][pos] / mu[pos]
        k = np.argmin(ratios)
        lam[S] = lam[S] - ratios[k] * mu
        lam[S[np.flatnonzero(pos)[k]]] = 0.0
        lam[np.abs(lam) < tol] = 0.0


def is_critical(b: LinearQuadraticBundle) -> tuple[bool, np.ndarray | None]:
    """Decide whether 0 is a critical point, i.e. the PL-differential is never positive.

    Equivalent to 0 lying in the convex hull of the gradients.  Solved as
    a non-negative least-squares problem; the witness ``lam`` sums to one
    and has Caratheodory-minimal support.
    """
    V = b.linear
    scale = np.abs(V).max()
    if scale == 0.0:
        lam = np.zeros(b.m)
        lam[0] = 1.0
        return True, lam
    Vn = V / scale
    A = np.vstack([Vn.T, np.ones(b.m)])
    rhs = np.zeros(b.n + 1)
    rhs[-1] = 1.0
    lam, res = nnls(A, rhs)
    if res > RELATION_TOL or lam.sum() <= 0:
        return False, None
    lam = _caratheodory(Vn, lam / lam.sum())
    return True, lam


def null_space_basis(b: LinearQuadraticBundle) -> np.ndarray:
    """Orthonormal rows spanning the common kernel ``E`` of all linear forms."""
    if np.abs(b.linear).max() == 0.0:
        return np.eye(b.n)
    return null_space(b.linear, rcond=RANK_RTOL).T


def quotient_by(E: np.ndarray, generators) -> np.ndarray:
    """Part of span(E) orthogonal to the given generator vectors (e.g. rotations)."""
    if generators is None or len(E) == 0:
        return E
    C = np.atleast_2d(generators) @ E.T
    if np.abs(C).max() == 0.0:
        return E
    return (null_space(C, rcond=RANK_RTOL).T @ E) if C.size else E


def null_index(b: LinearQuadraticBundle, mod_rotations: bool = False) -> int:
    E = null_space_basis(b)
    if mod_rotations:
        E = quotient_by(E, b.rotation_generators)
    return len(E)


def _rref(R, tol):
    R = R.copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + np.argmax(np.abs(R[r:, c]))
        if abs(R[p, c]) < tol:
            continue
        R[[r, p]] = R[[p, r]]
        R[r] /= R[r, c]
        for i in range(rows):
            if i != r:
                R[i] -= R[i, c] * R[r]
        pivots.append(c)
        r += 1
    R[np.abs(R) < tol] = 0.0
    return R[:r], pivots


@dataclass
class Partition:
    k: int
    relation_basis: np.ndarray
    blocks: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    positive: list = field(default_factory=list)
    extras: list = field(default_factory=list)
    conditions: dict = field(default_factory=dict)
    detected: bool = False
    message: str = ""

    @property
    def certifiable(self) -> bool:
        return self.detected and all(self.positive)


def detect_partition(b: LinearQuadraticBundle) -> Partition:
    """Split the forms into blocks carrying exactly one linear relation each.

    Blocks are the connected components of the relation matroid, read off
    from the fundamental circuits of a reduced row-echelon relation basis.
    Forms that take part in no relation are returned as ``extras``.
    """
    V = b.linear
    scale = np.abs(V).max() or 1.0
    Vn = V / scale
    if np.abs(Vn).max() == 0.0:
        R = np.eye(b.m)
    else:
        R = null_space(Vn.T, rcond=RANK_RTOL).T
    k = len(R)
    part = Partition(k=k, relation_basis=R)
    part.conditions["A"] = k > 0
    if k == 0:
        part.message = "no linear relation between the forms"
        return part

    Rr, _ = _rref(R, 1e-8)
    parent = list(range(b.m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    supports = [np.flatnonzero(row) for row in Rr]
    for sup in supports:
        for j in sup[1:]:
            parent[find(j)] = find(sup[0])
    involved = sorted(set(np.concatenate(supports).tolist()))
    part.extras = [i for i in range(b.m) if i not in involved]
    comps: dict[int, list[int]] = {}
    for i in involved:
        comps.setdefault(find(i), []).append(i)
    blocks = sorted(comps.values())

    ok_b = True
    for blk in blocks:
        sub = Vn[blk]
        rel = null_space(sub.T, rcond=RANK_RTOL).T
        if len(rel) != 1:
            ok_b = False
            part.blocks.append(blk)
            part.lambdas.append(None)
            part.positive.append(False)
            continue
        lam = rel[0]
        lam = lam / lam[np.argmax(np.abs(lam))]
        part.blocks.append(blk)
        part.lambdas.append(lam)
        part.positive.append(bool(np.all(lam > RELATION_TOL)))

    ranks = [_rank(Vn[blk]) for blk in part.blocks]
    extra_rank = _rank(Vn[part.extras]) if part.extras else 0
    additive = _rank(Vn) == sum(ranks) + extra_rank and extra_rank == len(part.extras)
    part.conditions["B"] = ok_b and additive
    part.conditions["C"] = part.conditions["B"] and all(part.positive)
    part.conditions["extras_flagged"] = bool(part.extras)
    part.detected = part.conditions["B"]
    if not ok_b:
        part.message = "some block carries more than one relation"
    elif not additive:
        part.message = "block spans intersect nontrivially"
    elif part.extras:
        part.message = f"forms {part.extras} lie outside every relation and are treated as extras"
    return part


@dataclass
class Certificate:
    status: str
    margin: float | None = None
    sup_value: float | None = None
    E_basis: np.ndarray | None = None
    Q_forms: list = field(default_factory=list)
    xi: np.ndarray | None = None
    witness_point: np.ndarray | None = None
    witness_value: float | None = None
    reason: str = ""


def _sphere_samples(d: int, count: int, seed: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    u = qmc.Halton(d=d, scramble=True, seed=seed).random(count)
    g = normal_dist.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _min_quadratic(Qs, X):
    return np.min([np.einsum("ni,ij,nj->n", X, Q, X) for Q in Qs], axis=0)


def _ascent_witness(b, part, E, Qs, xi_E):
    """Build ``z(t) = t xi + t^2 w`` on which the quadratic model is positive."""
    xi = xi_E @ E
    lin = b.linear
    qv = np.einsum("i,uij,j->u", xi, b.quadratic, xi)
    target = np.empty(b.m)
    cs = []
    for blk, lam, Q in zip(part.blocks, part.lambdas, Qs):
        c = float(xi_E @ Q @ xi_E) / lam.sum()
        cs.append(c)
        target[blk] = c - qv[blk]
    c_min = min(cs)
    if part.extras:
        target[part.extras] = c_min - qv[part.extras]
    w, *_ = np.linalg.lstsq(lin, target, rcond=None)
    for t in 10.0 ** -np.arange(0, 6, 0.5):
        z = t * xi + t * t * w
        val = b.model_min(z)
        if val > 0:
            return z, val
    return None, None


def positively_spanning(b: LinearQuadraticBundle) -> bool:
    """True if a relation with every coefficient positive exists and E is trivial mod rotations.

    Then no nonzero direction keeps all forms non-negative, so the minimum
    decays at least linearly along every ray.
    """
    if len(quotient_by(null_space_basis(b), b.rotation_generators)):
        return False
    res = linprog(np.zeros(b.m), A_eq=b.linear.T, b_eq=np.zeros(b.n),
                  bounds=[(1.0, None)] * b.m, method="highs")
    return bool(res.success)


def certify_local_max(b: LinearQuadraticBundle, samples: int = 200_000, seed: int = 42,
                      refine: int = 16) -> Certificate:
    """Check the sufficient conditions for a strict local maximum of ``min_u F_u``.

    Requires a detected partition with positive relations.  On ``E`` (the
    common kernel of the block forms) the combined forms
    ``Q_p = sum_s lambda_p^s q_s`` are sampled on the unit sphere and the
    best candidates refined by local ascent.  A strictly negative supremum
    certifies the maximum; a positive value is turned into an explicit
    point where the quadratic model is positive.
    """
    if positively_spanning(b):
        return Certificate(CERTIFIED, reason="the forms positively span the dual modulo rotations: "
                                             "every direction decays linearly")
    part = detect_partition(b)
    if not part.certifiable:
        why = part.message or "relations are not strictly convex"
        return Certificate(NOT_CERTIFIED, reason=f"structure not detected: {why}")
    block_idx = sorted(i for blk in part.blocks for i in blk)
    E = null_space(b.linear[block_idx], rcond=RANK_RTOL).T
    if not np.abs(b.linear[block_idx]).any():
        E = np.eye(b.n)
    # rotations leave every form invariant; certify on the transversal slice
    E = quotient_by(E, b.rotation_generators)
    d = len(E)
    if d > MAX_CERT_DIM:
        raise DomainError(f"dim E = {d} exceeds {MAX_CERT_DIM}; sphere sampling would not be exhaustive")
    Qfull = [np.einsum("s,sij->ij", lam, b.quadratic[blk]) for blk, lam in zip(part.blocks, part.lambdas)]
    Qs = [E @ Q @ E.T for Q in Qfull]
    if d == 0:
        return Certificate(CERTIFIED, margin=None, E_basis=E, Q_forms=Qs,
                           reason="E is trivial: every direction decays linearly")
    scale = max(np.linalg.norm(Q, 2) for Q in Qfull) or 1.0
    tol = CERT_TOL * scale

    X = _sphere_samples(d, samples, seed)
    M = _min_quadratic(Qs, X)
    order = np.argsort(M)[::-1][:refine]
    best_val, best_x = M[order[0]], X[order[0]]
    if d > 1:
        for i in order:
            res = minimize(lambda y: -_min_quadratic(Qs, (y / np.linalg.norm(y))[None])[0],
                           X[i], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000 * d})
            y = res.x / np.linalg.norm(res.x)
            v = _min_quadratic(Qs, y[None])[0]
            if v > best_val:
                best_val, best_x = v, y

    cert = Certificate(NOT_CERTIFIED, margin=float(-best_val), sup_value=float(best_val),
                       E_basis=E, Q_forms=Qs, xi=best_x @ E)
    if best_val < -tol:
        cert.status = CERTIFIED
        cert.reason = "min of combined forms is negative on the unit sphere of E"
    elif best_val > tol:
        z, val = _ascent_witness(b, part, E, Qs, best_x)
        if z is not None:
            cert.status = REFUTED
            cert.witness_point, cert.witness_value = z, val
            cert.reason = "quadratic model is positive at the witness point"
        else:
            cert.reason = "positive combined form found but no verified ascent point"
    else:
        cert.reason = "supremum within tolerance of zero"
    return cert


def k1_negative_definite(b: LinearQuadraticBundle) -> bool:
    """For a single relation: is ``sum_u lambda_u q_u`` negative definite on ``E``?"""
    part = detect_partition(b)
    if not part.detected or len(part.blocks) != 1:
        raise DomainError(f"requires exactly one relation block, found {len(part.blocks)}")
    blk, lam = part.blocks[0], part.lambdas[0]
    if np.abs(b.linear[blk]).any():
        E = null_space(b.linear[blk], rcond=RANK_RTOL).T
    else:
        E = np.eye(b.n)
    E = quotient_by(E, b.rotation_generators)
    if len(E) == 0:
        return True
    Q = E @ np.einsum("s,sij->ij", lam, b.quadratic[blk]) @ E.T
    scale = max(np.linalg.norm(b.quadratic[blk], axis=(1, 2)).max(), 1e-300)
    return bool(np.linalg.eigvalsh(Q).max() < -CERT_TOL * scale)


# ---------------------------------------------------------------- bundles

FD_STEP = 1e-4
# active pairs closer to parallel than this have no usable jet
PARALLEL_JET_SINE = 1e-3


def _richardson_jet(f: Callable, n: int, h: float = FD_STEP):
    """Gradient and Hessian of ``f`` at 0 by central differences plus one Richardson step."""
    f0 = f(np.zeros(n))
    I = np.eye(n)

    def jet(step):
        g = np.empty(n)
        H = np.empty((n, n))
        fp = np.array([f(step * I[i]) for i in range(n)])
        fm = np.array([f(-step * I[i]) for i in range(n)])
        g[:] = (fp - fm) / (2 * step)
        H[np.diag_indices(n)] = (fp - 2 * f0 + fm) / step ** 2
        for i in range(n):
            for j in range(i + 1, n):
                a = f(step * (I[i] + I[j])) - f(step * (I[i] - I[j]))
                a -= f(step * (I[j] - I[i])) - f(-step * (I[i] + I[j]))
                H[i, j] = H[j, i] = a / (4 * step ** 2)
        return g, H

    g1, H1 = jet(h)
    g2, H2 = jet(h / 2)
    return (4 * g2 - g1) / 3, (4 * H2 - H1) / 3


def line_pair_jet(c, i: int, j: int, base: float, h: float = FD_STEP):
    """Jet of ``d_ij - base`` in the six chart coordinates of lines ``i`` and ``j``."""
    from .geom3 import chart_to_vectors, line_distance_vectors

    z = c.chart_vector().reshape(-1, 3)
    zi, zj = z[i], z[j]

    def f(y):
        xi, ti = chart_to_vectors(*(zi + y[:3]))
        xj, tj = chart_to_vectors(*(zj + y[3:]))
        return float(line_distance_vectors(xi, ti, xj, tj)) - base

    return _richardson_jet(f, 6, h)


def bundle_from_line_cluster(c, tol: float = 1e-6, h: float = FD_STEP) -> LinearQuadraticBundle:
    """Jets of the active pairwise distances of a line cluster in the ``(phi, kappa, alpha)`` chart.

    The cluster must be pole-free (see :func:`cyl_clusters.off_pole`).
    """
    from .cyl_clusters import contact_graph, rotation_generators

    g = contact_graph(c, tol)
    if g.value <= 1e-9:
        raise DomainError("intersecting lines: the distance is not smooth there")
    for i, j in g.edges:
        if np.linalg.norm(np.cross(c.directions[i], c.directions[j])) < PARALLEL_JET_SINE:
            raise DomainError(f"lines {i} and {j} are parallel: the distance is not continuous there")
    n = 3 * len(c)
    pairs = g.sorted_edges()
    L = np.zeros((len(pairs), n))
    S = np.zeros((len(pairs), n, n))
    for u, (i, j) in enumerate(pairs):
        grad, H = line_pair_jet(c, i, j, g.value, h)
        idx = np.r_[3 * i:3 * i + 3, 3 * j:3 * j + 3]
        L[u, idx] = grad
        S[u][np.ix_(idx, idx)] = H / 2
    return LinearQuadraticBundle(L, S, rotation_generators(c), tuple(pairs))


def tangent_frames(points) -> np.ndarray:
    """Orthonormal tangent frames ``(e1, e2)`` at unit vectors; shape (n, 2, 3)."""
    x = np.asarray(points, dtype=float)
    frames = np.empty((len(x), 2, 3))
    for k, p in enumerate(x):
        a = np.eye(3)[np.argmin(np.abs(p))]
        e1 = np.cross(p, a)
        e1 /= np.linalg.norm(e1)
        frames[k] = e1, np.cross(p, e1)
    return frames


def ball_chart_points(points, frames, y) -> np.ndarray:
    """Points ``normalize(x_i + a_i e1_i + b_i e2_i)`` for the chart vector ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1, 2)
    p = points + y[:, :1] * frames[:, 0] + y[:, 1:] * frames[:, 1]
    return p / np.linalg.norm(p, axis=1, keepdims=True)


def ball_rotation_generators(points, frames) -> np.ndarray:
    gens = []
    for w in np.eye(3):
        v = np.cross(w, points)
        gens.append(np.einsum("ni,nki->nk", v, frames).ravel())
    return np.array(gens)


def bundle_from_ball_config(p, tol: float = 1e-9, h: float = FD_STEP) -> LinearQuadraticBundle:
    """Jets of the active chordal distances of a ball configuration.

    Chart per point: ``(a, b)`` in an orthonormal tangent frame.  Linear
    parts are exact; quadratic parts by Richardson-extrapolated differences.
    """
    x = np.asarray(p.points, dtype=float)
    frames = tangent_frames(x)
    d = np.linalg.norm(x[:, None] - x[None], axis=-1)
    iu = np.triu_indices(len(x), 1)
    dmin = d[iu].min()
    pairs = [(int(i), int(j)) for i, j in zip(*iu) if d[i, j] <= dmin + tol]
    n = 2 * len(x)
    L = np.zeros((len(pairs), n))
    S = np.zeros((len(pairs), n, n))
    for u, (i, j) in enumerate(pairs):
        e = (x[i] - x[j]) / d[i, j]
        L[u, 2 * i:2 * i + 2] = frames[i] @ e
        L[u, 2 * j:2 * j + 2] = -(frames[j] @ e)

        def f(y, i=i, j=j):
            pi = ball_chart_points(x[i:i + 1], frames[i:i + 1], y[:2])[0]
            pj = ball_chart_points(x[j:j + 1], frames[j:j + 1], y[2:])[0]
            return np.linalg.norm(pi - pj) - dmin

        _, H = _richardson_jet(f, 4, h)
        idx = np.r_[2 * i:2 * i + 2, 2 * j:2 * j + 2]
        S[u][np.ix_(idx, idx)] = H / 2
    return LinearQuadraticBundle(L, S, ball_rotation_generators(x, frames), tuple(pairs))


@dataclass
class CriticalityReport:
    is_critical: bool
    lam: np.ndarray | None
    relation_basis: np.ndarray
    k: int
    partition: list
    lambda_positive: list
    extras: list
    E_basis: np.ndarray
    null_index: int
    null_index_mod_so3: int | None
    certificate: Certificate
    inconclusive: bool
    message: str = ""

    def to_dict(self) -> dict:
        c = self.certificate
        return {
            "is_critical": self.is_critical,
            "lambda": None if self.lam is None else self.lam.tolist(),
            "k": self.k,
            "partition": self.partition,
            "lambda_positive": self.lambda_positive,
            "extras": self.extras,
            "null_index": self.null_index,
            "null_index_mod_so3": self.null_index_mod_so3,
            "certificate": c.status,
            "margin": c.margin,
            "certificate_reason": c.reason,
            "witness_point": None if c.witness_point is None else c.witness_point.tolist(),
            "witness_value": c.witness_value,
            "inconclusive": self.inconclusive,
            "message": self.message,
        }


def analyze(b: LinearQuadraticBundle, samples: int = 200_000, seed: int = 42) -> CriticalityReport:
    """Full criticality analysis of a bundle."""
    crit, lam = is_critical(b)
    E = null_space_basis(b)
    mod = len(quotient_by(E, b.rotation_generators)) if b.rotation_generators is not None else None
    part = detect_partition(b)
    if crit:
        try:
            cert = certify_local_max(b, samples=samples, seed=seed)
        except DomainError as exc:
            cert = Certificate(NOT_CERTIFIED, reason=str(exc))
    else:
        cert = Certificate(NOT_CERTIFIED, reason="not a critical point")
    return CriticalityReport(
        is_critical=crit,
        lam=lam,
        relation_basis=part.relation_basis,
        k=part.k,
        partition=[list(map(int, blk)) for blk in part.blocks],
        lambda_positive=list(part.positive),
        extras=list(part.extras),
        E_basis=E,
        null_index=len(E),
        null_index_mod_so3=mod,
        certificate=cert,
        inconclusive=crit and not part.certifiable,
        message=part.message,
    )
