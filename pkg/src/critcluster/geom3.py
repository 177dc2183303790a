"""
Euclidean and spherical geometry on the unit sphere.

Points on the sphere are written in latitude/longitude ``(phi, kappa)``;
Greenwich (``kappa = 0``) is the meridian in the xz-plane with positive x.
A tangent line is stored by its touch point and a unit direction in R^3;
the chart ``(phi, kappa, alpha)`` rotates the north-pointing tangent by
``alpha`` about the radius through the touch point.  The vector form is
pole-safe, the chart is not.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POLE_MARGIN = 1e-6
# The chart angle alpha turns the north tangent clockwise seen from outside the
# sphere.  With this sense C6(phi, delta, kappa) on the curve gamma reaches
# D = sqrt(12/11); the opposite sense does not.
ALPHA_SENSE = -1.0
# sine of the angle between two directions below which lines count as parallel
PARALLEL_SINE = 1e-9


class DomainError(ValueError):
    """Argument outside the domain of a formula."""


class ChartError(DomainError):
    """Touch point too close to a pole for the (phi, kappa, alpha) chart."""


def embed(phi, kappa):
    """Unit vector(s) at latitude ``phi`` and longitude ``kappa``."""
    phi = np.asarray(phi, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    c = np.cos(phi)
    return np.stack([c * np.cos(kappa), c * np.sin(kappa), np.sin(phi)], axis=-1)


def north_vector(phi, kappa):
    """Unit tangent pointing north at ``(phi, kappa)``."""
    phi = np.asarray(phi, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    s = np.sin(phi)
    return np.stack([-s * np.cos(kappa), -s * np.sin(kappa), np.cos(phi)], axis=-1)


def latlon(x):
    """Inverse of :func:`embed` for (arrays of) unit vectors."""
    x = np.asarray(x, dtype=float)
    phi = np.arcsin(np.clip(x[..., 2], -1.0, 1.0))
    kappa = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * np.pi)
    return phi, kappa


def rotation_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues matrix of the counterclockwise rotation about ``axis``."""
    k = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(k) - 1.0) > 1e-9:
        raise DomainError(f"rotation axis must be a unit vector, got norm {np.linalg.norm(k)}")
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotate_about_axis(axis, angle: float, v) -> np.ndarray:
    """Rotate ``v`` by ``angle`` about the unit ``axis`` (counterclockwise seen from its tip)."""
    return rotation_matrix(axis, angle) @ np.asarray(v, dtype=float)


def rotate_about_radii(x, v, angle):
    """Row-wise Rodrigues rotation of tangent vectors ``v`` about unit radii ``x``.

    Assumes ``v`` is orthogonal to ``x`` row by row, which makes the
    ``(1 - cos)`` term vanish.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    angle = np.asarray(angle, dtype=float)[..., None]
    return np.cos(angle) * v + np.sin(angle) * np.cross(x, v)


def chart_to_vectors(phi, kappa, alpha):
    """Touch points and directions for arrays of chart coordinates."""
    x = embed(phi, kappa)
    up = north_vector(phi, kappa)
    return x, rotate_about_radii(x, up, ALPHA_SENSE * np.asarray(alpha, dtype=float))


def chart_from_vectors(x, tau):
    """Chart coordinates ``(phi, kappa, alpha)`` with ``alpha`` in [0, pi).

    Raises :class:`ChartError` if any touch point is within
    :data:`POLE_MARGIN` of a pole.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    phi, kappa = latlon(x)
    if np.any(np.abs(phi) > np.pi / 2 - POLE_MARGIN):
        raise ChartError("touch point at a pole; the north-pointing tangent is undefined")
    up = north_vector(phi, kappa)
    east = np.cross(x, up)
    alpha = ALPHA_SENSE * np.arctan2(np.einsum("ij,ij->i", tau, east), np.einsum("ij,ij->i", tau, up))
    alpha = np.mod(alpha, np.pi)
    # mod of a tiny negative angle rounds up to pi itself
    return phi, kappa, np.where(alpha >= np.pi, 0.0, alpha)


@dataclass(frozen=True)
class SpherePoint:
    phi: float
    kappa: float

    def embed(self) -> np.ndarray:
        return embed(self.phi, self.kappa)


@dataclass(frozen=True, eq=False)
class TangentLine:
    """Unoriented line tangent to the unit sphere.

    Use :meth:`from_chart` or the pole-safe :meth:`from_vectors` rather
    than the raw constructor.
    """

    point: np.ndarray
    direction: np.ndarray

    @classmethod
    def from_chart(cls, phi: float, kappa: float, alpha: float = 0.0) -> "TangentLine":
        if abs(phi) >= np.pi / 2 - POLE_MARGIN:
            raise ChartError(f"latitude {phi} too close to a pole")
        x, tau = chart_to_vectors(phi, kappa, alpha)
        return cls(x, tau)

    @classmethod
    def from_vectors(cls, point, direction) -> "TangentLine":
        x = np.asarray(point, dtype=float)
        x = x / np.linalg.norm(x)
        t = np.asarray(direction, dtype=float)
        t = t - np.dot(t, x) * x
        nt = np.linalg.norm(t)
        if nt < 1e-12:
            raise DomainError("direction is parallel to the radius; not a tangent line")
        return cls(x, t / nt)

    @property
    def chart(self) -> tuple[float, float, float]:
        phi, kappa, alpha = chart_from_vectors(self.point, self.direction)
        return float(phi[0]), float(kappa[0]), float(alpha[0])

    @property
    def sphere_point(self) -> SpherePoint:
        phi, kappa = latlon(self.point)
        return SpherePoint(float(phi), float(kappa))

    def rotated(self, R: np.ndarray) -> "TangentLine":
        return TangentLine(R @ self.point, R @ self.direction)

    def same_line(self, other: "TangentLine", tol: float = 1e-9) -> bool:
        if np.linalg.norm(self.point - other.point) > tol:
            return False
        return abs(abs(np.dot(self.direction, other.direction)) - 1.0) < tol

    def __repr__(self) -> str:
        p = np.array2string(self.point, precision=6)
        t = np.array2string(self.direction, precision=6)
        return f"TangentLine(point={p}, direction={t})"


def line_direction(line: TangentLine) -> np.ndarray:
    """Unit direction of ``line``: north tangent turned by the chart angle about the radius."""
    return line.direction


def _distances(x1, t1, x2, t2):
    w = x2 - x1
    n = np.cross(t1, t2)
    s = np.linalg.norm(n, axis=-1)
    par = s < PARALLEL_SINE
    safe = np.where(par, 1.0, s)
    skew = np.abs(np.einsum("...i,...i->...", w, n)) / safe
    wperp = w - np.einsum("...i,...i->...", w, t1)[..., None] * t1
    return np.where(par, np.linalg.norm(wperp, axis=-1), skew)


def line_distance_vectors(x1, t1, x2, t2):
    """Distance between lines ``x1 + s t1`` and ``x2 + t t2`` (broadcasts over leading axes)."""
    return _distances(np.asarray(x1, float), np.asarray(t1, float),
                      np.asarray(x2, float), np.asarray(t2, float))


def line_distance(u: TangentLine, v: TangentLine) -> float:
    """Euclidean distance between two tangent lines."""
    return float(_distances(u.point, u.direction, v.point, v.direction))


def pairwise_line_distances(points, directions) -> np.ndarray:
    """Symmetric matrix of distances between all lines; zero diagonal."""
    x = np.asarray(points, dtype=float)
    t = np.asarray(directions, dtype=float)
    d = _distances(x[:, None, :], t[:, None, :], x[None, :, :], t[None, :, :])
    np.fill_diagonal(d, 0.0)
    return d


def closest_points(x1, t1, x2, t2):
    """Feet of the common perpendicular of two non-parallel lines."""
    w = x2 - x1
    b = np.dot(t1, t2)
    den = 1.0 - b * b
    if den < PARALLEL_SINE ** 2:
        raise DomainError("parallel lines have no unique closest pair")
    c, e = np.dot(t1, w), np.dot(t2, w)
    s = (c - b * e) / den
    t = (b * c - e) / den
    return x1 + s * t1, x2 + t * t2


def cyl_radius_from_distance(d: float) -> float:
    """Radius of touching cylinders whose axes are tangent lines at distance ``d``."""
    if not 0.0 <= d < 2.0:
        raise DomainError(f"need 0 <= d < 2, got {d}")
    return d / (2.0 - d)


def distance_from_radius(r: float) -> float:
    """Axis distance of two touching cylinders of radius ``r`` around the unit ball."""
    if r < 0:
        raise DomainError(f"radius must be non-negative, got {r}")
    return 2.0 * r / (1.0 + r)


def ball_radius_from_angle(theta: float) -> float:
    """Radius of two equal balls touching each other and the unit ball.

    ``theta`` is the central angle between the two touch points.
    """
    if not 0.0 < theta <= np.pi:
        raise DomainError(f"need 0 < theta <= pi, got {theta}")
    s = np.sin(theta / 2.0)
    if s >= 1.0:
        raise DomainError("antipodal touch points admit no finite radius")
    return float(s / (1.0 - s))


def angle_from_chord(chord: float) -> float:
    """Central angle subtended by a chord of the unit sphere."""
    return 2.0 * float(np.arcsin(np.clip(chord / 2.0, 0.0, 1.0)))
