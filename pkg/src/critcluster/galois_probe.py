"""
Numerical evidence for the hidden Galois symmetry along the curve gamma.

Along gamma(x) with rational ``x``, the Taylor coefficients of squared line
distances under normalized delta-perturbations lie in ``Q[p_x]``.  The
relabeling ``sigma = (B,C)(D,F)`` together with ``p_x -> -p_x`` maps the
coefficient table to itself, while ``sigma`` alone does not.

Coefficients are computed with mpmath at high precision and recognized by
integer-relation detection (PSLQ); their denominators grow quickly with the
order (at ``x = 1/2`` they reach ``11^3 13^3``), far past what double
precision can separate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import mpmath
import numpy as np

from .cyl_clusters import C6_LINE_NAMES, c6_configuration, gamma
from .geom3 import ALPHA_SENSE, DomainError

RECOVER_TOL = 1e-12
DEFAULT_DPS = 40
# sigma swaps B<->C and D<->F; A and E stay
SIGMA = {"A": "A", "B": "C", "C": "B", "D": "F", "E": "E", "F": "D"}
# (order in the first line, order in the second line); the constant term first
MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def _radicand(x) -> Fraction:
    x = Fraction(x).limit_denominator(10**12)
    return (1 + x) * (1 + 3 * x) / 3


def _is_square(f: Fraction) -> bool:
    n, d = f.numerator, f.denominator
    return n >= 0 and isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def p_x(x) -> float:
    """``sqrt((1 + x)(1 + 3x) / 3)``."""
    if not 0 < float(x) <= 1:
        raise DomainError(f"need 0 < x <= 1, got {x}")
    return float(np.sqrt((1 + float(x)) * (1 + 3 * float(x)) / 3))


def p_x_is_rational(x) -> bool:
    """Exact perfect-square test of the radicand for rational ``x``."""
    return _is_square(_radicand(x))


def theta_delta(x) -> float:
    """Normalization factor of the delta-perturbations."""
    x = float(x)
    if not 0 < x < 1:
        raise DomainError(f"theta_delta has poles at x = 0 and x = 1, got {x}")
    return float(np.sqrt((1 + x) / (3 * x * (1 - x) * (1 + 7 * x + 4 * x * x))))


@dataclass(frozen=True)
class QuadraticFieldElement:
    """The number ``a + b p`` with rational ``a`` and ``b``."""

    a: Fraction
    b: Fraction
    p: float

    @property
    def value(self) -> float:
        return float(self.a) + float(self.b) * self.p

    def conjugate(self) -> "QuadraticFieldElement":
        return QuadraticFieldElement(self.a, -self.b, self.p)

    def __neg__(self) -> "QuadraticFieldElement":
        return QuadraticFieldElement(-self.a, -self.b, self.p)

    def matches(self, other: "QuadraticFieldElement") -> bool:
        return self.a == other.a and self.b == other.b


def rational_recover(c: float, p: float, den_bound: int, tol: float = RECOVER_TOL,
                     b_window: int = 10) -> QuadraticFieldElement | None:
    """Smallest common denominator ``r <= den_bound`` with ``c = (m + q p) / r``.

    For each ``r`` the integers ``|q| <= b_window r`` are scanned and a fit is
    accepted if ``c r - q p`` is within ``tol r`` of an integer ``m``.
    """
    for r in range(1, den_bound + 1):
        q = np.arange(-b_window * r, b_window * r + 1)
        y = c * r - q * p
        err = np.abs(y - np.round(y))
        hit = np.flatnonzero(err < tol * r)
        if len(hit):
            k = hit[np.argmin(err[hit])]
            return QuadraticFieldElement(Fraction(int(round(y[k])), r), Fraction(int(q[k]), r), p)
    return None


# ------------------------------------------------------------ high precision

def _mp_curve(x):
    x = mpmath.mpf(x)
    q = 1 + 7 * x + 4 * x * x
    phi = mpmath.asin(2 * mpmath.sqrt((1 - x) * x * (1 + x) / q))
    delta = mpmath.atan(mpmath.sqrt((1 - x) * (1 + 3 * x) / (x * q)))
    kappa = mpmath.atan((x - 1) / mpmath.sqrt((1 + x) * (1 + 3 * x)))
    return phi, delta, kappa


def _mp_c6_charts(phi, kappa):
    pi = mpmath.pi
    lat = [phi, -phi, phi, -phi, phi, -phi]
    lon = [pi / 6 - kappa, pi / 2 + kappa, 5 * pi / 6 - kappa,
           7 * pi / 6 + kappa, 3 * pi / 2 - kappa, 11 * pi / 6 + kappa]
    return lat, lon


def _mp_line(phi, kappa, alpha):
    cp, sp, ck, sk = mpmath.cos(phi), mpmath.sin(phi), mpmath.cos(kappa), mpmath.sin(kappa)
    x = [cp * ck, cp * sk, sp]
    up = [-sp * ck, -sp * sk, cp]
    east = _cross(x, up)
    a = ALPHA_SENSE * alpha
    t = [mpmath.cos(a) * u + mpmath.sin(a) * e for u, e in zip(up, east)]
    return x, t


def _cross(u, v):
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def _mp_sq_distance(x1, t1, x2, t2):
    n = _cross(t1, t2)
    w = [b - a for a, b in zip(x1, x2)]
    return sum(a * b for a, b in zip(w, n)) ** 2 / sum(a * a for a in n)


def taylor_table(x, dps: int = DEFAULT_DPS) -> dict:
    """Taylor coefficients of squared distances under normalized delta-perturbations.

    Keys are ``(I, J, k, l)`` with line names ``I`` before ``J`` in the
    A, D, B, E, C, F order and ``(k, l)`` the orders in ``I_delta``, ``J_delta``.
    """
    with mpmath.workdps(dps):
        xm = mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator
        phi, delta, kappa = _mp_curve(xm)
        theta = mpmath.sqrt((1 + xm) / (3 * xm * (1 - xm) * (1 + 7 * xm + 4 * xm * xm)))
        lat, lon = _mp_c6_charts(phi, kappa)
        table = {}
        for i, j in itertools.combinations(range(6), 2):
            def f(a, b, i=i, j=j):
                xi, ti = _mp_line(lat[i], lon[i], delta + theta * a)
                xj, tj = _mp_line(lat[j], lon[j], delta + theta * b)
                return _mp_sq_distance(xi, ti, xj, tj)
            for k, l in MONOMIALS:
                c = mpmath.diff(f, (0, 0), (k, l)) / (mpmath.factorial(k) * mpmath.factorial(l))
                table[(C6_LINE_NAMES[i], C6_LINE_NAMES[j], k, l)] = c
        return table


def recover_mp(c, x, den_bound: int, dps: int = DEFAULT_DPS) -> QuadraticFieldElement | None:
    """Integer-relation fit ``r c = m + q p_x`` with ``0 < r <= den_bound``."""
    with mpmath.workdps(dps):
        xm = mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator
        p = mpmath.sqrt((1 + xm) * (1 + 3 * xm) / 3)
        rel = mpmath.pslq([c, 1, p], maxcoeff=max(den_bound, 10) * 10**3, maxsteps=10**5)
        if rel is None or rel[0] == 0 or abs(rel[0]) > den_bound:
            return None
        r, m, q = rel
        fit = QuadraticFieldElement(Fraction(-m, r), Fraction(-q, r), float(p))
        if abs(c - (mpmath.mpf(-m) - q * p) / r) > mpmath.mpf(10) ** (-(dps - 8)):
            return None
        return fit


@dataclass
class GaloisReport:
    x: Fraction
    p: float
    theta: float
    den_bound: int
    entries: int
    failures: list = field(default_factory=list)
    max_denominator: int = 0
    conjugated_mismatches: int = 0
    plain_mismatches: int = 0

    @property
    def conclusive(self) -> bool:
        return not self.failures

    @property
    def symmetric(self) -> bool:
        return self.conclusive and self.conjugated_mismatches == 0

    @property
    def sigma_alone_symmetric(self) -> bool:
        return self.conclusive and self.plain_mismatches == 0

    def to_dict(self) -> dict:
        return {
            "x": str(self.x), "p_x": self.p, "theta_delta": self.theta,
            "den_bound": self.den_bound, "entries": self.entries,
            "conclusive": self.conclusive, "failures": [list(f) for f in self.failures],
            "max_denominator": self.max_denominator,
            "symmetric_under_sigma_conjugation": self.symmetric,
            "symmetric_under_sigma_alone": self.sigma_alone_symmetric,
            "conjugated_mismatches": self.conjugated_mismatches,
            "plain_mismatches": self.plain_mismatches,
        }


def _image(key):
    """Key of the entry that ``sigma`` sends ``key`` to, in table order."""
    i, j, k, l = key
    a, b = SIGMA[i], SIGMA[j]
    if C6_LINE_NAMES.index(a) > C6_LINE_NAMES.index(b):
        a, b, k, l = b, a, l, k
    return a, b, k, l


def sigma_conjugation_check(x, den_bound: int = 10**3, dps: int = DEFAULT_DPS) -> GaloisReport:
    """Test the coefficient table for invariance under ``sigma`` composed with conjugation.

    ``sigma`` reverses orientation, so it sends each delta-perturbation to its
    negative: an entry of total order ``n`` picks up the sign ``(-1)^n``.
    With that convention the composed map leaves the table invariant.  Any
    coefficient not recognized within ``den_bound`` makes the report
    inconclusive.
    """
    xf = Fraction(x).limit_denominator(10**12)
    if not 0 < xf < 1:
        raise DomainError(f"need 0 < x < 1, got {x}")
    if p_x_is_rational(xf):
        raise DomainError(f"p_x is rational at x = {xf}; the symmetry statement needs it irrational")
    table = taylor_table(xf, dps)
    fits, failures = {}, []
    for key, c in table.items():
        fit = recover_mp(c, xf, den_bound, dps)
        if fit is None:
            failures.append(key)
        else:
            fits[key] = fit
    rep = GaloisReport(xf, p_x(xf), theta_delta(xf), den_bound, len(table), failures)
    if failures:
        return rep
    rep.max_denominator = max(max(f.a.denominator, f.b.denominator) for f in fits.values())
    for key, fit in fits.items():
        img = fits[_image(key)]
        sign = -1 if (key[2] + key[3]) % 2 else 1
        expect = fit if sign > 0 else -fit
        rep.conjugated_mismatches += not img.matches(expect.conjugate())
        rep.plain_mismatches += not img.matches(expect)
    return rep


def endpoint_table_symmetric(tol: float = 1e-10) -> bool:
    """At ``x = 1`` (C6 itself) ``sigma`` alone preserves the distance table."""
    c = c6_configuration(*gamma(1.0))
    d = c.distance_matrix()
    idx = {n: k for k, n in enumerate(C6_LINE_NAMES)}
    perm = [idx[SIGMA[n]] for n in C6_LINE_NAMES]
    return bool(np.abs(d[np.ix_(perm, perm)] - d).max() < tol)
