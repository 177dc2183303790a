from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critcluster import cyl_clusters as cc
from critcluster import galois_probe as gp
from critcluster.geom3 import DomainError

HALF = Fraction(1, 2)


def test_p_x_values():
    assert abs(gp.p_x(HALF) - np.sqrt(5) / 2) < 1e-15
    assert abs(gp.p_x(1) - np.sqrt(8 / 3)) < 1e-15
    assert abs(gp.p_x(1e-12) - 1 / np.sqrt(3)) < 1e-11


@given(st.fractions(min_value=Fraction(1, 10**4), max_value=1, max_denominator=10**4))
def test_radicand_identity(x):
    r = gp._radicand(x)
    assert 3 * r == (1 + x) * (1 + 3 * x)
    assert abs(3 * gp.p_x(x) ** 2 - float((1 + x) * (1 + 3 * x))) < 1e-12


def test_rational_p_x_detection():
    assert gp.p_x_is_rational(Fraction(1, 5))  # radicand 16/25
    assert not gp.p_x_is_rational(HALF)


def test_theta_delta():
    assert abs(gp.theta_delta(0.5) - 2 / np.sqrt(11)) < 1e-15
    # 1 + 7x + 4x^2 = 3 at x = 1/4
    ref = np.sqrt((5 / 4) / (3 * (1 / 4) * (3 / 4) * 3))
    assert abs(gp.theta_delta(0.25) - ref) < 1e-15
    for x in (0.0, 1.0):
        with pytest.raises(DomainError):
            gp.theta_delta(x)


@settings(max_examples=30)
@given(st.floats(1e-6, 1 - 1e-6))
def test_theta_delta_positive(x):
    assert gp.theta_delta(x) > 0


def test_rational_recover_examples():
    p = np.sqrt(5) / 2
    fit = gp.rational_recover(1 / 3 + 2 * p, p, 100)
    assert (fit.a, fit.b) == (Fraction(1, 3), Fraction(2))
    assert gp.rational_recover(np.pi, p, 1000) is None


def test_rational_recover_small_grid_round_trip():
    p = np.sqrt(5) / 2
    bound = 12
    for r in range(1, bound // 2 + 1):
        for m in range(-2 * r, 2 * r + 1):
            for q in range(-2 * r, 2 * r + 1):
                a, b = Fraction(m, r), Fraction(q, r)
                fit = gp.rational_recover(float(a) + float(b) * p, p, bound)
                assert fit is not None and (fit.a, fit.b) == (a, b)


def test_field_element_conjugate():
    e = gp.QuadraticFieldElement(Fraction(1, 3), Fraction(2), np.sqrt(5) / 2)
    assert e.conjugate().matches(gp.QuadraticFieldElement(Fraction(1, 3), Fraction(-2), e.p))
    assert abs(e.value + e.conjugate().value - 2 / 3) < 1e-15
    assert (-e).matches(gp.QuadraticFieldElement(Fraction(-1, 3), Fraction(-2), e.p))


def test_taylor_table_constant_terms_are_squared_distances():
    t = gp.taylor_table(HALF)
    d = cc.gamma_cluster(0.5).distance_matrix()
    idx = {n: k for k, n in enumerate(cc.C6_LINE_NAMES)}
    for (i, j, k, l), c in t.items():
        if k == l == 0:
            assert abs(float(c) - d[idx[i], idx[j]] ** 2) < 1e-12


def test_first_order_coefficient_against_finite_differences():
    # derivative of d_AD^2 in A's normalized delta, by plain double-precision differences
    theta = gp.theta_delta(0.5)
    phi, delta, kappa = cc.gamma(0.5)
    base = cc.c6_configuration(phi, delta, kappa)

    def f(s):
        z = base.chart_vector().copy()
        z[2] += theta * s
        c = cc.LineCluster.from_chart_vector(z)
        return c.distance_matrix()[0, 1] ** 2

    h = 1e-4
    fd = (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h)
    assert abs(fd - float(gp.taylor_table(HALF)[("A", "D", 1, 0)])) < 1e-8


def test_recovered_coefficients_frozen():
    # recovered once at 40 digits and frozen
    t = gp.taylor_table(HALF)
    frozen = {
        ("A", "D", 0, 0): (Fraction(12, 11), Fraction(0)),
        ("A", "D", 1, 0): (Fraction(768, 1331), Fraction(-384, 1331)),
        ("A", "D", 1, 1): (Fraction(112128, 161051), Fraction(126976, 161051)),
        ("A", "B", 2, 0): (Fraction(-6592, 33275), Fraction(4992, 33275)),
        ("A", "E", 0, 0): (Fraction(540, 143), Fraction(0)),
    }
    for key, (a, b) in frozen.items():
        fit = gp.recover_mp(t[key], HALF, 10**7)
        assert (fit.a, fit.b) == (a, b)


def test_symmetry_at_half_with_large_bound():
    rep = gp.sigma_conjugation_check(HALF, den_bound=10**7)
    assert rep.conclusive and rep.symmetric
    assert not rep.sigma_alone_symmetric and rep.plain_mismatches > 0
    assert rep.max_denominator == 11**3 * 13**3


def test_symmetry_at_one_third():
    rep = gp.sigma_conjugation_check(Fraction(1, 3), den_bound=10**9)
    assert rep.symmetric and not rep.sigma_alone_symmetric


def test_small_bound_is_inconclusive_not_refuted():
    rep = gp.sigma_conjugation_check(HALF, den_bound=10**3)
    assert not rep.conclusive and rep.failures
    assert not rep.symmetric and rep.to_dict()["conclusive"] is False


def test_rational_p_x_rejected():
    with pytest.raises(DomainError):
        gp.sigma_conjugation_check(Fraction(1, 5))


def test_endpoint_table_symmetric_under_sigma():
    assert gp.endpoint_table_symmetric()
