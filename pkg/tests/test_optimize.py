import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critcluster import cyl_clusters as cc
from critcluster import min_morse as mm
from critcluster import optimize as opt
from critcluster.geom3 import DomainError

SQRT_12_11 = np.sqrt(12 / 11)
PHI_M = np.arcsin(np.sqrt(3 / 11))


def test_family_values_match_clusters():
    rng = np.random.default_rng(1)
    Z = np.column_stack([rng.uniform(-1, 1, 20), rng.uniform(-2, 2, 20), rng.uniform(-1, 1, 20)])
    ref = [cc.min_distance(cc.c6_configuration(*z)) for z in Z]
    assert np.allclose(opt.family_values(Z), ref, atol=1e-14)


def test_gamma_parameters_vectorized():
    xs = np.array([0.1, 0.5, 0.9, 1.0])
    assert np.allclose(opt.gamma_parameters(xs), [cc.gamma(x) for x in xs], atol=1e-15)
    with pytest.raises(DomainError):
        opt.gamma_parameters([0.0])


@pytest.mark.parametrize("start", [(0.1, 0.1, -0.05), (0.0, 0.0, 0.0)])
def test_family_ascent_reaches_record(start):
    r = opt.ascend_family(start)
    assert r.converged
    assert abs(r.value - SQRT_12_11) < 1e-8
    # the maximum is unique up to the sign symmetries of the family
    assert abs(abs(r.argmax[0]) - PHI_M) < 1e-6
    vals = [v for _, v, _ in r.trace]
    assert np.all(np.diff(vals) >= 0)


def test_family_ascent_fixed_point_at_record():
    r = opt.ascend_family(cc.gamma(0.5))
    assert len(r.trace) == 1 and r.converged
    assert np.allclose(r.argmax, cc.gamma(0.5))


def test_family_ascent_budget_flag():
    r = opt.ascend_family((0.1, 0.1, -0.05), budget=10_000)
    assert not r.converged and r.value > cc.min_distance(cc.c6_configuration(0.1, 0.1, -0.05))


def test_family_ascent_deterministic():
    a = opt.ascend_family((0.2, 0.0, 0.0), budget=200_000, seed=3)
    b = opt.ascend_family((0.2, 0.0, 0.0), budget=200_000, seed=3)
    assert a.value == b.value and np.array_equal(a.argmax, b.argmax)


def test_full_ascent_at_o6_finds_no_improvement():
    r = opt.ascend_full(cc.o6_configuration(), budget=100_000)
    assert r.converged
    assert abs(r.value - 1.0) < 1e-9


def test_full_ascent_trace_monotone_from_perturbed_c6():
    rng = np.random.default_rng(0)
    start = cc.perturb(cc.c6_configuration(0, 0, 0), rng.normal(size=18), 1e-3)
    r = opt.ascend_full(start, budget=50_000)
    vals = [v for _, v, _ in r.trace]
    assert np.all(np.diff(vals) >= 0) and r.value >= cc.min_distance(start)


def test_full_ascent_keeps_c4_parallel_value():
    r = opt.ascend_full(cc.c4_parallel(), budget=20_000)
    assert abs(r.value - np.sqrt(2)) < 1e-12


def test_full_ascent_rejects_degenerate_start():
    c = dr_tetra_at_zero()
    with pytest.raises(DomainError):
        opt.ascend_full(c)


def dr_tetra_at_zero():
    from critcluster import delta_rotation as dr
    return dr.edge_lines(dr.PlatonicSolid.make("tetrahedron"))


def test_search_directions_avoid_rotations():
    c = cc.off_pole(cc.record_cluster())
    B = opt._rotation_complement(c)
    G = cc.rotation_generators(c)
    assert np.abs(G @ B).max() < 1e-12
    V = opt.random_free_directions(c, 50)
    assert np.abs(V @ G.T).max() < 1e-12


def test_probe_at_record():
    r = opt.perturbation_probe(cc.record_cluster(), 10_000, 1e-3)
    assert r.max_value < SQRT_12_11 - 1e-9
    assert r.count_above(SQRT_12_11) == 0


@pytest.mark.parametrize("t", [1e-2, 1e-3])
def test_probe_at_o6(t):
    assert opt.perturbation_probe(cc.o6_configuration(), 10_000, t).max_value < 1


def test_probe_reproducible():
    a = opt.perturbation_probe(cc.record_cluster(), 500, 1e-3, seed=9)
    b = opt.perturbation_probe(cc.record_cluster(), 500, 1e-3, seed=9)
    assert np.array_equal(a.values, b.values)


def test_probe_rejects_bad_radius():
    with pytest.raises(DomainError):
        opt.perturbation_probe(cc.record_cluster(), 10, 0.0)


def _e_split(c):
    c = cc.off_pole(c)
    b = mm.bundle_from_line_cluster(c)
    E = mm.quotient_by(mm.null_space_basis(b), b.rotation_generators)
    B = opt._rotation_complement(c)
    # part of the rotation complement orthogonal to E
    P = B.T - (B.T @ E.T) @ E
    U, s, _ = np.linalg.svd(P.T, full_matrices=False)
    return c, E, U[:, s > 1e-8].T


def test_decay_orders_at_record():
    c, E, F = _e_split(cc.record_cluster())
    assert len(E) == 4
    rng = np.random.default_rng(5)
    for v in rng.normal(size=(10, len(E))) @ E:
        s = opt.decay_order_scan(c, v / np.linalg.norm(v))
        assert 1.8 <= s.exponent <= 2.2
    for v in rng.normal(size=(10, len(F))) @ F:
        s = opt.decay_order_scan(c, v / np.linalg.norm(v))
        assert 0.9 <= s.exponent <= 1.1


def test_decay_orders_along_o6_null_space():
    c, E, _ = _e_split(cc.o6_configuration())
    assert len(E) == 6
    rng = np.random.default_rng(6)
    for v in rng.normal(size=(10, len(E))) @ E:
        assert 1.8 <= opt.decay_order_scan(c, v / np.linalg.norm(v)).exponent <= 2.2


def test_decay_scan_flags_ascent():
    # a short chord of gamma from x = 0.6 towards the record is an ascent direction
    c = cc.gamma_cluster(0.6)
    v = cc.gamma_cluster(0.59).chart_vector() - c.chart_vector()
    s = opt.decay_order_scan(c, v / np.linalg.norm(v))
    assert s.refuted and np.isnan(s.exponent)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_probe_values_never_exceed_record(seed):
    r = opt.perturbation_probe(cc.record_cluster(), 200, 1e-2, seed=seed)
    assert r.max_value < SQRT_12_11
