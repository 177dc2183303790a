import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from critcluster import ball_clusters as bc
from critcluster.geom3 import angle_from_chord, ball_radius_from_angle, rotation_matrix

from oracles import brute_force_point_distance

NAMES = ["I12", "A66", "necklace12", "FCC", "HCP", "T3", "flex5"]


@pytest.mark.parametrize("name", NAMES)
def test_delta_matches_brute_force(name):
    p = bc.named_ball_cluster(name)
    assert np.allclose(np.linalg.norm(p.points, axis=1), 1, atol=1e-15)
    assert abs(bc.delta(p) - brute_force_point_distance(p.points)) < 1e-15
    assert bc.delta(p) > 0


def test_delta_values():
    assert abs(bc.delta(bc.named_ball_cluster("T3")) - np.sqrt(3)) < 1e-15
    i12 = 2 * np.sin(np.arccos(1 / np.sqrt(5)) / 2)
    assert abs(bc.delta(bc.named_ball_cluster("I12")) - i12) < 1e-12
    assert abs(bc.delta(bc.named_ball_cluster("necklace12")) - 2 * np.sin(np.pi / 12)) < 1e-15
    for name in ("FCC", "HCP"):
        assert abs(bc.delta(bc.named_ball_cluster(name)) - 1.0) < 1e-12


def test_radii():
    assert abs(bc.touching_radius(bc.named_ball_cluster("I12")) - 1.1085085) < 1e-6
    assert bc.touching_radius(bc.named_ball_cluster("A66")) < 1
    t3 = bc.touching_radius(bc.named_ball_cluster("T3"))
    assert abs(t3 - np.sqrt(3) / (2 - np.sqrt(3))) < 1e-12
    necklace = (np.sqrt(3) - 1) / (2 * np.sqrt(2) - np.sqrt(3) + 1)
    assert abs(bc.touching_radius(bc.named_ball_cluster("necklace12")) - necklace) < 1e-12


def test_a66_is_uniform():
    p = bc.named_ball_cluster("A66")
    d = p.distance_matrix()
    # every vertex of the uniform antiprism has four nearest neighbours
    near = (d < bc.delta(p) + 1e-10).sum(axis=1) - 1
    assert list(near) == [4] * 12


def test_flex5_contact_at_one_plus_sqrt2():
    r = 1 + np.sqrt(2)
    assert abs(np.sin(np.pi / 4) - r / (1 + r)) < 1e-15
    p = bc.named_ball_cluster("flex5")
    ang = angle_from_chord(np.linalg.norm(p.points[0] - p.points[2]))
    assert abs(ball_radius_from_angle(ang) - r) < 1e-12


@pytest.mark.parametrize("theta", [0.0, 0.05, 0.2, -0.3])
def test_flex5_is_flexible(theta):
    p = bc.flex5_motion(theta)
    d = p.distance_matrix()
    for j in range(2, 5):
        assert abs(d[0, j] - np.sqrt(2)) < 1e-12 and abs(d[1, j] - np.sqrt(2)) < 1e-12


@pytest.mark.parametrize("name", ["FCC", "HCP"])
@pytest.mark.parametrize("tol", [1e-9, 1e-8, 1e-7])
def test_shell_contacts(name, tol):
    pairs = bc.contact_pairs(bc.named_ball_cluster(name), tol)
    assert len(pairs) == 24


def test_hcp_triangles_are_aligned():
    p = bc.named_ball_cluster("HCP").points
    up, down = p[6:9], p[9:12]
    lon = lambda q: np.sort(np.mod(np.arctan2(q[:, 1], q[:, 0]), 2 * np.pi))  # noqa: E731
    assert np.allclose(lon(up), lon(down))
    fcc = bc.named_ball_cluster("FCC").points
    assert not np.allclose(np.sort(np.round(fcc, 9), axis=0), np.sort(np.round(p, 9), axis=0))


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_delta_invariances(seed):
    p = bc.named_ball_cluster("A66")
    R = Rotation.random(random_state=seed).as_matrix()
    assert abs(bc.delta(p.rotated(R)) - bc.delta(p)) < 1e-12
    perm = np.random.default_rng(seed).permutation(12)
    assert abs(bc.delta(bc.BallTouchConfig(p.points[perm])) - bc.delta(p)) < 1e-12


def test_hausdorff():
    i12 = bc.named_ball_cluster("I12")
    assert bc.hausdorff_distance(i12, i12) == 0
    n, s = bc.BallTouchConfig([[0, 0, 1], [0, 0, 1]]), bc.BallTouchConfig([[0, 0, -1], [0, 0, -1]])
    assert abs(bc.hausdorff_distance(n, s) - 2) < 1e-15
    R = rotation_matrix([0, 0, 1], np.radians(1))
    q = i12.rotated(R)
    chord = np.linalg.norm(i12.points - q.points, axis=1)
    d = np.linalg.norm(i12.points[:, None] - q.points[None], axis=-1)
    brute = max(d.min(axis=0).max(), d.min(axis=1).max())
    assert abs(bc.hausdorff_distance(i12, q) - brute) < 1e-15
    assert abs(brute - chord.max()) < 1e-12


def test_quotient_distance():
    i12 = bc.named_ball_cluster("I12")
    g = Rotation.random(random_state=5).as_matrix()
    assert bc.quotient_distance(i12, i12.rotated(g)) < 1e-6
    pts = i12.points.copy()
    axis = np.cross(pts[0], [0.3, 0.1, 0.9])
    axis /= np.linalg.norm(axis)
    pts[0] = rotation_matrix(axis, 1e-2) @ pts[0]
    q = bc.BallTouchConfig(pts)
    qd = bc.quotient_distance(i12, q, starts=4)
    assert 0 < qd <= bc.hausdorff_distance(i12, q) + 1e-12
    assert qd <= 1e-2 + 1e-6


def test_i12_and_a66_decay_linearly():
    for name in ("I12", "A66"):
        rep = bc.pl_maximality_probe(bc.named_ball_cluster(name), samples=8)
        assert rep.min_ratio > 0
        assert 0.9 <= rep.exponent <= 1.1


def test_t3_decays_quadratically():
    ts = np.geomspace(1e-2, 1e-4, 7)
    p = bc.named_ball_cluster("T3")
    assert 1.9 <= bc.decay_along_curve(p, bc.t3_lift_curve, ts) <= 2.1
    # chord^2 = 2 + cos t along the lift
    q = bc.t3_lift_curve(0.3).points
    assert abs(np.sum((q[0] - q[1]) ** 2) - (2 + np.cos(0.3))) < 1e-14


def test_fcc_unlocks_with_six_fixed_balls():
    u = bc.unlock_direction(bc.named_ball_cluster("FCC"))
    assert u.null_index_mod_so3 == 1
    assert u.fixed_count == 6
    assert u.growth_ok


def test_hcp_unlock_direction_is_unique_and_grows():
    u = bc.unlock_direction(bc.named_ball_cluster("HCP"))
    assert u.null_index_mod_so3 == 1
    assert u.growth_ok
    ok = ~np.isnan(u.exponents)
    assert np.all((u.exponents[ok] >= 1.8) & (u.exponents[ok] <= 2.2))


def test_necklace_has_no_unique_direction():
    with pytest.raises(bc.UnlockStructureError) as exc:
        bc.unlock_direction(bc.named_ball_cluster("necklace12"))
    assert exc.value.dim == 10


def test_unknown_name():
    with pytest.raises(KeyError):
        bc.named_ball_cluster("D20")
