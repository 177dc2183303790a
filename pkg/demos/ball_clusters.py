"""
Twelve balls around a ball: radii of the classical clusters and how FCC
and HCP unlock.
"""
import numpy as np

from critcluster import ball_clusters as bc
from critcluster import min_morse as mm

for name in ("I12", "A66", "necklace12", "FCC", "HCP", "T3", "flex5"):
    p = bc.named_ball_cluster(name)
    b = mm.bundle_from_ball_config(p)
    print(f"{name:<11} n={len(p):>2}  delta={bc.delta(p):.9f}  r={bc.touching_radius(p):.9f}"
          f"  null index mod SO(3) = {mm.null_index(b, mod_rotations=True)}")

for name in ("FCC", "HCP"):
    u = bc.unlock_direction(bc.named_ball_cluster(name))
    e = u.exponents[~np.isnan(u.exponents)]
    print(f"{name}: unique unlocking direction, balls at rest {u.fixed_points},"
          f" contact growth exponents {e.min():.3f}..{e.max():.3f}")

# The necklace has a ten-dimensional space of first-order motions.
try:
    bc.unlock_direction(bc.named_ball_cluster("necklace12"))
except bc.UnlockStructureError as exc:
    print("necklace12:", exc)
