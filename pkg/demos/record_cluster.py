"""
Six unit cylinders around a unit ball: from six parallel ones to the record.

Walks the unlocking curve gamma, prints the distance profile and then
lets the local optimizer find the same maximum from a nearby start.
"""
import numpy as np

from critcluster import cyl_clusters as cc
from critcluster import optimize as opt
from critcluster.geom3 import cyl_radius_from_distance

# Six parallel cylinders: every neighbour touches, D = 1.
c6 = cc.c6_configuration(0, 0, 0)
print("C6: D =", cc.min_distance(c6), " contacts:", cc.contact_graph(c6).sorted_edges())

# Along gamma the minimal distance first grows then falls again.
xs = np.linspace(1.0, 0.0, 11)[:-1]
for x, d in zip(xs, opt.gamma_profile(xs)):
    print(f"  x = {x:.1f}   D = {d:.9f}   r = {cyl_radius_from_distance(d):.9f}")

rec = cc.record_cluster()
d = cc.min_distance(rec)
print(f"record: D = {d:.12f} (sqrt(12/11) = {np.sqrt(12 / 11):.12f})")
print(f"        r = {cyl_radius_from_distance(d):.12f} ((3+sqrt 33)/8 = {(3 + np.sqrt(33)) / 8:.12f})")
print("        every line touches", cc.contact_graph(rec, 1e-9).degrees(6), "others")

# Ascent inside the three-parameter family reaches the same value.
res = opt.ascend_family((0.1, 0.1, -0.05))
print(f"ascent from (0.1, 0.1, -0.05): D = {res.value:.12f} after {res.evaluations} evaluations")

# Random perturbations at the record never beat it.
probe = opt.perturbation_probe(rec, 2000, 1e-3)
print(f"2000 random kicks of size 1e-3: best D - D* = {probe.max_value - d:.3e}")
