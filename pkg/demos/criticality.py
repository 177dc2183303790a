"""
Deciding whether a minimum of smooth functions has a local maximum.

A toy two-variable example first, then the six-cylinder record and the
octahedral cluster O6.
"""
import numpy as np

from critcluster import cyl_clusters as cc
from critcluster import min_morse as mm
from critcluster.geom3 import DomainError

# f = min(-y + 3x^2, y - x^2): both differentials cancel, yet f > 0 between
# the parabolas y = x^2 and y = 3x^2, so the origin is no local maximum.
horns = mm.LinearQuadraticBundle(np.array([[0, -1.0], [0, 1.0]]),
                                 np.array([np.diag([3.0, 0]), np.diag([-1.0, 0])]))
rep = mm.analyze(horns)
print("horns: critical =", rep.is_critical, " verdict =", rep.certificate.status,
      " point =", np.round(rep.certificate.witness_point, 6), " f =", rep.certificate.witness_value)

# With -x^2 in both entries the origin is a strict maximum.
mod = mm.LinearQuadraticBundle(horns.linear, np.array([np.diag([-1.0, 0])] * 2))
print("modified horns:", mm.certify_local_max(mod).status)

for name, c in [("record", cc.record_cluster()), ("O6", cc.off_pole(cc.o6_configuration()))]:
    b = mm.bundle_from_line_cluster(c)
    r = mm.analyze(b)
    print(f"{name}: {b.m} active pairs, null index {mm.null_index(b)}"
          f" ({mm.null_index(b, mod_rotations=True)} mod rotations),"
          f" k = {r.k}, verdict {r.certificate.status}, margin {r.certificate.margin:.4f}")

# Six parallel lines: the first-order model breaks down.
try:
    mm.bundle_from_line_cluster(cc.c6_configuration(0, 0, 0))
except DomainError as exc:
    print("C6:", exc)
