"""
Turning the edge-tangent lines of a Platonic solid by a common angle.

Prints extrema of each sweep and the figures formed by the lines that
meet at the degenerate angles.
"""
import numpy as np

from critcluster import delta_rotation as dr

for kind in dr.KINDS:
    res = dr.sweep(dr.PlatonicSolid.make(kind), 0, np.pi / 2, 721)
    ext = ", ".join(f"{e.kind} {e.delta:.7f} -> {e.value:.7f}" for e in res.extrema)
    print(f"{kind:<13} {ext}")

for kind, delta in [("octahedron", np.arctan(np.sqrt(2))), ("icosahedron", np.pi / 4)]:
    c = dr.rotate_edges(dr.edge_lines(dr.PlatonicSolid.make(kind)), delta)
    sk = dr.skeleton_structure(c)
    print(f"{kind} at {delta:.7f}: {len(sk.components)} groups of {len(sk.components[0])} lines,"
          f" edge lengths {np.unique(np.round(np.concatenate(sk.lengths), 9))}")
