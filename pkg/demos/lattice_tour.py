"""Lattice points on circles: counts, separations and short arcs.

Run with ``python3 demos/lattice_tour.py``.
"""

import math

from torusnodal.lattice import (enumerate_circle, short_arc_size, max_points_on_arc, min_separation, r2,
                                ramana_determinant)

for E in (5, 25, 65, 325, 1105, 5525):
    c = enumerate_circle(E)
    lam = math.sqrt(E)
    print(f"E = {E:5d}  r2 = {r2(E):3d}  min separation = {min_separation(c):7.3f}  lambda = {lam:6.2f}")

# how many points fit on arcs of the size where at most m are allowed
E = 5525
c = enumerate_circle(E)
for m in range(2, 7):
    size = short_arc_size(E, m)
    print(f"m = {m}: arc size {size:7.3f} holds at most {max_points_on_arc(c, size).count} points")

# the determinant identity, checked in exact Gaussian-integer arithmetic
pts = list(enumerate_circle(65).points[:4])
for k in range(len(pts)):
    r = ramana_determinant(pts, k)
    print(f"k = {k}: |det|^2 = {r.det_norm}, both sides agree: {r.squared_magnitudes_equal}")
