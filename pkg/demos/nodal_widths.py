"""Nodal set of a random eigenfunction, its regular arcs and their widths.

Writes ``nodal.svg`` in the current directory and prints a short summary.
"""

import numpy as np

from torusnodal.arcs import segment_regular_arcs, width
from torusnodal.eigenfunction import random_eigenfunction
from torusnodal.lab import plot_nodal_svg
from torusnodal.nodal import extract_nodal_set, total_curvature, total_nodal_length

E, seed = 325, 0
phi = random_eigenfunction(E, seed)
curves = extract_nodal_set(phi, 32)
arcs = [a for i, c in enumerate(curves) for a in segment_regular_arcs(c, phi, i)]
reports = [width(a) for a in arcs]

print(f"E = {E}, lambda = {phi.lam:.2f}: {len(curves)} curves, length {total_nodal_length(curves):.3f}, "
      f"total curvature / E = {total_curvature(curves) / E:.3f}")
print(f"{len(arcs)} regular arcs covering {sum(a.ell for a in arcs):.3f} of the length")
ratios = np.array([r.ratio for r in reports])
print(f"max width {max(r.width for r in reports):.3e}; width / (ell^2 kappa_min) in "
      f"[{ratios.min():.3f}, {ratios.max():.3f}]")
print("svg:", plot_nodal_svg(phi, "nodal.svg", cpw=16, title=f"E = {E}, seed {seed}"))
