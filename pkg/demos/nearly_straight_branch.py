"""Derivatives along a convex, almost straight nodal branch.

phi = sin(k y + x) + eps sin(k y - x) + delta sin(y + k x) has a branch
with slope close to -1/k whose fourth derivative is driven by the tiny
delta term at frequency k.
"""

import numpy as np

from torusnodal.appendix import AppendixExample, delta_for, fourth_derivative_component

ex = AppendixExample(40, 1e-3, 1e-9)
tab = ex.derivative_table(9)
print("      x            y'            y''        predicted y''")
for row in tab:
    print(f"{row[0]:.6f}  {row[2]: .8e}  {row[3]: .6e}  {float(ex.second_derivative_prediction(row[0])): .6e}")

for k in (20, 40, 80):
    comp = fourth_derivative_component(k, 1e-3, delta_for(k), 201)
    print(f"k = {k:2d}: max |delta part of y''''| = {np.abs(comp).max():.3e}, per k {np.abs(comp).max() / k:.3e}")
