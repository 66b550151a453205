"""Nodal lines of Laplace eigenfunctions on the flat torus.

Exact lattice-point arithmetic on circles a^2 + b^2 = E, trigonometric
eigenfunctions with frequencies on such a circle, nodal-set extraction with
curvature, regular arcs and their widths, oscillatory integrals along arcs,
and a small experiment runner behind the ``torusnodal`` command.
"""

from .appendix import AppendixExample
from .arcs import RegularArc, segment_regular_arcs, width, width_scaling_fit
from .eigenfunction import Eigenfunction, ExponentialSum1D, TrigPolynomial, random_eigenfunction
from .errors import CapacityError, ConvergenceError, PreconditionError, SingularityError, TorusNodalError
from .fields import CallableField, CircleField
from .functheory import doubling_exponent, jensen_gap, short_arc_remez_check, turan_ratio
from .lab import ExperimentConfig, ExperimentReport, run
from .lattice import (LatticeCircle, LatticePoint, distance_product_bound, enumerate_circle, exceptional_census,
                      short_arc_check, max_points_on_arc, r2, r2_formula, ramana_determinant)
from .nodal import NodalCurve, curvature_at, extract_nodal_set, total_curvature, total_nodal_length
from .oscillatory import WeightWindow, arc_fourier_integral, fourier_bound_check, good_subintervals

__version__ = "0.1.0"

__all__ = [
    "AppendixExample", "CallableField", "CapacityError", "CircleField", "ConvergenceError", "Eigenfunction",
    "ExperimentConfig", "ExperimentReport", "ExponentialSum1D", "LatticeCircle", "LatticePoint", "NodalCurve",
    "PreconditionError", "RegularArc", "SingularityError", "TorusNodalError", "TrigPolynomial", "WeightWindow",
    "arc_fourier_integral", "curvature_at", "distance_product_bound", "doubling_exponent", "enumerate_circle",
    "exceptional_census", "extract_nodal_set", "fourier_bound_check", "good_subintervals", "jensen_gap",
    "short_arc_check", "max_points_on_arc", "r2", "r2_formula", "ramana_determinant", "random_eigenfunction", "run",
    "segment_regular_arcs", "short_arc_remez_check", "total_curvature", "total_nodal_length", "turan_ratio",
    "width", "width_scaling_fit",
]
