"""Fourier transforms of weighted regular arcs.

For a unit vector xi the set of parameters where the tangent is nearly
orthogonal to xi is one short interval, because the tangent angle is
monotone along a regular arc.  Away from these intervals one integration
by parts bounds the arc's Fourier transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .arcs import RegularArc
from .errors import PreconditionError
from .lattice import LatticeCircle

BUMP = "bump"
HANN = "hann"
TENT = "tent"
_GL_NODES = 20


@lru_cache(maxsize=None)
def _bump_mass() -> float:
    return quad(lambda u: math.exp(-1.0 / (1.0 - u * u)), -1, 1, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


@dataclass(frozen=True)
class WeightWindow:
    """Non-negative window on [t0, t1] with unit mass.

    ``bump`` is C-infinity, ``hann`` is cos^2 and ``tent`` is piecewise linear.
    """

    t0: float
    t1: float
    kind: str = BUMP

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise PreconditionError("window support must have positive length")
        if self.kind not in (BUMP, HANN, TENT):
            raise ValueError(f"unknown window {self.kind!r}")

    @property
    def width(self) -> float:
        return self.t1 - self.t0

    def _u(self, t):
        return (2 * np.asarray(t, dtype=float) - self.t0 - self.t1) / self.width

    def __call__(self, t):
        u = self._u(t)
        inside = np.abs(u) < 1
        uu = np.where(inside, u, 0.0)
        if self.kind == BUMP:
            v = np.exp(-1.0 / (1.0 - uu * uu)) / _bump_mass()
        elif self.kind == HANN:
            v = np.cos(0.5 * np.pi * uu) ** 2
        else:
            v = 1.0 - np.abs(uu)
        v = np.where(inside, v, 0.0)
        # u-mass: bump 1, hann 1, tent 1; dt = width/2 du
        return v * 2.0 / self.width

    @property
    def peak(self) -> float:
        return float(self(0.5 * (self.t0 + self.t1)))

    @property
    def total_variation(self) -> float:
        """Integral of |omega'|; twice the peak for these unimodal windows."""
        return 2.0 * self.peak

    def variation_constant(self, ell: float) -> float:
        """c with integral |omega'| = c / ell."""
        return self.total_variation * ell


def _gauss_legendre(a: float, b: float, panels: int):
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def window_mass(omega: WeightWindow) -> float:
    t, w = _gauss_legendre(omega.t0, omega.t1, 64)
    return float((omega(t) * w).sum())


# ---------------------------------------------------------------------------
# direction-avoidance intervals


def tangent_angle(arc: RegularArc, t) -> np.ndarray:
    """Continuous tangent angle, anchored at the start of the arc."""
    T0 = arc.tangents[0]
    psi0 = math.atan2(T0[1], T0[0])
    T = arc.tangent(t)
    a = np.arctan2(T[..., 1], T[..., 0])
    return psi0 + (a - psi0 + np.pi) % (2 * np.pi) - np.pi


@dataclass
class AvoidanceInterval:
    lo: float
    hi: float
    bound: float        # 2 rho / (kappa sqrt(1 - rho^2))

    @property
    def length(self) -> float:
        return max(0.0, self.hi - self.lo)

    @property
    def empty(self) -> bool:
        return self.hi <= self.lo


def direction_avoidance_interval(arc: RegularArc, xi_unit, rho: float,
                                 check_samples: int = 1025) -> AvoidanceInterval:
    """The parameter set where |xi . gamma'(t)| < rho, as one interval."""
    xi = np.asarray(xi_unit, dtype=float)
    if abs(np.hypot(*xi) - 1) > 1e-12:
        raise PreconditionError("xi must be a unit vector")
    kappa, ell = arc.kappa_min, arc.ell
    if not 0 < rho < ell * kappa / 10:
        raise PreconditionError(f"rho = {rho:.4g} outside (0, ell kappa / 10 = {ell * kappa / 10:.4g})")
    bound = 2 * rho / (kappa * math.sqrt(1 - rho * rho))
    alpha = math.atan2(xi[1], xi[0])
    psi_a, psi_b = (float(v) for v in tangent_angle(arc, np.array([0.0, ell])))
    lo_psi, hi_psi = min(psi_a, psi_b), max(psi_a, psi_b)
    width = math.asin(rho)
    # orthogonal direction closest to the tangent range
    mid = 0.5 * (lo_psi + hi_psi)
    target = alpha + math.pi / 2 + math.pi * round((mid - alpha - math.pi / 2) / math.pi)
    a_psi, b_psi = target - width, target + width
    if b_psi <= lo_psi or a_psi >= hi_psi:
        out = AvoidanceInterval(0.0, 0.0, bound)
    else:
        inc = psi_b >= psi_a
        f = lambda t, L: float(tangent_angle(arc, t)) - L

        def preimage(L):
            if L <= lo_psi:
                return 0.0 if inc else ell
            if L >= hi_psi:
                return ell if inc else 0.0
            return brentq(f, 0.0, ell, args=(L,), xtol=1e-15 * max(ell, 1.0), rtol=1e-15)

        ends = sorted([preimage(a_psi), preimage(b_psi)])
        out = AvoidanceInterval(ends[0], ends[1], bound)
    if check_samples:
        t = np.linspace(0, ell, check_samples)
        g = np.abs(arc.tangent(t) @ xi)
        inside = g < rho
        in_iv = (t > out.lo) & (t < out.hi)
        # grid points strictly away from the endpoints must classify consistently
        tol = 1e-9 * ell
        far = (np.abs(t - out.lo) > tol) & (np.abs(t - out.hi) > tol)
        if np.any(inside[far] != in_iv[far]):
            raise AssertionError("avoidance set is not a single interval")
    # endpoints are root-found to ~1e-15 ell, which matters when rho is tiny
    if out.length > bound * (1 + 1e-9) + 1e-12 * max(ell, 1.0):
        raise AssertionError(f"|I_xi| = {out.length:.6g} exceeds {bound:.6g}")
    return out


# ---------------------------------------------------------------------------
# Fourier integral


@dataclass
class FourierBoundReport:
    value: complex
    rho: float
    bound_shape: float       # (1/(rho |xi|)) (1/ell + kappa/rho)
    fitted_c: float          # |value| / bound_shape
    proven_c: float          # max(c_omega, kappa_max/kappa_min) / (2 pi)

    @property
    def holds(self) -> bool:
        return self.fitted_c <= self.proven_c


def arc_fourier_integral(arc: RegularArc, omega: WeightWindow, xi, rho: float | None = None,
                         check_samples: int = 2049) -> complex:
    """Integral of e(xi . gamma(t)) omega(t) dt, e(x) = exp(2 pi i x).

    When ``rho`` is given, |xi/|xi| . gamma'| > rho is checked on the window
    support first.
    """
    xi = np.asarray(xi, dtype=float)
    if omega.t0 < -1e-12 or omega.t1 > arc.ell * (1 + 1e-12):
        raise PreconditionError("window support leaves the arc")
    n = float(np.hypot(*xi))
    if rho is not None and n > 0:
        t = np.linspace(omega.t0, omega.t1, check_samples)
        g = np.abs(arc.tangent(t) @ (xi / n))
        bad = np.flatnonzero(g <= rho)
        if len(bad):
            raise PreconditionError(f"non-stationarity fails at t = {t[bad[0]]:.6g}: "
                                    f"|xi.gamma'| = {g[bad[0]]:.3g} <= rho = {rho:.3g}")
    panels = max(8, int(math.ceil(2 * n * omega.width)) + 8)
    t, w = _gauss_legendre(omega.t0, omega.t1, panels)
    phase = 2 * np.pi * (arc.position(t) @ xi)
    return complex((np.exp(1j * phase) * omega(t) * w).sum())


def fourier_bound_check(arc: RegularArc, omega: WeightWindow, xi, rho: float) -> FourierBoundReport:
    """Compare the Fourier integral with (1/(rho|xi|))(1/ell + kappa/rho)."""
    xi = np.asarray(xi, dtype=float)
    v = arc_fourier_integral(arc, omega, xi, rho)
    n = float(np.hypot(*xi))
    ell, kmin, kmax = arc.ell, arc.kappa_min, arc.kappa_max
    shape = (1.0 / (rho * n)) * (1.0 / ell + kmin / rho)
    c_omega = omega.variation_constant(ell)
    proven = max(c_omega, kmax / kmin) / (2 * math.pi)
    return FourierBoundReport(v, rho, shape, abs(v) / shape, proven)


@dataclass
class DecayFit:
    slope: float
    points: int


def decay_slope(norms, values, floor: float = 1e-12) -> DecayFit:
    """Log-log slope of the running-max envelope max_{|xi'| >= |xi|} |I(xi')|."""
    n = np.asarray(norms, dtype=float)
    v = np.abs(np.asarray(values))
    order = np.argsort(n)
    n, v = n[order], v[order]
    env = np.maximum.accumulate(v[::-1])[::-1]
    keep = env > floor
    if keep.sum() < 2:
        raise PreconditionError("not enough values above the floor to fit a slope")
    slope = np.polyfit(np.log(n[keep]), np.log(env[keep]), 1)[0]
    return DecayFit(float(slope), int(keep.sum()))


# ---------------------------------------------------------------------------
# good sub-intervals


def difference_directions(circle: LatticeCircle) -> np.ndarray:
    """Distinct unit directions (xi1 - xi2)/|xi1 - xi2| up to sign."""
    pts = circle.as_array()
    seen = set()
    out = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = int(pts[i, 0] - pts[j, 0]), int(pts[i, 1] - pts[j, 1])
            g = math.gcd(a, b)
            a, b = a // g, b // g
            if a < 0 or (a == 0 and b < 0):
                a, b = -a, -b
            if (a, b) not in seen:
                seen.add((a, b))
                out.append((a, b))
    out.sort()
    d = np.array(out, dtype=float).reshape(-1, 2)
    return d / np.linalg.norm(d, axis=1, keepdims=True) if len(d) else d


@dataclass
class GoodIntervals:
    intervals: list[tuple[float, float]]
    rho: float
    min_length: float         # c0 |E|^-2 ell
    coverage: float           # sum of lengths / ell
    removed: list[tuple[float, float]]


def good_subintervals(arc: RegularArc, circle: LatticeCircle, c0: float,
                      check_samples: int = 1000) -> GoodIntervals:
    """Sub-intervals of [0, ell] on which every difference direction is avoided.

    Each closed set {|xi . gamma'| <= rho}, rho = c0 kappa ell / |E|^2, is cut
    out; pieces no longer than c0 |E|^-2 ell are dropped.  Raises if the
    remaining coverage is not above (1 - 2 c0) ell.
    """
    if not 0 < c0 < 0.01:
        raise PreconditionError("c0 must lie in (0, 1/100)")
    arc.validate()
    ell = arc.ell
    N = len(circle)
    if N < 2:
        return GoodIntervals([(0.0, ell)], 0.0, 0.0, 1.0, [])
    rho = c0 * arc.kappa_min * ell / N**2
    min_len = c0 * ell / N**2
    removed = []
    for xi in difference_directions(circle):
        iv = direction_avoidance_interval(arc, xi, rho, check_samples=0)
        if not iv.empty:
            removed.append((iv.lo, iv.hi))
    removed.sort()
    pieces = []
    cur = 0.0
    for a, b in removed:
        if a > cur:
            pieces.append((cur, a))
        cur = max(cur, b)
    if cur < ell:
        pieces.append((cur, ell))
    good = [(a, b) for a, b in pieces if b - a > min_len]
    cov = sum(b - a for a, b in good) / ell
    if not cov > 1 - 2 * c0:
        raise PreconditionError(f"coverage {cov:.6f} <= 1 - 2 c0; arc is not regular enough")
    dirs = difference_directions(circle)
    for a, b in good:
        t = np.linspace(a, b, check_samples + 2)[1:-1]
        g = np.abs(arc.tangent(t) @ dirs.T)
        if not np.all(g > rho):
            raise AssertionError("direction bound fails inside a good interval")
    return GoodIntervals(good, rho, min_len, cov, removed)
