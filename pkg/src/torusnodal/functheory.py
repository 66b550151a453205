"""Quantitative unique-continuation checks for torus eigenfunctions.

Suprema are approximated by sampling at >= ``per_wavelength`` points per
wavelength followed by one local ascent step.  Logarithmic integrals use a
clipped midpoint rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .eigenfunction import Eigenfunction, ExponentialSum1D, TrigPolynomial, _row_chunks
from .errors import PreconditionError
from .lattice import arc_span

#: |phi| values below CLIP_REL * max|a_xi| are clipped before taking logs
CLIP_REL = 1e-14


def jensen_tolerance(grid_n: int) -> float:
    """Quadrature tolerance for the Jensen gap on an n x n midpoint grid.

    Calibrated on phi = 2 cos(2 pi xi.x), whose exact gap is 0: the
    clipped midpoint error there is about log(4)/n, and the
    schedule 100/n leaves room for less favourable nodal geometry.
    """
    return 100.0 / grid_n


@dataclass
class JensenReport:
    grid_n: int
    mean_log: float           # approximates the integral of log|phi| over T^2
    max_log_coeff: float      # max_xi log|a_xi|
    gap: float                # mean_log - max_log_coeff, >= 0 in exact arithmetic
    tolerance: float
    mean_log_minus: float     # integral of min(log|phi|, 0)
    eq417_reference: float    # -log|E| - 1 for the eigenspace size |E|

    @property
    def passes(self) -> bool:
        return self.gap >= -self.tolerance


def mean_log_abs(phi: Eigenfunction, grid_n: int) -> tuple[float, float]:
    """Midpoint-rule means of log|phi| and of min(log|phi|, 0) over the torus."""
    if phi.amplitude == 0:
        raise PreconditionError("log|phi| is not integrable for phi = 0")
    h = phi.period / grid_n
    floor = CLIP_REL * phi.amplitude
    total = 0.0
    neg = 0.0
    for sl in _row_chunks(grid_n):
        v = np.log(np.maximum(np.abs(phi.grid(grid_n, (h / 2, h / 2), rows=sl)), floor))
        total += float(v.sum())
        neg += float(np.minimum(v, 0.0).sum())
    return total / grid_n**2, neg / grid_n**2


def jensen_gap(phi: Eigenfunction, grid_n: int = 1024) -> JensenReport:
    """Integral of log|phi| minus max log|a_xi|."""
    coeffs = np.abs(phi.amps)
    if len(coeffs) == 0 or coeffs.max() == 0:
        raise PreconditionError("all coefficients vanish")
    mean_log, mean_neg = mean_log_abs(phi, grid_n)
    mx = float(np.log(coeffs.max()))
    return JensenReport(grid_n, mean_log, mx, mean_log - mx, jensen_tolerance(grid_n), mean_neg,
                        -math.log(len(coeffs)) - 1.0)


# ---------------------------------------------------------------------------
# doubling exponent


def _disc_offsets(radius: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Polar sample offsets covering a closed disc; returns (offsets, radii).

    The ring count is even so the half-radius circle is sampled exactly, and
    every ring carries a multiple of four angles.
    """
    k = max(2, int(math.ceil(radius / step)))
    k += k % 2
    offs = [np.zeros((1, 2))]
    rads = [np.zeros(1)]
    for i in range(1, k + 1):
        r = radius * i / k
        m = max(4, int(math.ceil(2 * math.pi * r / step)))
        m += (-m) % 4
        t = 2 * math.pi * np.arange(m) / m
        offs.append(r * np.column_stack([np.cos(t), np.sin(t)]))
        rads.append(np.full(m, r))
    return np.concatenate(offs), np.concatenate(rads)


def _ascend(phi, x, center, radius):
    """One Newton step towards a critical point of phi, kept if it stays in the disc and helps."""
    g = phi.gradient(x)
    H = phi.hessian(x)
    try:
        step = np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        return abs(phi.evaluate(x))
    y = x - step
    if np.linalg.norm(y - center) <= radius:
        return max(abs(phi.evaluate(x)), abs(phi.evaluate(y)))
    return abs(phi.evaluate(x))


def disc_sup(phi, center, radius: float, per_wavelength: int = 20,
             offsets=None) -> tuple[float, float]:
    """(sup over the disc, sup over the half-radius disc) of |phi|."""
    if offsets is None:
        offsets = _disc_offsets(radius, phi.suggested_resolution / per_wavelength)
    offs, rads = offsets
    center = np.asarray(center, dtype=float)
    pts = center + offs
    v = np.abs(phi.evaluate(pts))
    inner = rads <= radius / 2 * (1 + 1e-12)
    i_all = int(np.argmax(v))
    i_in = int(np.flatnonzero(inner)[np.argmax(v[inner])])
    full = max(v[i_all], _ascend(phi, pts[i_all], center, radius))
    half = max(v[i_in], _ascend(phi, pts[i_in], center, radius / 2))
    return float(full), float(half)


@dataclass
class DoublingReport:
    estimate: float
    best_center: tuple[float, float] | None
    best_radius: float | None
    disc_samples: int
    radii: list[float]
    per_disc: list[tuple[float, float, float, float]] = field(default_factory=list)  # cx, cy, R, log ratio


def disc_centers(phi, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic disc centres; the first k are the same for every count >= k."""
    rng = np.random.default_rng([int(seed), 4242])
    return rng.random((count, 2)) * phi.period


def doubling_exponent(phi, disc_samples: int, radii: Sequence[float], seed: int = 0,
                      per_wavelength: int = 20, centers=None) -> DoublingReport:
    """Lower estimate of max_B log(max_B |phi| / max_{B/2} |phi|) over sampled discs."""
    if disc_samples < 1:
        raise PreconditionError("need at least one disc")
    if centers is None:
        centers = disc_centers(phi, disc_samples, seed)
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    step = phi.suggested_resolution / per_wavelength
    best = (0.0, None, None)
    rows = []
    for R in radii:
        offsets = _disc_offsets(R, step)
        for c in centers:
            full, half = disc_sup(phi, c, R, per_wavelength, offsets)
            val = math.log(full / half) if half > 0 else math.inf
            val = max(val, 0.0)
            rows.append((float(c[0]), float(c[1]), float(R), val))
            if val > best[0] or best[1] is None:
                best = (max(val, best[0]), (float(c[0]), float(c[1])), float(R))
    return DoublingReport(best[0], best[1], best[2], len(centers), [float(r) for r in radii], rows)


# ---------------------------------------------------------------------------
# Turan / Nazarov


@dataclass
class TuranReport:
    J: int
    lhs: float          # sup over Omega of |f|
    sup_I: float
    rhs_base: float     # |Omega| / |I|
    ratio: float        # lhs / sup_I
    fitted_c: float     # largest c with lhs >= (c |Omega|/|I|)^(J-1) sup_I (inf when J = 1)

    def holds(self, c: float) -> bool:
        return self.lhs >= (c * self.rhs_base) ** (self.J - 1) * self.sup_I * (1 - 1e-12)


def _merge(intervals):
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    out = []
    for a, b in ivs:
        if b < a:
            raise PreconditionError(f"bad interval ({a}, {b})")
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def sup_on_intervals(f: ExponentialSum1D, intervals, per_wavelength: int = 20) -> float:
    step = 1.0 / (per_wavelength * (f.spread + 1.0))
    best_v, best_t, best_iv = -1.0, None, None
    for a, b in intervals:
        n = max(2, int(math.ceil((b - a) / step)) + 1)
        t = np.linspace(a, b, n)
        v = f.abs(t)
        i = int(np.argmax(v))
        if v[i] > best_v:
            best_v, best_t, best_iv = float(v[i]), float(t[i]), (a, b)
    a, b = best_iv
    lo, hi = max(a, best_t - step), min(b, best_t + step)
    if hi > lo:
        res = minimize_scalar(lambda s: -float(f.abs(s)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        best_v = max(best_v, -float(res.fun))
    return best_v


def turan_ratio(f: ExponentialSum1D, I: tuple[float, float], Omega) -> TuranReport:
    """Compare sup over Omega against sup over I for a 1-D exponential sum."""
    a, b = float(I[0]), float(I[1])
    if not b > a:
        raise PreconditionError("I must have positive length")
    om = _merge(Omega)
    if not om or sum(y - x for x, y in om) <= 0:
        raise PreconditionError("Omega must have positive measure")
    if om[0][0] < a - 1e-15 or om[-1][1] > b + 1e-15:
        raise PreconditionError("Omega must lie inside I")
    lhs = sup_on_intervals(f, om)
    sup_i = sup_on_intervals(f, [(a, b)])
    # sampling I includes the Omega points only approximately; keep sup_I >= lhs
    sup_i = max(sup_i, lhs)
    base = sum(y - x for x, y in om) / (b - a)
    ratio = lhs / sup_i if sup_i > 0 else 1.0
    if f.J == 1:
        c = math.inf
    else:
        c = ratio ** (1.0 / (f.J - 1)) / base
    return TuranReport(f.J, lhs, sup_i, base, ratio, c)


# ---------------------------------------------------------------------------
# short-arc Remez


@dataclass
class RemezReport:
    sigma: float
    support_arc: float
    arc_limit: float
    measure: float      # |Omega|, normalized torus measure
    sup_omega: float
    sup_norm: float
    ratio: float
    fitted_c: float     # largest c with sup_Omega >= (c |Omega|)^(1/sigma) ||psi||_inf

    def holds(self, c: float) -> bool:
        return self.sup_omega >= (c * self.measure) ** (1 / self.sigma) * self.sup_norm * (1 - 1e-12)


def support_arc_length(psi: TrigPolynomial) -> tuple[float, float]:
    """(arc length of the smallest arc holding the frequencies, radius lambda)."""
    norms = (psi.freqs**2).sum(1)
    if len(set(norms.tolist())) != 1:
        raise PreconditionError("frequencies do not lie on one circle")
    lam = math.sqrt(float(norms[0]))
    th = np.arctan2(psi.freqs[:, 1], psi.freqs[:, 0])
    return lam * arc_span(th), lam


def short_arc_remez_check(psi: TrigPolynomial, sigma: float, omega_cells,
                          per_wavelength: int = 20) -> RemezReport:
    """sup over a union of grid cells versus the sup norm, for short-arc spectra.

    ``omega_cells`` is an n x n boolean mask; cell (i, j) is
    [i, i+1) x [j, j+1) scaled by period / n.
    """
    if sigma <= 0:
        raise PreconditionError("sigma must be positive")
    mask = np.asarray(omega_cells, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise PreconditionError("omega_cells must be a square boolean mask")
    if not mask.any():
        raise PreconditionError("Omega is empty")
    arc, lam = support_arc_length(psi)
    limit = lam ** (0.5 - sigma)
    if arc > limit * (1 + 1e-12):
        raise PreconditionError(f"support arc {arc:.4g} exceeds lambda^(1/2-sigma) = {limit:.4g}")
    n = mask.shape[0]
    m = max(2, int(math.ceil(per_wavelength * lam / n)))
    cell_max = _cell_max(psi, n, m)
    sup_omega = float(cell_max[mask].max())
    sup_all = float(cell_max.max())
    measure = float(mask.mean())
    ratio = sup_omega / sup_all if sup_all > 0 else 1.0
    return RemezReport(sigma, arc, limit, measure, sup_omega, sup_all, ratio, ratio**sigma / measure)


def _cell_max(psi: TrigPolynomial, n: int, m: int) -> np.ndarray:
    N = n * m
    out = np.zeros((n, n))
    rows_per = max(1, (1 << 22) // (N * m)) * m
    for s in range(0, N, rows_per):
        block = np.abs(psi.grid_complex(N, rows=slice(s, min(N, s + rows_per))))
        k = block.shape[0] // m
        out[s // m: s // m + k] = block.reshape(k, m, n, m).max(axis=(1, 3))
    return out
