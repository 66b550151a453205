"""Regular arcs (pinched curvature, short total curvature) and their widths.

A regular arc has constant curvature sign, kappa_min > 0,
kappa_max < 2 kappa_min and 2 kappa_min * length < 1.  Its width is the
smallest distance between two parallel lines enclosing it; for these
arcs that is the height of the arc over its chord, and it is within a
bounded factor of length^2 * kappa_min.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial import ConvexHull

from .errors import PreconditionError
from .nodal import NodalCurve, curve_length, refine

MIN_STEPS = 8           # arcs shorter than this many extraction steps are dropped
SINGULAR_TRIM = 2       # steps removed at ends touching a singular point
DENSE_SAMPLES = 129


@dataclass
class RegularArc:
    s: np.ndarray            # arc-length parameter, s[0] = 0
    points: np.ndarray       # (m, 2)
    tangents: np.ndarray     # (m, 2), unit
    curvature: np.ndarray    # signed, constant sign
    curve_id: int = -1
    span: tuple[int, int] = (0, 0)   # vertex range in the source curve (shared endpoints allowed)
    exact: Callable | None = None    # optional s -> (points, tangents)

    @property
    def ell(self) -> float:
        return float(self.s[-1])

    def _kappa_range(self) -> tuple[float, float]:
        """Extremes of |kappa| over the whole arc, not only at the samples.

        Without an exact parametrization the arc is the Hermite spline of
        its tangent angle; that spline's derivative is piecewise quadratic
        and may dip below the smallest sample between nodes.
        """
        if not hasattr(self, "_kr"):
            k = np.abs(self.curvature)
            lo, hi = float(k.min()), float(k.max())
            if self.exact is None and len(self.s) > 1 and np.all(np.isfinite(k)):
                dk = self._splines()[2].derivative()
                t = dk.derivative().roots(extrapolate=False)
                t = t[np.isfinite(t) & (t > 0) & (t < self.ell)]
                if len(t):
                    kc = np.abs(dk(t))
                    lo, hi = min(lo, float(kc.min())), max(hi, float(kc.max()))
            self._kr = (lo, hi)
        return self._kr

    @property
    def kappa_min(self) -> float:
        return self._kappa_range()[0]

    @property
    def kappa_max(self) -> float:
        return self._kappa_range()[1]

    @property
    def sign(self) -> int:
        return int(np.sign(self.curvature[len(self.curvature) // 2]))

    def violations(self) -> list[str]:
        """Definition checks re-done from the stored samples."""
        out = []
        k = self.curvature
        if not np.all(np.isfinite(k)):
            out.append("non-finite curvature")
            return out
        if not (np.all(k > 0) or np.all(k < 0)):
            out.append("curvature changes sign or vanishes")
        kmin, kmax = self.kappa_min, self.kappa_max
        if not kmin > 0:
            out.append("kappa_min is not positive")
        if not kmax < 2 * kmin:
            out.append(f"pinching fails: kappa_max {kmax:.6g} >= 2 kappa_min {2 * kmin:.6g}")
        if not 2 * kmin * self.ell < 1:
            out.append(f"total curvature too large: 2 kappa_min ell = {2 * kmin * self.ell:.6g}")
        tn = np.linalg.norm(self.tangents, axis=1)
        if np.abs(tn - 1).max() > 1e-8:
            out.append("tangents are not unit vectors")
        return out

    def validate(self) -> "RegularArc":
        v = self.violations()
        if v:
            raise PreconditionError("not a regular arc: " + "; ".join(v))
        return self

    # -- continuous parametrization ------------------------------------------

    def _splines(self):
        if not hasattr(self, "_sp"):
            ang = np.unwrap(np.arctan2(self.tangents[:, 1], self.tangents[:, 0]))
            self._sp = (CubicHermiteSpline(self.s, self.points[:, 0], self.tangents[:, 0]),
                        CubicHermiteSpline(self.s, self.points[:, 1], self.tangents[:, 1]),
                        CubicHermiteSpline(self.s, ang, self.curvature))
        return self._sp

    def position(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.exact is not None:
            return self.exact(t)[0]
        sx, sy, _ = self._splines()
        return np.stack([sx(t), sy(t)], axis=-1)

    def tangent(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.exact is not None:
            return self.exact(t)[1]
        a = self._splines()[2](t)
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    def truncated(self, a: float, b: float, samples: int = DENSE_SAMPLES) -> "RegularArc":
        """Sub-arc over parameters [a, b], resampled."""
        if not 0 <= a < b <= self.ell * (1 + 1e-12):
            raise PreconditionError("bad truncation range")
        t = np.linspace(a, min(b, self.ell), samples)
        pts, tan = self.position(t), self.tangent(t)
        if self.exact is not None:
            k = np.interp(t, self.s, self.curvature)
            ex = self.exact
            sub = lambda u, a=a: ex(np.asarray(u) + a)
        else:
            k = self._splines()[2].derivative()(t)
            sub = None
        return RegularArc(t - a, pts, tan, k, self.curve_id, self.span, sub)

    # -- synthetic constructors -------------------------------------------------

    @classmethod
    def circular(cls, radius: float, angle: float, center=(0.0, 0.0), start: float = 0.0,
                 samples: int = DENSE_SAMPLES) -> "RegularArc":
        """Counter-clockwise circular arc of the given opening angle."""
        c = np.asarray(center, dtype=float)

        def exact(t):
            a = start + np.asarray(t) / radius
            p = c + radius * np.stack([np.cos(a), np.sin(a)], axis=-1)
            T = np.stack([-np.sin(a), np.cos(a)], axis=-1)
            return p, T

        s = np.linspace(0, radius * angle, samples)
        p, T = exact(s)
        return cls(s, p, T, np.full(samples, 1.0 / radius), exact=exact)

    @classmethod
    def from_curvature(cls, s, kappa, samples: int | None = None) -> "RegularArc":
        """Planar arc with a prescribed signed curvature profile, starting at 0 heading east."""
        s = np.asarray(s, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        ang = np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1]) * np.diff(s))])
        T = np.column_stack([np.cos(ang), np.sin(ang)])
        mid = 0.5 * (T[1:] + T[:-1])
        p = np.vstack([[0.0, 0.0], np.cumsum(mid * np.diff(s)[:, None], axis=0)])
        return cls(s - s[0], p, T, kappa)


# ---------------------------------------------------------------------------
# segmentation


def segment_profile(s: np.ndarray, kappa: np.ndarray, min_length: float, kappa_floor: float = 0.0,
                    max_length: float = math.inf) -> list[tuple[int, int]]:
    """Greedy maximal index ranges [a, b] on which the profile is regular.

    Splits at sign changes and wherever one more sample would break the
    pinching or total-curvature condition; consecutive ranges share their
    endpoint.  Ranges shorter than ``min_length`` are dropped.
    """
    s = np.asarray(s, dtype=float)
    k = np.asarray(kappa, dtype=float)
    sgn = np.where(np.abs(k) > kappa_floor, np.sign(k), 0.0)
    sgn = np.where(np.isfinite(k), sgn, 0.0)
    ak = np.abs(k)
    out = []
    n = len(s)
    a = 0
    while a < n - 1:
        if sgn[a] == 0:
            a += 1
            continue
        kmin = kmax = ak[a]
        b = a
        while b + 1 < n:
            c = b + 1
            if sgn[c] != sgn[a]:
                break
            lo, hi = min(kmin, ak[c]), max(kmax, ak[c])
            L = s[c] - s[a]
            if not (hi < 2 * lo and 2 * lo * L < 1 and L < max_length):
                break
            kmin, kmax, b = lo, hi, c
        if b > a and s[b] - s[a] >= min_length:
            out.append((a, b))
        # the next arc starts at the last accepted sample (shared endpoint)
        a = b if b > a else a + 1
    return out


def _extended_vertices(curve: NodalCurve):
    """Vertices, curvatures and arclengths, doubled around closed curves."""
    v = curve.vertices
    k = curve.curvature_samples
    if not curve.closed:
        return v, k, curve.arclength_cum[: len(v)]
    shift = curve.period * np.asarray(curve.winding, dtype=float)
    vv = np.vstack([v, v + shift])
    kk = np.concatenate([k, k])
    L = curve.arclength_cum[-1]
    ss = np.concatenate([curve.arclength_cum[:-1], curve.arclength_cum[:-1] + L])
    return vv, kk, ss


def _dense_arc(field, verts, s_v, a, b, curve_id, samples):
    """Resample vertices a..b densely, project onto the nodal set, attach analytic data."""
    seg = verts[a:b + 1]
    sv = s_v[a:b + 1] - s_v[a]
    g = field.gradient(seg)
    T = np.column_stack([-g[:, 1], g[:, 0]]) / np.linalg.norm(g, axis=1)[:, None]
    d = np.diff(seg, axis=0)
    orient = np.sign((T[:-1] * d).sum(1).sum())
    T = T * (orient if orient != 0 else 1.0)
    t = np.linspace(0, sv[-1], samples)
    x0 = np.column_stack([CubicHermiteSpline(sv, seg[:, i], T[:, i])(t) for i in range(2)])
    x0[0], x0[-1] = seg[0], seg[-1]
    x = refine(field, x0)
    gr = field.gradient(x)
    H = field.hessian(x)
    gn = np.linalg.norm(gr, axis=1)
    tan = np.column_stack([-gr[:, 1], gr[:, 0]]) / gn[:, None] * orient
    gx, gy = gr[:, 0], gr[:, 1]
    k = (gy * gy * H[:, 0, 0] - 2 * gx * gy * H[:, 0, 1] + gx * gx * H[:, 1, 1]) / gn**3
    k = k * orient
    c = np.linalg.norm(np.diff(x, axis=0), axis=1)
    km = 0.5 * (np.abs(k[1:]) + np.abs(k[:-1]))
    u = np.clip(0.5 * km * c, 0, 1)
    f = np.where(u > 1e-8, np.arcsin(u) / np.where(u > 0, u, 1), 1.0)
    s = np.concatenate([[0.0], np.cumsum(c * f)])
    return RegularArc(s, x, tan, k, curve_id, (int(a), int(b)))


def segment_regular_arcs(curve: NodalCurve, field, curve_id: int = -1,
                         samples: int = DENSE_SAMPLES) -> list[RegularArc]:
    """Split a nodal curve into regular arcs, each re-verified on dense samples."""
    verts, kap, s_v = _extended_vertices(curve)
    n0 = len(curve.vertices)
    h = curve.step
    floor = 1e-6 / h
    lo, hi = 0, len(verts) - 1
    if curve.singular_adjacent and not curve.closed:
        lo, hi = SINGULAR_TRIM, len(verts) - 1 - SINGULAR_TRIM
    if hi - lo < 2:
        return []
    if curve.closed:
        # start at a sign change so no arc is cut artificially
        sg = np.where(np.abs(kap[:n0]) > floor, np.sign(kap[:n0]), 0)
        change = np.flatnonzero(sg != np.roll(sg, 1))
        lo = int(change[0]) if len(change) else 0
        hi = lo + n0
    ranges = segment_profile(s_v[lo:hi + 1], kap[lo:hi + 1], MIN_STEPS * h, floor,
                             max_length=0.5 * curve.period)
    arcs = []
    for a, b in ranges:
        a += lo
        b += lo
        while b - a >= 2 and s_v[b] - s_v[a] >= MIN_STEPS * h:
            arc = _dense_arc(field, verts, s_v, a, b, curve_id, samples)
            if not arc.violations():
                arcs.append(arc)
                break
            b -= 1
    return arcs


# ---------------------------------------------------------------------------
# width


@dataclass
class WidthReport:
    width: float
    chord_frame_height: float
    calipers_width: float
    sagitta_prediction: float     # ell^2 * kappa_min
    ratio: float                  # width / sagitta_prediction
    max_slope: float              # max |f'| in the chord frame

    @property
    def methods_agree(self) -> bool:
        return abs(self.chord_frame_height - self.calipers_width) <= 1e-3 * self.calipers_width


def sagitta_estimate(ell: float, kappa: float) -> float:
    """ell^2 kappa; a circular arc has width exactly 1/8 of this to leading order."""
    return ell * ell * kappa


def _chord_frame(arc: RegularArc):
    p = arc.points
    c = p[-1] - p[0]
    L = np.hypot(*c)
    if L == 0:
        raise PreconditionError("arc endpoints coincide")
    e = c / L
    nrm = np.array([-e[1], e[0]])
    q = p - p[0]
    u, v = q @ e, q @ nrm
    tu, tv = arc.tangents @ e, arc.tangents @ nrm
    if np.median(v) < 0:
        v, tv = -v, -tv
    return u, v, tu, tv


def _hermite_max(u0, u1, v0, v1, d0, d1):
    """Maximum over [u0, u1] of the cubic Hermite interpolant."""
    H = CubicHermiteSpline([u0, u1], [v0, v1], [d0, d1])
    dH = H.derivative()
    cand = [u0, u1] + [r for r in np.atleast_1d(dH.roots(extrapolate=False)) if u0 <= r <= u1]
    return float(max(H(r) for r in cand))


def chord_frame_height(arc: RegularArc) -> tuple[float, float]:
    """(max height over the chord, max |f'|) with Hermite refinement of the peak."""
    u, v, tu, tv = _chord_frame(arc)
    if np.any(tu <= 0):
        raise PreconditionError("arc is not a graph over its chord")
    if v.min() < -1e-9 * max(v.max(), 1e-300):
        raise PreconditionError("arc is not convex: it crosses its chord")
    slope = tv / tu
    k = int(np.argmax(v))
    best = float(v[k])
    for i in (k - 1, k):
        if 0 <= i < len(u) - 1:
            best = max(best, _hermite_max(u[i], u[i + 1], v[i], v[i + 1], slope[i], slope[i + 1]))
    return best, float(np.abs(slope).max())


def calipers_width(points) -> float:
    """Minimal distance between parallel supporting lines of the point set."""
    pts = np.asarray(points, dtype=float)
    hull = pts[ConvexHull(pts).vertices]
    e = np.roll(hull, -1, axis=0) - hull
    L = np.linalg.norm(e, axis=1)
    ok = L > 0
    nrm = np.column_stack([-e[ok, 1], e[ok, 0]]) / L[ok, None]
    d = np.abs(np.einsum("ekd,ed->ek", hull[None, :, :] - hull[ok][:, None, :], nrm))
    return float(d.max(axis=1).min())


def width(arc: RegularArc) -> WidthReport:
    v = arc.violations()
    if v:
        raise PreconditionError("width needs a regular arc: " + "; ".join(v))
    h, slope = chord_frame_height(arc)
    cal = calipers_width(arc.points)
    pred = sagitta_estimate(arc.ell, arc.kappa_min)
    return WidthReport(h, h, cal, pred, h / pred, slope)


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    residual: float    # RMS residual in log space


def width_scaling_fit(samples: Sequence[tuple[float, float]]) -> ScalingFit:
    """Least-squares fit log w = exponent * log lambda + intercept."""
    lam = np.array([float(a) for a, _ in samples])
    w = np.array([float(b) for _, b in samples])
    if len(set(lam.tolist())) < 3:
        raise PreconditionError("need at least three distinct lambda values")
    if np.any(lam <= 0) or np.any(w <= 0):
        raise PreconditionError("lambda and width must be positive")
    X, Y = np.log(lam), np.log(w)
    A = np.column_stack([X, np.ones_like(X)])
    (slope, icpt), *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = Y - A @ np.array([slope, icpt])
    return ScalingFit(float(slope), float(icpt), float(np.sqrt(np.mean(res**2))))


@dataclass
class WidthPartition:
    threshold: float
    selected: list
    selected_length: float
    remainder_length: float


def large_width_partition(curves, arcs: Sequence[RegularArc], lam: float, exponent: float,
                          widths: Sequence[float] | None = None) -> WidthPartition:
    """Arcs with width above lambda^(-exponent) and the nodal length they miss."""
    if widths is None:
        widths = [width(a).width for a in arcs]
    thr = lam ** (-exponent) if exponent is not None else 0.0
    _assert_disjoint(arcs)
    sel = [a for a, w in zip(arcs, widths) if w > thr]
    total = sum(curve_length(c) for c in curves)
    got = float(sum(a.ell for a in sel))
    return WidthPartition(thr, sel, got, total - got)


def _assert_disjoint(arcs: Sequence[RegularArc]):
    by_curve: dict[int, list[tuple[int, int]]] = {}
    for a in arcs:
        by_curve.setdefault(a.curve_id, []).append(a.span)
    for spans in by_curve.values():
        spans.sort()
        for (a0, b0), (a1, b1) in zip(spans, spans[1:]):
            if a1 < b0:
                raise AssertionError(f"overlapping arcs {a0, b0} and {a1, b1}")
