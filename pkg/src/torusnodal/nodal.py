"""Nodal-set extraction, length and curvature on the torus.

The zero set is traced by marching squares on a uniform periodic grid.
Crossings on cell edges become vertices, located by bisection followed by
safeguarded Newton iteration along the edge.  Saddle cells are resolved by
the sign at the cell centre, and cells next to a detected singular point
are left unjoined, so curves through them come out open and flagged.

Vertices are stored unwrapped: consecutive vertices are the nearest
periodic images of each other, and a closed curve returns to its first
vertex shifted by ``winding * period``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import PreconditionError, SingularityError
from .fields import evaluate_grid, gradient_scale

REFINE_TOL = 1e-10
MAX_NEWTON = 20
# generic sub-cell shift so that rational nodal lines miss the grid lines
_OFFSET_FRAC = (0.3183098861837907, 0.2718281828459045)


@dataclass
class NodalCurve:
    vertices: np.ndarray            # (n, 2), unwrapped
    closed: bool
    step: float                     # extraction grid step h
    period: float
    curvature_samples: np.ndarray   # signed curvature at each vertex, w.r.t. traversal
    singular_adjacent: bool = False
    winding: tuple[int, int] = (0, 0)
    arclength_cum: np.ndarray = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.arclength_cum is None:
            self.arclength_cum = np.concatenate([[0.0], np.cumsum(segment_lengths(self))])

    def __len__(self):
        return len(self.vertices)

    @property
    def closing_vertex(self) -> np.ndarray:
        """The image of the first vertex that follows the last one."""
        return self.vertices[0] + self.period * np.asarray(self.winding, dtype=float)

    def polyline(self) -> np.ndarray:
        """Vertices with the closing vertex appended for closed curves."""
        if self.closed:
            return np.vstack([self.vertices, self.closing_vertex])
        return self.vertices

    def chords(self) -> np.ndarray:
        return np.diff(self.polyline(), axis=0)


def segment_lengths(curve: NodalCurve, corrected: bool = True) -> np.ndarray:
    """Per-segment lengths.

    With ``corrected`` each chord c is replaced by the circular arc through
    its ends with the mean endpoint curvature k, c * asin(kc/2) / (kc/2),
    which is exact on circles and second-order accurate in general.
    """
    c = np.linalg.norm(curve.chords(), axis=1)
    if not corrected or len(c) == 0:
        return c
    k = np.abs(curve.curvature_samples)
    k = 0.5 * (k + np.roll(k, -1))[: len(c)] if curve.closed else 0.5 * (k[:-1] + k[1:])
    u = np.clip(0.5 * k * c, 0.0, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(u > 1e-8, np.arcsin(u) / np.where(u > 0, u, 1.0), 1.0 + u * u / 6)
    return c * f


def curve_length(curve: NodalCurve, corrected: bool = True) -> float:
    return float(segment_lengths(curve, corrected).sum())


def total_nodal_length(curves, corrected: bool = True) -> float:
    return float(sum(curve_length(c, corrected) for c in curves))


# ---------------------------------------------------------------------------
# pointwise geometry


def _value_grad(field, x):
    if hasattr(field, "value_and_gradient"):
        return field.value_and_gradient(x)
    return field.evaluate(x), field.gradient(x)


def _min_grad(field) -> float:
    return 1e-8 * gradient_scale(field)


def curvature_at(field, x, signed: bool = False):
    """Curvature of the level curve through x from analytic derivatives.

    Signed values are div(grad phi / |grad phi|), positive when the curve
    bends away from the gradient.
    """
    x = np.asarray(x, dtype=float)
    g = field.gradient(x)
    H = field.hessian(x)
    gx, gy = g[..., 0], g[..., 1]
    n2 = gx * gx + gy * gy
    if np.any(np.sqrt(n2) <= _min_grad(field)):
        raise SingularityError("gradient too small for a curvature estimate")
    num = gy * gy * H[..., 0, 0] - 2 * gx * gy * H[..., 0, 1] + gx * gx * H[..., 1, 1]
    k = num / n2**1.5
    if not signed:
        k = np.abs(k)
    return float(k) if np.ndim(k) == 0 else k


def refine(field, x, tol: float = REFINE_TOL, max_iter: int = MAX_NEWTON):
    """Project points onto the nodal set by Newton steps along the gradient.

    Points already within ``tol * amplitude`` are returned unchanged, which
    makes the operation idempotent.
    """
    x = np.array(x, dtype=float)
    flat = x.reshape(-1, 2)
    lim = tol * field.amplitude
    active = np.arange(len(flat))
    for _ in range(max_iter):
        if len(active) == 0:
            break
        p = flat[active]
        f = np.atleast_1d(field.evaluate(p))
        keep = np.abs(f) > lim
        active, p, f = active[keep], p[keep], f[keep]
        if len(active) == 0:
            break
        g = field.gradient(p)
        n2 = (g**2).sum(-1)
        if np.any(np.sqrt(n2) <= _min_grad(field)):
            raise SingularityError("Newton projection hit a critical point")
        flat[active] = p - (f / n2)[:, None] * g
    return flat.reshape(x.shape)


# ---------------------------------------------------------------------------
# singular points


@dataclass
class SingularPoint:
    x: np.ndarray
    value: float
    grad_norm: float
    branches: int     # nodal curves through the point (half the sign changes nearby)


def _newton_step(g, H):
    det = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] * H[:, 1, 0]
    ok = np.abs(det) > 1e-300
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    dx = np.empty_like(g)
    dx[:, 0] = (H[:, 1, 1] * g[:, 0] - H[:, 0, 1] * g[:, 1]) * inv_det
    dx[:, 1] = (-H[:, 1, 0] * g[:, 0] + H[:, 0, 0] * g[:, 1]) * inv_det
    return dx


def _critical_newton(field, seeds, max_iter=MAX_NEWTON):
    x = np.array(seeds, dtype=float).reshape(-1, 2)
    active = np.arange(len(x))
    for _ in range(max_iter):
        if len(active) == 0:
            break
        g = field.gradient(x[active])
        H = field.hessian(x[active])
        dx = _newton_step(g, H)
        x[active] -= dx
        small = np.linalg.norm(dx, axis=1) <= 1e-15 * (1 + np.abs(x[active]).max(axis=1))
        active = active[~small]
    return x


def _branch_count(field, x, radius, samples=64) -> int:
    t = 2 * math.pi * (np.arange(samples) + 0.5) / samples
    ring = x + radius * np.column_stack([np.cos(t), np.sin(t)])
    s = field.evaluate(ring) >= 0
    return int(np.count_nonzero(s != np.roll(s, 1)) // 2)


def _wrap(x, period):
    return np.mod(x, period)


def singular_points(field, cells_per_wavelength: int = 16, tol_phi: float = 1e-8,
                    tol_grad: float = 1e-6, grid=None) -> list[SingularPoint]:
    """Nodal points where the gradient vanishes as well.

    Seeds are the centres of grid cells that contain a sign change and whose
    linearized critical point lies within a few cells; each is sent through
    Newton's method on grad phi = 0 and kept if |phi| <= tol_phi * amplitude
    and |grad phi| <= tol_grad * gradient_scale.
    """
    g = grid if grid is not None else _Grid.build(field, cells_per_wavelength)
    return g.singular(field, tol_phi, tol_grad)


# ---------------------------------------------------------------------------
# grid and extraction


@dataclass
class _Grid:
    n: int
    h: float
    offset: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, field, cells_per_wavelength: int):
        if cells_per_wavelength < 8:
            raise PreconditionError("cells_per_wavelength must be at least 8")
        P = field.period
        n = int(math.ceil(P * cells_per_wavelength / field.suggested_resolution))
        h = P / n
        offset = np.array(_OFFSET_FRAC) * h
        vals = evaluate_grid(field, n, tuple(offset))
        return cls(n, h, offset, vals)

    def point(self, i, j):
        return self.offset + self.h * np.stack([i, j], axis=-1).astype(float)

    def crossing_cells(self) -> np.ndarray:
        s = self.values >= 0
        a = s ^ np.roll(s, -1, 0)      # horizontal edge (i,j)-(i+1,j)
        b = s ^ np.roll(s, -1, 1)      # vertical edge (i,j)-(i,j+1)
        return a | np.roll(a, -1, 1) | b | np.roll(b, -1, 0)

    def singular(self, field, tol_phi, tol_grad) -> list[SingularPoint]:
        cells = np.argwhere(self.crossing_cells())
        if len(cells) == 0:
            return []
        c = self.point(cells[:, 0], cells[:, 1]) + self.h / 2
        # keep cells whose Newton step towards a critical point is short
        near = np.linalg.norm(_newton_step(field.gradient(c), field.hessian(c)), axis=1) <= 2 * self.h
        if not near.any():
            return []
        seeds = c[near]
        x = _critical_newton(field, seeds)
        moved = np.linalg.norm(x - seeds, axis=1) <= 3 * self.h
        val = np.abs(np.atleast_1d(field.evaluate(x)))
        gn = np.linalg.norm(field.gradient(x), axis=1)
        keep = moved & (val <= tol_phi * field.amplitude) & (gn <= tol_grad * gradient_scale(field))
        out: list[SingularPoint] = []
        P = field.period
        for p, v, gg in zip(_wrap(x[keep], P), val[keep], gn[keep]):
            dup = False
            for q in out:
                d = (p - q.x + P / 2) % P - P / 2
                if np.hypot(*d) < self.h / 2:
                    dup = True
                    break
            if not dup:
                out.append(SingularPoint(p, float(v), float(gg), _branch_count(field, p, self.h / 4)))
        out.sort(key=lambda s: (round(float(s.x[0]), 12), round(float(s.x[1]), 12)))
        return out

    def cell_of(self, x) -> tuple[int, int]:
        k = np.floor(((np.asarray(x) - self.offset) % (self.n * self.h)) / self.h).astype(int) % self.n
        return int(k[0]), int(k[1])


def _edge_roots(field, p0, e, h, f0, f1, tol, n_bisect=0, max_iter=80):
    """Roots of field on segments p0 + t e, t in [0, h], given a sign change.

    Starts from linear interpolation of the end values, then runs Newton
    safeguarded by the bracket (bisection whenever a step leaves it).
    """
    m = len(p0)
    lo = np.zeros(m)
    hi = np.full(m, h)
    slo = f0 >= 0
    t = np.clip(h * f0 / (f0 - f1), 0.05 * h, 0.95 * h)
    fval = np.full(m, np.inf)
    active = np.arange(m)
    for it in range(max_iter):
        if len(active) == 0:
            break
        p = p0[active] + t[active, None] * e[active]
        if it < n_bisect:
            f = np.atleast_1d(field.evaluate(p))
        else:
            f, grad = _value_grad(field, p)
            f = np.atleast_1d(f)
        fval[active] = f
        done = np.abs(f) <= tol
        same = (f >= 0) == slo[active]
        lo[active] = np.where(same, t[active], lo[active])
        hi[active] = np.where(same, hi[active], t[active])
        mid = 0.5 * (lo[active] + hi[active])
        if it < n_bisect:
            tn = mid
        else:
            d = (grad * e[active]).sum(-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = t[active] - f / d
            ok = np.isfinite(tn) & (tn > lo[active]) & (tn < hi[active])
            tn = np.where(ok, tn, mid)
        t[active] = np.where(done, t[active], tn)
        stalled = hi[active] - lo[active] <= 4 * np.finfo(float).eps * max(h, 1.0)
        active = active[~done & ~stalled]
    return t, fval


def extract_nodal_set(field, cells_per_wavelength: int = 16, refine_tol: float = REFINE_TOL,
                      detect_singular: bool = True, return_grid: bool = False):
    """Trace {field = 0} into a list of :class:`NodalCurve` objects.

    Curves are ordered by their smallest edge index, so output is
    deterministic for a fixed field and resolution.
    """
    g = _Grid.build(field, cells_per_wavelength)
    n, h, V = g.n, g.h, g.values
    amp = field.amplitude
    if amp == 0:
        raise PreconditionError("field is identically zero")
    tiny = np.abs(V) < 1e-13 * amp
    quad = tiny & np.roll(tiny, -1, 0) & np.roll(tiny, -1, 1) & np.roll(np.roll(tiny, -1, 0), -1, 1)
    if quad.any():
        raise PreconditionError("field vanishes on a whole grid cell; degenerate at this resolution")

    S = V >= 0
    ch = S ^ np.roll(S, -1, 0)
    cv = S ^ np.roll(S, -1, 1)
    singular = singular_points(field, grid=g) if detect_singular else []
    flagged = np.zeros((n, n), dtype=bool)
    for sp in singular:
        i, j = g.cell_of(sp.x)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                flagged[(i + di) % n, (j + dj) % n] = True

    # vertex on every crossing edge; node id: horizontal i*n+j, vertical n*n + i*n+j
    pos = np.full((2 * n * n, 2), np.nan)
    tol = 1e-2 * refine_tol * amp
    for kind, mask, e in ((0, ch, (1.0, 0.0)), (1, cv, (0.0, 1.0))):
        idx = np.argwhere(mask)
        if len(idx) == 0:
            continue
        p0 = g.point(idx[:, 0], idx[:, 1])
        ev = np.broadcast_to(np.asarray(e), p0.shape)
        i1 = (idx[:, 0] + (kind == 0)) % n
        j1 = (idx[:, 1] + (kind == 1)) % n
        t, _ = _edge_roots(field, p0, ev, h, V[idx[:, 0], idx[:, 1]], V[i1, j1], tol)
        pos[kind * n * n + idx[:, 0] * n + idx[:, 1]] = p0 + t[:, None] * ev

    nbr = _connect_cells(field, g, ch, cv, flagged)
    curves = _chain(field, g, pos, nbr)
    for c in curves:
        c.singular_adjacent = c.singular_adjacent or not c.closed
    if return_grid:
        return curves, g, singular
    return curves


def _connect_cells(field, g, ch, cv, flagged):
    """Neighbour table: node -> up to two adjacent nodes via marching squares."""
    n = g.n
    NN = n * n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ip, jp = (i + 1) % n, (j + 1) % n
    # cell edges in order bottom, right, top, left
    ids = np.stack([i * n + j, NN + ip * n + j, i * n + jp, NN + i * n + j], axis=-1)
    cross = np.stack([ch[i, j], cv[ip, j], ch[i, jp], cv[i, j]], axis=-1)
    cnt = cross.sum(-1)
    pairs = []
    two = (cnt == 2) & ~flagged
    if two.any():
        e = ids[two][cross[two]].reshape(-1, 2)
        pairs.append(e)
    four = np.argwhere((cnt == 4) & ~flagged)
    if len(four):
        centers = g.point(four[:, 0], four[:, 1]) + g.h / 2
        csign = np.atleast_1d(field.evaluate(centers)) >= 0
        same = csign == (g.values[four[:, 0], four[:, 1]] >= 0)
        b, r, t, l = ids[four[:, 0], four[:, 1]].T
        # same sign at centre and lower-left corner: that diagonal is connected
        pairs.append(np.column_stack([b, np.where(same, r, l)]))
        pairs.append(np.column_stack([t, np.where(same, l, r)]))
    nbr = -np.ones((2 * NN, 2), dtype=np.int64)
    if not pairs:
        return nbr
    e = np.vstack(pairs)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    first = np.ones(len(src), dtype=bool)
    first[1:] = src[1:] != src[:-1]
    slot = np.where(first, 0, 1)
    nbr[src, slot] = dst
    return nbr


def _chain(field, g, pos, nbr) -> list[NodalCurve]:
    P = field.period
    h = g.h
    deg = (nbr >= 0).sum(1)
    present = ~np.isnan(pos[:, 0])
    seen = np.zeros(len(pos), dtype=bool)
    n0 = nbr[:, 0].tolist()
    n1 = nbr[:, 1].tolist()
    curves = []
    # open chains first, from their lower-numbered end
    starts = np.flatnonzero(present & (deg == 1)).tolist() + np.flatnonzero(present & (deg == 2)).tolist()
    for s in starts:
        if seen[s]:
            continue
        order = [s]
        seen[s] = True
        prev, cur = -1, s
        closed = False
        while True:
            a, b = n0[cur], n1[cur]
            if a == b:
                v = a if prev < 0 else -1
            else:
                v = b if a == prev else a
            if v < 0:
                break
            if v == s:
                closed = True
                break
            if seen[v]:
                break
            seen[v] = True
            order.append(v)
            prev, cur = cur, v
        if len(order) < 2:
            continue
        made = _trim_vertices(pos[order], closed, h, P)
        if made is not None:
            curves.append(made)
    if not curves:
        return []
    allv = np.vstack([v for v, _, _ in curves])
    g, H = _grad_hess(field, allv)
    out = []
    k = 0
    for v, closed, winding in curves:
        m = len(v)
        kappa = _signed_curvature(field, v, closed, P, winding, g[k:k + m], H[k:k + m])
        out.append(NodalCurve(v, closed, h, P, kappa, False, winding))
        k += m
    return out


def _grad_hess(field, x):
    if hasattr(field, "values_and_derivatives"):
        return field.values_and_derivatives(x)[1:]
    return field.gradient(x), field.hessian(x)


def _unwrap(pts, P):
    # integer shifts accumulate exactly; summing float differences would drift
    jumps = np.round(np.diff(pts, axis=0) / P)
    shift = np.vstack([np.zeros((1, 2)), np.cumsum(jumps, axis=0)])
    return pts - P * shift


def _trim_vertices(pts, closed, h, P):
    v = _unwrap(pts, P)
    step = np.hypot(*np.diff(v, axis=0).T)
    if (step < h / 4).any():
        xs, ys = v[:, 0].tolist(), v[:, 1].tolist()
        keep = [0]
        q = h / 4
        for k in range(1, len(xs)):
            if math.hypot(xs[k] - xs[keep[-1]], ys[k] - ys[keep[-1]]) >= q:
                keep.append(k)
        v = v[keep]
    winding = (0, 0)
    if closed:
        close = v[0] + P * np.round((v[-1] - v[0]) / P)
        while len(v) > 2 and np.hypot(*(close - v[-1])) < h / 4:
            v = v[:-1]
        if len(v) < 3:
            return None
        winding = tuple(int(w) for w in np.round((close - v[0]) / P))
    if len(v) < 2:
        return None
    return v, closed, winding


def _signed_curvature(field, v, closed, P, winding, g=None, H=None):
    if closed:
        nxt = np.vstack([v[1:], v[:1] + P * np.asarray(winding)])
        prv = np.vstack([v[-1:] - P * np.asarray(winding), v[:-1]])
    else:
        nxt = np.vstack([v[1:], 2 * v[-1:] - v[-2:-1]])
        prv = np.vstack([2 * v[:1] - v[1:2], v[:-1]])
    T = nxt - prv
    if g is None:
        g, H = _grad_hess(field, v)
    n2 = (g**2).sum(-1)
    small = np.sqrt(n2) <= _min_grad(field)
    n2 = np.where(small, 1.0, n2)
    gx, gy = g[:, 0], g[:, 1]
    k = (gy * gy * H[:, 0, 0] - 2 * gx * gy * H[:, 0, 1] + gx * gx * H[:, 1, 1]) / n2**1.5
    # orientation: T parallel to rot90(grad) gives +div(n)
    sgn = np.sign(-gy * T[:, 0] + gx * T[:, 1])
    k = k * np.where(sgn == 0, 1.0, sgn)
    return np.where(small, np.nan, k)


# ---------------------------------------------------------------------------
# total curvature


def total_curvature_polygon(polyline, closed: bool = False) -> float:
    """Sum of absolute turning angles of a polyline."""
    p = np.asarray(polyline, dtype=float)
    if closed:
        if np.allclose(p[0], p[-1]):
            p = p[:-1]
        d = np.diff(np.vstack([p, p[:1]]), axis=0)
        d_prev = np.roll(d, 1, axis=0)
    else:
        d = np.diff(p, axis=0)
        d_prev = d[:-1]
        d = d[1:]
    cross = d_prev[:, 0] * d[:, 1] - d_prev[:, 1] * d[:, 0]
    dot = (d_prev * d).sum(1)
    return float(np.abs(np.arctan2(cross, dot)).sum())


def total_curvature_integral(curve: NodalCurve) -> float:
    """Trapezoid rule for the integral of |kappa| ds over the corrected arcs."""
    k = np.abs(curve.curvature_samples)
    if np.isnan(k).any():
        raise SingularityError("curve passes through a critical point")
    s = segment_lengths(curve)
    if curve.closed:
        return float((0.5 * (k + np.roll(k, -1)) * s).sum())
    return float((0.5 * (k[:-1] + k[1:]) * s).sum())


def total_curvature(curves) -> float:
    """Total curvature of all curves; singular-adjacent ones are skipped."""
    return float(sum(total_curvature_integral(c) for c in curves if not c.singular_adjacent))


# ---------------------------------------------------------------------------
# local statistics


def _segment_disc_length(a, b, c, r):
    """Length of segment ab inside the closed disc of radius r at c (vectorized)."""
    d = b - a
    f = a - c
    A = (d * d).sum(-1)
    B = 2 * (f * d).sum(-1)
    C = (f * f).sum(-1) - r * r
    disc = B * B - 4 * A * C
    out = np.zeros(len(a))
    ok = (disc > 0) & (A > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    A_ = np.where(ok, A, 1.0)
    t0 = np.clip((-B - sq) / (2 * A_), 0, 1)
    t1 = np.clip((-B + sq) / (2 * A_), 0, 1)
    out[ok] = ((t1 - t0) * np.sqrt(A))[ok]
    return out


def local_nodal_length(curves, center, radius: float) -> float:
    """Nodal length inside a disc on the torus (radius below period / 2)."""
    total = 0.0
    c = np.asarray(center, dtype=float)
    for cv in curves:
        p = cv.polyline()
        a, b = p[:-1], p[1:]
        P = cv.period
        cc = c + P * np.round(((a + b) / 2 - c) / P)
        total += float(_segment_disc_length(a, b, cc, radius).sum())
    return total


def cell_lengths(curves, cells: int, period: float) -> np.ndarray:
    """Nodal length per square cell; each short segment is binned by its midpoint."""
    out = np.zeros((cells, cells))
    for cv in curves:
        p = cv.polyline()
        mid = ((p[:-1] + p[1:]) / 2) % period
        L = np.linalg.norm(np.diff(p, axis=0), axis=1)
        k = np.minimum((mid / period * cells).astype(int), cells - 1)
        np.add.at(out, (k[:, 0], k[:, 1]), L)
    return out


@dataclass
class CellCensus:
    cells: int
    cell_side: float
    lengths: np.ndarray = dc_field(repr=False)
    fitted_c: float = 0.0      # lambda * (lower median cell length)
    fraction: float = 0.0      # share of cells with length >= fitted_c / lambda


def cell_census(curves, lam: float, period: float, a: float = 1.0) -> CellCensus:
    """Share of cells of side ~ a / lambda carrying nodal length >= c / lambda."""
    cells = max(1, int(round(period * lam / a)))
    L = cell_lengths(curves, cells, period)
    med = float(np.quantile(L, 0.5, method="lower"))
    frac = float(np.mean(L >= med))
    return CellCensus(cells, period / cells, L, med * lam, frac)
