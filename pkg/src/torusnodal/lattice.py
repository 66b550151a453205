"""Lattice points on circles |xi|^2 = E and their spacing statistics.

Everything that can be decided exactly is decided in Python integers;
floats appear only for angles and for reported ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, PreconditionError
from .gaussian import GaussianInteger, det_bareiss, prime_two_squares

#: largest E accepted by enumerate_circle unless the caller raises it
DEFAULT_MAX_ENERGY = 10**18
#: brute-force enumeration below this, Gaussian factorization above
BRUTE_FORCE_LIMIT = 10**8

ARC = "arc"
CHORD = "chord"


@dataclass(frozen=True, order=True)
class LatticePoint:
    a: int
    b: int

    def norm(self) -> int:
        return self.a * self.a + self.b * self.b

    def angle(self) -> float:
        t = math.atan2(self.b, self.a)
        return t + 2 * math.pi if t < 0 else t

    def __sub__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.a, -self.b)

    def as_gaussian(self) -> GaussianInteger:
        return GaussianInteger(self.a, self.b)


def dist_sq(p: LatticePoint, q: LatticePoint) -> int:
    return (p.a - q.a) ** 2 + (p.b - q.b) ** 2


@dataclass(frozen=True)
class LatticeCircle:
    E: int
    points: tuple[LatticePoint, ...]

    def __post_init__(self):
        for p in self.points:
            if p.norm() != self.E:
                raise PreconditionError(f"{p} does not lie on |x|^2 = {self.E}")

    @property
    def lam(self) -> float:
        return math.sqrt(self.E)

    @property
    def r2(self) -> int:
        return len(self.points)

    def angles(self) -> np.ndarray:
        return np.array([p.angle() for p in self.points])

    def as_array(self) -> np.ndarray:
        return np.array([(p.a, p.b) for p in self.points], dtype=np.int64).reshape(-1, 2)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _sorted_circle(E: int, pts: Iterable[tuple[int, int]]) -> LatticeCircle:
    points = sorted({LatticePoint(int(a), int(b)) for a, b in pts}, key=LatticePoint.angle)
    return LatticeCircle(E, tuple(points))


def _check_energy(E: int, max_energy: int) -> int:
    if isinstance(E, bool) or not isinstance(E, (int, np.integer)):
        raise PreconditionError(f"E must be an integer, got {E!r}")
    E = int(E)
    if E < 1:
        raise PreconditionError(f"E must be >= 1, got {E}")
    if E > max_energy:
        raise CapacityError(f"E = {E} exceeds the exact-arithmetic budget {max_energy}")
    return E


def _enumerate_brute(E: int) -> list[tuple[int, int]]:
    r = math.isqrt(E)
    a = np.arange(r + 1, dtype=np.int64)
    rest = E - a * a
    b = np.rint(np.sqrt(rest)).astype(np.int64)
    hit = b * b == rest
    out = []
    for x, y in zip(a[hit].tolist(), b[hit].tolist()):
        out.extend({(x, y), (-x, y), (x, -y), (-x, -y)})
    return out


def factorize(n: int, max_energy: int = DEFAULT_MAX_ENERGY) -> dict[int, int]:
    """Prime factorization of n as {p: exponent}."""
    if n > max_energy:
        raise CapacityError(f"refusing to factor {n} (budget {max_energy})")
    from sympy import factorint

    return {int(p): int(e) for p, e in factorint(n).items()}


def _enumerate_gaussian(E: int, max_energy: int) -> list[tuple[int, int]]:
    fac = factorize(E, max_energy)
    base = GaussianInteger(1, 0)
    split: list[tuple[GaussianInteger, int]] = []
    for p, e in fac.items():
        if p == 2:
            base = base * GaussianInteger(1, 1) ** e
        elif p % 4 == 3:
            if e % 2:
                return []
            base = base * GaussianInteger(p, 0) ** (e // 2)
        else:
            x, y = prime_two_squares(p)
            split.append((GaussianInteger(x, y), e))
    zs = [base]
    for pi, e in split:
        conj = pi.conj()
        zs = [z * pi**k * conj ** (e - k) for z in zs for k in range(e + 1)]
    units = [GaussianInteger(1, 0), GaussianInteger(0, 1), GaussianInteger(-1, 0), GaussianInteger(0, -1)]
    return [((u * z).re, (u * z).im) for z in zs for u in units]


def enumerate_circle(E: int, max_energy: int = DEFAULT_MAX_ENERGY,
                     method: str = "auto") -> LatticeCircle:
    """All integer points (a, b) with a^2 + b^2 = E, sorted by angle in [0, 2pi).

    ``method`` is ``"brute"``, ``"gaussian"`` or ``"auto"`` (brute force up to
    ``BRUTE_FORCE_LIMIT``, Gaussian-prime construction above).
    """
    E = _check_energy(E, max_energy)
    if method == "auto":
        method = "brute" if E <= BRUTE_FORCE_LIMIT else "gaussian"
    if method == "brute":
        pts = _enumerate_brute(E)
    elif method == "gaussian":
        pts = _enumerate_gaussian(E, max_energy)
    else:
        raise ValueError(f"unknown method {method!r}")
    circle = _sorted_circle(E, pts)
    return circle


def r2_formula(E: int, max_energy: int = DEFAULT_MAX_ENERGY) -> int:
    """r2(E) from the prime factorization: 4 * prod(e+1) over p = 1 mod 4, or 0."""
    E = _check_energy(E, max_energy)
    count = 4
    for p, e in factorize(E, max_energy).items():
        if p % 4 == 1:
            count *= e + 1
        elif p % 4 == 3 and e % 2:
            return 0
    return count


def r2(E: int, max_energy: int = DEFAULT_MAX_ENERGY, check: bool = True) -> int:
    """Number of ordered representations E = a^2 + b^2.

    With ``check`` the enumeration count is compared against the divisor formula.
    """
    n = len(enumerate_circle(E, max_energy))
    if check:
        f = r2_formula(E, max_energy)
        if f != n:
            raise ArithmeticError(f"r2({E}): enumeration gives {n}, divisor formula gives {f}")
    return n


def is_sum_of_two_squares(E: int) -> bool:
    return E >= 0 and (E == 0 or r2_formula(E) > 0)


# ---------------------------------------------------------------------------
# spacing


def min_separation_sq(circle: LatticeCircle) -> tuple[int, tuple[LatticePoint, LatticePoint]]:
    """Smallest squared distance between distinct points, with a witness pair.

    On a circle the chord grows with the angular gap, so only angular
    neighbours need checking.
    """
    pts = circle.points
    n = len(pts)
    if n < 2:
        raise PreconditionError(f"min separation undefined for r2(E) = {n} < 2")
    best = None
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        d = dist_sq(p, q)
        if best is None or d < best[0]:
            best = (d, (p, q))
    return best


def min_separation(circle: LatticeCircle) -> float:
    return math.sqrt(min_separation_sq(circle)[0])


@dataclass
class JarnikReport:
    E: int
    applicable: bool
    min_ratio: float | None = None
    witness: tuple[LatticePoint, LatticePoint, LatticePoint] | None = None
    holds: bool = True


def verify_jarnik(circle: LatticeCircle) -> JarnikReport:
    """Minimise |P0-P2|^2 |P0-P1| / lambda over ordered distinct triples with
    |P0-P1| <= |P0-P2|.

    For fixed P0 the minimum is attained at its two nearest neighbours, so the
    search is quadratic rather than cubic.
    """
    pts = circle.points
    if len(pts) < 3:
        return JarnikReport(circle.E, applicable=False)
    best = None
    for p0 in pts:
        near = sorted(((dist_sq(p0, q), q) for q in pts if q != p0), key=lambda t: t[0])
        (d1, p1), (d2, p2) = near[0], near[1]
        # ratio^2 * E = d2^2 * d1; compare exactly
        key = d2 * d2 * d1
        if best is None or key < best[0]:
            best = (key, (p0, p1, p2))
    key, witness = best
    ratio = math.sqrt(key / circle.E)
    return JarnikReport(circle.E, True, ratio, witness, holds=ratio > 0)


def arc_span(angles: Sequence[float]) -> float:
    """Angle of the smallest closed arc containing all given angles."""
    th = np.sort(np.mod(np.asarray(angles, dtype=float), 2 * math.pi))
    if len(th) < 2:
        return 0.0
    gaps = np.diff(np.concatenate([th, th[:1] + 2 * math.pi]))
    return float(2 * math.pi - gaps.max())


def arc_size(angle: float, lam: float, convention: str = ARC) -> float:
    """Size of an arc subtending ``angle`` on the circle of radius ``lam``."""
    if convention == ARC:
        return lam * angle
    if convention == CHORD:
        return 2 * lam * math.sin(min(angle, math.pi) / 2)
    raise ValueError(f"unknown arc convention {convention!r}")


def arc_angle(size: float, lam: float, convention: str = ARC) -> float:
    """Inverse of :func:`arc_size`; chords longer than the diameter map to the full circle."""
    if convention == ARC:
        return size / lam
    if convention == CHORD:
        if size >= 2 * lam:
            return 2 * math.pi
        return 2 * math.asin(size / (2 * lam))
    raise ValueError(f"unknown arc convention {convention!r}")


@dataclass
class PairProductReport:
    E: int
    applicable: bool
    min_ratio: float | None = None
    witness: tuple[LatticePoint, ...] | None = None
    arc: float | None = None
    holds: bool = True


def verify_pair_product(circle: LatticeCircle, arc_size_max: float,
                        convention: str = ARC) -> PairProductReport:
    """Minimise |P0-Q0| |P1-Q1| r / lambda over 4 distinct points on an arc of size r.

    r is the size of the smallest arc holding the four points and must not
    exceed ``arc_size_max``; all three pairings of each 4-set are tried.
    """
    pts = circle.points
    n = len(pts)
    lam = circle.lam
    if n < 4:
        return PairProductReport(circle.E, applicable=False)
    th = circle.angles()
    max_angle = arc_angle(arc_size_max, lam, convention)
    best = None
    for idx in _windows(th, max_angle, 4):
        quad = [pts[i] for i in idx]
        r = arc_size(arc_span(th[list(idx)]), lam, convention)
        if r > arc_size_max:
            continue
        for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
            prod = math.sqrt(dist_sq(quad[i], quad[j]) * dist_sq(quad[k], quad[l]))
            ratio = prod * r / lam
            if best is None or ratio < best[0]:
                best = (ratio, (quad[i], quad[k], quad[j], quad[l]), r)
    if best is None:
        return PairProductReport(circle.E, applicable=False)
    ratio, witness, r = best
    return PairProductReport(circle.E, True, ratio, witness, r, holds=ratio > 0)


def _windows(th: np.ndarray, max_angle: float, k: int):
    """Index k-subsets whose points fit in an arc of angle <= max_angle (each once)."""
    n = len(th)
    if max_angle >= 2 * math.pi:
        yield from combinations(range(n), k)
        return
    seen = set()
    for start in range(n):
        members = [start]
        for step in range(1, n):
            j = (start + step) % n
            gap = (th[j] - th[start]) % (2 * math.pi)
            if gap > max_angle + 1e-12:
                break
            members.append(j)
        if len(members) < k:
            continue
        for rest in combinations(members[1:], k - 1):
            key = tuple(sorted((start,) + rest))
            if key not in seen:
                seen.add(key)
                yield key


# ---------------------------------------------------------------------------
# products of distances, Ramana's determinant


def distance_product_exponent(m: int) -> Fraction:
    """Exponent e with prod_{i<j} |P_i - P_j| >= lambda^e for m points on one circle."""
    if m < 2:
        raise PreconditionError("need m >= 2")
    if m % 2 == 0:
        return Fraction(m, 2) * (Fraction(m, 2) - 1)
    return Fraction((m - 1) ** 2, 4)


@dataclass
class DistanceProductReport:
    E: int
    m: int
    lhs_sq: int
    rhs_exponent: Fraction
    rhs_sq: int
    holds: bool


def _validate_points(points: Sequence, E: int | None = None) -> tuple[list[LatticePoint], int]:
    pts = [p if isinstance(p, LatticePoint) else LatticePoint(int(p[0]), int(p[1])) for p in points]
    if len(set(pts)) != len(pts):
        raise PreconditionError("points must be distinct")
    norms = {p.norm() for p in pts}
    if len(norms) != 1:
        raise PreconditionError(f"points do not share a norm: {sorted(norms)}")
    n = norms.pop()
    if E is not None and n != E:
        raise PreconditionError(f"points have norm {n}, expected {E}")
    if n == 0:
        raise PreconditionError("the origin is not on a circle of positive radius")
    return pts, n


def distance_product_bound(points: Sequence) -> DistanceProductReport:
    """Exact check of prod |P_i-P_j| >= lambda^e, squared so both sides are integers."""
    pts, E = _validate_points(points)
    m = len(pts)
    if m < 2:
        raise PreconditionError("need at least two points")
    lhs_sq = 1
    for p, q in combinations(pts, 2):
        lhs_sq *= dist_sq(p, q)
    e = distance_product_exponent(m)
    # lambda^(2e) = E^e and e is an integer for every m
    assert e.denominator == 1
    rhs_sq = E ** int(e)
    return DistanceProductReport(E, m, lhs_sq, e, rhs_sq, lhs_sq >= rhs_sq)


def vandermonde_type_matrix(points: Sequence[GaussianInteger], k: int) -> list[list[GaussianInteger]]:
    """Rows conj(P)^k, ..., conj(P), 1, P, ..., P^(m-1-k) over the given points."""
    m = len(points)
    rows = [[p.conj() ** j for p in points] for j in range(k, 0, -1)]
    rows += [[p**j for p in points] for j in range(0, m - k)]
    return rows


@dataclass
class RamanaReport:
    E: int
    m: int
    k: int
    lhs: GaussianInteger
    rhs: GaussianInteger
    det: GaussianInteger
    equal_up_to_sign: bool
    det_nonzero: bool
    det_norm: int

    @property
    def squared_magnitudes_equal(self) -> bool:
        return self.lhs.norm() == self.rhs.norm()

    @property
    def implies_distance_bound(self) -> bool:
        """|det|^2 >= 1 gives lambda^{k(k+1)} prod|P_i - P_j| >= lambda^{km}."""
        return self.det_nonzero and self.det_norm >= 1


def ramana_determinant(points: Sequence, k: int) -> RamanaReport:
    """Evaluate both sides of lambda^{k(k+1)} prod_{i<j}(P_i-P_j) = prod P_i^k det V_{k,m}."""
    lp, E = _validate_points([(p.re, p.im) if isinstance(p, GaussianInteger) else p for p in points])
    gs = [p.as_gaussian() for p in lp]
    m = len(gs)
    if not 0 <= k <= m - 1:
        raise PreconditionError(f"k = {k} outside [0, {m - 1}]")
    vprod = GaussianInteger(1, 0)
    for i, j in combinations(range(m), 2):
        vprod = vprod * (gs[i] - gs[j])
    # lambda^{k(k+1)} = E^{k(k+1)/2}, an integer since k(k+1) is even
    lhs = vprod * GaussianInteger(E ** (k * (k + 1) // 2), 0)
    det = det_bareiss(vandermonde_type_matrix(gs, k))
    pk = GaussianInteger(1, 0)
    for g in gs:
        pk = pk * g**k
    rhs = pk * det
    equal = lhs == rhs or lhs == -rhs
    return RamanaReport(E, m, k, lhs, rhs, det, equal, not det.is_zero(), det.norm())


# ---------------------------------------------------------------------------
# points on short arcs


def delta_exponent(m: int) -> Fraction:
    """1 / (4 floor(m/2) + 2)."""
    if m < 2:
        raise PreconditionError(f"m must be >= 2, got {m}")
    return Fraction(1, 4 * (m // 2) + 2)


def short_arc_size(E: int, m: int) -> float:
    """sqrt(2) * lambda^(1/2 - delta(m))."""
    return math.sqrt(2) * math.sqrt(E) ** (0.5 - float(delta_exponent(m)))


@dataclass
class ArcCount:
    count: int
    witness_arc: tuple[float, float] | None  # (start angle, end angle), radians


def max_points_on_arc(circle: LatticeCircle, r: float, convention: str = ARC) -> ArcCount:
    """Largest number of circle points inside one closed arc of size ``r``.

    A maximal arc can always be slid so that it starts at a lattice point,
    so a two-pointer sweep over the angularly sorted points is exhaustive.
    """
    if r <= 0:
        raise PreconditionError("arc size must be positive")
    n = len(circle)
    if n == 0:
        return ArcCount(0, None)
    max_angle = arc_angle(r, circle.lam, convention)
    if max_angle >= 2 * math.pi:
        return ArcCount(n, (0.0, 2 * math.pi))
    th = circle.angles()
    return _sweep(th, max_angle)


def _sweep(th: np.ndarray, max_angle: float) -> ArcCount:
    n = len(th)
    ext = np.concatenate([th, th + 2 * math.pi])
    # number of points in [th_i, th_i + max_angle]
    ends = np.searchsorted(ext, th + max_angle * (1 + 1e-12), side="right")
    counts = np.minimum(ends - np.arange(n), n)
    i = int(np.argmax(counts))
    return ArcCount(int(counts[i]), (float(th[i]), float(th[i] + max_angle)))


def short_arc_check(circle: LatticeCircle, m: int, convention: str = ARC) -> tuple[bool, int]:
    """Points on an arc of size sqrt(2) lambda^(1/2 - delta(m)) never exceed m."""
    if len(circle) == 0:
        return True, 0
    c = max_points_on_arc(circle, short_arc_size(circle.E, m), convention).count
    return c <= m, c


# ---------------------------------------------------------------------------
# well-separated energies


@dataclass
class CensusReport:
    N: int
    epsilon: float
    exceptional: list[int]
    count: int
    reference: float  # N^(1 - eps/3)

    @property
    def fitted_constant(self) -> float:
        return self.count / self.reference if self.reference > 0 else float("nan")


def is_exceptional(circle: LatticeCircle, epsilon: float) -> bool:
    """Two points at distance <= (sqrt E)^(1-eps)."""
    if len(circle) < 2:
        return False
    d2, _ = min_separation_sq(circle)
    return d2 <= circle.E ** (1 - epsilon)


def exceptional_census(N: int, epsilon: float) -> CensusReport:
    if not 0 < epsilon < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    exc = []
    for E in range(1, N + 1):
        c = enumerate_circle(E)
        if len(c) >= 2 and is_exceptional(c, epsilon):
            exc.append(E)
    return CensusReport(N, epsilon, exc, len(exc), float(max(N, 0)) ** (1 - epsilon / 3))


# ---------------------------------------------------------------------------
# clusters


@dataclass
class FrequencyCluster:
    members: tuple[LatticePoint, ...]
    diameter: float


def cluster_frequencies(circle: LatticeCircle, threshold: float) -> list[FrequencyCluster]:
    """Connected components of the graph joining points at distance <= threshold."""
    if threshold <= 0:
        raise PreconditionError("threshold must be positive")
    pts = circle.points
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    t2 = threshold * threshold
    for i, j in combinations(range(n), 2):
        if dist_sq(pts[i], pts[j]) <= t2:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for root in sorted(groups):
        members = tuple(pts[i] for i in groups[root])
        diam = max((math.sqrt(dist_sq(p, q)) for p, q in combinations(members, 2)), default=0.0)
        out.append(FrequencyCluster(members, diam))
    return out
