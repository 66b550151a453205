"""Laplace eigenfunctions on the flat torus and one-dimensional exponential sums.

An eigenfunction with eigenvalue E is a trigonometric polynomial whose
frequencies all lie on the circle |xi|^2 = E.  Two coordinate conventions
are supported:

``unit``
    torus R^2/Z^2, phi(x) = sum a_xi exp(2 pi i x.xi); -Lap phi = 4 pi^2 E phi.
``two_pi``
    torus R^2/(2 pi Z)^2, phi(X) = sum a_xi exp(i X.xi); -Lap phi = E phi.

The two are related by X = 2 pi x, so one coefficient map serves both.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import PreconditionError
from .lattice import enumerate_circle

UNIT = "unit"
TWO_PI = "two_pi"
_PERIODS = {UNIT: 1.0, TWO_PI: 2 * math.pi}
_CHUNK = 1 << 16


def period_of(convention: str) -> float:
    try:
        return _PERIODS[convention]
    except KeyError:
        raise ValueError(f"unknown torus convention {convention!r}") from None


class TrigPolynomial:
    """Complex trigonometric polynomial sum_xi c_xi e(x . xi) on a torus.

    No symmetry is imposed; see :class:`Eigenfunction` for the real case.
    """

    def __init__(self, freqs, amps, convention: str = UNIT):
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, 2)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if len(freqs) != len(amps):
            raise PreconditionError("frequency and amplitude arrays differ in length")
        if len({tuple(f) for f in freqs.tolist()}) != len(freqs):
            raise PreconditionError("duplicate frequencies")
        self.freqs = freqs
        self.amps = amps
        self.convention = convention
        self.period = period_of(convention)
        self._scale = 2 * math.pi / self.period

    @property
    def amplitude(self) -> float:
        return float(np.abs(self.amps).max()) if len(self.amps) else 0.0

    def coefficient(self, xi) -> complex:
        for f, a in zip(self.freqs.tolist(), self.amps):
            if tuple(f) == tuple(xi):
                return complex(a)
        return 0j

    def _phase(self, pts):
        return self._scale * (pts @ self.freqs.T.astype(float))

    def evaluate_complex(self, x) -> np.ndarray | complex:
        pts = np.asarray(x, dtype=float)
        flat = pts.reshape(-1, 2)
        out = np.empty(len(flat), dtype=complex)
        for s in range(0, len(flat), _CHUNK):
            out[s:s + _CHUNK] = np.exp(1j * self._phase(flat[s:s + _CHUNK])) @ self.amps
        return out.reshape(pts.shape[:-1]) if pts.ndim > 1 else complex(out[0])

    def abs_on_grid(self, n: int, offset=(0.0, 0.0)) -> np.ndarray:
        """|psi| on the n x n grid offset + period * (i, j) / n."""
        return np.abs(self.grid_complex(n, offset))

    def grid_complex(self, n: int, offset=(0.0, 0.0), rows: slice | None = None) -> np.ndarray:
        xs, ys = _grid_axes(n, self.period, offset)
        if rows is not None:
            xs = xs[rows]
        A = np.exp(1j * self._scale * np.outer(xs, self.freqs[:, 0]))
        B = np.exp(1j * self._scale * np.outer(ys, self.freqs[:, 1]))
        return (A * self.amps) @ B.T

    def sup_norm_estimate(self, per_wavelength: int = 20) -> float:
        lam = math.sqrt(max(float((self.freqs**2).sum(1).max()), 1.0))
        n = max(8, int(math.ceil(per_wavelength * lam)))
        return float(max(np.abs(self.grid_complex(n, rows=sl)).max()
                         for sl in _row_chunks(n)))


def _grid_axes(n: int, period: float, offset=(0.0, 0.0)):
    h = period / n
    return offset[0] + h * np.arange(n), offset[1] + h * np.arange(n)


def _row_chunks(n: int, budget: int = 1 << 22):
    step = max(1, budget // max(n, 1))
    for s in range(0, n, step):
        yield slice(s, min(n, s + step))


def _half_mask(freqs: np.ndarray) -> np.ndarray:
    """Select one of each antipodal pair {xi, -xi}."""
    a, b = freqs[:, 0], freqs[:, 1]
    return (a > 0) | ((a == 0) & (b > 0))


class Eigenfunction(TrigPolynomial):
    """Real eigenfunction with a_{-xi} = conj(a_xi).

    Only one frequency of each antipodal pair is used for evaluation, so
    values are real by construction.
    """

    def __init__(self, E: int, coefficients: Mapping, convention: str = UNIT,
                 symmetry_tol: float = 1e-12):
        E = int(E)
        if E < 1:
            raise PreconditionError("E must be positive")
        coeffs = {(int(k[0]), int(k[1])): complex(v) for k, v in coefficients.items()}
        for xi in coeffs:
            if xi[0] ** 2 + xi[1] ** 2 != E:
                raise PreconditionError(f"frequency {xi} is not on |xi|^2 = {E}")
        scale = max((abs(v) for v in coeffs.values()), default=0.0)
        for xi, v in coeffs.items():
            w = coeffs.get((-xi[0], -xi[1]), 0j)
            if abs(w - v.conjugate()) > symmetry_tol * max(scale, 1e-300):
                raise PreconditionError(
                    f"a_(-xi) != conj(a_xi) at xi = {xi}: {w} vs {v.conjugate()}")
        # rebuild exactly symmetric from the half set
        items = sorted((xi, v) for xi, v in coeffs.items()
                       if (xi[0] > 0 or (xi[0] == 0 and xi[1] > 0)) and v != 0)
        freqs = [xi for xi, _ in items] + [(-xi[0], -xi[1]) for xi, _ in items]
        amps = [v for _, v in items] + [v.conjugate() for _, v in items]
        super().__init__(np.array(freqs, dtype=np.int64).reshape(-1, 2), amps, convention)
        self.E = E
        self.lam = math.sqrt(E)
        hm = _half_mask(self.freqs)
        self._hfreq = self.freqs[hm].astype(float)
        self._hamp = self.amps[hm]

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[Sequence[int], complex]], convention: str = UNIT):
        """Build from (xi, a_xi) pairs given for one member of each antipodal pair."""
        coeffs = {}
        E = None
        for xi, a in terms:
            xi = (int(xi[0]), int(xi[1]))
            n = xi[0] ** 2 + xi[1] ** 2
            E = n if E is None else E
            if n != E:
                raise PreconditionError("terms do not share one eigenvalue")
            coeffs[xi] = coeffs.get(xi, 0) + complex(a)
            neg = (-xi[0], -xi[1])
            coeffs[neg] = coeffs.get(neg, 0) + complex(a).conjugate()
        if E is None:
            raise PreconditionError("no terms given")
        return cls(E, coeffs, convention)

    @classmethod
    def from_sincos(cls, terms: Sequence[tuple[str, float, Sequence[int]]], convention: str = TWO_PI):
        """Build from real terms (kind, coef, k) meaning coef * kind(k . x)."""
        coeffs: dict[tuple[int, int], complex] = {}
        E = None
        for kind, coef, k in terms:
            k = (int(k[0]), int(k[1]))
            n = k[0] ** 2 + k[1] ** 2
            E = n if E is None else E
            if n != E:
                raise PreconditionError(f"term {kind}{k} has |k|^2 = {n}, expected {E}")
            neg = (-k[0], -k[1])
            if kind == "cos":
                a = coef / 2
                coeffs[k] = coeffs.get(k, 0) + a
                coeffs[neg] = coeffs.get(neg, 0) + a
            elif kind == "sin":
                coeffs[k] = coeffs.get(k, 0) - 0.5j * coef
                coeffs[neg] = coeffs.get(neg, 0) + 0.5j * coef
            else:
                raise ValueError(f"unknown term kind {kind!r}")
        if E is None:
            raise PreconditionError("no terms given")
        coeffs = {k: v for k, v in coeffs.items() if v != 0}
        return cls(E, coeffs, convention)

    @classmethod
    def from_expression(cls, text: str, convention: str = TWO_PI):
        """Parse sums like ``cos(4x - 7y) + 0.5*sin(8x-y)``."""
        return cls.from_sincos(parse_trig_terms(text), convention)

    # -- evaluation -----------------------------------------------------------

    @property
    def suggested_resolution(self) -> float:
        """One wavelength period / lambda."""
        return self.period / self.lam

    def _hphase(self, flat):
        return self._scale * (flat @ self._hfreq.T)

    def _jet(self, x, order: int):
        """(phi, grad, hessian) up to ``order`` from one complex exponential per term."""
        f = self._hfreq
        s = self._scale
        outer = np.einsum("hi,hj->hij", f, f).reshape(len(f), 4)

        def fn(th):
            U = np.exp(1j * th) * self._hamp
            parts = [2 * U.real.sum(-1)]
            if order >= 1:
                parts.append(-2 * s * (U.imag @ f))
            if order >= 2:
                parts.append((-2 * s * s * (U.real @ outer)).reshape(-1, 2, 2))
            return parts

        pts = np.asarray(x, dtype=float)
        flat = pts.reshape(-1, 2)
        chunks = [fn(self._hphase(flat[k:k + _CHUNK])) for k in range(0, len(flat), _CHUNK)]
        if not chunks:
            chunks = [fn(np.zeros((0, len(self._hamp))))]
        out = []
        for i in range(order + 1):
            a = np.concatenate([c[i] for c in chunks], axis=0)
            out.append(a.reshape(pts.shape[:-1] + a.shape[1:]))
        return out

    def evaluate(self, x):
        """phi(x); x has shape (..., 2)."""
        out = self._jet(x, 0)[0]
        return float(out) if np.ndim(out) == 0 else out

    def gradient(self, x):
        return self._jet(x, 1)[1]

    def hessian(self, x):
        return self._jet(x, 2)[2]

    def value_and_gradient(self, x):
        v, g = self._jet(x, 1)
        return (float(v) if np.ndim(v) == 0 else v), g

    def values_and_derivatives(self, x):
        v, g, H = self._jet(x, 2)
        return (float(v) if np.ndim(v) == 0 else v), g, H

    def grid(self, n: int, offset=(0.0, 0.0), rows: slice | None = None) -> np.ndarray:
        """phi on the n x n grid offset + period * (i, j) / n, indexed [i, j]."""
        xs, ys = _grid_axes(n, self.period, offset)
        if rows is not None:
            xs = xs[rows]
        A = np.exp(1j * self._scale * np.outer(xs, self._hfreq[:, 0]))
        B = np.exp(1j * self._scale * np.outer(ys, self._hfreq[:, 1]))
        return 2 * ((A * self._hamp) @ B.T).real

    def scaled(self, c: float) -> "Eigenfunction":
        return Eigenfunction(self.E, {tuple(k): c * v for k, v in zip(self.freqs.tolist(), self.amps)},
                             self.convention)

    def with_convention(self, convention: str) -> "Eigenfunction":
        return Eigenfunction(self.E, self.coefficients(), convention)

    def coefficients(self) -> dict[tuple[int, int], complex]:
        return {tuple(k): complex(v) for k, v in zip(self.freqs.tolist(), self.amps)}

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        terms = [{"xi": [int(k[0]), int(k[1])], "re": float(v.real), "im": float(v.imag)}
                 for k, v in sorted(self.coefficients().items())]
        return {"E": self.E, "convention": self.convention, "terms": terms}

    @classmethod
    def from_json(cls, doc) -> "Eigenfunction":
        if isinstance(doc, str):
            doc = json.loads(doc)
        convention = doc.get("convention", UNIT)
        if "terms" in doc:
            coeffs = {tuple(t["xi"]): complex(t.get("re", 0.0), t.get("im", 0.0)) for t in doc["terms"]}
            E = int(doc.get("E") or next(iter(k[0] ** 2 + k[1] ** 2 for k in coeffs)))
            return cls(E, coeffs, convention)
        if "sincos" in doc:
            terms = [(t["kind"], float(t.get("coef", 1.0)), t["k"]) for t in doc["sincos"]]
            ef = cls.from_sincos(terms, doc.get("convention", TWO_PI))
            if "E" in doc and int(doc["E"]) != ef.E:
                raise PreconditionError("declared E disagrees with the term frequencies")
            return ef
        if "expression" in doc:
            return cls.from_expression(doc["expression"], doc.get("convention", TWO_PI))
        raise PreconditionError("eigenfunction JSON needs 'terms', 'sincos' or 'expression'")

    def __repr__(self):
        return f"Eigenfunction(E={self.E}, terms={len(self.amps)}, convention={self.convention!r})"


_TERM = re.compile(
    r"\s*([+-]?)\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*?\s*)?(sin|cos)\s*\(([^()]*)\)")
_LIN = re.compile(r"\s*([+-]?)\s*(\d*)\s*\*?\s*([xy])")


def _parse_linear(text: str) -> tuple[int, int]:
    kx = ky = 0
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _LIN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse linear form {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = int(m.group(2)) if m.group(2) else 1
        if m.group(3) == "x":
            kx += sign * c
        else:
            ky += sign * c
        pos = m.end()
    return kx, ky


def parse_trig_terms(text: str) -> list[tuple[str, float, tuple[int, int]]]:
    """``'cos(4x-7y)+2*sin(8x-y)'`` -> [('cos', 1.0, (4, -7)), ('sin', 2.0, (8, -1))]."""
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise PreconditionError(f"cannot parse trigonometric sum at {text[pos:]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        out.append((m.group(3), sign * coef, _parse_linear(m.group(4))))
        pos = m.end()
    return out


# two E = 65 examples (2 pi convention): a smooth nodal set and one with 32 crossings
SMOOTH_E65 = "cos(4x - 7y) + sin(8x - y) + sin(4x + 7y)"
CROSSING_E65 = "sin(4x+7y) + sin(4x-7y) + sin(8x+y) + sin(8x-y)"

GAUSSIAN = "gaussian"
UNIMODULAR = "unimodular"
_MODEL_IDS = {GAUSSIAN: 0, UNIMODULAR: 1}


def random_eigenfunction(E: int, seed: int, model: str = GAUSSIAN,
                         convention: str = UNIT) -> Eigenfunction:
    """Random element of the E-eigenspace with ||phi||_2 = 1.

    Coefficients are drawn on one member of each antipodal pair and mirrored.
    The stream depends only on (E, seed, model).
    """
    if model not in _MODEL_IDS:
        raise ValueError(f"unknown ensemble {model!r}")
    circle = enumerate_circle(E)
    if len(circle) == 0:
        raise PreconditionError(f"E = {E} is not a sum of two squares: empty eigenspace")
    half = [p for p in circle.points if p.a > 0 or (p.a == 0 and p.b > 0)]
    half.sort()
    rng = np.random.default_rng([int(seed), int(E), _MODEL_IDS[model]])
    if model == GAUSSIAN:
        c = (rng.standard_normal(len(half)) + 1j * rng.standard_normal(len(half))) / math.sqrt(2)
    else:
        c = np.exp(2j * math.pi * rng.random(len(half)))
    c = c / math.sqrt(2 * float(np.sum(np.abs(c) ** 2)))
    return Eigenfunction.from_terms([((p.a, p.b), v) for p, v in zip(half, c)], convention)


def l2_norm(phi: TrigPolynomial) -> float:
    """L2 norm w.r.t. normalized Haar measure (Parseval)."""
    return float(math.sqrt(np.sum(np.abs(phi.amps) ** 2)))


def l2_norm_quadrature(phi: Eigenfunction, n: int | None = None) -> float:
    """Midpoint-rule estimate of ||phi||_2; a cross-check for :func:`l2_norm`."""
    if n is None:
        n = max(16, int(math.ceil(4 * phi.lam)))
    h = phi.period / n
    total = 0.0
    for sl in _row_chunks(n):
        total += float(np.sum(phi.grid(n, (h / 2, h / 2), rows=sl) ** 2))
    return math.sqrt(total / n**2)


@dataclass
class ExponentialSum1D:
    """f(t) = sum_j a_j e(xi_j t) with strictly increasing real frequencies."""

    frequencies: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float).reshape(-1)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if len(self.frequencies) != len(self.amplitudes):
            raise PreconditionError("frequency/amplitude length mismatch")
        if len(self.frequencies) == 0:
            raise PreconditionError("empty exponential sum")
        if np.any(np.diff(self.frequencies) <= 0):
            raise PreconditionError("frequencies must be strictly increasing")

    @property
    def J(self) -> int:
        return len(self.frequencies)

    @property
    def spread(self) -> float:
        return float(self.frequencies[-1] - self.frequencies[0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.exp(2j * math.pi * np.multiply.outer(t, self.frequencies)) @ self.amplitudes
        return out

    def abs(self, t):
        return np.abs(self(t))
