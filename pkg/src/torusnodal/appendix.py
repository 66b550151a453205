"""A regular nodal arc whose higher derivatives are not controlled.

phi(x, y) = sin(k y + x) + eps sin(k y - x) + delta sin(y + k x) is an
eigenfunction with E = 1 + k^2 (2 pi period).  Near x = -pi/4 the branch
y(x) with k y + x ~ 0 is convex with curvature ~ 4 eps / k, while the
delta term drives y'''' at frequency k.

Derivatives of y come from order-by-order implicit differentiation of
phi(x, y(x)) = 0 using Taylor jets, so the same code runs in double
precision and, given ``dps``, in mpmath arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import PreconditionError

HALF_WIDTH = 1e-3        # I = -pi/4 + [-HALF_WIDTH, HALF_WIDTH]
ORDER = 4


class _FloatOps:
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)

    @staticmethod
    def num(v):
        return float(v)


class _MpOps:
    sin = staticmethod(mpmath.sin)
    cos = staticmethod(mpmath.cos)

    @staticmethod
    def num(v):
        return mpmath.mpf(v)


def _mul(a, b, n):
    out = [0 * a[0]] * (n + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(n + 1 - i):
            out[i + j] = out[i + j] + ai * b[j]
    return out


def _sin_series(u, n, ops):
    """Taylor coefficients of sin(u(h)) up to h^n from those of u."""
    s = [0 * u[0]] + list(u[1:n + 1])
    cos_s = [0 * u[0]] * (n + 1)
    sin_s = [0 * u[0]] * (n + 1)
    power = [1 + 0 * u[0]] + [0 * u[0]] * n
    fact = 1
    for m in range(n + 1):
        if m:
            power = _mul(power, s, n)
            fact *= m
        sign = -1 if (m // 2) % 2 else 1
        tgt = cos_s if m % 2 == 0 else sin_s
        for j in range(n + 1):
            tgt[j] = tgt[j] + sign * power[j] / fact
    su, cu = ops.sin(u[0]), ops.cos(u[0])
    return [su * c + cu * t for c, t in zip(cos_s, sin_s)]


@dataclass
class AppendixExample:
    k: int
    eps: float = 1e-3
    delta: float = 1e-9
    dps: int | None = None      # mpmath working precision; None means double
    _ops: object = field(init=False, repr=False)

    def __post_init__(self):
        if self.k < 2:
            raise PreconditionError("k must be at least 2")
        if not (0 <= self.eps < 0.1 and 0 <= self.delta < 0.1):
            raise PreconditionError("eps and delta must be small for the branch to be isolated")
        self._ops = _MpOps if self.dps else _FloatOps

    @property
    def E(self) -> int:
        return 1 + self.k * self.k

    def terms(self):
        """(amplitude, p, q) with phi = sum A sin(p y + q x)."""
        o = self._ops
        return [(o.num(1), self.k, 1), (o.num(self.eps), self.k, -1), (o.num(self.delta), 1, self.k)]

    def phi(self, x, y):
        o = self._ops
        return sum(A * o.sin(p * y + q * x) for A, p, q in self.terms())

    def phi_y(self, x, y):
        o = self._ops
        return sum(A * p * o.cos(p * y + q * x) for A, p, q in self.terms())

    def interval(self, half_width: float = HALF_WIDTH) -> tuple[float, float]:
        return (-math.pi / 4 - half_width, -math.pi / 4 + half_width)

    def solve_y(self, x):
        """The root y of phi(x, .) with |k y + x| < 1/2."""
        k = self.k
        if self.dps:
            with mpmath.workdps(self.dps):
                x = mpmath.mpf(x)
                a, b = (-x - mpmath.mpf(1) / 2) / k, (-x + mpmath.mpf(1) / 2) / k
                y = mpmath.findroot(lambda t: self.phi(x, t), (a, b), solver="anderson")
                y = y - self.phi(x, y) / self.phi_y(x, y)
                return +y
        x = float(x)
        a, b = (-x - 0.5) / k, (-x + 0.5) / k
        fa, fb = self.phi(x, a), self.phi(x, b)
        if fa * fb > 0:
            raise PreconditionError(f"no sign change bracketing the branch at x = {x}")
        y = brentq(lambda t: self.phi(x, t), a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        return y - self.phi(x, y) / self.phi_y(x, y)

    def derivatives(self, x, order: int = ORDER):
        """[y, y', ..., y^(order)] at x."""
        if self.dps:
            with mpmath.workdps(self.dps):
                return self._derivatives(mpmath.mpf(x), order)
        return self._derivatives(float(x), order)

    def _derivatives(self, x, order):
        o = self._ops
        t = [self.solve_y(x)] + [0 * o.num(0)] * order
        Fy = self.phi_y(x, t[0])
        if abs(Fy) < 1e-8:
            raise PreconditionError("phi_y vanishes: the branch is not a graph over x here")
        for n in range(1, order + 1):
            t[n] = 0 * t[0]
            R = 0
            for A, p, q in self.terms():
                u = [p * c for c in t]
                u[0] = u[0] + q * x
                u[1] = u[1] + q
                R = R + A * _sin_series(u, n, o)[n]
            t[n] = -R / Fy
        return [c * math.factorial(j) for j, c in enumerate(t)]

    def derivative_table(self, samples: int, half_width: float = HALF_WIDTH, order: int = ORDER) -> np.ndarray:
        """(samples, order + 2) float array: x, y, y', ..., over the interval."""
        lo, hi = self.interval(half_width)
        xs = np.linspace(lo, hi, samples)
        rows = []
        for x in xs:
            d = self.derivatives(x, order)
            rows.append([float(x)] + [float(v) for v in d])
        return np.array(rows)

    # leading-order predictions

    def slope_prediction(self) -> float:
        return -1.0 / self.k

    def slope_error_scale(self) -> float:
        return self.eps / self.k + self.delta

    def second_derivative_prediction(self, x):
        return -(4 * self.eps / self.k) * np.sin(2 * np.asarray(x, dtype=float))


def delta_for(k: int, delta_ref: float = 1e-9, k_ref: int = 40) -> float:
    """delta scaled as k^-2 so that delta k^2 stays fixed across a k scan."""
    return delta_ref * (k_ref / k) ** 2


def fourth_derivative_component(k: int, eps: float, delta: float, samples: int,
                                half_width: float = HALF_WIDTH, dps: int | None = None) -> np.ndarray:
    """The delta-driven part of y'''': y''''(delta) - y''''(0) on the interval grid."""
    full = AppendixExample(k, eps, delta, dps).derivative_table(samples, half_width)
    base = AppendixExample(k, eps, 0.0, dps).derivative_table(samples, half_width)
    return full[:, 5] - base[:, 5]
