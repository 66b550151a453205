"""Scalar fields on a square torus that the nodal pipeline can consume.

Any object with ``evaluate``, ``gradient``, ``hessian`` (vectorized over a
trailing axis of length 2), ``period``, ``amplitude`` and
``suggested_resolution`` works; :class:`~torusnodal.eigenfunction.Eigenfunction`
is the main one.  The analytic fields here exist for testing.
"""

from __future__ import annotations

import math
from typing import Callable, Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class ScalarField(Protocol):
    period: float

    @property
    def amplitude(self) -> float: ...

    @property
    def suggested_resolution(self) -> float: ...

    def evaluate(self, x): ...

    def gradient(self, x): ...

    def hessian(self, x): ...


def gradient_scale(field) -> float:
    """Typical |grad phi| on the nodal set: amplitude per wavelength."""
    return field.amplitude * field.period / field.suggested_resolution


def evaluate_grid(field, n: int, offset=(0.0, 0.0)) -> np.ndarray:
    """field on offset + period * (i, j) / n, indexed [i, j]."""
    if hasattr(field, "grid"):
        return field.grid(n, offset)
    h = field.period / n
    xs = offset[0] + h * np.arange(n)
    ys = offset[1] + h * np.arange(n)
    out = np.empty((n, n))
    step = max(1, (1 << 20) // n)
    for s in range(0, n, step):
        X, Y = np.meshgrid(xs[s:s + step], ys, indexing="ij")
        out[s:s + step] = field.evaluate(np.stack([X, Y], axis=-1))
    return out


class CircleField:
    """phi(x) = |x - c|^2 - r^2 with the displacement taken modulo the period.

    The nodal set is the circle of radius r about c, provided r < period / 2.
    """

    def __init__(self, center=(0.5, 0.5), radius: float = 0.25, period: float = 1.0):
        if not 0 < radius < period / 2:
            raise ValueError("radius must lie in (0, period/2)")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.period = float(period)

    @property
    def amplitude(self) -> float:
        return self.radius**2

    @property
    def suggested_resolution(self) -> float:
        return self.radius

    def _d(self, x):
        x = np.asarray(x, dtype=float)
        P = self.period
        return (x - self.center + P / 2) % P - P / 2

    def evaluate(self, x):
        d = self._d(x)
        out = (d**2).sum(-1) - self.radius**2
        return float(out) if np.ndim(out) == 0 else out

    def gradient(self, x):
        return 2 * self._d(x)

    def hessian(self, x):
        d = self._d(x)
        return np.broadcast_to(2 * np.eye(2), d.shape[:-1] + (2, 2)).copy()


class CallableField:
    """Wrap plain vectorized callables as a field."""

    def __init__(self, f: Callable, grad: Callable, hess: Callable, *, period: float = 1.0,
                 amplitude: float = 1.0, resolution: float = 0.1):
        self._f, self._g, self._h = f, grad, hess
        self.period = float(period)
        self._amp = float(amplitude)
        self._res = float(resolution)

    @property
    def amplitude(self) -> float:
        return self._amp

    @property
    def suggested_resolution(self) -> float:
        return self._res

    def evaluate(self, x):
        out = self._f(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def gradient(self, x):
        return np.asarray(self._g(np.asarray(x, dtype=float)))

    def hessian(self, x):
        return np.asarray(self._h(np.asarray(x, dtype=float)))


def shifted_cosine_field(c: float = 2.0) -> CallableField:
    """c + cos(2 pi x1); nodal set empty for c > 1."""
    tau = 2 * math.pi

    def f(x):
        return c + np.cos(tau * x[..., 0])

    def g(x):
        out = np.zeros(x.shape)
        out[..., 0] = -tau * np.sin(tau * x[..., 0])
        return out

    def h(x):
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = -tau**2 * np.cos(tau * x[..., 0])
        return out

    return CallableField(f, g, h, amplitude=1.0, resolution=1.0)
