"""Exact arithmetic in the Gaussian integers Z[i]."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError


@dataclass(frozen=True)
class GaussianInteger:
    re: int
    im: int = 0

    def __post_init__(self):
        if not isinstance(self.re, int) or not isinstance(self.im, int):
            raise TypeError("GaussianInteger components must be Python ints")

    @classmethod
    def coerce(cls, value) -> "GaussianInteger":
        if isinstance(value, GaussianInteger):
            return value
        if isinstance(value, int):
            return cls(value, 0)
        if isinstance(value, complex):
            re, im = int(value.real), int(value.imag)
            if complex(re, im) != value:
                raise ValueError(f"{value!r} is not a Gaussian integer")
            return cls(re, im)
        a, b = value
        return cls(int(a), int(b))

    def __add__(self, other):
        o = GaussianInteger.coerce(other)
        return GaussianInteger(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianInteger.coerce(other)
        return GaussianInteger(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianInteger.coerce(other) - self

    def __neg__(self):
        return GaussianInteger(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianInteger.coerce(other)
        return GaussianInteger(self.re * o.re - self.im * o.im,
                               self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not Gaussian integers in general")
        result = GaussianInteger(1, 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "GaussianInteger":
        return GaussianInteger(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def exact_div(self, other) -> "GaussianInteger":
        """Divide, raising if the quotient is not a Gaussian integer."""
        o = GaussianInteger.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian integer")
        num = self * o.conj()
        if num.re % n or num.im % n:
            raise ArithmeticError(f"{self} is not divisible by {o}")
        return GaussianInteger(num.re // n, num.im // n)

    def __complex__(self):
        return complex(self.re, self.im)

    def __repr__(self):
        return f"GaussianInteger({self.re}, {self.im})"


def det_bareiss(matrix: Sequence[Sequence[GaussianInteger]]) -> GaussianInteger:
    """Exact determinant by fraction-free Bareiss elimination over Z[i]."""
    m = [[GaussianInteger.coerce(v) for v in row] for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise PreconditionError("matrix must be square")
    if n == 0:
        return GaussianInteger(1, 0)
    sign = 1
    prev = GaussianInteger(1, 0)
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not m[r][k].is_zero()), None)
            if swap is None:
                return GaussianInteger(0, 0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]).exact_div(prev)
            m[i][k] = GaussianInteger(0, 0)
        prev = pivot
    det = m[n - 1][n - 1]
    return det if sign == 1 else -det


def det_leibniz(matrix: Sequence[Sequence[GaussianInteger]]) -> GaussianInteger:
    """Permutation-expansion determinant; exponential cost, used as a cross-check."""
    from itertools import permutations

    m = [[GaussianInteger.coerce(v) for v in row] for row in matrix]
    n = len(m)
    total = GaussianInteger(0, 0)
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = GaussianInteger(1, 0)
        for row, col in enumerate(perm):
            term = term * m[row][col]
        total = total - term if inversions % 2 else total + term
    return total


def sqrt_minus_one_mod(p: int) -> int:
    """Return t with t*t = -1 (mod p) for a prime p = 1 (mod 4)."""
    if p % 4 != 1:
        raise PreconditionError(f"-1 is not a square modulo {p}")
    for c in range(2, p):
        t = pow(c, (p - 1) // 4, p)
        if t * t % p == p - 1:
            return t
    raise ArithmeticError(f"no square root of -1 found modulo {p}; is {p} prime?")


def prime_two_squares(p: int) -> tuple[int, int]:
    """Write a prime p = 2 or p = 1 (mod 4) as x^2 + y^2 with x > y >= 0 (Hermite-Serret)."""
    if p == 2:
        return 1, 1
    a, b = p, sqrt_minus_one_mod(p)
    bound = math.isqrt(p)
    while b > bound:
        a, b = b, a % b
    x, y = b, math.isqrt(p - b * b)
    if x * x + y * y != p:
        raise ArithmeticError(f"{p} is not a sum of two squares")
    return max(x, y), min(x, y)
