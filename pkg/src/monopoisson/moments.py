"""Exact moment polynomials ``m_n(t) = E[(Z_t + t)^n]``.

``m_n - m_{n-1} = n * int_0^t m_{n-1}`` with ``m_0 = 1``; in the basis
``t^k / k!`` the coefficients are the unsigned Stirling numbers of the first
kind ``[n+1, n+1-k]``.  Everything here is exact integer/rational arithmetic;
only :func:`moment_eval` goes to floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

MAX_N = 60


class MomentMethod(enum.Enum):
    RECURSION = "recursion"
    STIRLING = "stirling"


class StirlingTriangle:
    """Unsigned Stirling numbers of the first kind ``[n, k]`` for ``n <= max_n``."""

    def __init__(self, max_n: int = MAX_N):
        if max_n < 0:
            raise ValueError("max_n must be >= 0")
        self.max_n = max_n
        rows = [[1]]
        for n in range(max_n):
            prev = rows[-1] + [0]
            rows.append([(prev[k - 1] if k else 0) + n * prev[k] for k in range(n + 2)])
        self._rows = rows

    def __getitem__(self, nk: tuple[int, int]) -> int:
        n, k = nk
        if not (0 <= n <= self.max_n) or k < 0:
            raise IndexError(f"Stirling index ({n}, {k}) out of range")
        return self._rows[n][k] if k <= n else 0


@lru_cache(maxsize=None)
def _triangle() -> StirlingTriangle:
    return StirlingTriangle(MAX_N + 1)


def stirling(n: int, k: int) -> int:
    if not (0 <= k <= n <= MAX_N + 1):
        raise ValueError(f"stirling({n}, {k}) out of range 0 <= k <= n <= {MAX_N + 1}")
    return _triangle()[n, k]


@dataclass(frozen=True)
class MomentPolynomial:
    """``m_n(t) = sum_k coeffs[k] * t^k / k!``."""

    n: int
    coeffs: tuple[Fraction, ...]

    def power_basis(self) -> tuple[Fraction, ...]:
        return tuple(c / math.factorial(k) for k, c in enumerate(self.coeffs))

    def laplace(self, p: Fraction) -> Fraction:
        """Exact Laplace transform, using ``t^k / k! -> p^{-k-1}``."""
        return sum(c / p ** (k + 1) for k, c in enumerate(self.coeffs))

    def __call__(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.power_basis()):
            acc = acc * t + float(c)
        return acc


def _check_n(n: int, low: int) -> None:
    if not (low <= n <= MAX_N):
        raise ValueError(f"moment order must satisfy {low} <= n <= {MAX_N}, got {n}")


def _by_recursion(n: int) -> MomentPolynomial:
    poly = [Fraction(1)]  # power basis of m_0
    for j in range(1, n + 1):
        integral = [Fraction(0)] + [c / (k + 1) for k, c in enumerate(poly)]
        poly = [a + j * b for a, b in zip(poly + [Fraction(0)], integral)]
    return MomentPolynomial(n, tuple(c * math.factorial(k) for k, c in enumerate(poly)))


def _by_stirling(n: int) -> MomentPolynomial:
    return MomentPolynomial(n, tuple(Fraction(stirling(n + 1, n + 1 - k)) for k in range(n + 1)))


@lru_cache(maxsize=None)
def moment_poly(n: int, method: MomentMethod = MomentMethod.STIRLING) -> MomentPolynomial:
    _check_n(n, 0)
    return _by_recursion(n) if method is MomentMethod.RECURSION else _by_stirling(n)


def moment_eval(n: int, t: float) -> float:
    """``E[(Z_t + t)^n]`` by Horner evaluation of the Stirling form."""
    _check_n(n, 0)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return moment_poly(n)(t)


def laplace_product(n: int, p: Fraction) -> Fraction:
    """``p^{-1} prod_{j=1}^n (1 + j/p)``, the transform the moments must match."""
    out = 1 / Fraction(p)
    for j in range(1, n + 1):
        out *= 1 + Fraction(j) / p
    return out
