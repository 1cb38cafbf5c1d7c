"""Compactly supported Wendland radial profiles as exact piecewise polynomials.

The profile for state dimension ``d`` and smoothness index ``k`` is built by
applying the dimension-walk integral operator ``k`` times to a truncated power
function, yielding a polynomial on [0, 1] that vanishes identically beyond 1.
All construction happens in exact rational arithmetic; floating point enters
only at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

__all__ = [
    "PiecewisePoly1D",
    "truncated_power",
    "dimension_walk",
    "wendland_profile",
]


def _trim(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    n = len(coeffs)
    while n > 1 and coeffs[n - 1] == 0:
        n -= 1
    return coeffs[:n]


@dataclass(frozen=True)
class PiecewisePoly1D:
    """Polynomial p(r) = sum_j coeffs[j] * r**j on [0, 1], identically 0 for r > 1.

    Coefficients are exact rationals; trailing zeros are trimmed so that
    ``degree == len(coeffs) - 1``. Evaluation is only defined for r >= 0.
    """

    coeffs: tuple[Fraction, ...]
    _float_coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = _trim(tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(
            self, "_float_coeffs", np.array([float(c) for c in coeffs])
        )

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, r):
        """Horner evaluation; exactly 0 for r > 1. Rejects negative r."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("radial profile is only defined for r >= 0")
        acc = np.zeros_like(r)
        for c in self._float_coeffs[::-1]:
            acc = acc * r + c
        result = np.where(r > 1.0, 0.0, acc)
        return float(result) if result.ndim == 0 else result


def truncated_power(ell: int) -> PiecewisePoly1D:
    """(1 - r)**ell on [0, 1] via binomial expansion; ell >= 0."""
    if ell < 0:
        raise ValueError("exponent must be nonnegative")
    coeffs = tuple(Fraction((-1) ** j * comb(ell, j)) for j in range(ell + 1))
    return PiecewisePoly1D(coeffs)


def dimension_walk(p: PiecewisePoly1D) -> PiecewisePoly1D:
    """Integral operator q(r) = int_r^1 t * p(t) dt, computed exactly.

    The upper limit is 1 because p vanishes beyond its support. The result is
    again a polynomial on [0, 1] with q(1) = 0 and degree(q) = degree(p) + 2.
    """
    # t*p(t) has coefficients c_j at degree j+1; its antiderivative P has
    # c_j/(j+2) at degree j+2, so q(r) = P(1) - P(r).
    shifted = {j + 2: c / (j + 2) for j, c in enumerate(p.coeffs)}
    total = sum(shifted.values(), Fraction(0))
    coeffs = [Fraction(0)] * (p.degree + 3)
    coeffs[0] = total
    for j, c in shifted.items():
        coeffs[j] = -c
    return PiecewisePoly1D(tuple(coeffs))


@lru_cache(maxsize=None)
def wendland_profile(d: int, k: int) -> PiecewisePoly1D:
    """Wendland profile for dimension d >= 1 and smoothness index k >= 0.

    Applies the dimension walk k times to the truncated power of exponent
    floor(d/2 + k + 1). The result is positive definite in dimension d and
    its reproducing space matches a Sobolev space of order d/2 + k.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if k < 0:
        raise ValueError("smoothness index must be nonnegative")
    p = truncated_power(d // 2 + k + 1)
    for _ in range(k):
        p = dimension_walk(p)
    return p
