"""Closed-form scalar functions of the semicircular law.

The semicircular law sigma_sc has density (1/2pi) * sqrt(4 - t^2) on
[-2, 2].  Its Stieltjes transform

    G(z) = integral of d sigma_sc(t) / (z - t),   z outside [-2, 2],

equals (x - sqrt(x^2 - 4)) / 2 on the real axis x >= 2, is strictly
decreasing there with range (0, 1], and inverts to g -> g + 1/g.  On top of
these sits the heavy-tail rate function

    J(x) = c * G(x)^(-alpha)   for x > 2,
    J(2) = 0,
    J(x) = +inf                for x < 2,

which is discontinuous at 2 with right limit c.

Everything in this module is exact algebra; numerical quadrature of the
defining integral appears only in the test suite as an independent check.
All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "RateFunctionParams",
    "rate_J",
    "semicircle_cdf",
    "semicircle_density",
    "stieltjes",
    "stieltjes_complex",
    "stieltjes_inverse",
]


def semicircle_density(t: float) -> float:
    """Density (1/2pi) sqrt(4 - t^2) for |t| <= 2, zero outside."""
    if abs(t) >= 2.0:
        return 0.0
    return math.sqrt(4.0 - t * t) / (2.0 * math.pi)


def semicircle_cdf(t: float) -> float:
    """Cumulative distribution of the semicircular law."""
    if t <= -2.0:
        return 0.0
    if t >= 2.0:
        return 1.0
    return 0.5 + (t * math.sqrt(4.0 - t * t) + 4.0 * math.asin(t / 2.0)) / (4.0 * math.pi)


def stieltjes(x: float) -> float:
    """Stieltjes transform of the semicircular law on the real axis x >= 2.

    Evaluated as 2 / (x + sqrt(x^2 - 4)), which is algebraically equal to
    (x - sqrt(x^2 - 4)) / 2 but avoids the cancellation of the textbook form
    for large x (needed to keep the inverse round trip at 1e-12).
    """
    if not x >= 2.0:
        raise ValueError(f"stieltjes requires x >= 2, got {x!r}")
    return 2.0 / (x + math.sqrt((x - 2.0) * (x + 2.0)))


def stieltjes_inverse(g: float) -> float:
    """Inverse transform g -> g + 1/g, defined for g in (0, 1]."""
    if not 0.0 < g <= 1.0:
        raise ValueError(f"stieltjes_inverse requires g in (0, 1], got {g!r}")
    return g + 1.0 / g


def stieltjes_complex(z: complex) -> complex:
    """Stieltjes transform at a complex point z outside [-2, 2].

    The square root branch is sqrt(z - 2) * sqrt(z + 2) with principal
    square roots, which is analytic off [-2, 2] and makes G(z) ~ 1/z as
    |z| -> infinity.  Im(G) and Im(z) have opposite signs off the real
    axis, and the real-axis branch for x >= 2 is recovered exactly.
    """
    z = complex(z)
    if z.imag == 0.0 and -2.0 < z.real < 2.0:
        raise ValueError(f"stieltjes_complex requires z outside (-2, 2), got {z!r}")
    root = cmath.sqrt(z - 2.0) * cmath.sqrt(z + 2.0)
    return 2.0 / (z + root)


@dataclass(frozen=True)
class RateFunctionParams:
    """Tail exponent alpha in (0, 2) and variational constant c > 0."""

    alpha: float
    c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie strictly in (0, 2), got {self.alpha!r}")
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise ValueError(f"c must be positive and finite, got {self.c!r}")


def rate_J(x: float, params: RateFunctionParams) -> float:
    """Rate function of the largest-eigenvalue deviations.

    Returns +inf for x < 2, 0 at x = 2 and c * G(x)^(-alpha) for x > 2.
    Nondecreasing on [2, inf) with a jump of height c at 2+.
    """
    if x < 2.0:
        return math.inf
    if x == 2.0:
        return 0.0
    return params.c * stieltjes(x) ** (-params.alpha)
