"""Finite-rank deformations: the eigenvalue equation outside the bulk.

For a Hermitian H and a rank-k perturbation C = sum_i theta_i u_i u_i*
(orthonormal u_i, nonzero theta_i in nondecreasing order), any eigenvalue
of H + C lying outside the spectrum of H is a zero of

    f(x) = det( I_k - ( theta_i <u_i, (x - H)^{-1} u_j> )_{i,j} ),

and the top eigenvalue of H + C is the largest such zero.  As the bulk
converges to the semicircle, f converges (uniformly on compacts of
(2, inf)) to the limit function

    prod_i (1 - theta_i G(x)),

whose largest zero exists iff max theta > 1 and then equals
G^{-1}(1 / max theta) = theta + 1/theta: the outlier transition.

Resolvent columns are obtained from k linear solves against the positive
definite shift x*I - H; the explicit inverse is reserved for test oracles.
All operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .model import largest_eigenvalue
from .semicircle import stieltjes

__all__ = [
    "EigenEquation",
    "SpikeSpec",
    "bbp_outlier",
    "eigen_equation_matrix",
    "f_N",
    "isotropy_gap",
    "largest_zero",
    "limit_f",
    "mu_eps",
    "spike_largest_zero",
]

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SpikeSpec:
    """Rank-k perturbation data: strengths and orthonormal directions."""

    thetas: tuple[float, ...]
    vectors: np.ndarray  # N x k, columns orthonormal

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        if not thetas:
            raise ValueError("at least one spike is required")
        if any(t == 0.0 for t in thetas):
            raise ValueError("spike strengths must be nonzero")
        if any(thetas[i] > thetas[i + 1] for i in range(len(thetas) - 1)):
            raise ValueError("spike strengths must be nondecreasing")
        U = np.asarray(self.vectors)
        if U.ndim != 2 or U.shape[1] != len(thetas):
            raise ValueError("vectors must be an N x k array matching the spikes")
        gram = U.conj().T @ U
        if np.max(np.abs(gram - np.eye(len(thetas)))) > _ORTHO_TOL:
            raise ValueError("spike vectors are not orthonormal within 1e-10")
        object.__setattr__(self, "vectors", U)

    @property
    def k(self) -> int:
        return len(self.thetas)

    def matrix(self) -> np.ndarray:
        """The dense perturbation sum_i theta_i u_i u_i*."""
        U = self.vectors
        return (U * np.asarray(self.thetas)) @ U.conj().T

    @classmethod
    def from_matrix(cls, C: np.ndarray, tol: float = 1e-10) -> "SpikeSpec":
        """Extract the nonzero eigenpairs of a Hermitian perturbation."""
        C = np.asarray(C)
        w, V = np.linalg.eigh((C + C.conj().T) / 2.0)
        keep = np.abs(w) > tol * max(1.0, float(np.max(np.abs(w))))
        if not np.any(keep):
            raise ValueError("perturbation is numerically zero")
        order = np.argsort(w[keep])
        return cls(thetas=tuple(w[keep][order]), vectors=V[:, keep][:, order])


@dataclass(frozen=True)
class EigenEquation:
    """A Hermitian background H with a spike, plus the domain guard lambda_max(H)."""

    H: np.ndarray
    spike: SpikeSpec
    lam_max: float = field(init=False)

    def __post_init__(self) -> None:
        H = np.asarray(self.H)
        if H.shape[0] != self.spike.vectors.shape[0]:
            raise ValueError("H and spike vectors have mismatched dimension")
        object.__setattr__(self, "lam_max", largest_eigenvalue(H))

    def margin(self) -> float:
        return 1e-9 * (1.0 + abs(self.lam_max))


def eigen_equation_matrix(eq: EigenEquation, x: float) -> np.ndarray:
    """The k x k matrix I - (theta_i <u_i, (x - H)^{-1} u_j>).

    Requires x above the spectrum of H by the relative margin; closer
    evaluations are rejected rather than extrapolated.
    """
    if not x > eq.lam_max + eq.margin():
        raise ValueError(
            f"x={x!r} is inside or too close to the spectrum (lambda_max={eq.lam_max!r})")
    H = np.asarray(eq.H)
    U = eq.spike.vectors
    shifted = x * np.eye(H.shape[0], dtype=H.dtype) - H
    Y = scipy.linalg.solve(shifted, U, assume_a="pos")
    G = U.conj().T @ Y
    return np.eye(eq.spike.k, dtype=G.dtype) - np.asarray(eq.spike.thetas)[:, None] * G


def f_N(eq: EigenEquation, x: float) -> float:
    """Determinant of the eigenvalue-equation matrix; real by congruence.

    Sign changes of x -> f_N(x) above lambda_max(H) bracket the eigenvalues
    of H + C that detach from the bulk.
    """
    det = np.linalg.det(eigen_equation_matrix(eq, x))
    return float(np.real(det))


def limit_f(thetas: Sequence[float], x: float) -> float:
    """Limit equation prod_i (1 - theta_i G(x)) for x > 2."""
    if not x > 2.0:
        raise ValueError(f"limit_f requires x > 2, got {x!r}")
    g = stieltjes(x)
    out = 1.0
    for t in thetas:
        out *= 1.0 - t * g
    return out


def largest_zero(f: Callable[[float], float], bracket: tuple[float, float],
                 grid: int = 2048) -> float | None:
    """Rightmost sign-change zero of f on [lo, hi], refined to 1e-12.

    Scans a grid that is geometrically refined near the left endpoint
    (where a resolvent-based f varies fastest), takes the rightmost sign
    change, and bisects it with Brent's method.  Returns None when the grid
    certifies no sign change.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"invalid bracket {bracket!r}")
    rel = np.geomspace(1e-9, 1.0, grid // 2)
    xs = np.unique(np.concatenate([
        lo + (hi - lo) * rel,
        np.linspace(lo, hi, grid // 2),
    ]))
    fs = np.array([f(x) for x in xs])
    for i in range(len(xs) - 1, -1, -1):
        if fs[i] == 0.0:
            return float(xs[i])
        if i > 0 and fs[i - 1] * fs[i] < 0.0:
            root = scipy.optimize.brentq(f, xs[i - 1], xs[i], xtol=1e-12)
            return float(root)
    return None


def spike_largest_zero(eq: EigenEquation, hi: float | None = None) -> float | None:
    """Largest zero of f_N above the spectrum of H.

    The default bracket starts just above lambda_max(H) and ends at the
    Weyl bound lambda_max(H) + max(theta) + 1.
    """
    lo = eq.lam_max + max(10.0 * eq.margin(), 1e-7)
    if hi is None:
        hi = eq.lam_max + max(max(eq.spike.thetas), 0.0) + 1.0
    return largest_zero(lambda x: f_N(eq, x), (lo, hi))


def bbp_outlier(theta: float) -> float:
    """Outlier location of a single spike: theta + 1/theta if theta > 1, else 2."""
    if theta > 1.0:
        return theta + 1.0 / theta
    return 2.0


def mu_eps(C: np.ndarray) -> float:
    """The outlier rule applied to the top eigenvalue of a Hermitian C."""
    return bbp_outlier(largest_eigenvalue(C))


def isotropy_gap(H: np.ndarray, u: np.ndarray, v: np.ndarray, x: float,
                 lam_max: float | None = None) -> float:
    """|<u, (x-H)^{-1} v> - <u, v> G(x)|, the isotropic-resolvent defect.

    A convergence diagnostic: for Wigner backgrounds it tends to zero as N
    grows, uniformly over unit vectors.  Requires x above both 2 and the
    spectrum of H.
    """
    H = np.asarray(H)
    u = np.asarray(u)
    v = np.asarray(v)
    for name, w in (("u", u), ("v", v)):
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise ValueError(f"{name} must be a unit vector")
    if lam_max is None:
        lam_max = largest_eigenvalue(H)
    margin = 1e-9 * (1.0 + abs(lam_max))
    if not (x > 2.0 and x > lam_max + margin):
        raise ValueError(f"x={x!r} must exceed max(2, lambda_max={lam_max!r})")
    shifted = x * np.eye(H.shape[0], dtype=H.dtype) - H
    w = scipy.linalg.solve(shifted, v, assume_a="pos")
    return float(abs(np.vdot(u, w) - np.vdot(u, v) * stieltjes(x)))
