"""Independent numerical routes used to cross-check closed forms.

Nothing in this module knows the closed-form answers: the quadratic-form
maxima are found by multi-start ascent over a softmax chart of the simplex
(the l^delta sphere is parameterized as y_i = s_i^(1/delta) with s in the
simplex), the Stieltjes transform by adaptive quadrature of its defining
integral, and the top eigenvalue by shifted power iteration.  They are
deliberately slower and dumber than what they check.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

__all__ = [
    "lambda_max_power",
    "max_offdiag_power_rank_one",
    "max_quadform_nonneg_lp",
    "stieltjes_by_quadrature",
]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _ascend(objective, n: int, rng: np.random.Generator, cloud: int, polish: int):
    """Maximize objective(s) over the open simplex via softmax + Nelder-Mead."""
    starts = [np.full(n, 1.0 / n)]
    starts.extend(np.eye(n) * 0.999 + 0.001 / n)
    starts.extend(rng.dirichlet(0.3 * np.ones(n), size=cloud))
    vals = np.array([objective(s) for s in starts])
    best = float(vals.max())
    order = np.argsort(vals)[::-1][:polish]
    for idx in order:
        z0 = np.log(np.maximum(starts[idx], 1e-12))
        res = minimize(lambda z: -objective(_softmax(z)), z0, method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def max_quadform_nonneg_lp(B: np.ndarray, delta: float, rng, cloud: int = 3000,
                           polish: int = 8) -> float:
    """max of <By, y> over y >= 0 with sum_i y_i^delta = 1, numerically."""
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    def objective(s):
        y = np.maximum(s, 0.0) ** (1.0 / delta)
        return float(y @ B @ y)

    return _ascend(objective, n, rng, cloud, polish)


def max_offdiag_power_rank_one(beta: float, n: int, rng, cloud: int = 3000,
                               polish: int = 8) -> float:
    """max of sum_{i != j} |x_i x_j|^beta over unit vectors x, numerically.

    Rank-one matrices X = x x* are the extreme points of the PSD trace-one
    set, so this searches over y = |x|^2 in the simplex:
    sum_{i != j} (y_i y_j)^(beta/2) = (sum y^(beta/2))^2 - sum y^beta.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    def objective(s):
        y = np.maximum(s, 0.0)
        h = y ** (beta / 2.0)
        return float(h.sum() ** 2 - (h * h).sum())

    return _ascend(objective, n, rng, cloud, polish)


def stieltjes_by_quadrature(z: complex, tol: float = 1e-12) -> complex:
    """integral of (1/2pi) sqrt(4-t^2) / (z - t) dt over [-2, 2], adaptively."""
    z = complex(z)

    def density(t: float) -> float:
        return np.sqrt(max(4.0 - t * t, 0.0)) / (2.0 * np.pi)

    re = quad(lambda t: (density(t) * (1.0 / (z - t))).real, -2.0, 2.0,
              epsabs=tol, epsrel=tol, limit=400)[0]
    im = quad(lambda t: (density(t) * (1.0 / (z - t))).imag, -2.0, 2.0,
              epsabs=tol, epsrel=tol, limit=400)[0]
    return complex(re, im)


def lambda_max_power(H: np.ndarray, rng, iters: int = 20000, tol: float = 1e-13) -> float:
    """Top eigenvalue by shifted power iteration with Rayleigh quotients.

    The shift H + s*I with s = max row sum makes the target eigenvalue the
    one of largest modulus; convergence is declared when the Rayleigh
    quotient stalls.  Independent of the LAPACK eigensolver path.
    """
    H = np.asarray(H)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    n = H.shape[0]
    shift = float(np.abs(H).sum(axis=1).max()) + 1.0
    M = H + shift * np.eye(n, dtype=H.dtype)
    v = rng.standard_normal(n)
    if np.iscomplexobj(H):
        v = v + 1j * rng.standard_normal(n)
    v = v / np.linalg.norm(v)
    prev = -np.inf
    for _ in range(iters):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return -shift
        v = w / nw
        rq = float(np.real(np.vdot(v, M @ v)))
        if abs(rq - prev) < tol * max(1.0, abs(rq)):
            prev = rq
            break
        prev = rq
    return prev - shift
