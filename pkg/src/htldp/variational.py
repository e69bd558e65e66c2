"""The variational tail constant and its witnesses.

The deviation cost of planting a sparse Hermitian matrix A with angle
constraints is the weighted alpha-norm

    I(A) = b * sum_i |A_ii|^alpha  +  a * sum_{i<j} |A_ij|^alpha,

and the constant entering the rate function is

    c = inf { I(A) : lambda_max(A) = 1, phases of A in the declared supports }.

This module provides the closed forms of that infimum for the six support
configurations where it is known (:func:`closed_form_c`), the helper
functions psi/t0 and phi/t1 with their extremal one-parameter matrix family
(:func:`extremal_matrix`), an independent multi-start numerical minimizer
(:func:`brute_force_c`), exact maxima of the quadratic forms on the
nonnegative l^delta sphere that drive the proofs, and the permutation-
quotient distance used to compare sparse matrices up to relabeling.

Normalization note: the off-diagonal sum runs over i < j (equivalently
(a/2) * sum_{i != j}); the brute-force oracle and the alpha=1, a=b=1 anchor
value c=1 both pin this convention.

Closed-form operations are pure; brute_force_c is deterministic given its
seed and budget.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .model import TailParams

__all__ = [
    "BruteForceC",
    "ClosedFormC",
    "SparseHermitian",
    "UnsupportedSupportError",
    "brute_force_c",
    "closed_form_c",
    "extremal_matrix",
    "in_domain",
    "perm_invariant_distance",
    "phi",
    "psd_offdiag_max",
    "psi",
    "quadform_max_bipartite",
    "quadform_max_simplex",
    "t0",
    "t1",
    "weight_I",
]

_TOL = 1e-12
_PHASE_TOL = 1e-9


class UnsupportedSupportError(ValueError):
    """Raised when no closed form is known for a support configuration."""


# ---------------------------------------------------------------------------
# sparse Hermitian matrices with explicit support
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseHermitian:
    """Finite Hermitian matrix stored as its upper-triangle nonzeros.

    `entries` maps (i, j) with i <= j to the complex value; the (j, i)
    entry is implied by conjugation and diagonal values are real.
    """

    n: int
    entries: Mapping[tuple[int, int], complex]

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        clean: dict[tuple[int, int], complex] = {}
        for (i, j), v in self.entries.items():
            if not (0 <= i <= j < self.n):
                raise ValueError(f"entry index {(i, j)!r} out of range for n={self.n}")
            v = complex(v)
            if v == 0:
                raise ValueError(f"stored entries must be nonzero, got 0 at {(i, j)!r}")
            if i == j:
                if abs(v.imag) > _TOL * abs(v):
                    raise ValueError(f"diagonal entry at {(i, j)!r} is not real: {v!r}")
                v = complex(v.real, 0.0)
            clean[(i, j)] = v
        object.__setattr__(self, "entries", MappingProxyType(clean))

    def to_dense(self) -> np.ndarray:
        cplx = any(v.imag != 0.0 for v in self.entries.values())
        out = np.zeros((self.n, self.n), dtype=complex if cplx else float)
        for (i, j), v in self.entries.items():
            out[i, j] = v if cplx else v.real
            if i != j:
                out[j, i] = v.conjugate() if cplx else v.real
        return out

    @classmethod
    def from_dense(cls, M: np.ndarray, tol: float = 0.0) -> "SparseHermitian":
        M = np.asarray(M)
        n = M.shape[0]
        if M.ndim != 2 or M.shape[1] != n:
            raise ValueError("expected a square matrix")
        if np.max(np.abs(M - M.conj().T)) > max(_TOL, _TOL * np.max(np.abs(M), initial=0.0)):
            raise ValueError("matrix is not Hermitian")
        entries = {}
        for i in range(n):
            for j in range(i, n):
                v = complex(M[i, j])
                if abs(v) > tol:
                    entries[(i, j)] = v
        return cls(n=n, entries=entries)

    def touched_rows(self) -> tuple[int, ...]:
        rows: set[int] = set()
        for i, j in self.entries:
            rows.add(i)
            rows.add(j)
        return tuple(sorted(rows))

    def scale(self, t: float) -> "SparseHermitian":
        if not t > 0.0:
            raise ValueError(f"scale factor must be positive, got {t!r}")
        return SparseHermitian(self.n, {k: v * t for k, v in self.entries.items()})

    def largest_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.to_dense())[-1])


def weight_I(A: SparseHermitian, params: TailParams) -> float:
    """Weighted alpha-norm b * sum_diag + a * sum_{i<j} of entry moduli."""
    alpha = params.alpha
    diag = sum(abs(v) ** alpha for (i, j), v in A.entries.items() if i == j)
    off = sum(abs(v) ** alpha for (i, j), v in A.entries.items() if i != j)
    return params.b * diag + params.a * off


def _phase_in(v: complex, support: Sequence[complex], tol: float = _PHASE_TOL) -> bool:
    u = v / abs(v)
    return any(abs(u - s) <= tol for s in support)


def in_domain(A: SparseHermitian, params: TailParams) -> bool:
    """True iff every stored entry's phase lies in the declared support."""
    for (i, j), v in A.entries.items():
        support = params.nu1_support if i == j else params.nu2_support
        if not _phase_in(v, support):
            return False
    return True


# ---------------------------------------------------------------------------
# helper functions and the extremal family
# ---------------------------------------------------------------------------

def _require_alpha_12(alpha: float) -> None:
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"defined only for alpha in (1, 2), got {alpha!r}")


def psi(t: float, params: TailParams) -> float:
    """Cost of the size-t member of the extremal family in the mixed case.

    psi(t) = t / ((1/b)^(1/(alpha-1)) + (t-1) (2/a)^(1/(alpha-1)))^(alpha-1),
    decreasing up to t0 and increasing after; psi(1) = b.
    """
    _require_alpha_12(params.alpha)
    if not t >= 1.0:
        raise ValueError(f"psi requires t >= 1, got {t!r}")
    e = 1.0 / (params.alpha - 1.0)
    s = (1.0 / params.b) ** e
    u = (2.0 / params.a) ** e
    return t / (s + (t - 1.0) * u) ** (params.alpha - 1.0)


def t0(params: TailParams) -> float:
    """Stationary point of psi: (1/(2-alpha)) * (1 - (a/2b)^(1/(alpha-1)))."""
    _require_alpha_12(params.alpha)
    e = 1.0 / (params.alpha - 1.0)
    return (1.0 - (params.a / (2.0 * params.b)) ** e) / (2.0 - params.alpha)


def phi(t: float, alpha: float) -> float:
    """t / (t-1)^(alpha-1), the zero-diagonal family cost up to a/2."""
    _require_alpha_12(alpha)
    if not t >= 2.0:
        raise ValueError(f"phi requires t >= 2, got {t!r}")
    return t / (t - 1.0) ** (alpha - 1.0)


def t1(alpha: float) -> float:
    """Stationary point of phi: 1/(2-alpha)."""
    _require_alpha_12(alpha)
    return 1.0 / (2.0 - alpha)


def extremal_matrix(n: int, s: float, t: float) -> SparseHermitian:
    """Size-n matrix with diagonal s/(s+(n-1)t) and off-diagonal t/(s+(n-1)t).

    For s, t >= 0 (not both zero) its eigenvalues are 1 (all-ones vector)
    and (s-t)/(s+(n-1)t), so the largest eigenvalue is exactly 1.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if s < 0.0 or t < 0.0 or (s == 0.0 and t == 0.0):
        raise ValueError("need s, t >= 0 and not both zero")
    denom = s + (n - 1) * t
    if denom <= 0.0:
        raise ValueError("degenerate family member: s + (n-1)t must be positive")
    entries: dict[tuple[int, int], complex] = {}
    if s / denom != 0.0:  # guard subnormal underflow
        for i in range(n):
            entries[(i, i)] = s / denom
    if t / denom != 0.0:
        for i in range(n):
            for j in range(i + 1, n):
                entries[(i, j)] = t / denom
    return SparseHermitian(n, entries)


# ---------------------------------------------------------------------------
# closed forms for the six support configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormC:
    c: float
    witness: SparseHermitian
    case: str


def _contains_plus1(support: Iterable[complex]) -> bool:
    return any(abs(complex(s) - 1.0) <= _TOL for s in support)


def _is_minus_one_only(support: Iterable[complex]) -> bool:
    return all(abs(complex(s) + 1.0) <= _TOL for s in support)


def _offdiag_witness(params: TailParams) -> SparseHermitian:
    """2x2 zero-diagonal matrix with one unit off-diagonal entry; lambda = 1."""
    phase = 1.0 + 0j if _contains_plus1(params.nu2_support) else complex(params.nu2_support[0])
    return SparseHermitian(2, {(0, 1): phase})


def _unit_diag_witness() -> SparseHermitian:
    return SparseHermitian(1, {(0, 0): 1.0 + 0j})


def closed_form_c(params: TailParams) -> ClosedFormC:
    """The variational constant with an explicit minimizing matrix.

    Dispatches on (alpha range, whether +1 is in each angle support,
    whether a support is exactly {-1}, and b versus a/2).  Configurations
    outside the known cases raise UnsupportedSupportError rather than
    guessing.  Minima attained at several sizes return the smallest.
    """
    alpha, a, b = params.alpha, params.a, params.b
    nu1_plus = _contains_plus1(params.nu1_support)
    nu2_plus = _contains_plus1(params.nu2_support)
    nu2_minus = _is_minus_one_only(params.nu2_support)

    if alpha <= 1.0:
        if nu1_plus and b <= a:
            return ClosedFormC(b, _unit_diag_witness(), "a")
        return ClosedFormC(a, _offdiag_witness(params), "a")

    if nu1_plus and b <= a / 2.0:
        return ClosedFormC(b, _unit_diag_witness(), "b")

    e = 1.0 / (alpha - 1.0)
    s = (1.0 / b) ** e
    u = (2.0 / a) ** e

    if nu1_plus and nu2_plus:
        # b > a/2 here since b <= a/2 was handled above
        tstar = t0(params)
        cands = sorted({max(1, math.floor(tstar)), max(1, math.ceil(tstar))})
        vals = [(psi(float(k), params), k) for k in cands]
        cbest, kbest = min(vals)
        witness = extremal_matrix(kbest, s, u) if kbest > 1 else _unit_diag_witness()
        return ClosedFormC(cbest, witness, "c")

    if nu1_plus and nu2_minus:
        c2 = 2.0 / (s + u) ** (alpha - 1.0)
        if b <= c2:
            return ClosedFormC(b, _unit_diag_witness(), "d")
        p = s / (s + u)
        q = u / (s + u)
        witness = SparseHermitian(2, {(0, 0): p, (1, 1): p, (0, 1): -q})
        return ClosedFormC(c2, witness, "d")

    if not nu1_plus and nu2_plus:
        tstar = t1(alpha)
        cands = sorted({max(2, math.floor(tstar)), max(2, math.ceil(tstar))})
        vals = [(0.5 * a * phi(float(k), alpha), k) for k in cands]
        cbest, kbest = min(vals)
        return ClosedFormC(cbest, extremal_matrix(kbest, 0.0, 1.0), "e")

    if not nu1_plus and nu2_minus:
        return ClosedFormC(a, SparseHermitian(2, {(0, 1): -1.0 + 0j}), "f")

    raise UnsupportedSupportError(
        f"no closed form for nu1={params.nu1_support!r}, nu2={params.nu2_support!r} "
        f"with alpha={alpha!r}; use brute_force_c"
    )


# ---------------------------------------------------------------------------
# brute-force minimizer (independent oracle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BruteForceC:
    c: float
    argmin: SparseHermitian
    by_size: Mapping[int, float]


_LAM_FLOOR = 1e-12
_BIG = 1e6


def _pattern_positions(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def _assemble(n, positions, phases, m):
    cplx = any(abs(complex(p).imag) > 0.0 for p in phases)
    A = np.zeros((n, n), dtype=complex if cplx else float)
    for (i, j), p, v in zip(positions, phases, m):
        val = complex(p) * v
        if i == j:
            A[i, i] = val.real
        else:
            A[i, j] = val if cplx else val.real
            A[j, i] = val.conjugate() if cplx else val.real
    return A


def _lambda_and_gradient(n, positions, phases, m):
    A = _assemble(n, positions, phases, m)
    w, V = np.linalg.eigh(A)
    lam = float(w[-1])
    x = V[:, -1]
    dlam = np.empty(len(positions))
    for e, ((i, j), p) in enumerate(zip(positions, phases)):
        if i == j:
            dlam[e] = complex(p).real * abs(x[i]) ** 2
        else:
            dlam[e] = 2.0 * (complex(p) * np.conj(x[i]) * x[j]).real
    return lam, dlam


def _exact_value(params, n, positions, phases, m):
    lam, _ = _lambda_and_gradient(n, positions, phases, m)
    if lam <= 1e-9:
        return math.inf
    wts = np.array([params.b if i == j else params.a for i, j in positions])
    return float(np.dot(wts, m ** params.alpha) / lam ** params.alpha)


def _optimize_pattern(params, n, positions, phases, rng, restarts, tol):
    """Minimize I(A)/lambda_max(A)^alpha over the magnitudes of one phase pattern.

    Magnitudes are parameterized in log space, the objective is taken in
    logs (which turns lambda -> 0+ into a smooth barrier), and restarts
    stop early once the incumbent stops improving by more than `tol`.
    """
    alpha = params.alpha
    wts = np.array([params.b if i == j else params.a for i, j in positions])
    k = len(positions)
    # the objective is scale invariant, so log magnitudes can be boxed
    bounds = [(-36.0, 36.0)] * k

    def fun(u):
        mm = np.exp(np.clip(u, -36.0, 36.0))
        lam, dlam = _lambda_and_gradient(n, positions, phases, mm)
        if lam <= _LAM_FLOOR:
            # infeasible region: steer toward positive top eigenvalue
            return _BIG * (1.0 + (_LAM_FLOOR - lam)), -_BIG * dlam * mm
        powers = wts * mm ** alpha
        total = float(powers.sum())
        val = math.log(total) - alpha * math.log(lam)
        grad = alpha * powers / total - alpha * dlam * mm / lam
        return val, grad

    best_val, best_m = math.inf, None
    stale = 0
    for r in range(max(1, restarts)):
        u0 = np.zeros(k) if r == 0 else rng.uniform(-2.0, 1.0, size=k)
        res = minimize(fun, u0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 400, "ftol": 1e-14, "gtol": 1e-10})
        val = _exact_value(params, n, positions, phases, np.exp(res.x))
        if val < best_val - tol:
            best_val, best_m = val, np.exp(res.x)
            stale = 0
        else:
            stale += 1
        if r >= 7 and stale >= 5:
            break
    return best_val, best_m


def _prune_pattern(params, n, positions, phases, m, value, rng, tol):
    """Greedily drop entries whose removal lowers the optimized value.

    For alpha <= 1 the optimizer can stall while crawling toward a face of
    the magnitude orthant; re-solving on the exact face finishes the job.
    """
    positions = list(positions)
    phases = list(phases)
    m = np.asarray(m, dtype=float)
    improved = True
    while improved and len(positions) > 1:
        improved = False
        wts = np.array([params.b if i == j else params.a for i, j in positions])
        order = np.argsort(wts * m ** params.alpha)
        for idx in order:
            pos2 = positions[:idx] + positions[idx + 1:]
            ph2 = phases[:idx] + phases[idx + 1:]
            v2, m2 = _optimize_pattern(params, n, pos2, ph2, rng, restarts=4, tol=tol)
            if m2 is not None and v2 < value:
                positions, phases, m, value = pos2, ph2, m2, v2
                improved = True
                break
    return value, positions, phases, m


def _patterns_for_size(n, params, rng, enumerate_limit=128, sample_count=12):
    """Phase assignments to try at size n: exhaustive when small, else
    the uniform (one phase per class) patterns plus random samples."""
    positions = _pattern_positions(n)
    diag_opts = [complex(s) for s in params.nu1_support]
    off_opts = [complex(s) for s in params.nu2_support]
    opts = [diag_opts if i == j else off_opts for i, j in positions]
    total = 1
    for o in opts:
        total *= len(o)
    if total <= enumerate_limit:
        return positions, [list(p) for p in itertools.product(*opts)]
    patterns = []
    seen = set()
    for d in diag_opts:
        for o in off_opts:
            pat = [d if i == j else o for i, j in positions]
            key = tuple(pat)
            if key not in seen:
                seen.add(key)
                patterns.append(pat)
    target = len(patterns) + sample_count
    while len(patterns) < target and len(seen) < total:
        pat = [complex(o[rng.integers(0, len(o))]) for o in opts]
        key = tuple(pat)
        if key not in seen:
            seen.add(key)
            patterns.append(pat)
    return positions, patterns


def _compact(params, n, positions, phases, m):
    """Rescale to top eigenvalue one, drop numerically-zero entries and
    unused rows, and return the resulting matrix with its exact weight."""
    keep = [e for e, v in enumerate(m) if v > 1e-8 * max(m)]
    pos = [positions[e] for e in keep]
    ph = [phases[e] for e in keep]
    mm = np.array([m[e] for e in keep])
    rows = sorted({i for ij in pos for i in ij})
    remap = {r: k for k, r in enumerate(rows)}
    size = len(rows)
    pos = [(remap[i], remap[j]) for i, j in pos]
    A = _assemble(size, pos, ph, mm)
    lam = float(np.linalg.eigvalsh(A)[-1])
    if lam <= 0.0:
        return math.inf, None
    witness = SparseHermitian(size, {pos[e]: complex(ph[e]) * mm[e] / lam for e in range(len(pos))})
    return weight_I(witness, params), witness


def brute_force_c(params: TailParams, max_n: int = 4, seed: int = 0,
                  restarts: int = 32, tol: float = 1e-8,
                  patterns_per_size: int = 12) -> BruteForceC:
    """Numerical minimizer of the admissible-matrix weight, per size.

    For each n <= max_n, minimizes I over Hermitian matrices with top
    eigenvalue 1 and declared phases via multi-start local descent over
    magnitudes (phases fixed per pattern; all patterns enumerated when few,
    sampled otherwise), the spectral constraint being handled by the scale
    invariance I(A/lambda)^ = I(A)/lambda^alpha.  Deterministic given
    (seed, budget).  This routine never calls the closed forms.
    """
    if not (isinstance(max_n, int) and 1 <= max_n <= 6):
        raise ValueError(f"max_n must be an integer in [1, 6], got {max_n!r}")
    rng = np.random.default_rng(seed)
    by_size: dict[int, float] = {}
    best = (math.inf, None)
    for n in range(1, max_n + 1):
        positions, patterns = _patterns_for_size(
            n, params, rng, sample_count=patterns_per_size)
        results = []
        for phases in patterns:
            val, m = _optimize_pattern(params, n, positions, phases, rng, restarts, tol)
            if m is not None and math.isfinite(val):
                results.append((val, phases, m))
        results.sort(key=lambda r: r[0])
        size_best = (math.inf, None)
        for val, phases, m in results[:3]:
            val2, pos2, ph2, m2 = _prune_pattern(
                params, n, positions, list(phases), m, val, rng, tol)
            exact, witness = _compact(params, n, pos2, ph2, m2)
            if witness is not None and exact < size_best[0]:
                size_best = (exact, witness)
        if size_best[1] is not None:
            by_size[n] = size_best[0]
            if size_best[0] < best[0]:
                best = size_best
    if best[1] is None:
        raise RuntimeError("no feasible matrix found for the declared supports")
    return BruteForceC(c=best[0], argmin=best[1], by_size=MappingProxyType(by_size))


# ---------------------------------------------------------------------------
# quadratic-form maxima on the nonnegative l^delta sphere
# ---------------------------------------------------------------------------

def quadform_max_simplex(lam: float, mu: float, delta: float, n: int) -> float:
    """max <By, y> over y >= 0 with sum y_i^delta = 1, B constant off-diagonal.

    B has diagonal lam and off-diagonal mu with 0 <= lam < mu; the maximum
    is max_{1<=k<=n} (lam + (k-1) mu) k^(1-2/delta), attained at a flat
    vector supported on k coordinates.
    """
    if not 0.0 <= lam < mu:
        raise ValueError(f"need 0 <= lam < mu, got lam={lam!r}, mu={mu!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n!r}")
    ks = np.arange(1, n + 1, dtype=float)
    return float(np.max((lam + (ks - 1.0) * mu) * ks ** (1.0 - 2.0 / delta)))


def quadform_max_bipartite(lam: float, mu: float, delta: float) -> float:
    """max <By, y> over the same constraint set for the two-block matrix
    with diagonal blocks lam * I and constant off-blocks mu: the value is
    max(lam, (lam + mu) 2^(1-2/delta)) for any block sizes >= 1."""
    if lam < 0.0 or mu < 0.0:
        raise ValueError(f"need lam, mu >= 0, got lam={lam!r}, mu={mu!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    return max(lam, (lam + mu) * 2.0 ** (1.0 - 2.0 / delta))


def psd_offdiag_max(beta: float, n: int) -> float:
    """max of sum_{i != j} |X_ij|^beta over PSD trace-one Hermitian X of
    size n: equals max_{2<=k<=n} (k-1) k^(1-beta) for beta >= 2."""
    if not beta >= 2.0:
        raise ValueError(f"beta must be >= 2, got {beta!r}")
    if not (isinstance(n, int) and n >= 2):
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    ks = np.arange(2, n + 1, dtype=float)
    return float(np.max((ks - 1.0) * ks ** (1.0 - beta)))


# ---------------------------------------------------------------------------
# permutation-quotient distance
# ---------------------------------------------------------------------------

def _compact_dense(A: SparseHermitian) -> np.ndarray:
    rows = A.touched_rows()
    remap = {r: k for k, r in enumerate(rows)}
    out = np.zeros((len(rows), len(rows)), dtype=complex)
    for (i, j), v in A.entries.items():
        out[remap[i], remap[j]] = v
        if i != j:
            out[remap[j], remap[i]] = v.conjugate()
    return out


def _partial_injections(na: int, nb: int):
    """All maps {0..na-1} -> {0..nb-1} u {sink}, injective off the sink."""
    assign = [-1] * na
    used = [False] * nb

    def rec(i):
        if i == na:
            yield tuple(assign)
            return
        assign[i] = -1
        yield from rec(i + 1)
        for v in range(nb):
            if not used[v]:
                used[v] = True
                assign[i] = v
                yield from rec(i + 1)
                assign[i] = -1
                used[v] = False

    yield from rec(0)


def perm_invariant_distance(A: SparseHermitian, B: SparseHermitian) -> float:
    """Distance between relabeling classes of sparse Hermitian matrices.

    Minimum over simultaneous row/column relabelings (with padding by zero
    rows in a common ambient dimension) of the maximum entrywise absolute
    difference.  Exact brute force; both supports must touch at most 8 rows.
    """
    ta, tb = A.touched_rows(), B.touched_rows()
    if len(ta) > 8 or len(tb) > 8:
        raise ValueError("support too large for exact permutation search (> 8 rows)")
    da, db = _compact_dense(A), _compact_dense(B)
    na, nb = len(ta), len(tb)
    absb = np.abs(db)

    uncovered_pen: dict[int, float] = {}

    def pen(mask: int) -> float:
        if mask not in uncovered_pen:
            un = [k for k in range(nb) if not mask >> k & 1]
            if not un:
                uncovered_pen[mask] = 0.0
            else:
                uncovered_pen[mask] = max(float(absb[un, :].max()),
                                          float(absb[:, un].max()))
        return uncovered_pen[mask]

    best = math.inf
    for assign in _partial_injections(na, nb):
        mask = 0
        for v in assign:
            if v >= 0:
                mask |= 1 << v
        d = pen(mask)
        if d >= best:
            continue
        for i in range(na):
            ai = assign[i]
            for j in range(na):
                aj = assign[j]
                bval = db[ai, aj] if (ai >= 0 and aj >= 0) else 0.0
                diff = abs(bval - da[i, j])
                if diff > d:
                    d = diff
            if d >= best:
                break
        if d < best:
            best = d
    return best
