"""Heavy-tailed Wigner matrices: entry samplers, the four-way size
decomposition of the entries, and dense Hermitian eigenvalue helpers.

Entry model
-----------
A Wigner matrix here has i.i.d. real diagonal entries and i.i.d.
off-diagonal entries (real or complex), upper triangle independent, with
stretched-exponential tails

    P(|X_11| > t) ~ exp(-b t^alpha),   P(|X_12| > t) ~ exp(-a t^alpha),

alpha in (0, 2), and with the angle of a large entry drawn from a declared
finite support on the unit circle (nu1 for the diagonal, nu2 off it).  The
off-diagonal law must additionally have mean 0 and unit second moment, so
the tail constant `a` is not a free dial for every sampler:

``weibull``
    Modulus Weibull(alpha) rescaled to unit variance, angle uniform on the
    declared support.  Exact stretched-exponential tail; the effective
    off-diagonal constant is a = Gamma(1 + 2/alpha)^(alpha/2) (see
    :func:`weibull_offdiag_tail_constant`) and cannot be chosen freely.
    The diagonal has no moment constraint, so its scale is set to match
    `b` exactly; for alpha = 1, b = 1, nu1 = {+1} this is the standard
    exponential(1) diagonal.

``mixture``
    Bernoulli mixture of a bounded two-point component and a Weibull tail
    component of scale a^(-1/alpha).  The tail constant is exactly `a`
    (the mixture weight only shifts log P by a constant) and the bounded
    component absorbs the mean/variance constraints, so arbitrary (a, b)
    are reachable.

In both samplers the angle and the modulus are drawn independently for
*all* magnitudes, so the angle/modulus decoupling assumption holds by
construction.  For complex entries the same angle-times-modulus
construction is used, which trades away independence of real and
imaginary parts; isotropy diagnostics should therefore be run on real
matrices.

Sampling is pure given an explicit generator; matrices are plain numpy
arrays, immutable by convention once returned.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

__all__ = [
    "Decomposition",
    "DecompositionThresholds",
    "TailParams",
    "as_generator",
    "count_C_entries",
    "decompose",
    "largest_eigenvalue",
    "load_matrix",
    "mixture_params",
    "sample_entries",
    "sample_wigner",
    "sample_wigner_raw",
    "save_matrix",
    "spawn_generators",
    "tail_params",
    "weibull_offdiag_tail_constant",
    "weibull_params",
]

_PHASE_TOL = 1e-12
_HERM_TOL = 1e-12

_SAMPLERS = ("weibull", "mixture")


# ---------------------------------------------------------------------------
# random stream plumbing
# ---------------------------------------------------------------------------

def as_generator(stream) -> np.random.Generator:
    """Coerce an int seed, SeedSequence or Generator into a Generator."""
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, np.random.SeedSequence):
        return np.random.default_rng(stream)
    return np.random.default_rng(int(stream))


def spawn_generators(seed: int, n: int) -> list[np.random.Generator]:
    """Derive `n` independent substreams from a master seed.

    Uses numpy's SeedSequence.spawn, so the i-th substream depends only on
    (seed, i); shard results are identical however work is distributed.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(c) for c in children]


# ---------------------------------------------------------------------------
# statistical model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailParams:
    """Tail exponent, tail constants, angle supports and sampler choice.

    alpha       : tail exponent in (0, 2)
    a, b        : off-diagonal / diagonal tail constants (positive)
    kappa       : uniform bound constant, P(|X|>t) <= exp(-kappa t^alpha)
    nu1_support : angle support of large diagonal entries, subset of {-1,+1}
    nu2_support : angle support of large off-diagonal entries (unit moduli)
    """

    alpha: float
    a: float
    b: float
    kappa: float
    nu1_support: tuple[complex, ...]
    nu2_support: tuple[complex, ...]
    complex_entries: bool = False
    sampler: str = "mixture"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        for name in ("a", "b", "kappa"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        object.__setattr__(self, "nu1_support", tuple(complex(s) for s in self.nu1_support))
        object.__setattr__(self, "nu2_support", tuple(complex(s) for s in self.nu2_support))
        if not self.nu1_support or not self.nu2_support:
            raise ValueError("angle supports must be nonempty")
        for s in self.nu1_support + self.nu2_support:
            if abs(abs(s) - 1.0) > _PHASE_TOL:
                raise ValueError(f"support point {s!r} is not unit modulus")
        # the diagonal of a Hermitian matrix is real, so nu1 lives on {-1,+1}
        for s in self.nu1_support:
            if min(abs(s - 1.0), abs(s + 1.0)) > _PHASE_TOL:
                raise ValueError(f"nu1 support must be within {{-1,+1}}, got {s!r}")
        if not self.complex_entries:
            for s in self.nu2_support:
                if min(abs(s - 1.0), abs(s + 1.0)) > _PHASE_TOL:
                    raise ValueError(f"real entries need nu2 within {{-1,+1}}, got {s!r}")
        if self.sampler not in _SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}, expected one of {_SAMPLERS}")
        if self.sampler == "weibull":
            a_eff = weibull_offdiag_tail_constant(self.alpha)
            if abs(self.a - a_eff) > 1e-9 * a_eff:
                raise ValueError(
                    "the weibull sampler pins the off-diagonal tail constant to "
                    f"Gamma(1+2/alpha)^(alpha/2) = {a_eff!r}; declared a = {self.a!r}. "
                    "Use mixture_params for arbitrary (a, b)."
                )

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "kappa": self.kappa,
            "nu1_support": [[s.real, s.imag] for s in self.nu1_support],
            "nu2_support": [[s.real, s.imag] for s in self.nu2_support],
            "complex_entries": self.complex_entries,
            "sampler": self.sampler,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TailParams":
        return cls(
            alpha=d["alpha"],
            a=d["a"],
            b=d["b"],
            kappa=d["kappa"],
            nu1_support=tuple(complex(re, im) for re, im in d["nu1_support"]),
            nu2_support=tuple(complex(re, im) for re, im in d["nu2_support"]),
            complex_entries=d["complex_entries"],
            sampler=d["sampler"],
        )


def weibull_offdiag_tail_constant(alpha: float) -> float:
    """Effective off-diagonal tail constant of the unit-variance Weibull sampler.

    The modulus W ~ Weibull(alpha) has E W^2 = Gamma(1 + 2/alpha); rescaling
    to unit variance turns exp(-t^alpha) into exp(-Gamma(1+2/alpha)^(alpha/2) t^alpha).
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    return float(gamma_fn(1.0 + 2.0 / alpha) ** (alpha / 2.0))


def weibull_params(
    alpha: float,
    b: float = 1.0,
    nu1: Sequence[complex] = (1.0,),
    nu2: Sequence[complex] | None = None,
    complex_entries: bool = False,
) -> TailParams:
    """Default symmetric-Weibull model; `a` is computed, not chosen."""
    a = weibull_offdiag_tail_constant(alpha)
    if nu2 is None:
        nu2 = (1.0, -1.0, 1j, -1j) if complex_entries else (1.0, -1.0)
    _require_centered_support(nu2)
    return TailParams(
        alpha=alpha,
        a=a,
        b=b,
        kappa=min(a, b),
        nu1_support=tuple(nu1),
        nu2_support=tuple(nu2),
        complex_entries=complex_entries,
        sampler="weibull",
    )


def mixture_params(
    alpha: float,
    a: float,
    b: float,
    nu1: Sequence[complex] = (1.0,),
    nu2: Sequence[complex] = (1.0, -1.0),
    complex_entries: bool = False,
) -> TailParams:
    """Bounded-plus-Weibull mixture model with exact tail constants (a, b)."""
    return TailParams(
        alpha=alpha,
        a=a,
        b=b,
        kappa=min(a, b),
        nu1_support=tuple(nu1),
        nu2_support=tuple(nu2),
        complex_entries=complex_entries,
        sampler="mixture",
    )


def tail_params(
    alpha: float,
    a: float,
    b: float,
    nu1: Sequence[complex] = (1.0,),
    nu2: Sequence[complex] = (1.0, -1.0),
    complex_entries: bool = False,
) -> TailParams:
    """Shorthand for a model with declared constants (mixture-backed)."""
    return mixture_params(alpha, a, b, nu1=nu1, nu2=nu2, complex_entries=complex_entries)


def _require_centered_support(support: Sequence[complex]) -> None:
    if abs(sum(complex(s) for s in support)) > 1e-9:
        raise ValueError(
            f"off-diagonal support {tuple(support)!r} is not mean-centered; the pure "
            "Weibull sampler cannot produce mean-zero entries from it (use the mixture)."
        )


# ---------------------------------------------------------------------------
# entry samplers
# ---------------------------------------------------------------------------

def _draw_angles(support: tuple[complex, ...], size: int, rng: np.random.Generator):
    pts = np.asarray(support, dtype=complex)
    if len(pts) == 1:
        out = np.full(size, pts[0])
    else:
        out = pts[rng.integers(0, len(pts), size)]
    if np.all(out.imag == 0.0):
        return out.real.copy()
    return out


def _mixture_offdiag(params: TailParams, size: int, rng: np.random.Generator):
    alpha, a = params.alpha, params.a
    sigma = a ** (-1.0 / alpha)
    g1 = float(gamma_fn(1.0 + 1.0 / alpha))
    g2 = float(gamma_fn(1.0 + 2.0 / alpha))
    m2_tail = sigma * sigma * g2
    p = min(0.5, 1.0 / (2.0 * m2_tail))
    phases = np.asarray(params.nu2_support, dtype=complex)
    mean_tail = complex(phases.mean()) * sigma * g1
    m_y = -p * mean_tail / (1.0 - p)
    m2_y = (1.0 - p * m2_tail) / (1.0 - p)
    var_y = m2_y - abs(m_y) ** 2
    if var_y <= 0.0:  # unreachable for unit-modulus supports; guard anyway
        raise ValueError("mixture bounded component infeasible for these params")
    rho = math.sqrt(var_y)

    heavy = rng.random(size) < p
    tail = _draw_angles(params.nu2_support, size, rng) * (sigma * rng.weibull(alpha, size))
    if params.complex_entries:
        quad = np.array([1.0, -1.0, 1j, -1j])
        bounded = m_y + rho * quad[rng.integers(0, 4, size)]
        return np.where(heavy, tail, bounded)
    bounded = m_y.real + rho * rng.choice([-1.0, 1.0], size)
    return np.where(heavy, np.asarray(tail, dtype=float), bounded)


def sample_entries(params: TailParams, role: str, size: int, stream) -> np.ndarray:
    """Draw `size` i.i.d. entries for the given role.

    role "diagonal": real draws with survival function exp(-b t^alpha) and
    sign from nu1.  role "offdiagonal": mean-0, variance-1 draws whose
    modulus has the declared stretched-exponential tail and whose angle for
    large modulus follows nu2.
    """
    rng = as_generator(stream)
    if role == "diagonal":
        scale = params.b ** (-1.0 / params.alpha)
        w = scale * rng.weibull(params.alpha, size)
        signs = np.real(_draw_angles(params.nu1_support, size, rng))
        return signs * w
    if role != "offdiagonal":
        raise ValueError(f"role must be 'diagonal' or 'offdiagonal', got {role!r}")
    if params.sampler == "weibull":
        _require_centered_support(params.nu2_support)
        g2 = float(gamma_fn(1.0 + 2.0 / params.alpha))
        w = rng.weibull(params.alpha, size) / math.sqrt(g2)
        return _draw_angles(params.nu2_support, size, rng) * w
    return _mixture_offdiag(params, size, rng)


def sample_wigner_raw(N: int, params: TailParams, stream) -> np.ndarray:
    """Unnormalized N x N Hermitian sample (entries of order one)."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N!r}")
    rng = as_generator(stream)
    diag = sample_entries(params, "diagonal", N, rng)
    off = sample_entries(params, "offdiagonal", N * (N - 1) // 2, rng)
    dtype = complex if params.complex_entries else float
    X = np.zeros((N, N), dtype=dtype)
    iu = np.triu_indices(N, k=1)
    X[iu] = off
    X = X + X.conj().T
    X[np.diag_indices(N)] = diag
    return X


def sample_wigner(N: int, params: TailParams, stream) -> np.ndarray:
    """Normalized Wigner sample X / sqrt(N); deterministic given the stream."""
    return sample_wigner_raw(N, params, stream) / math.sqrt(N)


# ---------------------------------------------------------------------------
# four-way entry decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionThresholds:
    """Cut levels: epsilon > 0 and exponent d with d * alpha > 1."""

    epsilon: float
    d: float

    def __post_init__(self) -> None:
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (self.d > 0.0 and math.isfinite(self.d)):
            raise ValueError(f"d must be positive, got {self.d!r}")

    def check_alpha(self, alpha: float) -> None:
        if not self.d * alpha > 1.0:
            raise ValueError(f"need d * alpha > 1, got d={self.d!r}, alpha={alpha!r}")

    @classmethod
    def for_alpha(cls, alpha: float, epsilon: float) -> "DecompositionThresholds":
        return cls(epsilon=epsilon, d=2.0 / alpha)


@dataclass(frozen=True)
class Decomposition:
    """Normalized pieces A + B + C + D of a Wigner sample.

    Entry (i, j) of the unnormalized matrix lands in exactly one piece
    according to its max-of-real-and-imaginary-part size m = |X_ij|_inf:

        A : m <= (log N)^d
        B : (log N)^d < m < eps * sqrt(N)
        C : eps * sqrt(N) <= m <= sqrt(N) / eps
        D : m > sqrt(N) / eps

    Membership is pure selection, so A + B + C + D reconstructs the
    normalized input exactly and the supports are pairwise disjoint.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    thresholds: DecompositionThresholds

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def total(self) -> np.ndarray:
        return self.A + self.B + self.C + self.D


def decompose(raw: np.ndarray, thresholds: DecompositionThresholds) -> Decomposition:
    """Split an unnormalized Hermitian sample by entry size.

    `raw` carries the entries before the 1/sqrt(N) normalization; the four
    returned matrices are normalized.  The region predicates are evaluated
    in the order A, B, C, D, which reproduces the defining indicators
    whenever (log N)^d < eps * sqrt(N) and eps <= 1 (the regime of
    interest) and still partitions the entries otherwise.
    """
    raw = np.asarray(raw)
    N = raw.shape[0]
    if raw.ndim != 2 or raw.shape[1] != N:
        raise ValueError("raw must be a square matrix")
    if N < 2:
        raise ValueError(f"decompose needs N >= 2, got {N}")
    mag = np.maximum(np.abs(raw.real), np.abs(raw.imag))  # |z|_inf
    low = math.log(N) ** thresholds.d
    mid = thresholds.epsilon * math.sqrt(N)
    high = math.sqrt(N) / thresholds.epsilon

    mask_a = mag <= low
    mask_b = ~mask_a & (mag < mid)
    mask_c = ~mask_a & ~mask_b & (mag <= high)
    mask_d = ~mask_a & ~mask_b & ~mask_c

    Xn = raw / math.sqrt(N)
    zero = np.zeros((), dtype=Xn.dtype)
    return Decomposition(
        A=np.where(mask_a, Xn, zero),
        B=np.where(mask_b, Xn, zero),
        C=np.where(mask_c, Xn, zero),
        D=np.where(mask_d, Xn, zero),
        thresholds=thresholds,
    )


def count_C_entries(dec: Decomposition) -> int:
    """Number of nonzero entries of the C piece, both triangles counted."""
    return int(np.count_nonzero(dec.C))


# ---------------------------------------------------------------------------
# dense Hermitian eigenvalues
# ---------------------------------------------------------------------------

def _symmetrized(H: np.ndarray, tol: float = _HERM_TOL) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    scale = float(np.max(np.abs(H))) if H.size else 0.0
    dev = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if dev > tol * max(1.0, scale):
        raise ValueError(f"matrix is not Hermitian: deviation {dev:g} exceeds tolerance")
    return (H + H.conj().T) / 2.0


def largest_eigenvalue(H: np.ndarray, tol: float = _HERM_TOL) -> float:
    """Largest eigenvalue via the symmetric eigensolver.

    The input is symmetrized first; deviations beyond `tol` (relative)
    raise instead of being silently absorbed.
    """
    return float(np.linalg.eigvalsh(_symmetrized(H, tol))[-1])


def eigenvalues(H: np.ndarray, tol: float = _HERM_TOL) -> np.ndarray:
    """All eigenvalues in ascending order, same Hermitian guard as above."""
    return np.linalg.eigvalsh(_symmetrized(H, tol))


# ---------------------------------------------------------------------------
# matrix serialization (replayable experiments)
# ---------------------------------------------------------------------------

_MATRIX_HEADER = "# htldp-matrix schema=1"


def save_matrix(path, raw: np.ndarray, params: TailParams | None = None, seed: int | None = None) -> None:
    """Write a Hermitian matrix as CSV: row-major upper triangle incl. diagonal.

    The header carries N, the seed and the TailParams so a saved sample can
    be replayed or audited.  Floats are written with shortest round-trip
    repr, so load_matrix returns bit-identical values.
    """
    raw = np.asarray(raw)
    N = raw.shape[0]
    meta = {
        "N": N,
        "seed": seed,
        "complex": bool(np.iscomplexobj(raw)),
        "params": params.to_dict() if params is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_MATRIX_HEADER + "\n")
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write("i,j,re,im\n")
        for i in range(N):
            for j in range(i, N):
                v = complex(raw[i, j])
                fh.write(f"{i},{j},{v.real!r},{v.imag!r}\n")


def load_matrix(path) -> tuple[np.ndarray, dict]:
    """Read a matrix written by save_matrix; returns (matrix, metadata)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != _MATRIX_HEADER:
            raise ValueError(f"unrecognized matrix file header: {header!r}")
        meta = json.loads(fh.readline().lstrip("# ").rstrip("\n"))
        cols = fh.readline().rstrip("\n")
        if cols != "i,j,re,im":
            raise ValueError(f"unexpected column row: {cols!r}")
        N = meta["N"]
        out = np.zeros((N, N), dtype=complex if meta["complex"] else float)
        for line in fh:
            si, sj, sre, sim = line.rstrip("\n").split(",")
            i, j = int(si), int(sj)
            v = complex(float(sre), float(sim))
            out[i, j] = v if meta["complex"] else v.real
            if i != j:
                out[j, i] = v.conjugate() if meta["complex"] else v.real
    return out, meta
