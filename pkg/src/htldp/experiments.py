"""Seeded Monte Carlo campaigns over heavy-tailed Wigner samples.

Naive tail-probability estimation with Wilson intervals, the planted-spike
runs behind the outlier-transition heuristic, concentration and Bennett
bound diagnostics, rate-slope summaries over an N-grid, and the persisted
ExperimentRecord format (JSON + CSV, schema 1).

Reproducibility contract: every trial draws from its own substream spawned
from the master seed, so results are bit-identical whatever the worker
count.  Records serialize deterministically; the wall_time field is kept
in memory only (it is the one thing a rerun cannot reproduce).

No importance-sampling estimator of the rare-event probability is
attempted here: the likelihood-ratio construction for a forced entry is
easy to write down but its variance at desk-scale N is uncontrolled, so
the planted-spike limit check carries that content instead.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import (
    TailParams,
    as_generator,
    largest_eigenvalue,
    sample_wigner,
    sample_wigner_raw,
    spawn_generators,
)
from .semicircle import RateFunctionParams, rate_J

__all__ = [
    "ConcentrationRow",
    "ExperimentRecord",
    "SlopeSummary",
    "TailEstimate",
    "bennett_bound",
    "concentration_check",
    "config_digest",
    "estimate_tail",
    "planted_spike_run",
    "rate_slope_summary",
    "read_record",
    "run_tail_campaign",
    "sample_lambda_max",
    "tail_table",
    "wilson_interval",
    "write_record",
]

SCHEMA_VERSION = 1

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


# ---------------------------------------------------------------------------
# tail estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailEstimate:
    x: float
    trials: int
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float


def wilson_interval(hits: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson 95% interval; well-behaved at 0 and trials hits."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError(f"bad counts hits={hits!r}, trials={trials!r}")
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == trials else min(1.0, center + half)
    return lo, hi


def _map_trials(worker, n_trials: int, threads: int):
    if threads <= 1:
        return [worker(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n_trials)))


def sample_lambda_max(N: int, trials: int, params: TailParams, seed: int,
                      threads: int = 1) -> np.ndarray:
    """Largest eigenvalue of `trials` independent seeded Wigner samples."""
    streams = spawn_generators(seed, trials)

    def worker(i: int) -> float:
        return largest_eigenvalue(sample_wigner(N, params, streams[i]))

    return np.array(_map_trials(worker, trials, threads))


def tail_table(lams: np.ndarray, x_grid: Sequence[float]) -> list[TailEstimate]:
    """Tail estimates P(lambda_max > x) over a grid, from shared samples."""
    out = []
    trials = len(lams)
    for x in x_grid:
        hits = int(np.count_nonzero(lams > x))
        lo, hi = wilson_interval(hits, trials)
        out.append(TailEstimate(float(x), trials, hits, hits / trials, lo, hi))
    return out


def estimate_tail(N: int, x: float, trials: int, params: TailParams, seed: int,
                  threads: int = 1) -> TailEstimate:
    """Fraction of seeded samples with largest eigenvalue above x."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")
    lams = sample_lambda_max(N, trials, params, seed, threads=threads)
    return tail_table(lams, [x])[0]


# ---------------------------------------------------------------------------
# planted spikes
# ---------------------------------------------------------------------------

def planted_spike_run(N: int, theta: float, params: TailParams, trials: int,
                      seed: int, variant: str = "diagonal", bounded: bool = True,
                      threads: int = 1) -> np.ndarray:
    """Largest eigenvalues of samples with one forced large entry.

    variant "diagonal" forces X_11 = theta * sqrt(N); "offdiagonal" forces
    the symmetric pair X_12 = X_21 = theta * sqrt(N).  With bounded=True
    the remaining entries are truncated at (log N)^(2/alpha) (the small-
    entry part of the size decomposition), so the background behaves like
    a bounded-entry Wigner matrix and the sample mean of lambda_max tends
    to theta + 1/theta for theta > 1 and to 2 below the transition.
    """
    if variant not in ("diagonal", "offdiagonal"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "offdiagonal" and N < 2:
        raise ValueError("offdiagonal variant needs N >= 2")
    streams = spawn_generators(seed, trials)
    cutoff = math.log(N) ** (2.0 / params.alpha) if N >= 2 else math.inf
    root_n = math.sqrt(N)

    def worker(i: int) -> float:
        raw = sample_wigner_raw(N, params, streams[i])
        if bounded:
            mag = np.maximum(np.abs(raw.real), np.abs(raw.imag))
            raw = np.where(mag <= cutoff, raw, np.zeros((), dtype=raw.dtype))
        if variant == "diagonal":
            raw[0, 0] = theta * root_n
        else:
            raw[0, 0] = 0.0
            raw[1, 1] = 0.0
            raw[0, 1] = theta * root_n
            raw[1, 0] = theta * root_n
        return largest_eigenvalue(raw / root_n)

    return np.array(_map_trials(worker, trials, threads))


# ---------------------------------------------------------------------------
# concentration and Bennett diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationRow:
    t: float
    freq: float
    bound: float
    se: float


def concentration_check(N: int, K: float, t_grid: Sequence[float], trials: int,
                        seed: int, threads: int = 1) -> list[ConcentrationRow]:
    """Empirical concentration of lambda_max for K-bounded entries.

    Samples symmetric matrices with i.i.d. uniform(-K, K) upper triangle
    and tabulates the frequency of |lambda - mean lambda| > t against the
    sub-Gaussian bound 2 exp(-t^2 / (32 K^2)).
    """
    streams = spawn_generators(seed, trials)

    def worker(i: int) -> float:
        rng = streams[i]
        M = np.zeros((N, N))
        iu = np.triu_indices(N)
        M[iu] = rng.uniform(-K, K, len(iu[0]))
        M = M + M.T - np.diag(np.diag(M))
        return largest_eigenvalue(M)

    lams = np.array(_map_trials(worker, trials, threads))
    center = lams.mean()
    rows = []
    for t in t_grid:
        freq = float(np.count_nonzero(np.abs(lams - center) > t)) / trials
        bound = 2.0 * math.exp(-t * t / (32.0 * K * K))
        se = math.sqrt(freq * (1.0 - freq) / trials)
        rows.append(ConcentrationRow(float(t), freq, bound, se))
    return rows


def bennett_bound(v: float, b_cap: float, t: float) -> float:
    """Bennett tail bound exp(-(v / b^2) h(b t / v)), h(u) = (1+u)log(1+u) - u."""
    if not (v > 0.0 and b_cap > 0.0):
        raise ValueError(f"v and b_cap must be positive, got v={v!r}, b_cap={b_cap!r}")
    if t < 0.0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    u = b_cap * t / v
    h = (1.0 + u) * math.log1p(u) - u
    return math.exp(-v / (b_cap * b_cap) * h)


# ---------------------------------------------------------------------------
# experiment records
# ---------------------------------------------------------------------------

def config_digest(config: dict) -> str:
    """Stable sha256 of a canonical JSON encoding of the configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ExperimentRecord:
    """One seeded tail campaign at a single N.

    wall_time is informational only and is excluded from the serialized
    bytes so that identical (config, seed) reproduce identical files.
    """

    config: dict
    config_hash: str
    seed: int
    N: int
    params: TailParams
    x_grid: tuple[float, ...]
    tail_estimates: tuple[TailEstimate, ...]
    lambda_samples: tuple[float, ...]
    wall_time: float = field(default=float("nan"), compare=False)
    schema: int = SCHEMA_VERSION

    def to_json(self) -> str:
        payload = {
            "schema": self.schema,
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "N": self.N,
            "params": self.params.to_dict(),
            "x_grid": list(self.x_grid),
            "tail_estimates": [
                [e.x, e.trials, e.hits, e.p_hat, e.ci_low, e.ci_high]
                for e in self.tail_estimates
            ],
            "lambda_samples": list(self.lambda_samples),
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRecord":
        d = json.loads(text)
        if d["schema"] != SCHEMA_VERSION:
            raise ValueError(f"unsupported record schema {d['schema']!r}")
        return cls(
            config=d["config"],
            config_hash=d["config_hash"],
            seed=d["seed"],
            N=d["N"],
            params=TailParams.from_dict(d["params"]),
            x_grid=tuple(d["x_grid"]),
            tail_estimates=tuple(TailEstimate(*row) for row in d["tail_estimates"]),
            lambda_samples=tuple(d["lambda_samples"]),
        )

    def csv_text(self) -> str:
        lines = ["x,trials,hits,p_hat,ci_low,ci_high"]
        for e in self.tail_estimates:
            lines.append(
                f"{format_float(e.x)},{e.trials},{e.hits},"
                f"{format_float(e.p_hat)},{format_float(e.ci_low)},{format_float(e.ci_high)}"
            )
        return "\n".join(lines) + "\n"


def format_float(v: float) -> str:
    """Shortest round-trip decimal, 'inf' for +infinity ('.' decimal point)."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def write_record(record: ExperimentRecord, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"record_N{record.N}_seed{record.seed}"
    json_path = out_dir / f"{stem}.json"
    csv_path = out_dir / f"{stem}.csv"
    json_path.write_text(record.to_json() + "\n", encoding="utf-8")
    csv_path.write_text(record.csv_text(), encoding="utf-8")
    return json_path, csv_path


def read_record(path) -> ExperimentRecord:
    return ExperimentRecord.from_json(Path(path).read_text(encoding="utf-8"))


def run_tail_campaign(params: TailParams, N_grid: Sequence[int],
                      x_grid: Sequence[float], trials: int, seed: int,
                      threads: int = 1) -> list[ExperimentRecord]:
    """One record per N: shared lambda samples scored over the x grid.

    The per-N seed is derived from (seed, N), so adding or removing grid
    points does not disturb the other records.
    """
    records = []
    for N in N_grid:
        config = {
            "kind": "tail",
            "N": int(N),
            "x_grid": [float(x) for x in x_grid],
            "trials": int(trials),
            "seed": int(seed),
            "params": params.to_dict(),
        }
        t0 = time.perf_counter()
        sub_seed = int(np.random.SeedSequence([seed, int(N)]).generate_state(1)[0])
        lams = sample_lambda_max(int(N), trials, params, sub_seed, threads=threads)
        estimates = tail_table(lams, x_grid)
        records.append(ExperimentRecord(
            config=config,
            config_hash=config_digest(config),
            seed=int(seed),
            N=int(N),
            params=params,
            x_grid=tuple(float(x) for x in x_grid),
            tail_estimates=tuple(estimates),
            lambda_samples=tuple(float(v) for v in lams),
            wall_time=time.perf_counter() - t0,
        ))
    return records


# ---------------------------------------------------------------------------
# rate-slope summary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeSummary:
    x: float
    slope: float
    intercept: float
    n_points: int
    j_reference: float | None


def rate_slope_summary(records: Sequence[ExperimentRecord], x: float,
                       c: float | None = None) -> SlopeSummary:
    """Least-squares slope of -log p_hat against N^(alpha/2) at level x.

    A descriptive summary only: desk-scale N cannot reach the asymptotic
    regime, so no accuracy claim attaches to the slope.  Needs at least
    three distinct N with nonzero estimates; all-zero tails are reported
    as non-estimable by raising ValueError.
    """
    pts: dict[int, float] = {}
    alpha = None
    for r in records:
        alpha = r.params.alpha
        for e in r.tail_estimates:
            if e.x == x and e.p_hat > 0.0:
                pts[r.N] = e.p_hat
    if len(pts) < 3:
        raise ValueError(
            f"non-estimable: need >= 3 distinct N with nonzero p_hat at x={x!r}, "
            f"got {len(pts)}")
    Ns = np.array(sorted(pts))
    v = Ns ** (alpha / 2.0)
    y = -np.log(np.array([pts[int(n)] for n in Ns]))
    slope, intercept = np.polyfit(v, y, 1)
    j_ref = None
    if c is not None:
        j_ref = rate_J(x, RateFunctionParams(alpha=alpha, c=c))
    return SlopeSummary(x=float(x), slope=float(slope), intercept=float(intercept),
                        n_points=len(pts), j_reference=j_ref)
