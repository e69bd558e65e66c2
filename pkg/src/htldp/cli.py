"""Command-line surface: reproducible experiments and reports.

Commands
--------
rate      tabulate the rate function J over an x grid (CSV + SVG)
solve-c   closed-form constant c with witness, optionally cross-checked
bbp       planted-spike sweep of the outlier transition
tail      seeded tail-probability campaign over an N grid, persisted records
isotropy  resolvent isotropy gaps over growing N
check     run the built-in invariant battery

Every command is deterministic given --seed.  Exit codes: 0 success,
2 validation error, 3 oracle disagreement / failed check.  Configuration
may be given as flags or as a JSON file via --config; flags win.
CSV output uses a header row, ',' separators, '.' decimals and 'inf'
for plus infinity.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, model, oracles, semicircle, spikes, variational
from .experiments import format_float

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DISAGREEMENT = 3


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _parse_support(text: str) -> tuple[complex, ...]:
    vals = []
    for token in text.split(","):
        token = token.strip().replace("i", "j")
        if not token:
            continue
        vals.append(complex(token))
    if not vals:
        raise ValueError(f"empty support specification {text!r}")
    return tuple(vals)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _add_model_args(p: argparse.ArgumentParser, sampler_default: str = "mixture") -> None:
    p.add_argument("--alpha", type=float, default=None, help="tail exponent in (0, 2)")
    p.add_argument("--a", type=float, default=None, help="off-diagonal tail constant")
    p.add_argument("--b", type=float, default=None, help="diagonal tail constant")
    p.add_argument("--nu1", type=str, default=None,
                   help="diagonal angle support, e.g. '+1' or '+1,-1'")
    p.add_argument("--nu2", type=str, default=None,
                   help="off-diagonal angle support, e.g. '+1,-1'")
    p.add_argument("--sampler", choices=["mixture", "weibull"], default=None,
                   help=f"entry sampler (default {sampler_default})")
    p.add_argument("--complex", dest="complex_entries", action="store_true",
                   help="complex off-diagonal entries")
    p.set_defaults(_sampler_default=sampler_default)


def _params_from_args(args) -> model.TailParams:
    alpha = args.alpha if args.alpha is not None else 1.0
    b = args.b if args.b is not None else 1.0
    nu1 = _parse_support(args.nu1) if args.nu1 else (1.0,)
    cplx = bool(getattr(args, "complex_entries", False))
    sampler = args.sampler or args._sampler_default
    if sampler == "weibull":
        if args.a is not None:
            raise ValueError("--a cannot be chosen with the weibull sampler "
                             "(it is pinned to Gamma(1+2/alpha)^(alpha/2)); "
                             "use --sampler mixture")
        nu2 = _parse_support(args.nu2) if args.nu2 else None
        return model.weibull_params(alpha, b=b, nu1=nu1, nu2=nu2, complex_entries=cplx)
    a = args.a if args.a is not None else 1.0
    if args.nu2:
        nu2 = _parse_support(args.nu2)
    else:
        nu2 = (1.0, -1.0, 1j, -1j) if cplx else (1.0, -1.0)
    return model.mixture_params(alpha, a=a, b=b, nu1=nu1, nu2=nu2, complex_entries=cplx)


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset flags from the --config JSON file (flags override)."""
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"config key {key!r} is not a flag of this command")
        if getattr(args, dest) is None or getattr(args, dest) is False:
            setattr(args, dest, value)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("HTLDP_THREADS")
    return int(env) if env else 1


def _out_dir(args) -> Path:
    out = Path(args.out if getattr(args, "out", None) else "htldp_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_csv(path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)] + [",".join(r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:] if ln]


def _witness_json(w: variational.SparseHermitian, params, c: float, case: str) -> dict:
    return {
        "n": w.n,
        "entries": [[i, j, v.real, v.imag] for (i, j), v in sorted(w.entries.items())],
        "weight": variational.weight_I(w, params),
        "largest_eigenvalue": w.largest_eigenvalue(),
        "c": c,
        "case": case,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_rate(args) -> int:
    params = _params_from_args(args)
    if args.c is not None:
        c, case = float(args.c), "override"
    else:
        res = variational.closed_form_c(params)
        c, case = res.c, res.case
    if args.x_grid:
        xs = list(_parse_floats(args.x_grid))
    else:
        xs = list(np.linspace(args.x_min, args.x_max, args.x_steps))
    rp = semicircle.RateFunctionParams(alpha=params.alpha, c=c)
    js = [semicircle.rate_J(x, rp) for x in xs]
    out = _out_dir(args)
    rows = [[format_float(x), format_float(j)] for x, j in zip(xs, js)]
    write_csv(out / "rate.csv", ["x", "J"], rows)
    from .svgplot import line_plot_svg
    line_plot_svg(out / "rate.svg", [("J(x)", xs, js)],
                  title=f"rate function (alpha={params.alpha}, c={c:.6g}, case {case})",
                  xlabel="x", ylabel="J")
    print(f"c = {format_float(c)} (case {case})")
    print("x,J")
    shown = rows if len(rows) <= 24 else rows[:12] + [["...", "..."]] + rows[-11:]
    for r in shown:
        print(",".join(r))
    print(f"wrote {out / 'rate.csv'} and {out / 'rate.svg'}")
    return EXIT_OK


def cmd_solve_c(args) -> int:
    params = _params_from_args(args)
    closed = None
    try:
        closed = variational.closed_form_c(params)
    except variational.UnsupportedSupportError as exc:
        if args.oracle is None:
            raise
        print(f"closed form unavailable: {exc}")
    out = _out_dir(args)
    if closed is not None:
        print(f"closed-form c = {format_float(closed.c)} (case {closed.case})")
        report = _witness_json(closed.witness, params, closed.c, closed.case)
        (out / "witness.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n",
                                          encoding="utf-8")
        print(f"witness ({closed.witness.n}x{closed.witness.n}) -> {out / 'witness.json'}")
    if args.oracle is None:
        return EXIT_OK
    brute = variational.brute_force_c(params, max_n=args.oracle, seed=args.seed)
    print(f"brute-force c = {format_float(brute.c)} "
          f"(argmin {brute.argmin.n}x{brute.argmin.n}, max_n={args.oracle})")
    (out / "witness_bruteforce.json").write_text(
        json.dumps(_witness_json(brute.argmin, params, brute.c, "numeric"),
                   sort_keys=True, indent=1) + "\n", encoding="utf-8")
    if closed is not None:
        rel = abs(brute.c - closed.c) / closed.c
        print(f"relative disagreement = {rel:.3e}")
        if rel > 1e-3:
            print("ORACLE DISAGREEMENT beyond 1e-3", file=sys.stderr)
            return EXIT_DISAGREEMENT
    return EXIT_OK


def cmd_bbp(args) -> int:
    params = _params_from_args(args)
    thetas = _parse_floats(args.theta_grid)
    threads = _threads(args)
    rows = []
    means, refs = [], []
    for idx, theta in enumerate(thetas):
        sub_seed = int(np.random.SeedSequence([args.seed, idx]).generate_state(1)[0])
        lams = experiments.planted_spike_run(
            args.N, theta, params, args.trials, sub_seed,
            variant=args.variant, threads=threads)
        ref = spikes.bbp_outlier(theta)
        means.append(float(lams.mean()))
        refs.append(ref)
        rows.append([format_float(theta), format_float(float(lams.mean())),
                     format_float(float(lams.std(ddof=1)) if len(lams) > 1 else 0.0),
                     format_float(ref)])
    out = _out_dir(args)
    write_csv(out / "bbp.csv", ["theta", "mean_lambda", "sd_lambda", "reference"], rows)
    from .svgplot import line_plot_svg
    line_plot_svg(out / "bbp.svg",
                  [("empirical mean", list(thetas), means),
                   ("theta + 1/theta rule", list(thetas), refs)],
                  title=f"outlier transition, N={args.N}, {args.trials} trials",
                  xlabel="theta", ylabel="largest eigenvalue")
    print("theta,mean_lambda,sd_lambda,reference")
    for r in rows:
        print(",".join(r))
    print(f"wrote {out / 'bbp.csv'} and {out / 'bbp.svg'}")
    return EXIT_OK


def cmd_tail(args) -> int:
    params = _params_from_args(args)
    N_grid = _parse_ints(args.N_grid)
    x_grid = _parse_floats(args.x_grid)
    if not N_grid or not x_grid or args.trials < 1:
        raise ValueError("need nonempty N grid, x grid and trials >= 1")
    config = {
        "kind": "tail", "N_grid": list(N_grid), "x_grid": list(x_grid),
        "trials": args.trials, "seed": args.seed, "params": params.to_dict(),
    }
    digest = experiments.config_digest(config)
    if args.dry_run:
        print(f"config ok (hash {digest}); dry run, nothing written")
        return EXIT_OK
    out = _out_dir(args)
    records = experiments.run_tail_campaign(
        params, N_grid, x_grid, args.trials, args.seed, threads=_threads(args))
    for rec in records:
        jp, cp = experiments.write_record(rec, out)
        print(f"N={rec.N}: wrote {jp.name}, {cp.name} ({rec.wall_time:.2f}s)")
    summary_rows = []
    c_ref = None
    try:
        c_ref = variational.closed_form_c(params).c
    except variational.UnsupportedSupportError:
        pass
    for x in x_grid:
        try:
            s = experiments.rate_slope_summary(records, x, c=c_ref)
            summary_rows.append([format_float(x), format_float(s.slope),
                                 format_float(s.intercept), str(s.n_points),
                                 format_float(s.j_reference) if s.j_reference is not None
                                 else "nan"])
        except ValueError:
            summary_rows.append([format_float(x), "nan", "nan", "0", "nan"])
    write_csv(out / "tail_summary.csv",
              ["x", "slope", "intercept", "n_points", "J_reference"], summary_rows)
    print(f"wrote {out / 'tail_summary.csv'} (config hash {digest})")
    return EXIT_OK


def cmd_isotropy(args) -> int:
    params = _params_from_args(args)
    N_grid = _parse_ints(args.N_grid)
    rows = []
    medians = []
    for idx, N in enumerate(N_grid):
        sub_seed = np.random.SeedSequence([args.seed, idx])
        rng = np.random.default_rng(sub_seed)
        H = model.sample_wigner(N, params, rng)
        lam = model.largest_eigenvalue(H)
        if not args.x > max(2.0, lam):
            raise ValueError(f"x={args.x} is not above the spectrum at N={N} "
                             f"(lambda_max={lam:.4f}); raise --x")
        gaps = []
        for _ in range(args.pairs):
            u = rng.standard_normal(N)
            u /= np.linalg.norm(u)
            v = rng.standard_normal(N)
            v -= (u @ v) * u
            v /= np.linalg.norm(v)
            gaps.append(spikes.isotropy_gap(H, u, v, args.x, lam_max=lam))
            gaps.append(spikes.isotropy_gap(H, u, u, args.x, lam_max=lam))
        med = float(np.median(gaps))
        medians.append(med)
        rows.append([str(N), format_float(med), format_float(float(np.quantile(gaps, 0.9)))])
    out = _out_dir(args)
    write_csv(out / "isotropy.csv", ["N", "median_gap", "q90_gap"], rows)
    print("N,median_gap,q90_gap")
    for r in rows:
        print(",".join(r))
    trend = "decreasing" if all(b <= a * 1.25 for a, b in zip(medians, medians[1:])) \
        else "not monotone at these sizes"
    print(f"median gap trend over N: {trend}")
    print(f"wrote {out / 'isotropy.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# invariant battery
# ---------------------------------------------------------------------------

def _battery(seed: int, only: str | None):
    rng = np.random.default_rng(seed)
    checks = []

    def add(name, fn):
        if only is None or only in name:
            checks.append((name, fn))

    def stieltjes_roundtrip():
        xs = np.linspace(2.0, 50.0, 2001)
        err = max(abs(semicircle.stieltjes_inverse(semicircle.stieltjes(x)) - x) for x in xs)
        return err < 1e-12, f"max roundtrip error {err:.2e}"

    def complex_vs_quadrature():
        pts = [2.5 + 0j, 10 + 0j, 1j, -3 + 0.5j, 0.3 - 2j]
        err = max(abs(semicircle.stieltjes_complex(z) - oracles.stieltjes_by_quadrature(z))
                  for z in pts)
        return err < 1e-8, f"max defect {err:.2e}"

    def density_mass():
        from scipy.integrate import quad
        total = quad(semicircle.semicircle_density, -2, 2, epsabs=1e-13, limit=200)[0]
        return abs(total - 1.0) < 1e-10, f"integral {total:.12f}"

    def rate_shape():
        rp = semicircle.RateFunctionParams(alpha=1.3, c=0.7)
        xs = np.linspace(2.0001, 8, 500)
        js = [semicircle.rate_J(x, rp) for x in xs]
        ok = (semicircle.rate_J(1.9, rp) == math.inf
              and semicircle.rate_J(2.0, rp) == 0.0
              and all(b > a for a, b in zip(js, js[1:]))
              and abs(semicircle.rate_J(2.0 + 1e-12, rp) - rp.c) < 1e-6)
        return ok, "inf below 2, 0 at 2, increasing, limit c at 2+"

    def decomposition_reconstructs():
        params = model.weibull_params(0.8)
        th = model.DecompositionThresholds.for_alpha(0.8, 0.4)
        for s in range(5):
            raw = model.sample_wigner_raw(60, params, 1000 + s)
            dec = model.decompose(raw, th)
            if not np.array_equal(dec.total(), raw / math.sqrt(60)):
                return False, f"reconstruction failed at seed {1000 + s}"
        return True, "5 seeds bit-exact"

    def weyl():
        for _ in range(100):
            n = int(rng.integers(2, 12))
            A = rng.standard_normal((n, n))
            A = (A + A.T) / 2
            E = rng.standard_normal((n, n))
            E = (E + E.T) / 2
            wa, we, ws = (np.linalg.eigvalsh(M) for M in (A, E, A + E))
            if ws[-1] > wa[-1] + we[-1] + 1e-10 or ws[-1] < wa[-1] + we[0] - 1e-10:
                return False, "Weyl bound violated"
        return True, "100 random pairs"

    def eigen_equation():
        for s in range(20):
            r = np.random.default_rng(10_000 + s)
            N = int(r.integers(10, 60))
            H = r.standard_normal((N, N))
            H = (H + H.T) / (2 * math.sqrt(N))
            k = int(r.integers(1, 4))
            theta = np.sort(r.uniform(0.5, 4.0, k))
            U = np.linalg.qr(r.standard_normal((N, k)))[0]
            eq = spikes.EigenEquation(H=H, spike=spikes.SpikeSpec(tuple(theta), U))
            top = model.largest_eigenvalue(H + eq.spike.matrix())
            if top <= eq.lam_max + 1e-6:
                continue
            z = spikes.spike_largest_zero(eq)
            if z is None or abs(z - top) > 1e-8:
                return False, f"zero/eigenvalue mismatch at seed {s}"
        return True, "20 instances"

    def rank_one_coherence():
        for theta in np.linspace(1.01, 40, 40):
            z = spikes.largest_zero(lambda x: spikes.limit_f([theta], x),
                                    (2.0 + 1e-9, theta + 2.0))
            if z is None or abs(z - spikes.bbp_outlier(theta)) > 1e-10:
                return False, f"mismatch at theta={theta}"
        return True, "40 spike strengths"

    def lemma_oracles():
        for s in range(6):
            r = np.random.default_rng(20_000 + s)
            lam = float(r.uniform(0, 0.5))
            mu = float(r.uniform(lam + 0.1, 2.0))
            delta = float(r.uniform(0.2, 0.9))
            n = int(r.integers(2, 5))
            B = np.full((n, n), mu) + (lam - mu) * np.eye(n)
            got = oracles.max_quadform_nonneg_lp(B, delta, r, cloud=800, polish=4)
            want = variational.quadform_max_simplex(lam, mu, delta, n)
            if abs(got - want) > 1e-4:
                return False, f"simplex lemma defect {abs(got - want):.2e}"
        return True, "6 draws"

    def anchor_c():
        params = model.tail_params(1.0, 1.0, 1.0, nu1=(1.0,), nu2=(1.0, -1.0))
        closed = variational.closed_form_c(params)
        brute = variational.brute_force_c(params, max_n=3, seed=7)
        ok = closed.c == 1.0 and abs(brute.c - 1.0) <= 1e-3
        return ok, f"closed {closed.c}, brute {brute.c:.6f}"

    add("stieltjes-roundtrip", stieltjes_roundtrip)
    add("stieltjes-complex-quadrature", complex_vs_quadrature)
    add("density-mass", density_mass)
    add("rate-shape", rate_shape)
    add("decomposition-reconstruction", decomposition_reconstructs)
    add("weyl-inequality", weyl)
    add("eigen-equation-zeros", eigen_equation)
    add("rank-one-outlier-coherence", rank_one_coherence)
    add("lemma-oracles", lemma_oracles)
    add("constant-c-anchor", anchor_c)
    return checks


def cmd_check(args) -> int:
    checks = _battery(args.seed, args.only)
    if not checks:
        raise ValueError(f"no checks match --only {args.only!r}")
    failures = 0
    for name, fn in checks:
        ok, detail = fn()
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return EXIT_DISAGREEMENT
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="htldp",
        description="Numerical lab for largest-eigenvalue deviations of "
                    "heavy-tailed Wigner matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, sampler_default="mixture"):
        q.add_argument("--config", type=str, default=None,
                       help="JSON file with flag values (flags override)")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out", type=str, default=None,
                       help="output directory (default htldp_out)")
        q.add_argument("--threads", type=int, default=None,
                       help="worker threads (env HTLDP_THREADS as fallback)")
        _add_model_args(q, sampler_default)

    q = sub.add_parser("rate", help="tabulate the rate function J")
    common(q)
    q.add_argument("--c", type=float, default=None, help="override the constant c")
    q.add_argument("--x-grid", type=str, default=None, help="comma-separated x values")
    q.add_argument("--x-min", type=float, default=1.8)
    q.add_argument("--x-max", type=float, default=6.0)
    q.add_argument("--x-steps", type=int, default=200)
    q.set_defaults(func=cmd_rate)

    q = sub.add_parser("solve-c", help="closed-form constant with witness")
    common(q)
    q.add_argument("--oracle", type=int, default=None, metavar="MAX_N",
                   help="also run the brute-force minimizer up to this size")
    q.set_defaults(func=cmd_solve_c)

    q = sub.add_parser("bbp", help="planted-spike transition sweep")
    common(q, sampler_default="weibull")
    q.add_argument("--theta-grid", type=str, default="0.5,0.8,1.0,1.2,1.5,2.0,3.0")
    q.add_argument("--N", type=int, default=1000)
    q.add_argument("--trials", type=int, default=10)
    q.add_argument("--variant", choices=["diagonal", "offdiagonal"], default="diagonal")
    q.set_defaults(func=cmd_bbp)

    q = sub.add_parser("tail", help="tail-probability campaign")
    common(q)
    q.add_argument("--N-grid", type=str, default="100,200,400")
    q.add_argument("--x-grid", type=str, default="2.1,2.3,2.5")
    q.add_argument("--trials", type=int, default=200)
    q.add_argument("--dry-run", action="store_true",
                   help="validate the configuration and exit without writing")
    q.set_defaults(func=cmd_tail)

    q = sub.add_parser("isotropy", help="resolvent isotropy diagnostics")
    common(q, sampler_default="weibull")
    q.add_argument("--N-grid", type=str, default="200,500,1000")
    q.add_argument("--x", type=float, default=3.0)
    q.add_argument("--pairs", type=int, default=20)
    q.set_defaults(func=cmd_isotropy)

    q = sub.add_parser("check", help="run the invariant battery")
    q.add_argument("--config", type=str, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--only", type=str, default=None,
                   help="run only checks whose name contains this substring")
    q.set_defaults(func=cmd_check)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the validation code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        _apply_config_file(args)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
