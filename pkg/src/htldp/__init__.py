"""Numerical lab for largest-eigenvalue deviations of heavy-tailed Wigner
matrices: semicircle-law scalar functions, stretched-exponential entry
models, the variational tail constant with closed forms and a brute-force
oracle, finite-rank spike machinery, and seeded Monte Carlo experiments.
"""

from .semicircle import (
    RateFunctionParams,
    rate_J,
    semicircle_cdf,
    semicircle_density,
    stieltjes,
    stieltjes_complex,
    stieltjes_inverse,
)
from .model import (
    Decomposition,
    DecompositionThresholds,
    TailParams,
    count_C_entries,
    decompose,
    largest_eigenvalue,
    mixture_params,
    sample_wigner,
    sample_wigner_raw,
    tail_params,
    weibull_offdiag_tail_constant,
    weibull_params,
)
from .variational import (
    BruteForceC,
    ClosedFormC,
    SparseHermitian,
    UnsupportedSupportError,
    brute_force_c,
    closed_form_c,
    extremal_matrix,
    in_domain,
    perm_invariant_distance,
    phi,
    psd_offdiag_max,
    psi,
    quadform_max_bipartite,
    quadform_max_simplex,
    t0,
    t1,
    weight_I,
)
from .spikes import (
    EigenEquation,
    SpikeSpec,
    bbp_outlier,
    eigen_equation_matrix,
    f_N,
    isotropy_gap,
    largest_zero,
    limit_f,
    mu_eps,
    spike_largest_zero,
)
from .experiments import (
    ExperimentRecord,
    bennett_bound,
    concentration_check,
    estimate_tail,
    planted_spike_run,
    rate_slope_summary,
    run_tail_campaign,
    wilson_interval,
)

__version__ = "0.1.0"
