import math

import numpy as np
import pytest

from htldp.model import (
    Decomposition,
    DecompositionThresholds,
    TailParams,
    count_C_entries,
    decompose,
    eigenvalues,
    largest_eigenvalue,
    load_matrix,
    mixture_params,
    sample_entries,
    sample_wigner,
    sample_wigner_raw,
    save_matrix,
    spawn_generators,
    weibull_offdiag_tail_constant,
    weibull_params,
)
from htldp.oracles import lambda_max_power


class TestTailParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            mixture_params(2.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            mixture_params(1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            mixture_params(1.0, 1.0, 1.0, nu1=())
        with pytest.raises(ValueError):
            mixture_params(1.0, 1.0, 1.0, nu1=(0.5,))
        with pytest.raises(ValueError):
            # nu1 lives on {-1, +1}: the diagonal is real
            mixture_params(1.0, 1.0, 1.0, nu1=(1j,))
        with pytest.raises(ValueError):
            # complex off-diagonal support needs complex entries
            mixture_params(1.0, 1.0, 1.0, nu2=(1j, -1j))

    def test_weibull_pins_a(self):
        with pytest.raises(ValueError):
            TailParams(alpha=1.0, a=1.0, b=1.0, kappa=1.0, nu1_support=(1.0,),
                       nu2_support=(1.0, -1.0), sampler="weibull")
        p = weibull_params(1.0)
        assert p.a == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_effective_tail_constant_alpha_half(self):
        # Gamma(1 + 4)^(1/4) = 24^(1/4)
        assert weibull_offdiag_tail_constant(0.5) == pytest.approx(24.0 ** 0.25, abs=1e-12)
        assert weibull_offdiag_tail_constant(0.5) == pytest.approx(2.2133638394, abs=1e-9)

    def test_dict_roundtrip(self):
        p = mixture_params(0.7, 2.0, 3.0, nu1=(-1.0,), nu2=(1.0, -1.0))
        assert TailParams.from_dict(p.to_dict()) == p


class TestEntrySamplers:
    def test_diagonal_exponential_tail(self):
        # alpha = 1, b = 1, nu1 = {+1}: the exponential(1) diagonal
        p = weibull_params(1.0, b=1.0, nu1=(1.0,))
        draws = sample_entries(p, "diagonal", 300_000, 11)
        assert np.all(draws >= 0.0)
        for t in [2.0, 4.0, 6.0]:
            want = math.exp(-t)
            got = np.mean(draws > t)
            band = 5.0 * math.sqrt(want * (1 - want) / len(draws))
            assert abs(got - want) < band

    def test_diagonal_scale_matches_b(self):
        p = mixture_params(0.8, 1.0, 2.5, nu1=(1.0, -1.0))
        draws = sample_entries(p, "diagonal", 400_000, 5)
        # P(|X| > t) = exp(-b t^alpha) exactly for the Weibull diagonal
        for t in [1.0, 1.5]:
            want = math.exp(-2.5 * t ** 0.8)
            got = np.mean(np.abs(draws) > t)
            band = 5.0 * math.sqrt(want * (1 - want) / len(draws))
            assert abs(got - want) < band

    @pytest.mark.parametrize("maker", [
        lambda: weibull_params(1.0),
        lambda: weibull_params(0.5),
        lambda: mixture_params(1.0, 1.0, 1.0),
        lambda: mixture_params(0.6, 0.4, 2.0),
        lambda: mixture_params(1.3, 3.0, 1.0, nu2=(1.0,)),
        lambda: weibull_params(1.2, complex_entries=True),
        lambda: mixture_params(1.0, 1.0, 1.0, nu2=(1j, -1j), complex_entries=True),
    ])
    def test_offdiagonal_moments(self, maker):
        p = maker()
        draws = sample_entries(p, "offdiagonal", 1_000_000, 99)
        n = len(draws)
        mean = draws.mean()
        second = np.mean(np.abs(draws) ** 2)
        # CLT bands: sd of the mean is about 1/sqrt(n), of |X|^2 about sd(|X|^2)/sqrt(n)
        assert abs(mean) < 4.0 / math.sqrt(n)
        m4 = np.mean(np.abs(draws) ** 4)
        band = 4.0 * math.sqrt(max(m4 - second ** 2, 0.0) / n)
        assert abs(second - 1.0) < max(band, 1e-3)

    def test_weibull_effective_tail_alpha_half(self):
        p = weibull_params(0.5)
        a_eff = weibull_offdiag_tail_constant(0.5)
        draws = np.abs(sample_entries(p, "offdiagonal", 2_000_000, 17))
        for t in [1.5, 2.5]:
            p_hat = np.mean(draws > t)
            est = -math.log(p_hat) / t ** 0.5
            assert est == pytest.approx(a_eff, rel=0.05)

    def test_mixture_exact_tail_constant_by_slope(self):
        # -log P(|X|>t) = a t^alpha - log(weight): the slope in t^alpha is exactly a
        p = mixture_params(1.0, 1.0, 1.0)
        draws = np.abs(sample_entries(p, "offdiagonal", 2_000_000, 23))
        t1, t2 = 3.0, 6.0
        p1, p2 = np.mean(draws > t1), np.mean(draws > t2)
        slope = (math.log(p1) - math.log(p2)) / (t2 - t1)
        assert slope == pytest.approx(1.0, rel=0.08)

    def test_role_validation(self):
        with pytest.raises(ValueError):
            sample_entries(weibull_params(1.0), "upper", 3, 0)

    def test_weibull_rejects_uncentered_support(self):
        # the pure Weibull sampler cannot center a one-sided support
        with pytest.raises(ValueError):
            weibull_params(1.0, nu2=(1.0,))


class TestWignerSampling:
    def test_single_entry(self):
        p = weibull_params(1.0, b=1.0, nu1=(1.0,))
        X = sample_wigner(1, p, 7)
        raw = sample_wigner_raw(1, p, 7)
        assert X.shape == (1, 1)
        assert X[0, 0] == raw[0, 0]  # sqrt(1) = 1
        assert raw[0, 0] > 0

    def test_determinism_and_hermitian(self):
        p = weibull_params(0.9)
        X1 = sample_wigner(80, p, 123)
        X2 = sample_wigner(80, p, 123)
        X3 = sample_wigner(80, p, 124)
        assert np.array_equal(X1, X2)
        assert not np.array_equal(X1, X3)
        assert np.array_equal(X1, X1.T)

    def test_complex_hermitian(self):
        p = weibull_params(1.1, complex_entries=True)
        X = sample_wigner(40, p, 5)
        assert np.iscomplexobj(X)
        assert np.allclose(X, X.conj().T, atol=0)
        assert np.all(X.diagonal().imag == 0.0)

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            sample_wigner(0, weibull_params(1.0), 0)


class TestDecomposition:
    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            DecompositionThresholds(epsilon=0.0, d=2.0)
        th = DecompositionThresholds(epsilon=0.5, d=0.9)
        with pytest.raises(ValueError):
            th.check_alpha(1.0)
        DecompositionThresholds.for_alpha(1.0, 0.5).check_alpha(1.0)

    def _boundary_setup(self):
        # d just above 1/alpha keeps the asymptotic ordering alive at desk N
        N, eps, d = 120, 0.5, 1.01
        th = DecompositionThresholds(epsilon=eps, d=d)
        low = math.log(N) ** d
        mid = eps * math.sqrt(N)
        high = math.sqrt(N) / eps
        assert low < mid < high
        return N, th, low, mid, high

    def test_boundary_assignments(self):
        N, th, low, mid, high = self._boundary_setup()
        raw = np.zeros((N, N))
        raw[0, 1] = raw[1, 0] = low        # closed boundary of A
        raw[0, 2] = raw[2, 0] = mid        # closed lower boundary of C
        raw[0, 3] = raw[3, 0] = high       # closed upper boundary of C
        raw[0, 4] = raw[4, 0] = np.nextafter(high, np.inf)  # just above: D
        raw[0, 5] = raw[5, 0] = np.nextafter(low, np.inf)   # just above: B
        dec = decompose(raw, th)
        root = math.sqrt(N)
        assert dec.A[0, 1] == low / root and dec.B[0, 1] == 0 and dec.C[0, 1] == 0
        assert dec.C[0, 2] == mid / root
        assert dec.C[0, 3] == high / root and dec.D[0, 3] == 0
        assert dec.D[0, 4] != 0 and dec.C[0, 4] == 0
        assert dec.B[0, 5] != 0 and dec.A[0, 5] == 0

    def test_inf_norm_uses_real_and_imaginary_parts(self):
        N, th, low, mid, high = self._boundary_setup()
        raw = np.zeros((N, N), dtype=complex)
        # modulus above the cut but |z|_inf exactly at it: stays in A
        raw[0, 1] = complex(low, low)
        raw[1, 0] = raw[0, 1].conjugate()
        dec = decompose(raw, th)
        assert dec.A[0, 1] == raw[0, 1] / math.sqrt(N)
        assert dec.B[0, 1] == 0

    def test_zero_matrix(self):
        th = DecompositionThresholds(epsilon=0.5, d=2.0)
        dec = decompose(np.zeros((10, 10)), th)
        for part in (dec.A, dec.B, dec.C, dec.D):
            assert not part.any() or np.all(part == 0.0)
        assert count_C_entries(dec) == 0

    def test_reconstruction_bit_for_bit(self):
        p = mixture_params(0.7, 1.0, 1.0)
        th = DecompositionThresholds(epsilon=0.4, d=1.5)
        for seed in range(10):
            raw = sample_wigner_raw(64, p, seed)
            dec = decompose(raw, th)
            assert np.array_equal(dec.total(), raw / math.sqrt(64))

    def test_supports_disjoint_and_a_bounded(self):
        p = mixture_params(0.7, 1.0, 1.0)
        th = DecompositionThresholds(epsilon=0.4, d=1.5)
        raw = sample_wigner_raw(100, p, 3)
        dec = decompose(raw, th)
        nz = sum((part != 0).astype(int) for part in (dec.A, dec.B, dec.C, dec.D))
        assert nz.max() <= 1
        bound = math.log(100) ** th.d / math.sqrt(100)
        mag = np.maximum(np.abs(dec.A.real), np.abs(dec.A.imag))
        assert mag.max() <= bound + 1e-15

    def test_small_matrix_rejected(self):
        with pytest.raises(ValueError):
            decompose(np.zeros((1, 1)), DecompositionThresholds(epsilon=0.5, d=2.0))

    def test_c_count_examples(self):
        N, th, low, mid, high = self._boundary_setup()
        raw = np.zeros((N, N))
        raw[2, 5] = raw[5, 2] = 0.7 * math.sqrt(N)  # inside the C window
        assert mid < 0.7 * math.sqrt(N) < high
        dec = decompose(raw, th)
        assert count_C_entries(dec) == 2

    def test_c_count_concentrates_on_small_values(self):
        # the C piece holds order-sqrt(N) entries, which are rare draws
        p = mixture_params(1.0, 1.0, 1.0)
        th = DecompositionThresholds(epsilon=0.5, d=2.0)
        counts = []
        for seed in range(200):
            raw = sample_wigner_raw(500, p, 10_000 + seed)
            counts.append(count_C_entries(decompose(raw, th)))
        assert np.median(counts) <= 4


class TestEigen:
    def test_diagonal(self):
        assert largest_eigenvalue(np.diag([1.0, 3.0, -2.0])) == 3.0

    def test_two_by_two_offdiag(self):
        theta = 1.7
        H = np.array([[0.0, theta], [theta, 0.0]])
        assert largest_eigenvalue(H) == pytest.approx(theta, abs=1e-14)

    def test_non_hermitian_rejected(self):
        M = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ValueError):
            largest_eigenvalue(M)

    def test_small_asymmetry_symmetrized(self):
        H = np.array([[1.0, 0.5], [0.5 + 1e-15, 1.0]])
        assert largest_eigenvalue(H) == pytest.approx(1.5, abs=1e-12)

    def test_matches_power_iteration_oracle(self):
        for seed in range(6):
            rng = np.random.default_rng(seed)
            H = rng.standard_normal((50, 50))
            H = (H + H.T) / 2.0
            got = largest_eigenvalue(H)
            want = lambda_max_power(H, rng)
            assert got == pytest.approx(want, abs=1e-9)

    def test_weyl_inequality(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            n = int(rng.integers(2, 21))
            A = rng.standard_normal((n, n))
            A = (A + A.T) / 2
            E = rng.standard_normal((n, n))
            E = (E + E.T) / 2
            wa = eigenvalues(A)
            we = eigenvalues(E)
            ws = eigenvalues(A + E)
            assert ws[-1] <= wa[-1] + we[-1] + 1e-10
            assert ws[-1] >= wa[-1] + we[0] - 1e-10


class TestSerialization:
    def test_roundtrip_real(self, tmp_path):
        p = weibull_params(0.8)
        raw = sample_wigner_raw(12, p, 99)
        path = tmp_path / "m.csv"
        save_matrix(path, raw, params=p, seed=99)
        back, meta = load_matrix(path)
        assert np.array_equal(back, raw)
        assert meta["N"] == 12 and meta["seed"] == 99
        assert TailParams.from_dict(meta["params"]) == p

    def test_roundtrip_complex(self, tmp_path):
        p = weibull_params(1.2, complex_entries=True)
        raw = sample_wigner_raw(9, p, 4)
        path = tmp_path / "m.csv"
        save_matrix(path, raw, params=p, seed=4)
        back, _ = load_matrix(path)
        assert np.array_equal(back, raw)


class TestStreams:
    def test_spawn_is_stable_and_independent(self):
        g1 = spawn_generators(7, 4)
        g2 = spawn_generators(7, 4)
        a = [g.standard_normal(3).tolist() for g in g1]
        b = [g.standard_normal(3).tolist() for g in g2]
        assert a == b
        assert a[0] != a[1]
