import math

import numpy as np
import pytest

from htldp.model import largest_eigenvalue, weibull_params, sample_wigner
from htldp.semicircle import stieltjes, stieltjes_inverse
from htldp.spikes import (
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


def random_instance(seed, n_lo=20, n_hi=101, k_hi=4, theta_rng=(0.3, 4.0)):
    r = np.random.default_rng(seed)
    n = int(r.integers(n_lo, n_hi))
    H = r.standard_normal((n, n))
    H = (H + H.T) / (2.0 * math.sqrt(n))
    k = int(r.integers(1, k_hi))
    thetas = np.sort(r.uniform(*theta_rng, k))
    U = np.linalg.qr(r.standard_normal((n, k)))[0]
    return H, SpikeSpec(tuple(thetas), U)


class TestSpikeSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SpikeSpec((), np.zeros((3, 0)))
        with pytest.raises(ValueError):
            SpikeSpec((0.0,), np.eye(3)[:, :1])
        with pytest.raises(ValueError):
            SpikeSpec((2.0, 1.0), np.eye(3)[:, :2])  # not nondecreasing
        with pytest.raises(ValueError):
            SpikeSpec((1.0, 2.0), np.ones((3, 2)))  # not orthonormal

    def test_from_matrix(self):
        C = np.diag([0.0, -1.5, 3.0])
        spec = SpikeSpec.from_matrix(C)
        assert spec.thetas == (-1.5, 3.0)
        assert np.allclose(spec.matrix(), C, atol=1e-12)


class TestEigenEquationMatrix:
    def test_zero_background(self):
        N, theta, x = 10, 3.0, 4.0
        eq = EigenEquation(H=np.zeros((N, N)), spike=SpikeSpec((theta,), np.eye(N)[:, :1]))
        M = eigen_equation_matrix(eq, x)
        assert M.shape == (1, 1)
        assert M[0, 0] == pytest.approx(1.0 - theta / x, abs=1e-14)

    def test_one_by_one(self):
        eq = EigenEquation(H=np.array([[0.5]]), spike=SpikeSpec((2.0,), np.eye(1)))
        M = eigen_equation_matrix(eq, 3.0)
        assert M[0, 0] == pytest.approx(1.0 - 2.0 / 2.5, abs=1e-14)

    def test_matches_dense_inverse_oracle(self):
        r = np.random.default_rng(7)
        N, k = 100, 2
        H = r.uniform(-1, 1, (N, N))
        H = (H + H.T) / (2.0 * math.sqrt(N))
        thetas = (1.2, 2.5)
        U = np.linalg.qr(r.standard_normal((N, k)))[0]
        eq = EigenEquation(H=H, spike=SpikeSpec(thetas, U))
        x = eq.lam_max + 1.0
        got = eigen_equation_matrix(eq, x)
        R = np.linalg.inv(x * np.eye(N) - H)  # oracle: explicit inverse
        want = np.eye(k) - np.asarray(thetas)[:, None] * (U.conj().T @ R @ U)
        assert np.max(np.abs(got - want)) < 1e-10

    def test_rejects_x_in_spectrum(self):
        eq = EigenEquation(H=np.diag([0.0, 1.0]), spike=SpikeSpec((1.0,), np.eye(2)[:, :1]))
        with pytest.raises(ValueError):
            eigen_equation_matrix(eq, 0.999999)


class TestDeterminant:
    def test_zero_at_theta(self):
        N = 6
        eq = EigenEquation(H=np.zeros((N, N)), spike=SpikeSpec((3.0,), np.eye(N)[:, :1]))
        assert f_N(eq, 3.0) == pytest.approx(0.0, abs=1e-14)
        assert f_N(eq, 4.0) == pytest.approx(0.25, abs=1e-14)

    def test_largest_zero_matches_eigensolver_rank3(self):
        r = np.random.default_rng(3)
        N = 50
        H = r.uniform(-1, 1, (N, N))
        H = (H + H.T) / (2.0 * math.sqrt(N))
        thetas = (0.8, 1.5, 3.0)
        U = np.linalg.qr(r.standard_normal((N, 3)))[0]
        eq = EigenEquation(H=H, spike=SpikeSpec(thetas, U))
        top = largest_eigenvalue(H + eq.spike.matrix())
        z = spike_largest_zero(eq)
        assert z is not None
        assert z == pytest.approx(top, abs=1e-8)

    def test_zero_eigenvalue_equivalence_batch(self):
        checked = 0
        for seed in range(40):
            H, spike = random_instance(seed)
            eq = EigenEquation(H=H, spike=spike)
            top = largest_eigenvalue(H + spike.matrix())
            if top <= eq.lam_max + 1e-6:
                continue
            z = spike_largest_zero(eq)
            assert z is not None
            assert abs(z - top) <= 1e-8
            checked += 1
        assert checked >= 20

    def test_tends_to_one_far_right(self):
        H, spike = random_instance(11)
        eq = EigenEquation(H=H, spike=spike)
        x = 1e6 * (1.0 + abs(eq.lam_max))
        assert f_N(eq, x) == pytest.approx(1.0, abs=1e-4)

    def test_complex_background(self):
        r = np.random.default_rng(9)
        N = 30
        H = r.standard_normal((N, N)) + 1j * r.standard_normal((N, N))
        H = (H + H.conj().T) / (2.0 * math.sqrt(2 * N))
        U = np.linalg.qr(r.standard_normal((N, 2)) + 1j * r.standard_normal((N, 2)))[0]
        spike = SpikeSpec((1.0, 2.5), U)
        eq = EigenEquation(H=H, spike=spike)
        top = largest_eigenvalue(H + spike.matrix())
        if top > eq.lam_max + 1e-6:
            z = spike_largest_zero(eq)
            assert z == pytest.approx(top, abs=1e-8)


class TestLimitFunction:
    def test_zero_at_transition_point(self):
        assert limit_f([2.0], 2.5) == pytest.approx(0.0, abs=1e-15)

    def test_subcritical_never_zero(self):
        xs = np.linspace(2.000001, 100.0, 3000)
        for theta in (0.3, 0.9, 1.0):
            vals = [limit_f([theta], x) for x in xs]
            assert all(0.0 < v < 1.0 for v in vals[:-1]) or theta == 1.0
            assert all(v > 0.0 for v in vals)
            assert largest_zero(lambda x: limit_f([theta], x), (2.0 + 1e-9, 100.0)) is None

    def test_two_spike_value_via_stieltjes(self):
        # G(10/3) = 1/3 exactly, so (1 + G)(1 - 3G) = 0
        x = 10.0 / 3.0
        g = stieltjes(x)
        assert g == pytest.approx(1.0 / 3.0, abs=1e-15)
        want = (1.0 + g) * (1.0 - 3.0 * g)
        assert limit_f([-1.0, 3.0], x) == pytest.approx(want, abs=1e-14)
        assert limit_f([-1.0, 3.0], x) == pytest.approx(0.0, abs=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            limit_f([1.0], 2.0)


class TestLargestZero:
    def test_simple_function(self):
        z = largest_zero(lambda x: 1.0 - 3.0 / x, (0.1, 10.0))
        assert z == pytest.approx(3.0, abs=1e-11)

    def test_constant_returns_none(self):
        assert largest_zero(lambda x: 1.0, (0.0, 5.0)) is None

    def test_limit_function_zero(self):
        z = largest_zero(lambda x: limit_f([1.5], x), (2.001, 20.0))
        assert z == pytest.approx(2.0 / 3.0 + 1.5, abs=1e-10)
        assert z == pytest.approx(stieltjes_inverse(1.0 / 1.5), abs=1e-10)

    def test_rightmost_of_several(self):
        z = largest_zero(lambda x: (x - 1.0) * (x - 2.0) * (x - 3.0), (0.0, 10.0))
        assert z == pytest.approx(3.0, abs=1e-10)

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            largest_zero(lambda x: x, (3.0, 1.0))

    def test_rank_one_coherence_with_outlier_rule(self):
        for theta in np.geomspace(1.001, 50.0, 60):
            z = largest_zero(lambda x: limit_f([theta], x), (2.0 + 1e-9, theta + 2.0))
            assert z is not None
            assert abs(z - bbp_outlier(theta)) <= 1e-10


class TestOutlierRule:
    @pytest.mark.parametrize("theta,want", [(2.0, 2.5), (1.0, 2.0), (0.5, 2.0), (-3.0, 2.0)])
    def test_values(self, theta, want):
        assert bbp_outlier(theta) == pytest.approx(want, abs=1e-15)

    def test_mu_eps(self):
        N = 5
        assert mu_eps(np.zeros((N, N))) == 2.0
        C = np.zeros((N, N))
        C[0, 0] = 3.0
        assert mu_eps(C) == pytest.approx(3.0 + 1.0 / 3.0, abs=1e-12)
        C2 = np.zeros((N, N))
        C2[0, 1] = C2[1, 0] = 2.0
        assert mu_eps(C2) == pytest.approx(2.5, abs=1e-12)


class TestIsotropy:
    def test_zero_background_value(self):
        N = 5
        e1 = np.eye(N)[:, 0]
        gap = isotropy_gap(np.zeros((N, N)), e1, e1, 10.0)
        assert gap == pytest.approx(abs(0.1 - stieltjes(10.0)), abs=1e-12)
        assert gap == pytest.approx(1.0205e-3, rel=1e-3)

    def test_orthogonal_vectors_small_gap(self):
        p = weibull_params(1.0)
        hits = 0
        trials = 50
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            H = sample_wigner(1000, p, rng)
            lam = largest_eigenvalue(H)
            if lam >= 3.0:
                continue
            u = rng.standard_normal(1000)
            u /= np.linalg.norm(u)
            v = rng.standard_normal(1000)
            v -= (u @ v) * u
            v /= np.linalg.norm(v)
            if isotropy_gap(H, u, v, 3.0, lam_max=lam) < 0.05:
                hits += 1
        assert hits >= 0.9 * trials

    def test_gap_decreases_with_size(self):
        p = weibull_params(1.0)
        medians = []
        for N in (200, 2000):
            gaps = []
            for seed in range(3):
                rng = np.random.default_rng(1000 + seed)
                H = sample_wigner(N, p, rng)
                lam = largest_eigenvalue(H)
                u = rng.standard_normal(N)
                u /= np.linalg.norm(u)
                gaps.append(isotropy_gap(H, u, u, 3.0, lam_max=lam))
            medians.append(np.median(gaps))
        assert medians[1] < medians[0]

    def test_domain_guards(self):
        N = 4
        u = np.eye(N)[:, 0]
        with pytest.raises(ValueError):
            isotropy_gap(np.zeros((N, N)), u, u, 1.5)
        with pytest.raises(ValueError):
            isotropy_gap(np.zeros((N, N)), 2.0 * u, u, 3.0)
        with pytest.raises(ValueError):
            isotropy_gap(3.1 * np.eye(N), u, u, 3.0)
