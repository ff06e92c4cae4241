import numpy as np
import pytest

from autoreg.core.estimation import build_stats, stats_from_moments, zero_prehistory
from autoreg.core.wiener import (
    EigenStats,
    direct_residual_energy_per_sample,
    posterior_covariance,
    residual_energy_per_sample,
    solve_wiener,
    solve_wiener_direct,
    to_eigen_domain,
    trace_inverse,
    w_norm_sq,
)
from autoreg.errors import InvalidInputError, SingularMatrixError


def scalar_eigen(lam=2.0, z=1.0, d_energy=8.0, N=4):
    return EigenStats(lam=np.array([lam]), z_xd=np.array([z]), basis=np.eye(1),
                      d_energy=d_energy, N=N, L=1)


class TestToEigenDomain:
    def test_identity_covariance(self):
        es = to_eigen_domain(stats_from_moments(np.eye(2), [1.0, 2.0], 5.0, N=10))
        np.testing.assert_allclose(es.lam, [1.0, 1.0])
        assert np.linalg.norm(es.z_xd) == pytest.approx(np.sqrt(5.0))

    def test_diagonal_covariance(self):
        es = to_eigen_domain(stats_from_moments(np.diag([3.0, 1.0]), [1.0, 0.0], 1.0, N=10))
        np.testing.assert_allclose(es.lam, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(es.z_xd), [1.0, 0.0], atol=1e-15)
        assert es.lambda_max == 3.0

    def test_zero_correlation(self):
        es = to_eigen_domain(stats_from_moments(np.eye(3), [0.0, 0.0, 0.0], 1.0, N=10))
        np.testing.assert_array_equal(es.z_xd, np.zeros(3))

    def test_keeps_sample_flag(self, make_eigen):
        _, stats, es = make_eigen(50, 4)
        assert es.from_samples and (es.N, es.L) == (50, 4)
        assert not to_eigen_domain(stats_from_moments(np.eye(2), [1.0, 0.0], 1.0, N=3)).from_samples


class TestSolveWiener:
    def test_scalar(self):
        sol = solve_wiener(EigenStats(lam=np.array([1.0]), z_xd=np.array([2.0]), basis=np.eye(1),
                                      d_energy=4.0, N=4, L=1), 1.0)
        np.testing.assert_allclose(sol.w_hat, [1.0])
        assert sol.alpha == 1.0

    def test_zero_correlation_gives_zero_filter(self, make_eigen):
        _, stats, es = make_eigen(40, 5)
        zero = EigenStats(lam=es.lam, z_xd=np.zeros(5), basis=es.basis, d_energy=0.0, N=40, L=5)
        for alpha in (1e-6, 1.0, 1e3):
            np.testing.assert_array_equal(solve_wiener(zero, alpha).w_hat, np.zeros(5))

    def test_heavy_regularization_shrinks(self, make_eigen):
        _, _, es = make_eigen(100, 8)
        alpha = 1e12 * es.lambda_max
        w = solve_wiener(es, alpha).w_hat
        assert np.linalg.norm(w) <= np.linalg.norm(es.z_xd) / alpha

    def test_singular_at_zero_alpha(self):
        es = to_eigen_domain(stats_from_moments(np.diag([1.0, 0.0]), [1.0, 0.0], 1.0, N=10))
        with pytest.raises(SingularMatrixError):
            solve_wiener(es, 0.0)

    def test_negative_alpha_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_wiener(scalar_eigen(), -1.0)

    def test_matches_direct_solve(self, make_eigen, rng):
        for _ in range(20):
            L = int(rng.integers(2, 30))
            _, stats, es = make_eigen(int(rng.integers(2 * L, 300)), L)
            alpha = float(10 ** rng.uniform(-4, 1)) * es.lambda_max
            np.testing.assert_allclose(solve_wiener(es, alpha).w_hat,
                                       solve_wiener_direct(stats, alpha).w_hat, rtol=1e-8, atol=1e-12)

    def test_norm_decreases_with_alpha(self, make_eigen):
        _, _, es = make_eigen(200, 10)
        alphas = np.logspace(-6, 3, 40) * es.lambda_max
        norms = [w_norm_sq(es, a) for a in alphas]
        assert all(b <= a for a, b in zip(norms, norms[1:]))


class TestResidualEnergy:
    def test_zero_filter(self):
        es = scalar_eigen(z=0.0)
        assert residual_energy_per_sample(es, 1.0) == pytest.approx(2.0)

    def test_scalar(self):
        assert residual_energy_per_sample(scalar_eigen(), 1.0) == pytest.approx(14.0 / 9.0)

    def test_noiseless_exact_model(self, rng):
        N, L = 400, 6
        x = rng.standard_normal(N)
        h = rng.standard_normal(L)
        sig = zero_prehistory(x, np.convolve(x, h)[:N], L)
        es = to_eigen_domain(build_stats(sig))
        res = residual_energy_per_sample(es, 1e-12 * es.lambda_max)
        assert 0.0 <= res <= 1e-8 * es.d_energy / N
        w = solve_wiener(es, 1e-12 * es.lambda_max).w_hat
        np.testing.assert_allclose(w, h, atol=1e-6)

    def test_negative_identity_clamped(self, caplog):
        # inconsistent moments: ‖d‖²/N smaller than the explained energy
        es = to_eigen_domain(stats_from_moments([[1.0]], [1.0], 0.1, N=1))
        with caplog.at_level("WARNING"):
            assert residual_energy_per_sample(es, 1e-3) == 0.0
        assert "clamped" in caplog.text


class TestTraceAndNorm:
    @pytest.mark.parametrize("lam,alpha,expected", [
        ([2.0, 1.0], 0.0, 1.5),
        ([1.0, 1.0, 1.0], 1.0, 1.5),
    ])
    def test_trace_inverse(self, lam, alpha, expected):
        assert trace_inverse(np.array(lam), alpha) == pytest.approx(expected)

    def test_trace_inverse_vanishes(self):
        assert trace_inverse(np.array([2.0, 1.0]), 1e15) < 1e-14

    def test_trace_inverse_singular(self):
        with pytest.raises(SingularMatrixError):
            trace_inverse(np.array([1.0, 0.0]), 0.0)

    def test_norm_scalar(self):
        es = EigenStats(lam=np.array([1.0]), z_xd=np.array([2.0]), basis=np.eye(1), d_energy=4.0, N=4, L=1)
        assert w_norm_sq(es, 1.0) == pytest.approx(1.0)
        assert w_norm_sq(scalar_eigen(z=0.0), 1.0) == 0.0


class TestEigenIdentitiesAgainstDense:
    def test_random_instances(self, make_eigen, rng):
        for _ in range(100):
            L = int(rng.integers(1, 51))
            N = int(rng.integers(2 * L, 400))
            sig, stats, es = make_eigen(N, L, snr_db=float(rng.uniform(0, 20)))
            alpha = float(10 ** rng.uniform(-3, 0)) * es.lambda_max

            m = stats.R_x.entries + alpha * np.eye(L)
            w = np.linalg.solve(m, stats.r_xd)
            assert residual_energy_per_sample(es, alpha) == pytest.approx(
                direct_residual_energy_per_sample(sig, w), rel=1e-10)
            assert trace_inverse(es.lam, alpha) == pytest.approx(np.trace(np.linalg.inv(m)), rel=1e-10)
            assert w_norm_sq(es, alpha) == pytest.approx(float(w @ w), rel=1e-10)


class TestPosteriorCovariance:
    def test_scalar(self):
        post = posterior_covariance(stats_from_moments([[1.0]], [1.0], 4.0, N=4), 1.0, 2.0)
        np.testing.assert_allclose(post.K.entries, [[0.25]])
        assert post.v_e == 2.0

    def test_identity(self):
        N = 7
        post = posterior_covariance(stats_from_moments(np.eye(3), [1.0, 0.0, 0.0], 4.0, N=N), 1.0, float(N))
        np.testing.assert_allclose(post.K.entries, 0.5 * np.eye(3))

    def test_noiseless(self, make_eigen):
        _, stats, _ = make_eigen(50, 4)
        np.testing.assert_array_equal(posterior_covariance(stats, 0.1, 0.0).K.entries, np.zeros((4, 4)))

    def test_requires_positive_alpha(self, make_eigen):
        _, stats, _ = make_eigen(50, 4)
        with pytest.raises(InvalidInputError):
            posterior_covariance(stats, 0.0, 1.0)
