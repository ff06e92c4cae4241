"""Tests for the symmetric eigendecomposition and regularized solves."""
import numpy as np
import pytest

from autoreg.core.linalg import SymmetricMatrix, solve_regularized, sym_eig
from autoreg.errors import (
    AsymmetricMatrixError,
    DecompositionError,
    InvalidInputError,
    SingularMatrixError,
)


def _random_psd(rng, L):
    B = rng.standard_normal((L, 2 * L))
    return B @ B.T / (2 * L)


class TestSymmetricMatrix:
    def test_symmetrizes_roundoff(self):
        a = np.array([[1.0, 2.0], [2.0 + 1e-14, 3.0]])
        m = SymmetricMatrix.from_array(a)
        assert m.entries[0, 1] == m.entries[1, 0]
        assert m.order == 2

    def test_rejects_real_asymmetry(self):
        with pytest.raises(AsymmetricMatrixError):
            SymmetricMatrix.from_array([[1.0, 2.0], [2.1, 3.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            SymmetricMatrix.from_array([[1.0, np.nan], [np.nan, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(InvalidInputError):
            SymmetricMatrix.from_array(np.ones((2, 3)))

    def test_entries_are_read_only(self):
        m = SymmetricMatrix.from_array(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0


class TestSymEig:
    def test_identity(self):
        eig = sym_eig(np.eye(3))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(eig.basis.T @ eig.basis, np.eye(3), atol=1e-10)

    def test_diagonal(self):
        eig = sym_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(eig.eigenvalues, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(eig.basis), np.eye(2), atol=1e-12)

    def test_descending_order(self):
        eig = sym_eig(np.diag([1.0, 5.0, 3.0]))
        np.testing.assert_allclose(eig.eigenvalues, [5.0, 3.0, 1.0])

    def test_random_symmetric_reconstruction(self, rng):
        b = rng.standard_normal((5, 5))
        a = (b + b.T) / 2
        eig = sym_eig(a)
        assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-10
        assert np.max(np.abs(eig.basis.T @ eig.basis - np.eye(5))) <= 1e-10
        assert np.all(np.diff(eig.eigenvalues) <= 0)

    def test_psd_reconstruction_and_clamp(self, rng):
        for L in (3, 10, 40):
            a = _random_psd(rng, L)
            eig = sym_eig(a, assume_psd=True)
            assert np.all(eig.eigenvalues >= 0)
            assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-8 * max(1.0, np.max(np.abs(a)))

    def test_rank_deficient_covariance_is_clamped(self, rng):
        v = rng.standard_normal(6)
        eig = sym_eig(np.outer(v, v), assume_psd=True)
        assert np.all(eig.eigenvalues >= 0.0)
        np.testing.assert_allclose(eig.eigenvalues[0], v @ v, rtol=1e-12)

    def test_negative_definite_covariance_fails(self):
        with pytest.raises(DecompositionError):
            sym_eig(np.diag([1.0, -0.5]), assume_psd=True)

    def test_scaling(self, rng):
        a = _random_psd(rng, 8)
        base = sym_eig(a)
        scaled = sym_eig(SymmetricMatrix.from_array(a).scaled(3.5))
        np.testing.assert_allclose(scaled.eigenvalues, 3.5 * base.eigenvalues, rtol=1e-10)
        np.testing.assert_allclose(scaled.reconstruct(), 3.5 * a, atol=1e-10)


class TestSolveRegularized:
    def test_identity(self):
        np.testing.assert_allclose(solve_regularized(np.eye(2), 0.0, [1.0, 2.0]), [1.0, 2.0])

    def test_scalar(self):
        np.testing.assert_allclose(solve_regularized([[1.0]], 1.0, [2.0]), [1.0])

    def test_zero_rhs(self):
        np.testing.assert_array_equal(solve_regularized(np.eye(3), 0.5, np.zeros(3)), np.zeros(3))

    def test_singular_at_zero_alpha(self):
        with pytest.raises(SingularMatrixError) as info:
            solve_regularized(np.diag([1.0, 0.0]), 0.0, [1.0, 1.0])
        assert info.value.smallest == 0.0

    def test_singular_matrix_is_fine_with_regularization(self):
        w = solve_regularized(np.diag([1.0, 0.0]), 1.0, [2.0, 2.0])
        np.testing.assert_allclose(w, [1.0, 2.0])

    def test_negative_alpha_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_regularized(np.eye(2), -1.0, [1.0, 1.0])

    def test_residual_contract(self, rng):
        for L in (2, 16, 50):
            a = _random_psd(rng, L)
            b = rng.standard_normal(L)
            for alpha in (0.0, 1e-3, 1.0):
                w = solve_regularized(a, alpha, b)
                residual = (a + alpha * np.eye(L)) @ w - b
                assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(b)

    def test_matches_eigen_formula(self, rng):
        a = _random_psd(rng, 12)
        b = rng.standard_normal(12)
        eig = sym_eig(a, assume_psd=True)
        for alpha in (1e-6, 1e-3, 1.0, 1e3):
            expected = eig.basis @ ((eig.basis.T @ b) / (eig.eigenvalues + alpha))
            np.testing.assert_allclose(solve_regularized(a, alpha, b), expected, rtol=1e-8,
                                       atol=1e-8 * np.linalg.norm(expected))
