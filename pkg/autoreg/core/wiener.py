"""Regularized Wiener solutions, direct and in the eigen-domain.

With R_x = Q diag(λ) Qᵀ and z = Qᵀ r_xd, every quantity the regularization
search needs is a sum over L scalars:

    ŵ        = Q diag(1/(λ+α)) z
    ‖ŵ‖²     = Σ z²/(λ+α)²
    Tr((R_x+αI)⁻¹) = Σ 1/(λ+α)
    ‖d − Xᵀŵ‖²/N  = ‖d‖²/N − Σ z²(λ+2α)/(λ+α)²
"""
import logging
from dataclasses import dataclass

import numpy as np

from autoreg.core.estimation import SampleStats, SignalPair, data_matrix
from autoreg.core.linalg import SymmetricMatrix, readonly_array, solve_regularized, sym_eig
from autoreg.errors import InvalidInputError, SingularMatrixError

logger = logging.getLogger(__name__)

# relative tolerance under which a negative residual identity is roundoff
RESIDUAL_CLAMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenStats:
    lam: np.ndarray
    z_xd: np.ndarray
    basis: np.ndarray
    d_energy: float
    N: int
    L: int
    from_samples: bool = True

    @property
    def lambda_max(self) -> float:
        return float(self.lam[0])

    def solve(self, alpha: float) -> "WienerSolution":
        return solve_wiener(self, alpha)


@dataclass(frozen=True, eq=False)
class WienerSolution:
    w_hat: np.ndarray
    alpha: float


@dataclass(frozen=True, eq=False)
class PosteriorCovariance:
    K: SymmetricMatrix
    v_e: float


def to_eigen_domain(stats: SampleStats) -> EigenStats:
    eig = sym_eig(stats.R_x, assume_psd=True)
    z = eig.basis.T @ stats.r_xd
    return EigenStats(
        lam=eig.eigenvalues,
        z_xd=readonly_array(z),
        basis=eig.basis,
        d_energy=stats.d_energy,
        N=stats.N,
        L=stats.L,
        from_samples=stats.from_samples,
    )


def _shifted(lam, alpha: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if alpha < 0 or not np.isfinite(alpha):
        raise InvalidInputError(f"alpha must be finite and non-negative, got {alpha}")
    shifted = lam + alpha
    if np.any(shifted <= 0.0):
        smallest = float(np.min(lam))
        raise SingularMatrixError(
            f"R_x + alpha*I is singular at alpha = {alpha} (smallest eigenvalue {smallest:.3e})",
            smallest,
        )
    return shifted


def solve_wiener(es: EigenStats, alpha: float) -> WienerSolution:
    shifted = _shifted(es.lam, alpha)
    w_hat = es.basis @ (es.z_xd / shifted)
    return WienerSolution(w_hat=readonly_array(w_hat), alpha=float(alpha))


def solve_wiener_direct(stats: SampleStats, alpha: float) -> WienerSolution:
    """Dense (R_x + αI)⁻¹ r_xd without the eigendecomposition."""
    w_hat = solve_regularized(stats.R_x, alpha, stats.r_xd)
    return WienerSolution(w_hat=readonly_array(w_hat), alpha=float(alpha))


def residual_energy_per_sample(es: EigenStats, alpha: float) -> float:
    shifted = _shifted(es.lam, alpha)
    mean_energy = es.d_energy / es.N
    value = mean_energy - float(np.sum(es.z_xd ** 2 * (es.lam + 2.0 * alpha) / shifted ** 2))
    if value < 0.0:
        if value < -RESIDUAL_CLAMP_TOL * mean_energy:
            # only reachable when the statistics are not sample averages of one data set
            logger.warning(
                f"Residual identity is negative ({value:.3e}) at alpha={alpha:.3e}"
                f"{'' if es.from_samples else ' on expectation-form statistics'}; clamped to 0"
            )
        value = 0.0
    return value


def direct_residual_energy_per_sample(sig: SignalPair, w_hat) -> float:
    """(1/N)‖d − Xᵀŵ‖² from the raw samples."""
    err = sig.d - data_matrix(sig) @ np.asarray(w_hat, dtype=np.float64)
    return float(err @ err) / sig.N


def trace_inverse(lam, alpha: float) -> float:
    return float(np.sum(1.0 / _shifted(lam, alpha)))


def w_norm_sq(es: EigenStats, alpha: float) -> float:
    shifted = _shifted(es.lam, alpha)
    return float(np.sum(es.z_xd ** 2 / shifted ** 2))


def posterior_covariance(stats: SampleStats, alpha: float, v_e: float) -> PosteriorCovariance:
    if alpha <= 0 or v_e < 0:
        raise InvalidInputError(f"Posterior covariance needs alpha > 0 and v_e >= 0 (got {alpha}, {v_e})")
    eig = sym_eig(stats.R_x, assume_psd=True)
    shifted = _shifted(eig.eigenvalues, alpha)
    K = (eig.basis / shifted) @ eig.basis.T * (v_e / stats.N)
    return PosteriorCovariance(K=SymmetricMatrix.from_array((K + K.T) / 2.0), v_e=float(v_e))
