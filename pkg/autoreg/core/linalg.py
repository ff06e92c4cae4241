"""Dense symmetric linear algebra used by the Wiener solvers."""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from autoreg.errors import (
    AsymmetricMatrixError,
    DecompositionError,
    InvalidInputError,
    SingularMatrixError,
)

logger = logging.getLogger(__name__)

ASYMMETRY_TOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10


def readonly_array(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Real L×L matrix that is exactly symmetric.

    Use ``SymmetricMatrix.from_array`` rather than the constructor: it checks
    finiteness, rejects asymmetry above ``ASYMMETRY_TOL`` (relative) and
    replaces the input with (A + Aᵀ)/2.
    """
    entries: np.ndarray

    @classmethod
    def from_array(cls, a) -> "SymmetricMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInputError(f"Expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("Matrix contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(a))))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > ASYMMETRY_TOL * scale:
            raise AsymmetricMatrixError(f"Matrix is not symmetric (max |A - Aᵀ| = {asym:.3e})")
        return cls(readonly_array((a + a.T) / 2.0))

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def scaled(self, c: float) -> "SymmetricMatrix":
        return SymmetricMatrix(readonly_array(c * self.entries))


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    basis: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.T


def _as_symmetric(a) -> SymmetricMatrix:
    if isinstance(a, SymmetricMatrix):
        return a
    return SymmetricMatrix.from_array(a)


def sym_eig(a, assume_psd: bool = False) -> EigenDecomposition:
    """Eigendecomposition with eigenvalues sorted in non-increasing order.

    With ``assume_psd`` (covariance matrices), eigenvalues down to
    ``-NEGATIVE_EIG_TOL * λ_max`` are roundoff and clamped to 0; anything more
    negative means the input was not a covariance and is a failure.
    """
    a = _as_symmetric(a)
    try:
        lam, q = scipy.linalg.eigh(a.entries, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Eigendecomposition failed: {e}")
        raise DecompositionError(f"Eigendecomposition did not converge: {e}") from e

    order = np.argsort(lam, kind="stable")[::-1]
    lam = lam[order]
    q = q[:, order]

    if assume_psd:
        lam_max = max(float(lam[0]), 0.0)
        floor = -NEGATIVE_EIG_TOL * lam_max
        if lam[-1] < floor:
            raise DecompositionError(
                f"Covariance has a negative eigenvalue {lam[-1]:.3e} (below clamp threshold {floor:.3e})"
            )
        lam = np.where(lam < 0.0, 0.0, lam)

    return EigenDecomposition(basis=readonly_array(q), eigenvalues=readonly_array(lam))


def solve_regularized(a, alpha: float, b) -> np.ndarray:
    """Solve (A + αI) w = b.

    At α = 0 the system must be numerically nonsingular; otherwise a
    SingularMatrixError reports the smallest eigenvalue.
    """
    a = _as_symmetric(a)
    b = np.asarray(b, dtype=np.float64)
    if alpha < 0 or not np.isfinite(alpha):
        raise InvalidInputError(f"alpha must be finite and non-negative, got {alpha}")
    if b.shape != (a.order,):
        raise InvalidInputError(f"Right-hand side has shape {b.shape}, expected ({a.order},)")
    if not np.all(np.isfinite(b)):
        raise InvalidInputError("Right-hand side contains non-finite entries")

    if not np.any(b):
        return np.zeros(a.order)

    m = a.entries + alpha * np.eye(a.order)
    if alpha == 0:
        lam = scipy.linalg.eigvalsh(m)
        smallest = float(lam[np.argmin(np.abs(lam))])
        if abs(smallest) <= a.order * np.finfo(float).eps * max(float(np.max(np.abs(lam))), np.finfo(float).tiny):
            raise SingularMatrixError(
                f"System is singular at alpha = 0 (smallest eigenvalue {smallest:.3e})", smallest
            )

    try:
        w = scipy.linalg.solve(m, b, assume_a="sym")
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"Regularized system is singular: {e}", 0.0) from e

    # one step of iterative refinement
    w = w + scipy.linalg.solve(m, b - m @ w, assume_a="sym")
    return w
