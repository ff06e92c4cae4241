"""Sample statistics of an input/desired signal pair.

Windows are x(t) = [x(t), x(t-1), ..., x(t-L+1)]ᵀ for t = 0..N-1; samples
before t = 0 come from an explicit prehistory ``x_pre`` (oldest first).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from autoreg.core.linalg import SymmetricMatrix, readonly_array
from autoreg.errors import InvalidInputError, LengthMismatchError

logger = logging.getLogger(__name__)

# above this many products, accumulate in extended precision
EXTENDED_PRECISION_THRESHOLD = 10**6
CHUNK_ROWS = 4096


@dataclass(frozen=True, eq=False)
class SignalPair:
    x_pre: np.ndarray
    x: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        for name in ("x_pre", "x", "d"):
            object.__setattr__(self, name, readonly_array(np.atleast_1d(getattr(self, name))))
        if self.x.ndim != 1 or self.d.ndim != 1 or self.x_pre.ndim != 1:
            raise InvalidInputError("Signals must be one-dimensional")
        if self.x.shape[0] < 1:
            raise InvalidInputError("At least one sample is required (N >= 1)")
        if self.x.shape != self.d.shape:
            raise LengthMismatchError(
                f"Input and desired signals differ in length ({self.x.shape[0]} vs {self.d.shape[0]})"
            )
        for name in ("x_pre", "x", "d"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidInputError(f"Signal '{name}' contains non-finite samples")

    @property
    def N(self) -> int:
        return self.x.shape[0]

    @property
    def L(self) -> int:
        return self.x_pre.shape[0] + 1


@dataclass(frozen=True, eq=False)
class SampleStats:
    R_x: SymmetricMatrix
    r_xd: np.ndarray
    d_energy: float
    N: int
    L: int
    # False for statistics supplied from analytic expectations
    from_samples: bool = True


def zero_prehistory(x, d, L: int) -> SignalPair:
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if L < 1:
        raise InvalidInputError(f"Window length must be >= 1, got {L}")
    if x.shape != d.shape:
        raise LengthMismatchError(
            f"Input and desired signals differ in length ({x.size} vs {d.size})"
        )
    return SignalPair(x_pre=np.zeros(L - 1), x=x, d=d)


def data_matrix(sig: SignalPair) -> np.ndarray:
    """N×L matrix whose row t is the window x(t)ᵀ."""
    full = np.concatenate([sig.x_pre, sig.x])
    return np.ascontiguousarray(sliding_window_view(full, sig.L)[:, ::-1])


def _extended_gram(X: np.ndarray, d: np.ndarray):
    # fixed chunk order keeps the reduction deterministic
    R = np.zeros((X.shape[1], X.shape[1]), dtype=np.longdouble)
    r = np.zeros(X.shape[1], dtype=np.longdouble)
    for start in range(0, X.shape[0], CHUNK_ROWS):
        Xc = X[start:start + CHUNK_ROWS].astype(np.longdouble)
        dc = d[start:start + CHUNK_ROWS].astype(np.longdouble)
        R += Xc.T @ Xc
        r += Xc.T @ dc
    return R.astype(np.float64), r.astype(np.float64)


def build_stats(sig: SignalPair) -> SampleStats:
    X = data_matrix(sig)
    N, L = sig.N, sig.L
    if N * L > EXTENDED_PRECISION_THRESHOLD:
        logger.debug(f"Accumulating statistics in extended precision (N={N}, L={L})")
        gram, cross = _extended_gram(X, sig.d)
        d_energy = math.fsum(sig.d * sig.d)
    else:
        gram = X.T @ X
        cross = X.T @ sig.d
        d_energy = float(sig.d @ sig.d)
    return SampleStats(
        R_x=SymmetricMatrix.from_array(gram / N),
        r_xd=readonly_array(cross / N),
        d_energy=float(d_energy),
        N=N,
        L=L,
    )


def stats_from_moments(R_x, r_xd, d_energy: float, N: int) -> SampleStats:
    """Statistics given as expectations rather than sample averages."""
    R = SymmetricMatrix.from_array(R_x)
    r = np.asarray(r_xd, dtype=np.float64)
    if r.shape != (R.order,):
        raise InvalidInputError(f"r_xd has shape {r.shape}, expected ({R.order},)")
    if not np.all(np.isfinite(r)) or not math.isfinite(d_energy):
        raise InvalidInputError("Moments contain non-finite values")
    if d_energy < 0:
        raise InvalidInputError(f"d_energy must be non-negative, got {d_energy}")
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    return SampleStats(R_x=R, r_xd=readonly_array(r), d_energy=float(d_energy), N=int(N), L=R.order,
                       from_samples=False)
