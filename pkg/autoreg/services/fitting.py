import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from autoreg import config
from autoreg.core.autoreg import (
    HyperParams,
    IterationTrace,
    auto_wiener,
    effective_params,
    variance_updates,
)
from autoreg.core.estimation import SignalPair, build_stats, zero_prehistory
from autoreg.core.wiener import WienerSolution, to_eigen_domain
from autoreg.errors import DegenerateDataError, LengthMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FitResult:
    solution: WienerSolution
    trace: IterationTrace
    hyper: Optional[HyperParams]
    gamma: Optional[float]
    zero_prehistory: bool


def fit_filter(
    x,
    d,
    L: int,
    x_pre=None,
    alpha0: float = config.DEFAULT_ALPHA0,
    iters: int = config.DEFAULT_ITERS,
    rel_tol: float = config.DEFAULT_REL_TOL,
) -> FitResult:
    """Automatically regularized Wiener filter of length L for d given x.

    Without ``x_pre`` the samples before t = 0 are taken as zero.
    """
    if x_pre is None:
        sig = zero_prehistory(x, d, L)
    else:
        x_pre = np.atleast_1d(np.asarray(x_pre, dtype=np.float64))
        if x_pre.shape != (L - 1,):
            raise LengthMismatchError(f"x_pre must hold L-1 = {L - 1} samples, got {x_pre.size}")
        sig = SignalPair(x_pre=x_pre, x=x, d=d)
    logger.info(f"Fitting L={sig.L} filter on N={sig.N} samples "
                f"(alpha0={alpha0}, iters={iters}, rel_tol={rel_tol})")

    es = to_eigen_domain(build_stats(sig))
    solution, trace = auto_wiener(es, alpha0=alpha0, max_iters=iters, rel_tol=rel_tol)

    hyper, gamma = None, None
    try:
        hyper = variance_updates(es, solution.alpha, solution.w_hat)
        gamma = effective_params(es.lam, solution.alpha)
    except DegenerateDataError as e:
        logger.warning(f"Variance estimates unavailable at the final alpha: {e}")

    logger.info(f"Final alpha={solution.alpha:.6g} after {trace.iterations} iterations ({trace.status.value})")
    return FitResult(solution=solution, trace=trace, hyper=hyper, gamma=gamma,
                     zero_prehistory=x_pre is None)
