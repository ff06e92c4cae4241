"""Automatic choice of the regularization parameter.

The filter weights get a N(0, v_w I) prior and the errors are iid
N(0, v_e); α = v_e / (N v_w). The Gull-MacKay fixed point maximizes the
marginal likelihood of d over (v_e, v_w):

    γ      = Σ λ/(λ+α)                        (effective number of parameters)
    v_e'   = ‖d − Xᵀŵ‖² / (N − γ)
    v_w'   = ‖ŵ‖² / γ
    α'     = v_e' / (N v_w')

``gm_step_eigen`` runs one update in O(L) from EigenStats; ``gm_step_matrix``
is the dense reference used to cross-check it.
"""
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from autoreg import config
from autoreg.core.estimation import SampleStats
from autoreg.core.linalg import solve_regularized
from autoreg.core.wiener import (
    EigenStats,
    WienerSolution,
    residual_energy_per_sample,
    solve_wiener,
    trace_inverse,
    w_norm_sq,
)
from autoreg.errors import (
    DegenerateDataError,
    ExpectationFormError,
    IllPosedError,
    InvalidInputError,
)

logger = logging.getLogger(__name__)

# the residual in the α update never drops below this fraction of ‖d‖²/N
RESIDUAL_FLOOR = 1e-15


class TraceStatus(str, enum.Enum):
    COMPLETED = "completed"
    EARLY_CONVERGED = "early-converged"
    DEGENERATE_DATA = "degenerate-data"
    ILL_POSED = "ill-posed"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class HyperParams:
    v_e: float
    v_w: float
    N: int

    @property
    def alpha(self) -> float:
        return self.v_e / (self.N * self.v_w)


@dataclass(frozen=True)
class RegState:
    """State of iteration ``iter``: the α it started from and what it implied."""
    iter: int
    alpha: float
    gamma: float
    v_e: Optional[float] = None
    v_w: Optional[float] = None


@dataclass(frozen=True)
class IterationTrace:
    alpha0: float
    states: Tuple[RegState, ...] = ()
    # α⁰, α¹, ..., α^I
    alphas: Tuple[float, ...] = ()
    status: TraceStatus = TraceStatus.COMPLETED
    message: str = ""

    @property
    def alpha(self) -> float:
        return self.alphas[-1] if self.alphas else self.alpha0

    @property
    def iterations(self) -> int:
        return len(self.states)


def effective_params(lam, alpha: float) -> float:
    lam = np.asarray(lam, dtype=np.float64)
    if alpha <= 0:
        raise InvalidInputError(f"effective_params needs alpha > 0, got {alpha}")
    return float(np.sum(lam / (lam + alpha)))


def _check_signal(z_xd: np.ndarray):
    if not np.any(z_xd):
        raise DegenerateDataError("No signal in r_xd: the desired signal is uncorrelated with every window")


def _check_gamma(gamma: float, N: int):
    if gamma >= N:
        raise IllPosedError(
            f"Effective number of parameters γ={gamma:.4g} is not below the number of samples N={N}"
        )
    if gamma <= 0:
        raise DegenerateDataError("Effective number of parameters is zero (R_x = 0)")


def _update(residual: float, norm_sq: float, gamma: float, N: int, d_energy: float):
    """(α', v_e', v_w') from the per-sample residual, ‖ŵ‖² and γ."""
    residual = max(residual, RESIDUAL_FLOOR * d_energy / N)
    v_e = N * residual / (N - gamma)
    v_w = norm_sq / gamma
    alpha_next = residual / ((N / gamma - 1.0) * norm_sq)
    return alpha_next, v_e, v_w


def gm_step_eigen(es: EigenStats, alpha: float, iteration: int = 0) -> Tuple[float, RegState]:
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    _check_signal(es.z_xd)
    gamma = effective_params(es.lam, alpha)
    _check_gamma(gamma, es.N)

    residual = residual_energy_per_sample(es, alpha)
    norm_sq = w_norm_sq(es, alpha)
    alpha_next, v_e, v_w = _update(residual, norm_sq, gamma, es.N, es.d_energy)
    return alpha_next, RegState(iter=iteration, alpha=float(alpha), gamma=gamma, v_e=v_e, v_w=v_w)


def gm_step_matrix(stats: SampleStats, alpha: float, iteration: int = 0) -> Tuple[float, RegState]:
    """Same update through explicit dense solves; slow, used as a reference."""
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    _check_signal(stats.r_xd)
    L, N = stats.L, stats.N
    m = stats.R_x.entries + alpha * np.eye(L)
    inv = scipy.linalg.inv(m)
    gamma = L - alpha * float(np.trace(inv))
    _check_gamma(gamma, N)

    w_hat = solve_regularized(stats.R_x, alpha, stats.r_xd)
    # (1/N)‖d − Xᵀŵ‖² = ‖d‖²/N − 2ŵᵀr_xd + ŵᵀR_xŵ
    residual = stats.d_energy / N - 2.0 * float(w_hat @ stats.r_xd) + float(w_hat @ stats.R_x.entries @ w_hat)
    residual = max(residual, 0.0)
    norm_sq = float(w_hat @ w_hat)
    alpha_next, v_e, v_w = _update(residual, norm_sq, gamma, N, stats.d_energy)
    return alpha_next, RegState(iter=iteration, alpha=float(alpha), gamma=gamma, v_e=v_e, v_w=v_w)


def estimate_alpha(
    es: EigenStats,
    alpha0: float = config.DEFAULT_ALPHA0,
    max_iters: int = config.DEFAULT_ITERS,
    rel_tol: float = config.DEFAULT_REL_TOL,
) -> IterationTrace:
    """Iterate ``gm_step_eigen`` from ``alpha0``.

    Stops after ``max_iters`` steps or once |α⁽ⁱ⁺¹⁾ − α⁽ⁱ⁾| ≤ rel_tol·α⁽ⁱ⁾,
    whichever comes first; convergence on the last allowed step counts as
    completed. With ``rel_tol=0`` exactly ``max_iters`` steps are run.
    Degenerate data raises with the partial trace attached as ``.trace``.
    """
    if not alpha0 > 0 or not math.isfinite(alpha0):
        raise InvalidInputError(f"alpha0 must be positive and finite, got {alpha0}")
    if max_iters < 0:
        raise InvalidInputError(f"max_iters must be >= 0, got {max_iters}")
    if rel_tol < 0:
        raise InvalidInputError(f"rel_tol must be >= 0, got {rel_tol}")

    trace = IterationTrace(alpha0=float(alpha0), alphas=(float(alpha0),))
    alpha = float(alpha0)
    for i in range(max_iters):
        try:
            alpha_next, state = gm_step_eigen(es, alpha, iteration=i)
        except IllPosedError as e:
            e.trace = replace(trace, status=TraceStatus.ILL_POSED, message=str(e))
            raise
        except DegenerateDataError as e:
            e.trace = replace(trace, status=TraceStatus.DEGENERATE_DATA, message=str(e))
            raise

        if not math.isfinite(alpha_next) or alpha_next <= 0:
            logger.warning(f"Gull-MacKay update diverged at iteration {i}: alpha -> {alpha_next}")
            return replace(
                trace,
                states=trace.states + (state,),
                status=TraceStatus.DIVERGED,
                message=f"update produced alpha={alpha_next} at iteration {i}",
            )

        logger.debug(
            f"GM iter {i}: alpha={alpha:.6g} gamma={state.gamma:.6g} "
            f"v_e={state.v_e:.6g} v_w={state.v_w:.6g} -> {alpha_next:.6g}"
        )
        trace = replace(trace, states=trace.states + (state,), alphas=trace.alphas + (alpha_next,))
        if rel_tol > 0 and i < max_iters - 1 and abs(alpha_next - alpha) <= rel_tol * alpha:
            return replace(trace, status=TraceStatus.EARLY_CONVERGED)
        alpha = alpha_next

    return trace


def auto_wiener(
    es: EigenStats,
    alpha0: float = config.DEFAULT_ALPHA0,
    max_iters: int = config.DEFAULT_ITERS,
    rel_tol: float = config.DEFAULT_REL_TOL,
) -> Tuple[WienerSolution, IterationTrace]:
    trace = estimate_alpha(es, alpha0=alpha0, max_iters=max_iters, rel_tol=rel_tol)
    return solve_wiener(es, trace.alpha), trace


def variance_updates(es: EigenStats, alpha: float, w_hat) -> HyperParams:
    w_hat = np.asarray(w_hat, dtype=np.float64)
    norm_sq = float(w_hat @ w_hat)
    if norm_sq == 0.0:
        raise DegenerateDataError("Filter estimate is zero; v_w is undefined")
    gamma = effective_params(es.lam, alpha)
    _check_gamma(gamma, es.N)
    residual = residual_energy_per_sample(es, alpha)
    _, v_e, v_w = _update(residual, norm_sq, gamma, es.N, es.d_energy)
    return HyperParams(v_e=v_e, v_w=v_w, N=es.N)


def _require_samples(es: EigenStats):
    if not es.from_samples:
        raise ExpectationFormError(
            "The evidence needs statistics built from data (R_x = XXᵀ/N); "
            "expectation-form statistics are not supported"
        )


def log_evidence(es: EigenStats, v_e: float, v_w: float) -> float:
    """log N(d; 0, v_w XᵀX + v_e I) evaluated in O(L)."""
    _require_samples(es)
    if v_e <= 0 or v_w <= 0:
        raise InvalidInputError(f"Variances must be positive (v_e={v_e}, v_w={v_w})")
    N, L = es.N, es.L
    alpha = v_e / (N * v_w)
    log_det = (N - L) * math.log(v_e) + float(np.sum(np.log(v_e + v_w * N * es.lam)))
    quad = (es.d_energy - N * float(np.sum(es.z_xd ** 2 / (es.lam + alpha)))) / v_e
    return -0.5 * (N * math.log(2.0 * math.pi) + log_det + quad)


def evidence_gradient(es: EigenStats, v_e: float, v_w: float) -> Tuple[float, float]:
    """Partial derivatives of ``log_evidence`` with respect to (v_e, v_w).

    Both vanish exactly at a fixed point of the Gull-MacKay iteration.
    """
    _require_samples(es)
    if v_e <= 0 or v_w <= 0:
        raise InvalidInputError(f"Variances must be positive (v_e={v_e}, v_w={v_w})")
    N, L = es.N, es.L
    alpha = v_e / (N * v_w)
    shifted = es.lam + alpha
    residual = N * residual_energy_per_sample(es, alpha)
    norm_sq = w_norm_sq(es, alpha)
    tr_inv = trace_inverse(es.lam, alpha)
    # Tr(K X Xᵀ) = v_e Tr((R_x+αI)⁻¹ R_x),  Tr(K) = (v_e/N) Tr((R_x+αI)⁻¹)
    tr_kxx = v_e * float(np.sum(es.lam / shifted))
    tr_k = v_e / N * tr_inv
    d_ve = -N / (2.0 * v_e) + (residual + tr_kxx) / (2.0 * v_e ** 2)
    d_vw = -L / (2.0 * v_w) + (norm_sq + tr_k) / (2.0 * v_w ** 2)
    return d_ve, d_vw
