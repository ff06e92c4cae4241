"""Synthetic system-identification experiments.

An AR(1) input drives an unknown FIR system h of length L*; the filter of
length L is estimated with the automatically regularized Wiener solution and
compared with the best α found by searching the misalignment directly
("oracle", which needs h).

Random streams: realization k of a scenario seeded with s draws its input from
SeedSequence(s, spawn_key=(k, 0)) and its noise from SeedSequence(s,
spawn_key=(k, 1)), both PCG64. Every (N, SNR) cell of a sweep therefore reuses
the same draws: a longer N extends a shorter one and the SNR only rescales
the noise.
"""
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.signal

from autoreg.core.autoreg import IterationTrace, estimate_alpha
from autoreg.core.estimation import SignalPair, build_stats
from autoreg.core.linalg import readonly_array
from autoreg.core.wiener import EigenStats, solve_wiener, to_eigen_domain
from autoreg.errors import AutoregError, ConfigError, InvalidInputError
from autoreg.models import ARConfig, ExperimentConfig

logger = logging.getLogger(__name__)

ORACLE_GRID_LOW = 1e-8
ORACLE_GRID_HIGH = 10.0


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    h: np.ndarray

    def __post_init__(self):
        h = readonly_array(np.atleast_1d(self.h))
        if h.ndim != 1 or h.size < 1 or not np.all(np.isfinite(h)):
            raise InvalidInputError("Impulse response must be a non-empty finite vector")
        if not np.any(h):
            raise InvalidInputError("Impulse response has zero norm")
        object.__setattr__(self, "h", h)

    @property
    def L_star(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    N: int
    L: int
    impulse: ImpulseResponse
    snr_db: float
    realizations: int = 1
    alpha0: float = 0.5
    iters: int = 5
    seed: int = 0
    ar: ARConfig = field(default_factory=ARConfig)
    rel_tol: float = 0.0
    oracle_grid_points: int = 200
    oracle_refine: bool = True

    def __post_init__(self):
        violations = []
        if self.N < 1:
            violations.append(f"N must be >= 1, got {self.N}")
        if self.L < 1:
            violations.append(f"L must be >= 1, got {self.L}")
        if self.L > self.impulse.L_star:
            violations.append(f"L={self.L} must not exceed L_star={self.impulse.L_star}")
        if self.realizations < 1:
            violations.append(f"realizations must be >= 1, got {self.realizations}")
        if not self.alpha0 > 0:
            violations.append(f"alpha0 must be positive, got {self.alpha0}")
        if self.iters < 0:
            violations.append(f"iters must be >= 0, got {self.iters}")
        if self.oracle_grid_points < 1:
            violations.append(f"oracle_grid_points must be >= 1, got {self.oracle_grid_points}")
        if violations:
            raise ConfigError("Invalid scenario", violations)


@dataclass(frozen=True, eq=False)
class RealizationResult:
    index: int
    N: int
    snr_db: float
    alpha_auto: float
    m_auto: float
    alpha_oracle: float
    m_oracle: float
    trace: Optional[IterationTrace] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    impulse: ImpulseResponse
    floor_db: float
    rows: List[RealizationResult]


@dataclass(frozen=True)
class CellSummary:
    N: int
    snr_db: float
    count: int
    failures: int
    mean_m_auto: float
    median_m_auto: float
    mean_m_oracle: float
    median_m_oracle: float
    median_gap: float
    mean_alpha_auto: float
    median_alpha_auto: float
    mean_alpha_oracle: float
    median_alpha_oracle: float
    floor_db: float


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def gen_ar1(n: int, cfg: ARConfig, prehistory: int = 0,
            rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """x(t) = a x(t-1) + u(t), u ~ N(0, 1), after discarding ``cfg.burn_in`` samples.

    Returns the first ``prehistory`` samples and the following ``n``.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if rng is None:
        rng = _rng(cfg.seed)
    total = cfg.burn_in + prehistory + n
    u = rng.standard_normal(total)
    x = scipy.signal.lfilter([1.0], [1.0, -cfg.a], u)[cfg.burn_in:]
    return x[:prehistory].copy(), x[prehistory:].copy()


def synth_impulse(L_star: int, decay_time: float, seed: int) -> ImpulseResponse:
    """White Gaussian taps under an exponential envelope exp(-t/τ), unit norm."""
    if L_star < 1:
        raise InvalidInputError(f"L_star must be >= 1, got {L_star}")
    if not decay_time > 0:
        raise InvalidInputError(f"decay_time must be positive, got {decay_time}")
    g = _rng(seed).standard_normal(L_star)
    h = g * np.exp(-np.arange(L_star) / decay_time)
    return ImpulseResponse(h / np.linalg.norm(h))


def ar1_covariance(a: float, size: int) -> np.ndarray:
    """Stationary covariance a^|i-j| / (1 - a²) of a unit-drive AR(1)."""
    if not abs(a) < 1:
        raise InvalidInputError(f"AR coefficient must satisfy |a| < 1, got {a}")
    return scipy.linalg.toeplitz(a ** np.arange(size)) / (1.0 - a * a)


def calibrate_noise(h: ImpulseResponse, a: float, snr_db: float) -> float:
    """Noise variance v_e* giving the requested SNR of hᵀx(t) (ensemble power)."""
    power = float(h.h @ ar1_covariance(a, h.L_star) @ h.h)
    return power / 10.0 ** (snr_db / 10.0)


def simulate(scn: ScenarioConfig, index: int = 0) -> SignalPair:
    """d(t) = hᵀx(t) + e(t) over the full length L*, windowed to the filter length L."""
    h = scn.impulse.h
    pre = scn.impulse.L_star - 1
    x_pre, x = gen_ar1(scn.N, scn.ar, prehistory=pre, rng=_rng(scn.seed, index, 0))
    full = np.concatenate([x_pre, x])
    clean = scipy.signal.lfilter(h, [1.0], full)[pre:]

    v_e = calibrate_noise(scn.impulse, scn.ar.a, scn.snr_db)
    e = math.sqrt(v_e) * _rng(scn.seed, index, 1).standard_normal(scn.N)
    keep = scn.L - 1
    return SignalPair(x_pre=x_pre[pre - keep:], x=x, d=clean + e)


def misalignment(w_hat, h: ImpulseResponse) -> float:
    """20 log₁₀(‖pad(ŵ) − h‖ / ‖h‖) in dB; -inf for an exact match."""
    w = np.asarray(w_hat, dtype=np.float64)
    hv = np.asarray(h.h if isinstance(h, ImpulseResponse) else h, dtype=np.float64)
    norm_h = float(np.linalg.norm(hv))
    if norm_h == 0:
        raise InvalidInputError("Impulse response has zero norm")
    if w.shape[0] > hv.shape[0]:
        raise InvalidInputError(f"Filter of length {w.shape[0]} is longer than the impulse response ({hv.shape[0]})")
    diff = np.concatenate([w, np.zeros(hv.shape[0] - w.shape[0])]) - hv
    err = float(np.linalg.norm(diff))
    if err == 0.0:
        return -math.inf
    return 20.0 * math.log10(err / norm_h)


def misalignment_floor(h: ImpulseResponse, L: int) -> float:
    """Lowest misalignment reachable by any length-L filter: 20 log₁₀(‖h₂‖/‖h‖)."""
    tail = float(np.linalg.norm(h.h[L:]))
    if tail == 0.0:
        return -math.inf
    return 20.0 * math.log10(tail / float(np.linalg.norm(h.h)))


def oracle_grid(lambda_max: float, points: int = 200) -> np.ndarray:
    if not lambda_max > 0:
        raise InvalidInputError(f"Oracle grid needs a positive largest eigenvalue, got {lambda_max}")
    return np.logspace(
        math.log10(ORACLE_GRID_LOW * lambda_max), math.log10(ORACLE_GRID_HIGH * lambda_max), points
    )


def misalignment_curve(es: EigenStats, h: ImpulseResponse, alphas) -> np.ndarray:
    """M(α) in dB for every α, evaluated in the eigen-domain."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    L = es.L
    shifted = es.lam[:, None] + alphas[None, :]
    if np.any(shifted <= 0):
        # reuse the singularity reporting of solve_wiener
        solve_wiener(es, float(alphas[np.argmin(np.min(shifted, axis=0))]))
    W = es.basis @ (es.z_xd[:, None] / shifted)
    head = np.sum((W - h.h[:L, None]) ** 2, axis=0)
    tail = float(h.h[L:] @ h.h[L:])
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10((head + tail) / float(h.h @ h.h))


def oracle_alpha(es: EigenStats, h: ImpulseResponse, grid, refine: bool = True) -> Tuple[float, float]:
    """α minimizing M(α): grid search, then golden-section on the best bracket.

    Ties go to the smallest α; the refinement is kept only if strictly better.
    """
    grid = np.sort(np.atleast_1d(np.asarray(grid, dtype=np.float64)), kind="stable")
    if grid.size == 0:
        raise InvalidInputError("Oracle grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidInputError("Oracle grid values must be finite and non-negative")

    m = misalignment_curve(es, h, grid)
    k = int(np.argmin(m))
    alpha_hat, m_hat = float(grid[k]), float(m[k])

    if refine and 0 < k < grid.size - 1 and grid[k - 1] > 0 and m[k] < m[k - 1] and m[k] < m[k + 1]:
        def objective(log_alpha):
            return float(misalignment_curve(es, h, [math.exp(log_alpha)])[0])

        try:
            res = scipy.optimize.minimize_scalar(
                objective,
                bracket=(math.log(grid[k - 1]), math.log(grid[k]), math.log(grid[k + 1])),
                method="golden",
            )
            if res.fun < m_hat and math.log(grid[k - 1]) <= res.x <= math.log(grid[k + 1]):
                alpha_hat, m_hat = math.exp(res.x), float(res.fun)
        except (ValueError, RuntimeError) as e:
            logger.debug(f"Oracle refinement skipped: {e}")

    return alpha_hat, m_hat


def run_realization(scn: ScenarioConfig, index: int) -> RealizationResult:
    nan = math.nan
    base = dict(index=index, N=scn.N, snr_db=scn.snr_db)
    try:
        sig = simulate(scn, index)
        es = to_eigen_domain(build_stats(sig))
    except AutoregError as e:
        logger.warning(f"Realization {index} (N={scn.N}, SNR={scn.snr_db} dB) failed: {e}")
        return RealizationResult(alpha_auto=nan, m_auto=nan, alpha_oracle=nan, m_oracle=nan,
                                 error=str(e), **base)

    grid = oracle_grid(es.lambda_max, scn.oracle_grid_points)
    trace, error = None, None
    alpha_auto, m_auto = nan, nan
    try:
        trace = estimate_alpha(es, alpha0=scn.alpha0, max_iters=scn.iters, rel_tol=scn.rel_tol)
        alpha_auto = trace.alpha
        m_auto = misalignment(solve_wiener(es, alpha_auto).w_hat, scn.impulse)
        grid = np.append(grid, alpha_auto)
    except AutoregError as e:
        logger.warning(f"Realization {index} (N={scn.N}, SNR={scn.snr_db} dB): {e}")
        trace, error = getattr(e, "trace", None), str(e)

    alpha_oracle, m_oracle = oracle_alpha(es, scn.impulse, grid, refine=scn.oracle_refine)
    return RealizationResult(alpha_auto=alpha_auto, m_auto=m_auto, alpha_oracle=alpha_oracle,
                             m_oracle=m_oracle, trace=trace, error=error, **base)


def run_scenario(scn: ScenarioConfig, threads: int = 1) -> List[RealizationResult]:
    indices = range(scn.realizations)
    if threads <= 1:
        return [run_realization(scn, i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order
        return list(pool.map(lambda i: run_realization(scn, i), indices))


def scenarios(cfg: ExperimentConfig, impulse: ImpulseResponse) -> List[ScenarioConfig]:
    ar = cfg.ar_config()
    return [
        ScenarioConfig(
            N=n, L=cfg.L, impulse=impulse, snr_db=snr, realizations=cfg.realizations,
            alpha0=cfg.alpha0, iters=cfg.iters, seed=cfg.seed, ar=ar, rel_tol=cfg.rel_tol,
            oracle_grid_points=cfg.oracle_grid_points, oracle_refine=cfg.oracle_refine,
        )
        for n in cfg.n_values
        for snr in cfg.snr_db_values
    ]


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    impulse = synth_impulse(cfg.L_star, cfg.tau, cfg.impulse_seed)
    floor_db = misalignment_floor(impulse, cfg.L)
    rows: List[RealizationResult] = []
    cells = scenarios(cfg, impulse)
    logger.info(f"Running '{cfg.name}': {len(cells)} cells x {cfg.realizations} realizations "
                f"(L*={cfg.L_star}, L={cfg.L}, floor={floor_db:.2f} dB)")
    for scn in cells:
        cell_rows = run_scenario(scn, threads=threads)
        failures = sum(not r.ok for r in cell_rows)
        logger.info(f"Cell N={scn.N} SNR={scn.snr_db:g} dB done ({failures} failures)")
        rows.extend(cell_rows)
    return ExperimentResult(config=cfg, impulse=impulse, floor_db=floor_db, rows=rows)


def _stat(fn, values) -> float:
    values = np.asarray(values, dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with np.errstate(invalid="ignore"):
            return float(fn(values)) if values.size else math.nan


def summarize(result: ExperimentResult) -> List[CellSummary]:
    out = []
    cells = {}
    for r in result.rows:
        cells.setdefault((r.N, r.snr_db), []).append(r)
    for (n, snr), rows in cells.items():
        ok = [r for r in rows if r.ok]
        m_auto = [r.m_auto for r in ok]
        m_oracle = [r.m_oracle for r in ok]
        a_auto = [r.alpha_auto for r in ok]
        a_oracle = [r.alpha_oracle for r in ok]
        gap = [ma - mo for ma, mo in zip(m_auto, m_oracle) if math.isfinite(ma) and math.isfinite(mo)]
        out.append(CellSummary(
            N=n, snr_db=snr, count=len(rows), failures=len(rows) - len(ok),
            mean_m_auto=_stat(np.nanmean, m_auto), median_m_auto=_stat(np.nanmedian, m_auto),
            mean_m_oracle=_stat(np.nanmean, m_oracle), median_m_oracle=_stat(np.nanmedian, m_oracle),
            median_gap=_stat(np.nanmedian, gap),
            mean_alpha_auto=_stat(np.nanmean, a_auto), median_alpha_auto=_stat(np.nanmedian, a_auto),
            mean_alpha_oracle=_stat(np.nanmean, a_oracle), median_alpha_oracle=_stat(np.nanmedian, a_oracle),
            floor_db=result.floor_db,
        ))
    return out
