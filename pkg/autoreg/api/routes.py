from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool
import logging
import math
import traceback
from typing import Any, Dict, List

from autoreg import __version__, config
from autoreg.errors import AutoregError
from autoreg.models import ExperimentConfig, ExperimentResponse, FitRequest, FitResponse
from autoreg.services.experiments import run_experiment, summarize
from autoreg.services.fitting import fit_filter
from autoreg.utils.io import RESULT_COLUMNS, SUMMARY_COLUMNS, result_rows, summary_rows

logger = logging.getLogger(__name__)

router = APIRouter()


def _json_float(value):
    """JSON has no inf/nan; they travel as null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _records(columns: List[str], rows: List[list]) -> List[Dict[str, Any]]:
    return [{c: _json_float(v) for c, v in zip(columns, row)} for row in rows]


def _http_error(e: AutoregError) -> HTTPException:
    code = status.HTTP_422_UNPROCESSABLE_ENTITY if e.exit_code == 2 else status.HTTP_400_BAD_REQUEST
    return HTTPException(status_code=code, detail=str(e))


@router.get("/health")
async def health():
    return {"status": "ok", "version": __version__}


@router.post("/fit", response_model=FitResponse)
async def fit(request: FitRequest):
    """Fit an automatically regularized Wiener filter."""
    try:
        logger.info(f"Fit request: N={len(request.x)}, L={request.L}")
        result = await run_in_threadpool(
            fit_filter, request.x, request.d, request.L,
            x_pre=request.x_pre, alpha0=request.alpha0, iters=request.iters, rel_tol=request.rel_tol,
        )
        return FitResponse(
            w_hat=[float(v) for v in result.solution.w_hat],
            alpha=result.solution.alpha,
            gamma=result.gamma,
            v_e=result.hyper.v_e if result.hyper else None,
            v_w=result.hyper.v_w if result.hyper else None,
            status=result.trace.status.value,
            alphas=list(result.trace.alphas),
            zero_prehistory=result.zero_prehistory,
        )
    except AutoregError as e:
        logger.warning(f"Fit rejected: {e}")
        raise _http_error(e)
    except HTTPException as he:
        raise he
    except Exception as e:
        logger.error(f"Error in fit: {str(e)}")
        logger.error(traceback.format_exc())
        raise HTTPException(status_code=500, detail="An error occurred while fitting the filter.")


@router.post("/experiment", response_model=ExperimentResponse)
async def experiment(cfg: ExperimentConfig):
    """Run a system-identification sweep and return per-realization rows and cell summaries."""
    try:
        seed = config.seed_override()
        if seed is not None:
            cfg = cfg.model_copy(update={"seed": seed})
        logger.info(f"Experiment request '{cfg.name}': {len(cfg.n_values)}x{len(cfg.snr_db_values)} cells")
        result = await run_in_threadpool(run_experiment, cfg, config.threads())
        return ExperimentResponse(
            name=cfg.name,
            floor_db=_json_float(result.floor_db),
            rows=_records(RESULT_COLUMNS, result_rows(result)),
            summary=_records(SUMMARY_COLUMNS, summary_rows(summarize(result))),
        )
    except AutoregError as e:
        logger.warning(f"Experiment rejected: {e}")
        raise _http_error(e)
    except HTTPException as he:
        raise he
    except Exception as e:
        logger.error(f"Error in experiment: {str(e)}")
        logger.error(traceback.format_exc())
        raise HTTPException(status_code=500, detail="An error occurred while running the experiment.")
