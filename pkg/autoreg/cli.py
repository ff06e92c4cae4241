"""Command-line front end.

    python -m autoreg fit --x x.csv --d d.csv --L 64 [--alpha0 0.5] [--iters 5] [--out dir]
    python -m autoreg experiment --config configs/matched.json [--out dir] [--threads k]
    python -m autoreg plot --csv results.csv --kind misalignment-vs-N --out fig.svg
    python -m autoreg serve [--host 127.0.0.1] [--port 8000]

Exit status: 0 success, 1 degenerate/numerical, 2 usage/config, 3 I/O.
"""
import argparse
import json
import logging
import sys
import time
import traceback
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from autoreg import __version__, config
from autoreg.errors import AutoregError, DataFileError, LengthMismatchError
from autoreg.models import RunManifest, load_experiment_config
from autoreg.services.experiments import run_experiment, summarize
from autoreg.services.fitting import fit_filter
from autoreg.utils import io
from autoreg.utils.logger import setup_logger
from autoreg.utils.plotting import PLOT_KINDS, render_plot

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 1


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataFileError(f"Cannot create output directory {out}: {e}") from e
    return out


def _write_manifest(path: Path, command: str, cfg: dict, seed: Optional[int], outputs: List[Path],
                    started: datetime, t0: float, notes: Optional[List[str]] = None):
    manifest = RunManifest(
        command=command,
        config=cfg,
        seed=seed,
        version=__version__,
        outputs=[str(p) for p in outputs],
        started_at=started,
        duration_seconds=time.perf_counter() - t0,
        notes=notes or [],
    )
    try:
        path.write_text(manifest.model_dump_json(indent=2) + "\n")
    except OSError as e:
        raise DataFileError(f"Cannot write {path}: {e}") from e


def cmd_fit(args) -> int:
    started, t0 = datetime.now(timezone.utc), time.perf_counter()
    x = io.read_samples(args.x)
    d = io.read_samples(args.d)
    if x.shape != d.shape:
        raise LengthMismatchError(f"{args.x} has {x.size} samples but {args.d} has {d.size}")
    x_pre = io.read_samples(args.x_pre) if args.x_pre else None

    result = fit_filter(x, d, args.L, x_pre=x_pre, alpha0=args.alpha0, iters=args.iters, rel_tol=args.rel_tol)

    out = _out_dir(args.out)
    filter_path, trace_path, fit_path = out / "filter.csv", out / "trace.csv", out / "fit.json"
    io.write_csv(filter_path, ["tap", "w"], list(enumerate(result.solution.w_hat)))
    io.write_csv(trace_path, io.TRACE_COLUMNS, io.trace_rows(result.trace))
    summary = {
        "alpha": result.solution.alpha,
        "gamma": result.gamma,
        "v_e": result.hyper.v_e if result.hyper else None,
        "v_w": result.hyper.v_w if result.hyper else None,
        "iterations": result.trace.iterations,
        "status": result.trace.status.value,
        "alphas": list(result.trace.alphas),
    }
    try:
        fit_path.write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as e:
        raise DataFileError(f"Cannot write {fit_path}: {e}") from e

    notes = ["input prehistory taken as zeros"] if result.zero_prehistory else []
    cfg = {"x": str(args.x), "d": str(args.d), "x_pre": args.x_pre, "L": args.L,
           "alpha0": args.alpha0, "iters": args.iters, "rel_tol": args.rel_tol}
    _write_manifest(out / "manifest.json", "fit", cfg, None, [filter_path, trace_path, fit_path],
                    started, t0, notes)
    print(f"alpha={result.solution.alpha:.6g} status={result.trace.status.value} out={out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    started, t0 = datetime.now(timezone.utc), time.perf_counter()
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        raise DataFileError(f"Cannot read config {args.config}: {e}") from e
    cfg = load_experiment_config(text, seed_override=config.seed_override())

    threads = args.threads if args.threads is not None else config.threads()
    result = run_experiment(cfg, threads=threads)
    summaries = summarize(result)

    out = _out_dir(args.out)
    paths = [out / "results.csv", out / "summary.csv", out / "traces.csv"]
    io.write_csv(paths[0], io.RESULT_COLUMNS, io.result_rows(result))
    io.write_csv(paths[1], io.SUMMARY_COLUMNS, io.summary_rows(summaries))
    io.write_csv(paths[2], io.TRACE_COLUMNS, io.experiment_trace_rows(result))
    _write_manifest(out / "manifest.json", "experiment", cfg.model_dump(), cfg.seed, paths, started, t0,
                    [f"threads={threads}", f"floor_db={result.floor_db!r}"])

    failures = sum(not r.ok for r in result.rows)
    print(f"{len(result.rows)} realizations ({failures} failed), floor={result.floor_db:.3f} dB, out={out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    started, t0 = datetime.now(timezone.utc), time.perf_counter()
    out_path = Path(args.out)
    if out_path.parent != Path(""):
        _out_dir(out_path.parent)
    render_plot(args.csv, args.kind, out_path)
    _write_manifest(out_path.with_suffix(".manifest.json"), "plot", {"csv": str(args.csv), "kind": args.kind},
                    None, [out_path], started, t0)
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from autoreg.main import app

    host = args.host or config.host()
    port = args.port if args.port is not None else config.port()
    logger.info(f"Starting server on {host}:{port}...")
    uvicorn.run(app, host=host, port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autoreg", description="Automatically regularized Wiener filters")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a filter from x/d sample files")
    fit.add_argument("--x", required=True, help="input samples (.csv or .f64)")
    fit.add_argument("--d", required=True, help="desired samples (.csv or .f64)")
    fit.add_argument("--L", type=int, required=True, help="filter length")
    fit.add_argument("--x-pre", dest="x_pre", default=None, help="L-1 input samples preceding x (oldest first)")
    fit.add_argument("--alpha0", type=float, default=config.DEFAULT_ALPHA0)
    fit.add_argument("--iters", type=int, default=config.DEFAULT_ITERS)
    fit.add_argument("--rel-tol", dest="rel_tol", type=float, default=config.DEFAULT_REL_TOL)
    fit.add_argument("--out", default="fit-out")
    fit.set_defaults(func=cmd_fit)

    exp = sub.add_parser("experiment", help="run a system-identification sweep")
    exp.add_argument("--config", required=True, help="JSON experiment config")
    exp.add_argument("--out", default="experiment-out")
    exp.add_argument("--threads", type=int, default=None, help="worker threads (default AUTOREG_THREADS or 1)")
    exp.set_defaults(func=cmd_experiment)

    plot = sub.add_parser("plot", help="render results/traces as SVG")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--kind", required=True, choices=sorted(PLOT_KINDS))
    plot.add_argument("--out", required=True, help="output .svg path")
    plot.set_defaults(func=cmd_plot)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logger("DEBUG" if args.verbose else None)
    if args.command == "fit" and args.L < 1:
        logger.error(f"--L must be >= 1, got {args.L}")
        return EXIT_USAGE

    try:
        return args.func(args)
    except AutoregError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}")
        logger.error(traceback.format_exc())
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
