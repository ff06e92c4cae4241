"""SVG charts in the style of realization clouds: thin line per realization,
thick line for the average."""
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from autoreg.errors import DataFileError, PlotError  # noqa: E402
from autoreg.utils.io import parse_float, read_csv  # noqa: E402

logger = logging.getLogger(__name__)

# fixed salt + no date keeps SVG bytes identical across runs
plt.rcParams["svg.hashsalt"] = "autoreg"
plt.rcParams["svg.fonttype"] = "path"

PLOT_KINDS = {
    "misalignment-vs-N": ["N", "snr_db", "realization", "m_auto", "m_oracle"],
    "alpha-vs-N": ["N", "snr_db", "realization", "alpha_auto", "alpha_oracle"],
    "alpha-trace": ["realization", "iter", "alpha"],
}


def _finite_mean(values: List[float]) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return sum(vals) / len(vals) if vals else math.nan


def _vs_n(ax, rows: List[Dict[str, str]], auto_col: str, oracle_col: str):
    by_snr = defaultdict(lambda: defaultdict(dict))
    for row in rows:
        snr = parse_float(row["snr_db"])
        by_snr[snr][int(row["realization"])][int(row["N"])] = (
            parse_float(row[auto_col]), parse_float(row[oracle_col]))

    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for c, snr in enumerate(sorted(by_snr)):
        color = colors[c % len(colors)]
        realizations = by_snr[snr]
        ns = sorted({n for per in realizations.values() for n in per})
        for per in realizations.values():
            xs = sorted(per)
            ax.plot(xs, [per[n][0] for n in xs], ls="--", lw=0.4, color=color, alpha=0.5)
            ax.plot(xs, [per[n][1] for n in xs], ls="-", lw=0.4, color=color, alpha=0.5)
        ax.plot(ns, [_finite_mean([per[n][0] for per in realizations.values() if n in per]) for n in ns],
                ls="--", lw=2.0, color=color, label=f"auto, SNR={snr:g} dB")
        ax.plot(ns, [_finite_mean([per[n][1] for per in realizations.values() if n in per]) for n in ns],
                ls="-", lw=2.0, color=color, label=f"oracle, SNR={snr:g} dB")
    ax.set_xscale("log")
    ax.set_xlabel("N")


def trace_series(rows: List[Dict[str, str]]) -> Dict[tuple, Dict[int, float]]:
    """α by iteration for every (N, SNR, realization) found in a trace CSV."""
    series = defaultdict(dict)
    for row in rows:
        key = (row.get("N", ""), row.get("snr_db", ""), row["realization"])
        series[key][int(row["iter"])] = parse_float(row["alpha"])
    return dict(series)


def _alpha_trace(ax, rows: List[Dict[str, str]]):
    series = trace_series(rows)
    longest = max(len(s) for s in series.values())
    for s in series.values():
        iters = sorted(s)
        ax.plot(iters, [s[i] for i in iters], ls="--", lw=0.4, color="tab:blue", alpha=0.6)
    mean = [_finite_mean([s[i] for s in series.values() if i in s]) for i in range(longest)]
    ax.plot(range(longest), mean, lw=2.0, color="tab:blue", label="average")
    ax.set_yscale("log")
    ax.set_xlabel("iteration i")
    ax.set_ylabel("alpha")


def render_plot(csv_path, kind: str, out_path) -> Path:
    if kind not in PLOT_KINDS:
        raise PlotError(f"Unknown plot kind {kind!r}; choose one of {', '.join(PLOT_KINDS)}")
    header, rows = read_csv(csv_path)
    if not rows:
        raise PlotError(f"{csv_path}: no data rows to plot")
    missing = [c for c in PLOT_KINDS[kind] if c not in header]
    if missing:
        raise PlotError(f"{csv_path}: missing columns for {kind}: {', '.join(missing)}")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    try:
        if kind == "misalignment-vs-N":
            _vs_n(ax, rows, "m_auto", "m_oracle")
            ax.set_ylabel("misalignment [dB]")
        elif kind == "alpha-vs-N":
            _vs_n(ax, rows, "alpha_auto", "alpha_oracle")
            ax.set_yscale("log")
            ax.set_ylabel("alpha")
        else:
            _alpha_trace(ax, rows)
        ax.grid(True, which="both", lw=0.3)
        ax.legend(fontsize="small")
        fig.tight_layout()

        out_path = Path(out_path)
        try:
            fig.savefig(out_path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise DataFileError(f"Cannot write {out_path}: {e}") from e
    finally:
        plt.close(fig)
    logger.info(f"Wrote {kind} plot to {out_path}")
    return out_path

