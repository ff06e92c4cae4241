import csv
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from autoreg.errors import DataFileError, InvalidInputError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["N", "snr_db", "realization", "alpha_auto", "m_auto", "alpha_oracle", "m_oracle",
                  "floor_db", "status", "error"]
SUMMARY_COLUMNS = ["N", "snr_db", "count", "failures", "mean_m_auto", "median_m_auto", "mean_m_oracle",
                   "median_m_oracle", "median_gap", "mean_alpha_auto", "median_alpha_auto",
                   "mean_alpha_oracle", "median_alpha_oracle", "floor_db"]
TRACE_COLUMNS = ["N", "snr_db", "realization", "iter", "alpha", "gamma", "v_e", "v_w"]


def fmt(value) -> str:
    """Shortest round-trip text for numbers; empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def read_samples(path) -> np.ndarray:
    """One-column CSV (optional header) or raw little-endian float64 (.f64)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".f64":
            raw = path.read_bytes()
            if len(raw) % 8:
                raise DataFileError(f"{path}: size {len(raw)} is not a multiple of 8 bytes")
            values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
        elif path.suffix.lower() == ".csv":
            values = _read_column(path)
        else:
            raise InvalidInputError(f"{path}: unsupported sample file extension (use .csv or .f64)")
    except OSError as e:
        raise DataFileError(f"Cannot read {path}: {e}") from e

    if values.size == 0:
        raise DataFileError(f"{path}: no samples")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"{path}: contains non-finite samples")
    logger.debug(f"Read {values.size} samples from {path}")
    return values


def _read_column(path: Path) -> np.ndarray:
    values = []
    with path.open(newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or not row[0].strip():
                continue
            if len(row) > 1:
                raise DataFileError(f"{path}:{lineno}: expected one value per line")
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1 and not values:
                    continue  # header
                raise DataFileError(f"{path}:{lineno}: cannot parse {row[0]!r} as a number")
    return np.asarray(values, dtype=np.float64)


def write_samples(path, values):
    path = Path(path)
    values = np.asarray(values, dtype=np.float64)
    if path.suffix.lower() == ".f64":
        path.write_bytes(values.astype("<f8").tobytes())
    else:
        write_csv(path, ["value"], [[v] for v in values])


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    path = Path(path)
    try:
        with path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
    except OSError as e:
        raise DataFileError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")


def read_csv(path) -> Tuple[List[str], List[Dict[str, str]]]:
    path = Path(path)
    try:
        with path.open(newline="") as f:
            reader = csv.DictReader(f)
            rows = list(reader)
            header = list(reader.fieldnames or [])
    except OSError as e:
        raise DataFileError(f"Cannot read {path}: {e}") from e
    return header, rows


def parse_float(text: Optional[str]) -> float:
    if text is None or text == "":
        return math.nan
    return float(text)


def result_rows(result) -> List[list]:
    rows = []
    for r in result.rows:
        status = r.trace.status.value if r.trace is not None else "failed"
        rows.append([r.N, float(r.snr_db), r.index, r.alpha_auto, r.m_auto, r.alpha_oracle, r.m_oracle,
                     result.floor_db, status, r.error or ""])
    return rows


def summary_rows(summaries) -> List[list]:
    return [[getattr(s, c) for c in SUMMARY_COLUMNS] for s in summaries]


def trace_rows(trace, N=None, snr_db=None, realization=0) -> List[list]:
    """One row per α⁽ⁱ⁾; the last α has no γ/v_e/v_w of its own."""
    rows = []
    for i, alpha in enumerate(trace.alphas):
        state = trace.states[i] if i < len(trace.states) else None
        rows.append([
            N, None if snr_db is None else float(snr_db), realization, i, alpha,
            state.gamma if state else None,
            state.v_e if state else None,
            state.v_w if state else None,
        ])
    return rows


def experiment_trace_rows(result) -> List[list]:
    rows = []
    for r in result.rows:
        if r.trace is not None:
            rows.extend(trace_rows(r.trace, r.N, r.snr_db, r.index))
    return rows
