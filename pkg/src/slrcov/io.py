"""CSV and JSON serialization.

Matrices and sample sets are headerless dense CSV, one row per line, every
value printed with full round-trip precision (``repr`` of the float), so
identical data produces identical bytes. Metric tables are headered CSV with
a fixed column order; booleans serialize as 0/1 so every column is averageable
by an external script.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from typing import Iterable, Sequence

import numpy as np

from .metrics import RecoveryMetrics
from .solver import SolveResult, TraceRow

__all__ = [
    "MatrixParseError",
    "format_float",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_samples_csv",
    "METRICS_COLUMNS",
    "metrics_row",
    "write_metrics_csv",
    "write_summary_csv",
    "write_trace_csv",
    "result_record",
    "write_json",
]

# Fixed table layout: the first eight columns mirror the replication tables.
METRICS_COLUMNS = (
    "p",
    "ar_true",
    "ar_est",
    "sp_true",
    "sp_est",
    "fpr",
    "tpr",
    "time_s",
    "frob_error",
    "fpr_conventional",
    "tpr_conventional",
    "fpr_defined",
    "tpr_defined",
    "iterations",
    "converged",
    "run",
)

SUMMARY_COLUMNS = METRICS_COLUMNS[:-1] + ("n_runs",)


class MatrixParseError(ValueError):
    """Malformed CSV input; carries the path and 1-based line number."""

    def __init__(self, path, line: int, reason: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"parse error in {self.path} at line {line}: {reason}")


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(x))


def write_matrix_csv(path, m: np.ndarray) -> None:
    m = np.asarray(m, dtype=np.float64)
    with open(path, "w", encoding="ascii") as fh:
        for row in np.atleast_2d(m):
            fh.write(",".join(format_float(v) for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    """Read a headerless dense CSV; raises :class:`MatrixParseError` on bad input."""
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                row = [float(tok) for tok in stripped.split(",")]
            except ValueError:
                raise MatrixParseError(path, lineno, f"unparseable value in {stripped!r}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MatrixParseError(
                    path, lineno, f"expected {width} columns, found {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise MatrixParseError(path, 1, "file contains no data rows")
    return np.asarray(rows, dtype=np.float64)


def write_samples_csv(path, samples) -> None:
    data = samples.data if hasattr(samples, "data") else np.asarray(samples)
    write_matrix_csv(path, data)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def metrics_row(row: RecoveryMetrics) -> list[str]:
    record = asdict(row)
    mapping = dict(record, time_s=record["wall_seconds"])
    return [_cell(mapping[col]) for col in METRICS_COLUMNS]


def write_metrics_csv(path, rows: Sequence[RecoveryMetrics]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(metrics_row(row)) + "\n")


def write_summary_csv(path, summary: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        fh.write(",".join(_cell(summary[col]) for col in SUMMARY_COLUMNS) + "\n")


def write_trace_csv(path, trace: Iterable[TraceRow]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("iteration,residual_gamma,residual_sigma,primal_gap,objective,h_distance\n")
        for row in trace:
            h = "" if row.h_distance is None else format_float(row.h_distance)
            fh.write(
                f"{row.iteration},{format_float(row.residual_gamma)},"
                f"{format_float(row.residual_sigma)},{format_float(row.primal_gap)},"
                f"{format_float(row.objective)},{h}\n"
            )


def result_record(result: SolveResult, wall_seconds: float | None = None) -> dict:
    """JSON-ready summary of a solve (matrices excluded; they go to CSV)."""
    record = {
        "iterations": result.iterations,
        "converged": result.converged,
        "residual_gamma": result.final_residuals[0],
        "residual_sigma": result.final_residuals[1],
        "primal_gap": result.primal_gap,
        "kkt": {
            "gamma_stationarity": result.kkt.gamma_stationarity,
            "sigma_stationarity": result.kkt.sigma_stationarity,
            "consensus": result.kkt.consensus,
        },
        "objective": result.objective,
    }
    if wall_seconds is not None:
        record["wall_seconds"] = wall_seconds
    return record


def write_json(path, obj) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
