"""Support-recovery and error metrics.

The false/true positive rates here follow a precision-style convention: both
denominators count PREDICTED zero / nonzero entries (fpr = true nonzeros
missed per predicted zero; tpr = true nonzeros per predicted nonzero). The
conventional rates, whose denominators are the TRUE zero / nonzero counts,
are reported alongside under ``*_conventional`` names.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "ConfusionRates",
    "RecoveryMetrics",
    "RateFit",
    "sparsity",
    "confusion_rates",
    "fpr_tpr",
    "frobenius_error",
    "rate_fit",
]


@dataclass(frozen=True)
class ConfusionRates:
    """Confusion ratios between a truth and an estimate support pattern.

    Any ratio with a zero denominator is reported as 0.0 with its
    ``*_defined`` flag set to False (never NaN).
    """

    fpr: float
    tpr: float
    fpr_defined: bool
    tpr_defined: bool
    fpr_conventional: float
    tpr_conventional: float
    fpr_conventional_defined: bool
    tpr_conventional_defined: bool


@dataclass(frozen=True)
class RecoveryMetrics:
    """Per-run recovery record for one estimate against its true covariance."""

    p: int
    frob_error: float
    sp_true: float
    sp_est: float
    ar_true: int
    ar_est: int
    fpr: float
    tpr: float
    iterations: int
    wall_seconds: float
    fpr_defined: bool = True
    tpr_defined: bool = True
    fpr_conventional: float = 0.0
    tpr_conventional: float = 0.0
    converged: bool = True
    run: int = 0


class RateFit(NamedTuple):
    slope: float
    intercept: float


def sparsity(m, zero_tol: float = 0.0) -> float:
    """Fraction of entries with ``|m_ij| > zero_tol`` (default 0: exact nonzeros)."""
    if zero_tol < 0:
        raise ValueError(f"zero_tol must be non-negative, got {zero_tol}")
    m = np.asarray(m, dtype=np.float64)
    return float(np.count_nonzero(np.abs(m) > zero_tol)) / m.size


def confusion_rates(truth, estimate, zero_tol: float = 0.0) -> ConfusionRates:
    """All four confusion ratios between truth and estimate supports."""
    t = np.asarray(truth, dtype=np.float64)
    e = np.asarray(estimate, dtype=np.float64)
    if t.shape != e.shape:
        raise ValueError(f"dimension mismatch: truth {t.shape} vs estimate {e.shape}")
    t_nz = np.abs(t) > zero_tol
    e_nz = np.abs(e) > zero_tol

    pred_zero = int(np.count_nonzero(~e_nz))
    pred_nonzero = int(np.count_nonzero(e_nz))
    true_zero = int(np.count_nonzero(~t_nz))
    true_nonzero = int(np.count_nonzero(t_nz))

    missed = int(np.count_nonzero(t_nz & ~e_nz))
    hit = int(np.count_nonzero(t_nz & e_nz))
    false_alarm = int(np.count_nonzero(~t_nz & e_nz))

    fpr, fpr_def = (missed / pred_zero, True) if pred_zero else (0.0, False)
    tpr, tpr_def = (hit / pred_nonzero, True) if pred_nonzero else (0.0, False)
    fpr_c, fpr_c_def = (false_alarm / true_zero, True) if true_zero else (0.0, False)
    tpr_c, tpr_c_def = (hit / true_nonzero, True) if true_nonzero else (0.0, False)
    return ConfusionRates(
        fpr=fpr,
        tpr=tpr,
        fpr_defined=fpr_def,
        tpr_defined=tpr_def,
        fpr_conventional=fpr_c,
        tpr_conventional=tpr_c,
        fpr_conventional_defined=fpr_c_def,
        tpr_conventional_defined=tpr_c_def,
    )


def fpr_tpr(truth, estimate, zero_tol: float = 0.0) -> tuple[float, float]:
    """The precision-style (fpr, tpr) pair; zero-denominator cases report 0."""
    rates = confusion_rates(truth, estimate, zero_tol)
    return rates.fpr, rates.tpr


def frobenius_error(truth, estimate) -> float:
    """``||estimate - truth||_F``."""
    t = np.asarray(truth, dtype=np.float64)
    e = np.asarray(estimate, dtype=np.float64)
    if t.shape != e.shape:
        raise ValueError(f"dimension mismatch: truth {t.shape} vs estimate {e.shape}")
    return float(np.linalg.norm(e - t))


def rate_fit(points: Sequence[tuple[float, float]]) -> RateFit:
    """Least-squares fit of ``log(error)`` against ``log(n)``.

    Requires at least three points with distinct sample sizes and strictly
    positive errors; the slope estimates the error-decay exponent.
    """
    pts = [(float(n), float(err)) for n, err in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    ns = [n for n, _ in pts]
    errs = [err for _, err in pts]
    if len(set(ns)) != len(ns):
        raise ValueError("sample sizes must be distinct")
    if any(n <= 0 for n in ns):
        raise ValueError("sample sizes must be positive")
    if any(err <= 0 for err in errs):
        raise ValueError("errors must be strictly positive")
    slope, intercept = np.polyfit(np.log(ns), np.log(errs), 1)
    return RateFit(float(slope), float(intercept))
