"""Proximal maps used by the ADMM iteration, plus the soft-threshold warm start."""

from __future__ import annotations

import numpy as np

from .linalg import psd_project, symmetrize

__all__ = ["shrink", "gamma_step", "sigma_step", "soft_threshold_estimator"]


def _check_shapes(a: np.ndarray, b: np.ndarray, names: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch between {names}: {a.shape} vs {b.shape}")


def shrink(m, threshold: float) -> np.ndarray:
    """Elementwise soft-thresholding, diagonal included.

    Every entry moves toward zero by ``threshold`` and clamps at zero:
    ``max(|m_ij| - threshold, 0) * sign(m_ij)`` with ``sign(0) = 0``.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    m = symmetrize(m)
    return np.sign(m) * np.maximum(np.abs(m) - threshold, 0.0)


def gamma_step(sigma_k, dual_k, mu: float, tau: float) -> np.ndarray:
    """PSD-feasible block update: project ``sigma_k + mu*dual_k - mu*tau*I``.

    This is the exact minimizer of the nuclear-norm term plus the quadratic
    coupling over the PSD cone, where the nuclear norm reduces to the trace.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    sigma_k = symmetrize(sigma_k, "sigma_k")
    dual_k = symmetrize(dual_k, "dual_k")
    _check_shapes(sigma_k, dual_k, "sigma_k and dual_k")
    shifted = sigma_k + mu * dual_k - mu * tau * np.eye(sigma_k.shape[0])
    return psd_project(shifted)


def sigma_step(
    sample_cov,
    gamma_next,
    dual_k,
    mu: float,
    lam: float,
    penalize_diagonal: bool = True,
) -> np.ndarray:
    """Sparse block update: ``mu/(mu+1) * shrink(sample_cov + gamma_next/mu - dual_k, lam)``.

    With ``penalize_diagonal=False`` the diagonal skips the threshold (the
    off-diagonal-only penalty variant); the ``mu/(mu+1)`` scaling still
    applies to every entry.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    sample_cov = symmetrize(sample_cov, "sample_cov")
    gamma_next = symmetrize(gamma_next, "gamma_next")
    dual_k = symmetrize(dual_k, "dual_k")
    _check_shapes(sample_cov, gamma_next, "sample_cov and gamma_next")
    _check_shapes(sample_cov, dual_k, "sample_cov and dual_k")
    pivot = sample_cov + gamma_next / mu - dual_k
    shrunk = shrink(pivot, lam)
    if not penalize_diagonal:
        np.fill_diagonal(shrunk, np.diag(pivot))
    return (mu / (mu + 1.0)) * shrunk


def soft_threshold_estimator(sample_cov, lam: float, tau: float) -> np.ndarray:
    """Closed-form warm start ``shrink(sample_cov - tau*I, lam)``.

    Not necessarily PSD; it is the exact program minimizer whenever it happens
    to be PSD, and otherwise serves only as an initial point.
    """
    sample_cov = symmetrize(sample_cov, "sample_cov")
    return shrink(sample_cov - tau * np.eye(sample_cov.shape[0]), lam)
