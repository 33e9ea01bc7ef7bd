"""Dense symmetric linear algebra kernels.

Everything operates on plain ``numpy`` float64 arrays. A "symmetric matrix"
here is any square array that has been run through :func:`symmetrize`, which
enforces bitwise symmetry so downstream kernels never re-check it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "EigenDecomposition",
    "MatrixNorms",
    "symmetrize",
    "eigh_descending",
    "psd_project",
    "sqrt_psd",
    "norms",
    "approximate_rank",
]

# Relative eigenvalue floor below which sqrt_psd rejects the input outright
# instead of clamping (a caller bug, not floating-point noise).
_SQRT_PSD_REJECT = 1e-6


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending plus matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class MatrixNorms(NamedTuple):
    frobenius: float
    l1_elementwise: float
    nuclear: float


def symmetrize(a, name: str = "matrix") -> np.ndarray:
    """Return ``(A + A.T) / 2`` as float64, validating shape and finiteness.

    The averaged form is exactly symmetric in floating point, so callers may
    rely on ``out[i, j] == out[j, i]`` bitwise.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square 2-d array, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return (a + a.T) / 2.0


def eigh_descending(m) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.

    Column signs are normalized so the first nonzero component of every
    eigenvector is non-negative, which makes golden files reproducible.
    Identical input bits give identical output bits.
    """
    m = symmetrize(m)
    try:
        w, u = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        p = m.shape[0]
        off = float(np.linalg.norm(m - np.diag(np.diag(m))))
        raise np.linalg.LinAlgError(
            f"eigendecomposition did not converge for {p}x{p} matrix "
            f"(off-diagonal Frobenius residual {off:.3e})"
        ) from exc
    w = w[::-1].copy()
    u = u[:, ::-1]
    first_nonzero = np.argmax(u != 0.0, axis=0)
    signs = np.sign(u[first_nonzero, np.arange(u.shape[1])])
    signs[signs == 0.0] = 1.0
    return EigenDecomposition(w, np.ascontiguousarray(u * signs))


def psd_project(m) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix (negative eigenvalues clamped)."""
    w, u = eigh_descending(m)
    clamped = np.maximum(w, 0.0)
    return symmetrize((u * clamped) @ u.T)


def sqrt_psd(m) -> np.ndarray:
    """Symmetric PSD square root ``R`` with ``R @ R`` close to ``m``.

    Eigenvalues slightly below zero (floating-point noise) are clamped to zero
    before rooting; anything below ``-1e-6 * ||m||_F`` is rejected.
    """
    m = symmetrize(m)
    w, u = eigh_descending(m)
    floor = -_SQRT_PSD_REJECT * float(np.linalg.norm(m))
    if w.size and float(w[-1]) < floor:
        raise ValueError(
            f"matrix not PSD: minimum eigenvalue {w[-1]:.6e} is below {floor:.6e}"
        )
    roots = np.sqrt(np.maximum(w, 0.0))
    return symmetrize((u * roots) @ u.T)


def norms(m) -> MatrixNorms:
    """Frobenius, elementwise l1 (diagonal included), and nuclear norms."""
    m = symmetrize(m)
    w, _ = eigh_descending(m)
    return MatrixNorms(
        frobenius=float(np.linalg.norm(m)),
        l1_elementwise=float(np.abs(m).sum()),
        nuclear=float(np.abs(w).sum()),
    )


def approximate_rank(m, gamma: float = 0.001) -> int:
    """Smallest ``ar`` in ``{1, ..., p}`` with ``sigma_{ar+1} / sigma_1 <= gamma``.

    Singular values of the symmetric input are the absolute eigenvalues sorted
    descending, with ``sigma_{p+1}`` defined as 0 so ``ar = p`` is attainable.
    The zero matrix returns 0 (the defining ratio would be 0/0).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    m = symmetrize(m)
    sv = np.sort(np.abs(np.linalg.eigvalsh(m)))[::-1]
    if sv[0] == 0.0:
        return 0
    ratios = np.append(sv[1:], 0.0) / sv[0]
    return int(np.nonzero(ratios <= gamma)[0][0]) + 1
