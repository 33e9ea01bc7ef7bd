"""Scikit-learn style estimator wrapping the ADMM covariance solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .datagen import sample_covariance
from .metrics import frobenius_error
from .solver import SolverConfig, solve

__all__ = ["SparseLowRankCovariance"]


class SparseLowRankCovariance(BaseEstimator):
    """Covariance estimator that is simultaneously sparse and low rank.

    Fits ``argmin_{S >= 0} 0.5*||S - S_n||_F^2 + lam*||S||_1 + tau*||S||_*``
    where ``S_n`` is the empirical covariance of the data. The elementwise l1
    penalty drives entries to exact zero, the nuclear-norm penalty shrinks
    eigenvalues toward a low-rank spectrum, and the PSD constraint keeps the
    result a valid covariance matrix even when ``S_n`` is rank deficient
    (more features than samples).

    Parameters
    ----------
    lam : float, default 0.25
        Elementwise l1 penalty weight; larger values give sparser estimates.
    tau : float, default 0.5
        Nuclear-norm penalty weight; larger values give lower-rank estimates.
    mu : float, default 1.0
        ADMM penalty parameter. Changes the iteration path, not the estimate.
    tol : float, default 5e-4
        Convergence threshold on successive-iterate changes (Frobenius).
    max_iter : int, default 1000
        Iteration cap; exceeding it leaves ``converged_`` False.
    init : {"zero", "soft"}, default "zero"
        Start from zero or from the soft-threshold warm start.
    penalize_diagonal : bool, default True
        If False, the l1 penalty skips the diagonal.
    assume_centered : bool, default False
        If True, data are not centered before computing the empirical
        covariance (use when the mean is known to be zero).

    Attributes
    ----------
    location_ : ndarray of shape (n_features,)
        Estimated mean (zeros when ``assume_centered``).
    covariance_ : ndarray of shape (n_features, n_features)
        The PSD covariance estimate.
    sparse_covariance_ : ndarray of shape (n_features, n_features)
        Companion iterate with exact zeros; use it to read off the support.
    sample_covariance_ : ndarray of shape (n_features, n_features)
        Empirical covariance the estimate was fitted to.
    dual_ : ndarray of shape (n_features, n_features)
        Final dual matrix.
    n_iter_ : int
    converged_ : bool
    objective_ : float
    primal_gap_ : float
        Frobenius gap between ``covariance_`` and ``sparse_covariance_``.
    kkt_residuals_ : KktResiduals
        Stationarity/consensus diagnostics at the returned point.

    Examples
    --------
    >>> import numpy as np
    >>> from slrcov import SparseLowRankCovariance
    >>> rng = np.random.default_rng(0)
    >>> factor = rng.uniform(-1.0, 1.0, size=8)
    >>> cov = np.outer(factor, factor) + 0.01 * np.eye(8)
    >>> X = rng.multivariate_normal(np.zeros(8), cov, size=200)
    >>> est = SparseLowRankCovariance(lam=0.05, tau=0.05).fit(X)
    >>> est.covariance_.shape
    (8, 8)
    """

    def __init__(
        self,
        lam: float = 0.25,
        tau: float = 0.5,
        mu: float = 1.0,
        tol: float = 5e-4,
        max_iter: int = 1000,
        init: str = "zero",
        penalize_diagonal: bool = True,
        assume_centered: bool = False,
    ):
        self.lam = lam
        self.tau = tau
        self.mu = mu
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.penalize_diagonal = penalize_diagonal
        self.assume_centered = assume_centered

    def fit(self, X, y=None):
        """Fit the estimator to data.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
            Observations; the empirical covariance uses 1/(n-1) scaling.
        y : ignored

        Returns
        -------
        self
        """
        X = check_array(X, ensure_min_samples=2, ensure_min_features=1)
        config = SolverConfig(
            lam=self.lam,
            tau=self.tau,
            mu=self.mu,
            tol=self.tol,
            max_iter=self.max_iter,
            init=self.init,
            penalize_diagonal=self.penalize_diagonal,
        )
        if self.assume_centered:
            self.location_ = np.zeros(X.shape[1])
        else:
            self.location_ = X.mean(axis=0)
        emp_cov = sample_covariance(X, center=not self.assume_centered)
        result = solve(emp_cov, config)
        self.sample_covariance_ = emp_cov
        self.covariance_ = result.estimate
        self.sparse_covariance_ = result.sigma
        self.dual_ = result.dual
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.objective_ = result.objective
        self.primal_gap_ = result.primal_gap
        self.kkt_residuals_ = result.kkt
        self.n_features_in_ = X.shape[1]
        return self

    def error_norm(self, comp_cov) -> float:
        """Frobenius distance between the fitted covariance and a comparator."""
        check_is_fitted(self, "covariance_")
        return frobenius_error(comp_cov, self.covariance_)
