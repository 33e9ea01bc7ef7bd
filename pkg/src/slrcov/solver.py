"""ADMM solver for the sparse plus low-rank PSD covariance program.

Minimizes ``0.5*||S - S_n||_F^2 + lam*||S||_1 + tau*||S||_*`` over the PSD
cone by splitting ``S`` into a PSD-feasible iterate (``gamma``), a sparse
iterate with exact zeros (``sigma``), and a dual matrix, alternating a PSD
projection, an elementwise shrinkage, and a dual ascent step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import eigh_descending, psd_project, symmetrize
from .operators import gamma_step, sigma_step, soft_threshold_estimator

__all__ = [
    "SolverConfig",
    "AdmmState",
    "SolveResult",
    "KktResiduals",
    "TraceRow",
    "initial_state",
    "step",
    "solve",
    "h_norm_sq",
    "kkt_residuals",
    "objective_value",
]

_INIT_MODES = ("zero", "soft")
_DUAL_INIT_MODES = ("ones", "zero")


@dataclass(frozen=True)
class SolverConfig:
    """Tuning parameters for :func:`solve`. Immutable after construction.

    Parameters
    ----------
    lam : float
        Elementwise l1 penalty weight (sparsity). Applies to every entry,
        diagonal included, unless ``penalize_diagonal`` is False.
    tau : float
        Nuclear-norm penalty weight (low rank).
    mu : float
        Augmented-Lagrangian penalty parameter. It changes the iteration
        path, not the final estimate.
    tol : float
        Stopping threshold: iteration ends once
        ``max(||gamma_step||_F, ||sigma_step||_F) <= tol``.
    max_iter : int
        Iteration cap. Exhausting it yields ``converged=False``, not an error.
    init : str or ndarray
        Initial sigma iterate: ``"zero"``, ``"soft"`` (the soft-threshold
        warm start), or an explicit matrix.
    dual_init : str or ndarray
        Initial dual: ``"ones"`` (every entry 1), ``"zero"``, or an explicit
        matrix. The zero mode exists because convergence holds from any start.
    penalize_diagonal : bool
        If False, the l1 penalty and the shrinkage skip the diagonal
        (comparison variant; the default penalizes the full matrix).
    track_h_distance : bool
        Record the weighted step norm
        ``sqrt((1/mu)*||d_dual||_F^2 + mu*||d_sigma||_F^2)`` each iteration.
    early_exit_on_psd_warm_start : bool
        With ``init="soft"`` only: if the warm start is already PSD it is the
        exact minimizer, so return it without iterating. Off by default.
    """

    lam: float
    tau: float
    mu: float = 1.0
    tol: float = 5e-4
    max_iter: int = 1000
    init: str | np.ndarray = "zero"
    dual_init: str | np.ndarray = "ones"
    penalize_diagonal: bool = True
    track_h_distance: bool = False
    early_exit_on_psd_warm_start: bool = False

    def __post_init__(self) -> None:
        if self.lam < 0 or self.tau < 0:
            raise ValueError("penalty weights lam and tau must be non-negative")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if isinstance(self.init, str) and self.init not in _INIT_MODES:
            raise ValueError(f"init must be one of {_INIT_MODES} or an explicit matrix")
        if isinstance(self.dual_init, str) and self.dual_init not in _DUAL_INIT_MODES:
            raise ValueError(
                f"dual_init must be one of {_DUAL_INIT_MODES} or an explicit matrix"
            )


@dataclass
class AdmmState:
    """One point of the ADMM trajectory.

    ``gamma`` is ``None`` before the first step: the gamma update runs first
    and needs only ``sigma`` and ``dual``, so no initial gamma exists.
    Consequently ``residual_gamma`` is infinite after the first step and the
    stopping rule can fire no earlier than iteration 2.
    """

    sigma: np.ndarray
    dual: np.ndarray
    gamma: np.ndarray | None = None
    iteration: int = 0
    residual_gamma: float = math.inf
    residual_sigma: float = math.inf
    primal_gap: float = math.inf
    h_distance: float | None = None


class KktResiduals(NamedTuple):
    gamma_stationarity: float
    sigma_stationarity: float
    consensus: float


class TraceRow(NamedTuple):
    iteration: int
    residual_gamma: float
    residual_sigma: float
    primal_gap: float
    objective: float
    h_distance: float | None


@dataclass
class SolveResult:
    """Solver output.

    ``estimate`` is the final gamma iterate: PSD by construction, reported as
    the covariance estimate. ``sigma`` is the final shrinkage iterate whose
    exact zeros define the recovered support; at convergence the two differ
    by at most ``primal_gap`` in Frobenius norm.
    """

    estimate: np.ndarray
    sigma: np.ndarray
    dual: np.ndarray
    iterations: int
    converged: bool
    final_residuals: tuple[float, float]
    primal_gap: float
    kkt: KktResiduals
    objective: float
    trace: list[TraceRow] | None = None


def h_norm_sq(v_dual, v_sigma, mu: float) -> float:
    """Squared weighted norm ``(1/mu)*||v_dual||_F^2 + mu*||v_sigma||_F^2``."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    vd = np.asarray(v_dual, dtype=np.float64)
    vs = np.asarray(v_sigma, dtype=np.float64)
    return float(np.sum(vd * vd) / mu + mu * np.sum(vs * vs))


def _l1(m: np.ndarray, penalize_diagonal: bool) -> float:
    total = float(np.abs(m).sum())
    if not penalize_diagonal:
        total -= float(np.abs(np.diag(m)).sum())
    return total


def objective_value(
    estimate, sample_cov, lam: float, tau: float, penalize_diagonal: bool = True
) -> float:
    """Program objective ``0.5*||est - cov||_F^2 + lam*l1(est) + tau*nuclear(est)``."""
    est = symmetrize(estimate, "estimate")
    cov = symmetrize(sample_cov, "sample_cov")
    diff = est - cov
    quad = 0.5 * float(np.sum(diff * diff))
    nuclear = float(np.abs(np.linalg.eigvalsh(est)).sum())
    return quad + lam * _l1(est, penalize_diagonal) + tau * nuclear


def initial_state(sample_cov, config: SolverConfig) -> AdmmState:
    """Initial (sigma, dual) pair for the configured modes; gamma stays unset."""
    cov = symmetrize(sample_cov, "sample_cov")
    p = cov.shape[0]
    if isinstance(config.init, str):
        if config.init == "zero":
            sigma0 = np.zeros((p, p))
        else:
            sigma0 = soft_threshold_estimator(cov, config.lam, config.tau)
    else:
        sigma0 = symmetrize(config.init, "init")
        if sigma0.shape != cov.shape:
            raise ValueError(
                f"init matrix shape {sigma0.shape} does not match sample_cov {cov.shape}"
            )
    if isinstance(config.dual_init, str):
        dual0 = np.ones((p, p)) if config.dual_init == "ones" else np.zeros((p, p))
    else:
        dual0 = symmetrize(config.dual_init, "dual_init")
        if dual0.shape != cov.shape:
            raise ValueError(
                f"dual_init matrix shape {dual0.shape} does not match sample_cov {cov.shape}"
            )
    return AdmmState(sigma=sigma0, dual=dual0)


def step(state: AdmmState, sample_cov, config: SolverConfig) -> AdmmState:
    """Advance one iteration: gamma update, sigma update, then dual update."""
    mu = config.mu
    gamma_next = gamma_step(state.sigma, state.dual, mu, config.tau)
    sigma_next = sigma_step(
        sample_cov,
        gamma_next,
        state.dual,
        mu,
        config.lam,
        penalize_diagonal=config.penalize_diagonal,
    )
    dual_next = state.dual - (gamma_next - sigma_next) / mu
    residual_gamma = (
        float(np.linalg.norm(gamma_next - state.gamma))
        if state.gamma is not None
        else math.inf
    )
    residual_sigma = float(np.linalg.norm(sigma_next - state.sigma))
    h_distance = None
    if config.track_h_distance:
        h_distance = math.sqrt(
            h_norm_sq(dual_next - state.dual, sigma_next - state.sigma, mu)
        )
    return AdmmState(
        sigma=sigma_next,
        dual=dual_next,
        gamma=gamma_next,
        iteration=state.iteration + 1,
        residual_gamma=residual_gamma,
        residual_sigma=residual_sigma,
        primal_gap=float(np.linalg.norm(gamma_next - sigma_next)),
        h_distance=h_distance,
    )


def kkt_residuals(
    estimate,
    dual,
    gamma,
    sample_cov,
    lam: float,
    tau: float,
    penalize_diagonal: bool = True,
    range_tol: float = 1e-8,
) -> KktResiduals:
    """Stationarity and consensus violations at a candidate primal/dual triple.

    ``consensus`` is ``||estimate - gamma||_F``. ``sigma_stationarity`` is the
    worst-entry violation of the l1 subgradient condition on
    ``(sample_cov - estimate - dual) / lam``: nonzero entries must see exactly
    their sign, zero entries anything in [-1, 1] (when ``lam == 0`` the
    sup-norm of the raw gradient is reported instead).
    ``gamma_stationarity`` checks spectrally that the dual acts as ``tau * I``
    on the range of ``gamma`` and has eigenvalues at most ``tau`` on its null
    space (eigenvalues of ``gamma`` within ``range_tol`` of the largest,
    relatively, count as range).
    """
    est = symmetrize(estimate, "estimate")
    dual = symmetrize(dual, "dual")
    gam = symmetrize(gamma, "gamma")
    cov = symmetrize(sample_cov, "sample_cov")
    for other, names in ((dual, "estimate/dual"), (gam, "estimate/gamma"), (cov, "estimate/sample_cov")):
        if est.shape != other.shape:
            raise ValueError(f"dimension mismatch between {names}")

    consensus = float(np.linalg.norm(est - gam))

    grad = cov - est - dual
    diag_mask = np.eye(est.shape[0], dtype=bool)
    if lam == 0:
        sigma_stat = float(np.abs(grad).max()) if grad.size else 0.0
    else:
        g = grad / lam
        sigma_stat = 0.0
        active = np.ones_like(diag_mask)
        if not penalize_diagonal:
            # diagonal carries no l1 term, so plain stationarity must hold there
            sigma_stat = float(np.abs(grad[diag_mask]).max())
            active = ~diag_mask
        nonzero = (est != 0.0) & active
        zero = (est == 0.0) & active
        if nonzero.any():
            sigma_stat = max(
                sigma_stat, float(np.abs(g[nonzero] - np.sign(est[nonzero])).max())
            )
        if zero.any():
            sigma_stat = max(sigma_stat, max(float(np.abs(g[zero]).max()) - 1.0, 0.0))

    w, u = eigh_descending(gam)
    wmax = max(float(w[0]), 0.0) if w.size else 0.0
    range_mask = w > range_tol * wmax if wmax > 0 else np.zeros_like(w, dtype=bool)
    gamma_stat = 0.0
    if range_mask.any():
        ur = u[:, range_mask]
        gamma_stat = float(np.abs(dual @ ur - tau * ur).max())
    if (~range_mask).any():
        un = u[:, ~range_mask]
        null_eigs = np.linalg.eigvalsh(symmetrize(un.T @ dual @ un))
        gamma_stat = max(gamma_stat, max(float(null_eigs[-1]) - tau, 0.0))
    return KktResiduals(gamma_stat, sigma_stat, consensus)


def _finite(state: AdmmState) -> bool:
    return bool(
        np.isfinite(state.sigma).all()
        and np.isfinite(state.gamma).all()
        and np.isfinite(state.dual).all()
    )


def solve(sample_cov, config: SolverConfig, record_trace: bool = False) -> SolveResult:
    """Run the ADMM iteration until the residual rule fires or ``max_iter``.

    Parameters
    ----------
    sample_cov : array-like, shape (p, p)
        Symmetric sample covariance matrix (symmetrized on entry).
    config : SolverConfig
        Penalties, penalty parameter, stopping rule and initialization.
    record_trace : bool
        Collect one :class:`TraceRow` per iteration. The trace objective uses
        the trace of the PSD gamma iterate as its nuclear norm.

    Returns
    -------
    SolveResult
        ``estimate`` is the final PSD gamma iterate; ``sigma`` the final
        shrinkage iterate (exact zeros). ``converged`` is True iff
        ``max(||dGamma||_F, ||dSigma||_F) <= tol`` fired within ``max_iter``.

    Raises
    ------
    FloatingPointError
        If an iterate develops non-finite entries (message names the iteration).
    """
    cov = symmetrize(sample_cov, "sample_cov")
    state = initial_state(cov, config)

    if (
        config.early_exit_on_psd_warm_start
        and isinstance(config.init, str)
        and config.init == "soft"
    ):
        warm = state.sigma
        eigs = np.linalg.eigvalsh(warm)
        if float(eigs[0]) >= -1e-10 * float(np.linalg.norm(warm)):
            # PSD warm start is the exact minimizer; tau*I is a valid dual.
            estimate = psd_project(warm)
            dual_hat = config.tau * np.eye(cov.shape[0])
            kkt = kkt_residuals(
                warm, dual_hat, estimate, cov, config.lam, config.tau,
                penalize_diagonal=config.penalize_diagonal,
            )
            return SolveResult(
                estimate=estimate,
                sigma=warm,
                dual=dual_hat,
                iterations=0,
                converged=True,
                final_residuals=(0.0, 0.0),
                primal_gap=float(np.linalg.norm(estimate - warm)),
                kkt=kkt,
                objective=objective_value(
                    estimate, cov, config.lam, config.tau, config.penalize_diagonal
                ),
                trace=[] if record_trace else None,
            )

    trace: list[TraceRow] | None = [] if record_trace else None
    converged = False
    for _ in range(config.max_iter):
        state = step(state, cov, config)
        if not _finite(state):
            raise FloatingPointError(
                f"non-finite ADMM iterate at iteration {state.iteration}"
            )
        if trace is not None:
            diff = state.gamma - cov
            obj = (
                0.5 * float(np.sum(diff * diff))
                + config.lam * _l1(state.gamma, config.penalize_diagonal)
                + config.tau * float(np.trace(state.gamma))
            )
            trace.append(
                TraceRow(
                    state.iteration,
                    state.residual_gamma,
                    state.residual_sigma,
                    state.primal_gap,
                    obj,
                    state.h_distance,
                )
            )
        if max(state.residual_gamma, state.residual_sigma) <= config.tol:
            converged = True
            break

    estimate = state.gamma
    kkt = kkt_residuals(
        state.sigma,
        state.dual,
        estimate,
        cov,
        config.lam,
        config.tau,
        penalize_diagonal=config.penalize_diagonal,
    )
    return SolveResult(
        estimate=estimate,
        sigma=state.sigma,
        dual=state.dual,
        iterations=state.iteration,
        converged=converged,
        final_residuals=(state.residual_gamma, state.residual_sigma),
        primal_gap=state.primal_gap,
        kkt=kkt,
        objective=objective_value(
            estimate, cov, config.lam, config.tau, config.penalize_diagonal
        ),
        trace=trace,
    )
