"""Sparse and low-rank positive-semidefinite covariance estimation via ADMM."""

from .datagen import (
    BandedModelSpec,
    BlockModelSpec,
    SampleSet,
    gen_banded_cov,
    gen_block_cov,
    sample_covariance,
    sample_gaussian,
)
from .estimator import SparseLowRankCovariance
from .experiments import ExperimentSpec, run_experiment, run_rate_study
from .linalg import (
    approximate_rank,
    eigh_descending,
    norms,
    psd_project,
    sqrt_psd,
    symmetrize,
)
from .metrics import confusion_rates, fpr_tpr, frobenius_error, rate_fit, sparsity
from .operators import gamma_step, shrink, sigma_step, soft_threshold_estimator
from .solver import (
    AdmmState,
    SolveResult,
    SolverConfig,
    h_norm_sq,
    kkt_residuals,
    objective_value,
    solve,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmState",
    "BandedModelSpec",
    "BlockModelSpec",
    "ExperimentSpec",
    "SampleSet",
    "SolveResult",
    "SolverConfig",
    "SparseLowRankCovariance",
    "approximate_rank",
    "confusion_rates",
    "eigh_descending",
    "fpr_tpr",
    "frobenius_error",
    "gamma_step",
    "gen_banded_cov",
    "gen_block_cov",
    "h_norm_sq",
    "kkt_residuals",
    "norms",
    "objective_value",
    "psd_project",
    "rate_fit",
    "run_experiment",
    "run_rate_study",
    "sample_covariance",
    "sample_gaussian",
    "shrink",
    "sigma_step",
    "soft_threshold_estimator",
    "solve",
    "sparsity",
    "sqrt_psd",
    "step",
    "symmetrize",
]
