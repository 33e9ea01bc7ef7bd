"""Synthetic population covariance models and seeded Gaussian sampling.

Randomness policy: every generator takes an explicit non-negative 64-bit seed
and draws from ``numpy.random.Generator`` on the PCG64 bit generator via
``SeedSequence``; normal variates use the generator's ziggurat sampler.
Per-replication seeds come from ``SeedSequence(base_seed, spawn_key=(run,))``
so parallel replications are independent of scheduling order. Streams are
stable for a fixed numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import sqrt_psd, symmetrize

__all__ = [
    "BlockModelSpec",
    "BandedModelSpec",
    "SampleSet",
    "gen_block_cov",
    "gen_banded_cov",
    "sample_gaussian",
    "sample_covariance",
    "replication_seed_sequence",
]


@dataclass(frozen=True)
class BlockModelSpec:
    """Block-diagonal model: ``k`` rank-one blocks ``v v^T``, v ~ Uniform[-1, 1]."""

    p: int
    k: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.k > self.p:
            raise ValueError(f"k exceeds p: k={self.k}, p={self.p}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class BandedModelSpec:
    """Banded Toeplitz model ``max(1 - |i-j|/10, 0)``; bandwidth denominator fixed at 10."""

    p: int

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"p must be positive, got {self.p}")


@dataclass(frozen=True)
class SampleSet:
    """``n`` samples of dimension ``p``, one row per sample."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"samples must be a 2-d array, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError(f"need at least 2 samples, got {arr.shape[0]}")
        if not np.isfinite(arr).all():
            raise ValueError("samples contain non-finite entries")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


def _partition_sizes(p: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """k nonempty block sizes: one guaranteed slot each plus a uniform multinomial.

    Sizes concentrate near p/k (standard deviation about sqrt(p/k)), which
    keeps every rank-one block detectable at the sample sizes used in the
    replication studies.
    """
    if k == 1:
        return np.array([p])
    return 1 + rng.multinomial(p - k, np.full(k, 1.0 / k))


def gen_block_cov(
    spec: BlockModelSpec, v_factors: Sequence[np.ndarray] | None = None
) -> np.ndarray:
    """Block-diagonal PSD covariance of rank exactly ``spec.k``.

    Each of the ``spec.k`` nonempty diagonal blocks is the outer product of a
    factor with i.i.d. Uniform[-1, 1] entries. ``v_factors`` overrides the
    factors (and hence the block sizes) with explicit vectors, a
    deterministic test hook; their lengths must sum to ``spec.p``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    if v_factors is None:
        sizes = _partition_sizes(spec.p, spec.k, rng)
        factors = [rng.uniform(-1.0, 1.0, size=int(s)) for s in sizes]
    else:
        factors = [np.asarray(v, dtype=np.float64).ravel() for v in v_factors]
        if len(factors) != spec.k:
            raise ValueError(f"expected {spec.k} factor vectors, got {len(factors)}")
        if sum(f.size for f in factors) != spec.p:
            raise ValueError("factor lengths must sum to p")
    out = np.zeros((spec.p, spec.p))
    start = 0
    for f in factors:
        stop = start + f.size
        out[start:stop, start:stop] = np.outer(f, f)
        start = stop
    return symmetrize(out)


def gen_banded_cov(spec: BandedModelSpec) -> np.ndarray:
    """Deterministic banded covariance with entries ``max(1 - |i-j|/10, 0)``."""
    idx = np.arange(spec.p)
    dist = np.abs(idx[:, None] - idx[None, :])
    return symmetrize(np.maximum(1.0 - dist / 10.0, 0.0))


def sample_gaussian(cov, n: int, seed: int) -> SampleSet:
    """``n`` i.i.d. draws ``x = R z`` with ``R = sqrt_psd(cov)``, z standard normal."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got n={n}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    root = sqrt_psd(cov)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n, root.shape[0]))
    return SampleSet(z @ root)  # root is symmetric, so rows are R @ z_l


def sample_covariance(samples, center: bool = True) -> np.ndarray:
    """Outer-product average ``(1/(n-1)) * sum (x - mean)(x - mean)^T``.

    ``center=False`` skips the mean subtraction (same normalization), for
    data known to have exact zero mean.
    """
    data = samples.data if isinstance(samples, SampleSet) else np.asarray(samples, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"samples must be a 2-d array, got shape {data.shape}")
    n = data.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if center:
        data = data - data.mean(axis=0)
    return symmetrize(data.T @ data / (n - 1))


def replication_seed_sequence(base_seed: int, run_index: int) -> np.random.SeedSequence:
    """Splittable per-run seed; independent of how runs are scheduled."""
    if base_seed < 0:
        raise ValueError(f"base_seed must be non-negative, got {base_seed}")
    if run_index < 0:
        raise ValueError(f"run_index must be non-negative, got {run_index}")
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(run_index,))
