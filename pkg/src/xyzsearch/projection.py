"""One-dimensional projections: subsampled row keys and the dense Gaussian baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .bitmatrix import PackedMatrix, WeightedSampler

MAX_M = 64


@dataclass(frozen=True)
class SubsampleDraw:
    """Row indices ``i_1..i_M`` drawn with replacement (0-based)."""

    indices: np.ndarray

    def __post_init__(self):
        if self.indices.ndim != 1 or not 1 <= self.indices.size <= MAX_M:
            raise ValueError(f"a draw needs between 1 and {MAX_M} indices")

    @property
    def M(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class DenseProjection:
    x: np.ndarray
    z: np.ndarray
    tau: float = 0.0


def draw_subsample(n: int, M: int, rng: np.random.Generator, weights: WeightedSampler | None = None) -> SubsampleDraw:
    if not 1 <= M <= MAX_M:
        raise ValueError(f"M must lie in [1, {MAX_M}], got {M}")
    if n < 1:
        raise ValueError("n must be positive")
    if weights is None:
        idx = rng.integers(0, n, size=M)
    else:
        if weights.n != n:
            raise ValueError("sampler size does not match n")
        idx = weights.sample(M, rng)
    return SubsampleDraw(np.asarray(idx, dtype=np.int64))


def project_keys(A: PackedMatrix, draw: SubsampleDraw) -> np.ndarray:
    """Per-column M-bit keys: bit m of key j is set iff ``A[i_m, j] == +1``.

    Two columns get equal keys exactly when they agree on every subsampled row,
    which is the zero-distance event of a projection with continuous weights.
    """
    if draw.indices.max() >= A.n_rows:
        raise IndexError("draw index beyond the number of rows")
    bits = A.row_bits(draw.indices).astype(np.uint64)
    shifts = np.arange(draw.M, dtype=np.uint64)
    return np.bitwise_or.reduce(bits << shifts, axis=1)


def project_dense(X: PackedMatrix, Z: PackedMatrix, rng: np.random.Generator, n_draws: int | None = None) -> DenseProjection:
    """Project X and Z with ``R ~ N(0, I_n)``.

    With ``n_draws`` set, ``x`` and ``z`` are ``(n_draws, p)`` arrays, one row per
    independent projection vector.
    """
    if X.shape != Z.shape:
        raise ValueError("X and Z must have the same shape")
    Xs = X.to_signs().astype(float)
    Zs = Z.to_signs().astype(float)
    if n_draws is None:
        R = rng.standard_normal(X.n_rows)
    else:
        R = rng.standard_normal((n_draws, X.n_rows))
    return DenseProjection(R @ Xs, R @ Zs)


def gauss_tau_for_budget(p: int, n: int) -> float:
    """Threshold tau with ``P(|W| <= tau) = 1/p`` for ``W ~ N(0, n/2)``.

    This is in the half-scale convention (entries of +/-1/2). For +/-1 data
    projected by :func:`project_dense`, the matching threshold is ``2 * tau``.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    return float(np.sqrt(n / 2.0) * norm.ppf(0.5 + 0.5 / p))


def minimal_budget_M(p: int) -> int:
    """Subsample size ``ceil(log(1/p) / log(0.5))`` giving ``E|E_1| = p`` at strength 1/2."""
    return int(np.ceil(np.log(1.0 / p) / np.log(0.5) - 1e-12))


def dense_discovery_probability(gamma, n: int, p: int):
    """Single-projection retention probability of a strength-gamma pair under the matched Gaussian budget."""
    gamma = np.asarray(gamma, dtype=float)
    tau = gauss_tau_for_budget(p, n)
    with np.errstate(divide="ignore"):
        scale = np.sqrt(n * (1.0 - gamma))
        prob = 2.0 * norm.cdf(tau / scale) - 1.0
    return np.where(gamma >= 1.0, 1.0, prob)


def minimal_discovery_probability(gamma, p: int):
    return np.asarray(gamma, dtype=float) ** minimal_budget_M(p)
