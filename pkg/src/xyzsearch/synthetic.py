"""Synthetic data with planted interactions, for tests, demos and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def rademacher(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=(n, p))


def planted_binary(n: int, p: int, strength: float, rng: np.random.Generator, pair=(0, 1)):
    """Rademacher X and a sign response whose interaction with ``pair`` has the given strength.

    ``y = X_j * X_k`` with exactly ``round((1 - strength) * n)`` rows flipped, so the
    planted strength is ``1 - flips / n``.
    """
    X = rademacher(n, p, rng)
    j, k = pair
    y = (X[:, j] * X[:, k]).astype(np.int8)
    flips = int(round((1.0 - strength) * n))
    if flips:
        y[rng.choice(n, size=flips, replace=False)] *= -1
    return X, y


def noisy_interaction(n: int, p: int, sigma: float, rng: np.random.Generator, pair=(0, 1)):
    """Rademacher X and ``y = X_j X_k + N(0, sigma^2)``."""
    X = rademacher(n, p, rng)
    j, k = pair
    y = X[:, j] * X[:, k] + sigma * rng.standard_normal(n)
    return X, y


def uniform_interaction(n: int, p: int, rng: np.random.Generator, pair=(0, 1)):
    """``X ~ Uniform(-1, 1)`` and the noiseless response ``y = X_j X_k``."""
    X = rng.uniform(-1.0, 1.0, size=(n, p))
    j, k = pair
    return X, X[:, j] * X[:, k]


@dataclass
class RegressionProblem:
    X: np.ndarray
    y: np.ndarray
    beta: dict
    theta: dict


def interaction_regression(
    n: int,
    p: int,
    rng: np.random.Generator,
    setting: int = 2,
    n_main: int = 20,
    n_pairs: int = 10,
    low: float = 2.0,
    high: float = 6.0,
    noise: float = 1.0,
) -> RegressionProblem:
    """Gaussian design with main effects and pairwise interactions.

    ``setting=1`` draws interactions among the main-effect variables
    (hierarchical); ``setting=2`` draws them only among variables without a main
    effect (anti-hierarchical). Effect magnitudes are uniform on ``[low, high]``
    with random signs.
    """
    X = rng.standard_normal((n, p))
    mains = rng.choice(p, size=n_main, replace=False)
    if setting == 1:
        pool = np.sort(mains)
    elif setting == 2:
        pool = np.setdiff1d(np.arange(p), mains)
    else:
        raise ValueError("setting must be 1 or 2")
    cand = [(int(a), int(b)) for ia, a in enumerate(pool) for b in pool[ia + 1:]]
    chosen = rng.choice(len(cand), size=n_pairs, replace=False)
    pairs = [cand[c] for c in chosen]

    def effect():
        return float(rng.uniform(low, high) * rng.choice([-1.0, 1.0]))

    beta = {int(j): effect() for j in mains}
    theta = {pr: effect() for pr in pairs}
    y = noise * rng.standard_normal(n)
    for j, b in beta.items():
        y += b * X[:, j]
    for (j, k), t in theta.items():
        y += t * X[:, j] * X[:, k]
    return RegressionProblem(X, y, beta, theta)
