"""Brute-force references.

Nothing here touches the bit-packed fast path: strengths are plain loops over
rows and the reference Lasso fits an explicitly built interaction design with
scikit-learn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import Lasso

from .bitmatrix import PackedMatrix

ORACLE_MAX_P = 20_000


class OracleGuardExceeded(RuntimeError):
    pass


def _dense(X) -> np.ndarray:
    if isinstance(X, PackedMatrix):
        return X.to_signs()
    return np.asarray(X)


def scalar_strength(X, y, j: int, k: int, mode: str = "binary", transform: str | None = None) -> float:
    """Strength of one pair by an explicit loop over rows."""
    X = _dense(X)
    n = X.shape[0]
    if mode == "binary":
        hits = 0
        for i in range(n):
            if y[i] == X[i, j] * X[i, k]:
                hits += 1
        return hits / n
    total = 0.0
    for i in range(n):
        total += abs(float(y[i]))
    if mode == "continuous-y":
        agree = 0.0
        for i in range(n):
            s = 1 if y[i] > 0 else (-1 if y[i] < 0 else 0)
            if s == X[i, j] * X[i, k]:
                agree += abs(float(y[i]))
        return agree / total
    acc = 0.0
    for i in range(n):
        a, b = float(X[i, j]), float(X[i, k])
        if transform == "sign":
            a, b = float(np.sign(a)), float(np.sign(b))
        acc += float(y[i]) * a * b
    return 0.5 + acc / (2.0 * total)


@dataclass
class OracleResult:
    pairs: list  # (j, k, strength) for every j < k, ordered by (j, k)
    selected: list

    def strengths(self) -> np.ndarray:
        return np.array([s for _, _, s in self.pairs])

    def histogram(self, bins: int = 20):
        return np.histogram(self.strengths(), bins=bins, range=(0.0, 1.0))


def brute_force_search(X, y, gamma: float | None = None, top_k: int | None = None, *,
                       mode: str = "binary", transform: str | None = None,
                       force: bool = False) -> OracleResult:
    """Exact strengths of all pairs, selected by threshold or top-k."""
    X = _dense(X)
    p = X.shape[1]
    if p > ORACLE_MAX_P and not force:
        raise OracleGuardExceeded(f"p={p} exceeds the oracle limit {ORACLE_MAX_P}; pass force=True")
    y = np.asarray(y)
    pairs = []
    for j in range(p):
        for k in range(j + 1, p):
            pairs.append((j, k, scalar_strength(X, y, j, k, mode, transform)))
    if gamma is not None:
        selected = [t for t in pairs if t[2] >= gamma]
    elif top_k is not None:
        selected = sorted(pairs, key=lambda t: (-t[2], t[0], t[1]))[:top_k]
    else:
        selected = list(pairs)
    return OracleResult(pairs, selected)


@dataclass
class NaiveResult:
    j: int
    k: int
    strength: float
    evaluations: int
    best_trace: np.ndarray  # best strength after each evaluation


def naive_sampling_search(X, y, budget: int, rng: np.random.Generator) -> NaiveResult:
    """Evaluate ``budget`` uniformly random pairs ``j != k`` and keep the strongest."""
    if budget < 1:
        raise ValueError("budget must be positive")
    X = _dense(X).astype(float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    js = rng.integers(0, p, size=budget)
    ks = rng.integers(0, p - 1, size=budget)
    ks = ks + (ks >= js)
    # weighted strength; equals the plain match fraction for a sign response
    strengths = np.empty(budget)
    step = max(1, (1 << 22) // n)
    for s in range(0, budget, step):
        a, b = js[s:s + step], ks[s:s + step]
        strengths[s:s + step] = 0.5 + (y @ (X[:, a] * X[:, b])) / (2.0 * np.abs(y).sum())
    t = int(np.argmax(strengths))
    j, k = sorted((int(js[t]), int(ks[t])))
    return NaiveResult(j, k, float(strengths[t]), budget, np.maximum.accumulate(strengths))


def naive_miss_probability(p: int, L: int) -> float:
    """Chance that ``p * L`` uniform pair draws all miss one fixed pair."""
    return math.exp(p * L * math.log1p(-2.0 / (p * (p - 1))))


# ------------------------------------------------------------ explicit-design Lasso

def explicit_design(X, pairs=None, include_diagonal: bool | None = None):
    """Centred ``[X, W~]`` with its column labels.

    ``pairs`` defaults to every ``j <= k`` (``j < k`` for +/-1 data, whose squares
    are constant).
    """
    X = _dense(X).astype(float)
    n, p = X.shape
    if pairs is None:
        if include_diagonal is None:
            include_diagonal = not np.all((X == 1) | (X == -1))
        off = 0 if include_diagonal else 1
        pairs = [(j, k) for j in range(p) for k in range(j + off, p)]
    Xc = X - X.mean(axis=0)
    if pairs:
        W = np.column_stack([X[:, j] * X[:, k] for j, k in pairs])
        W -= W.mean(axis=0)
    else:
        W = np.zeros((n, 0))
    return np.hstack([Xc, W]), [("main", j) for j in range(p)] + [("pair", pr) for pr in pairs]


@dataclass
class ExplicitFit:
    beta: dict
    theta: dict
    lam: float


def _split(coef, labels) -> tuple[dict, dict]:
    beta, theta = {}, {}
    for c, (kind, key) in zip(coef, labels):
        if c != 0.0:
            (beta if kind == "main" else theta)[key] = float(c)
    return beta, theta


def reference_lasso_path(X, y, lambdas, *, penalty_multiplier: float = 1.0, pairs=None,
                         tol: float = 1e-12, max_iter: int = 1_000_000) -> list[ExplicitFit]:
    """Interaction Lasso on the fully materialized design, one warm-started fit per lambda."""
    D, labels = explicit_design(X, pairs)
    scale = np.array([1.0 if kind == "main" else penalty_multiplier for kind, _ in labels])
    Ds = D / scale
    y = np.asarray(y, dtype=float)
    yc = y - y.mean()
    model = Lasso(alpha=1.0, fit_intercept=False, tol=tol, max_iter=max_iter, warm_start=True,
                  selection="cyclic")
    out = []
    for lam in lambdas:
        model.set_params(alpha=float(lam))
        model.fit(Ds, yc)
        beta, theta = _split(model.coef_ / scale, labels)
        out.append(ExplicitFit(beta, theta, float(lam)))
    return out


def two_stage_lasso(X, y, lambdas, stage1_lambda: float, *, tol: float = 1e-10):
    """Main-effects Lasso, then a Lasso on all main effects plus interactions among the selected ones."""
    X = _dense(X).astype(float)
    p = X.shape[1]
    y = np.asarray(y, dtype=float)
    stage1 = reference_lasso_path(X, y, [stage1_lambda], pairs=[], tol=tol)[0]
    chosen = sorted(stage1.beta)
    binary = bool(np.all((X == 1) | (X == -1)))
    off = 1 if binary else 0
    pairs = [(a, b) for ia, a in enumerate(chosen) for b in chosen[ia + off:]]
    return chosen, reference_lasso_path(X, y, lambdas, pairs=pairs, tol=tol)


def predict_explicit(fit, X_train, y_train, X_new) -> np.ndarray:
    """Prediction of an explicit or path fit, using training means for centring."""
    X_train = _dense(X_train).astype(float)
    X_new = np.asarray(X_new, dtype=float)
    out = np.full(X_new.shape[0], float(np.mean(y_train)))
    mu = X_train.mean(axis=0)
    for j, b in fit.beta.items():
        out += b * (X_new[:, j] - mu[j])
    for (j, k), t in fit.theta.items():
        out += t * (X_new[:, j] * X_new[:, k] - np.mean(X_train[:, j] * X_train[:, k]))
    return out
