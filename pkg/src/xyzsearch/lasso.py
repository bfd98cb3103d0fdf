"""Lasso over all main effects and pairwise interactions, fitted by an active-set path.

The interaction design ``W~`` (centred products ``X_j * X_k``, ``j <= k``) is never
materialized. Each path point solves the Lasso restricted to the current support
and then looks for KKT violators: main effects by an exact scan, interactions by
two xyz searches (on the residual and its negation) whose hits are re-checked
exactly.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bitmatrix import PackedMatrix, rescale_rows
from .search import SearchConfig, discovery_probability, xyz_search

logger = logging.getLogger(__name__)

EXACT_SCAN_MAX_P = 2000


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LassoPathConfig:
    lambdas: tuple | None = None
    n_lambda: int = 10
    lambda_ratio: float = 0.05
    xyz_L: int | None = None  # None: ceil(sqrt(p))
    eta: float = 0.99
    max_outer: int = 100
    tol: float = 1e-7
    max_cycles: int = 100_000
    penalty_multiplier: float = 1.0
    seed: int = 0
    certify: bool | None = None  # None: certify when p <= 100
    exact_kkt: bool = False

    def __post_init__(self):
        if self.lambdas is not None:
            lam = np.asarray(self.lambdas, dtype=float)
            if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
                raise ValueError("lambda grid must be positive and strictly decreasing")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if not 0.5 <= self.eta < 1:
            raise ValueError("eta must lie in [0.5, 1)")
        if self.penalty_multiplier <= 0:
            raise ValueError("penalty multiplier must be positive")


@dataclass
class SparseFit:
    beta: dict
    theta: dict
    lam: float
    objective: float
    kkt_residual_max: float
    certified: bool | None = None
    outer_iterations: int = 0
    objective_trace: list = field(default_factory=list)

    @property
    def n_nonzero(self) -> int:
        return len(self.beta) + len(self.theta)


def _is_binary(X: np.ndarray) -> bool:
    return bool(np.all((X == 1) | (X == -1)))


def interaction_column(X, j: int, k: int) -> np.ndarray:
    """``X_j * X_k`` minus its mean."""
    X = np.asarray(X, dtype=float)
    if j > k:
        raise ValueError("interaction columns are indexed with j <= k")
    w = X[:, j] * X[:, k]
    return w - w.mean()


class CenteredDesignView:
    """Centred main effects plus on-demand centred interaction columns of the raw data."""

    def __init__(self, X):
        if isinstance(X, PackedMatrix):
            X = X.to_signs()
        self.X = np.asarray(X, dtype=float)
        if self.X.ndim != 2 or self.X.size == 0:
            raise ValueError("X must be a non-empty (n, p) array")
        self.n, self.p = self.X.shape
        self.x_mean = self.X.mean(axis=0)
        self.Xc = self.X - self.x_mean
        self.binary = _is_binary(self.X)

    def main(self, j: int) -> np.ndarray:
        return self.Xc[:, j]

    def interaction(self, j: int, k: int) -> np.ndarray:
        return interaction_column(self.X, j, k)

    def columns(self, mains, pairs) -> np.ndarray:
        cols = [self.Xc[:, j] for j in mains] + [self.interaction(j, k) for j, k in pairs]
        if not cols:
            return np.zeros((self.n, 0))
        return np.column_stack(cols)

    def interaction_means(self, pairs) -> np.ndarray:
        return np.array([np.mean(self.X[:, j] * self.X[:, k]) for j, k in pairs])


def _soft(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def _objective(r, n, lam, b, n_main, mult) -> float:
    return float(r @ r / (2 * n) + lam * (np.abs(b[:n_main]).sum() + mult * np.abs(b[n_main:]).sum()))


def active_set_solve(
    design: CenteredDesignView,
    active_main,
    active_pairs,
    y,
    lam: float,
    tol: float = 1e-7,
    max_iter: int = 100_000,
    *,
    penalty_multiplier: float = 1.0,
    warm: SparseFit | None = None,
    trace: bool = False,
) -> SparseFit:
    """Cyclic coordinate descent restricted to the active main effects and pairs.

    ``y`` must already be centred. Stops when no coefficient moves by more than
    ``tol`` in a full cycle; raises :class:`SolverError` after ``max_iter`` cycles.
    """
    mains = list(active_main)
    pairs = [tuple(pr) for pr in active_pairs]
    n = design.n
    y = np.asarray(y, dtype=float)
    A = design.columns(mains, pairs)
    m = A.shape[1]
    n_main = len(mains)
    pen = np.full(m, lam)
    pen[n_main:] *= penalty_multiplier
    b = np.zeros(m)
    if warm is not None:
        for c, j in enumerate(mains):
            b[c] = warm.beta.get(j, 0.0)
        for c, pr in enumerate(pairs):
            b[n_main + c] = warm.theta.get(pr, 0.0)
    r = y - A @ b
    colsq = (A * A).sum(axis=0) / n
    objective_trace = [_objective(r, n, lam, b, n_main, penalty_multiplier)] if trace else []

    def cycle(coords) -> float:
        nonlocal r
        biggest = 0.0
        for c in coords:
            if colsq[c] == 0.0:
                b[c] = 0.0
                continue
            old = b[c]
            a = A[:, c]
            new = _soft(a @ r / n + colsq[c] * old, pen[c]) / colsq[c]
            if new != old:
                r -= (new - old) * a
                b[c] = new
                biggest = max(biggest, abs(new - old))
        return biggest

    cycles = 0
    while True:
        cycles += 1
        change = cycle(range(m))
        if trace:
            objective_trace.append(_objective(r, n, lam, b, n_main, penalty_multiplier))
        if change < tol:
            break
        # settle the current support before the next full sweep
        while cycles < max_iter:
            support = np.flatnonzero(b)
            cycles += 1
            inner = cycle(support)
            if trace:
                objective_trace.append(_objective(r, n, lam, b, n_main, penalty_multiplier))
            if inner < tol:
                break
        if cycles >= max_iter:
            raise SolverError(
                f"coordinate descent did not converge in {max_iter} cycles "
                f"(lambda={lam:.6g}, active={m}, last change={change:.3g})"
            )

    beta = {j: float(b[c]) for c, j in enumerate(mains) if b[c] != 0.0}
    theta = {pr: float(b[n_main + c]) for c, pr in enumerate(pairs) if b[n_main + c] != 0.0}
    fit = SparseFit(beta, theta, lam, _objective(r, n, lam, b, n_main, penalty_multiplier), float("nan"))
    fit.objective_trace = objective_trace
    fit.residual = r
    return fit


def _xyz_M_for(gamma: float, L: int, eta: float) -> int:
    """Largest M whose L repetitions still retain a strength-gamma pair with probability eta."""
    best = 0
    for M in range(1, 65):
        if discovery_probability(gamma, M, L) >= eta:
            best = M
        else:
            break
    return best


def exact_interaction_scores(X, residual) -> np.ndarray:
    """``(p, p)`` matrix of ``r^T (X_j * X_k) / n`` for every pair."""
    X = np.asarray(X, dtype=float)
    r = np.asarray(residual, dtype=float)
    return (X * r[:, None]).T @ X / X.shape[0]


def kkt_check_interactions(
    residual,
    X,
    lam: float,
    *,
    L: int | None = None,
    eta: float = 0.99,
    seed: int = 0,
    penalty_multiplier: float = 1.0,
    info: dict | None = None,
) -> set[tuple[int, int]]:
    """Off-diagonal pairs with ``|r^T (X_j * X_k)| / n > lam`` found by xyz.

    The residual and its negation are each searched with the strength threshold
    ``1/2 + n * lam / (2 ||r~||_1)`` (``r~`` the row-rescaled residual), which is
    exactly the condition above. Every hit is re-verified, so the result has no
    false positives; a violator is missed with probability at most ``1 - eta``.
    """
    if isinstance(X, PackedMatrix):
        X = X.to_signs()
    X = np.asarray(X, dtype=float)
    r = np.asarray(residual, dtype=float)
    n, p = X.shape
    thr = lam * penalty_multiplier
    if L is None:
        L = math.ceil(math.sqrt(p))
    if not np.abs(r).sum() > 0 or p < 2:
        return set()
    binary = _is_binary(X)
    if binary:
        Xs, rs, mode, transform = X, r, "continuous-y", None
    else:
        Xs, rs = rescale_rows(X, r)
        mode, transform = "continuous-xy", "unbiased"
    gamma = 0.5 + n * thr / (2.0 * np.abs(rs).sum())
    if gamma >= 1.0:
        return set()
    if gamma <= 0.5:
        if p > EXACT_SCAN_MAX_P:
            raise ValueError("non-positive threshold: every pair would be a candidate")
        warnings.warn("strength threshold at or below 1/2; using an exact scan", stacklevel=2)
        S = exact_interaction_scores(X, r)
        jj, kk = np.nonzero(np.triu(np.abs(S) > thr, k=1))
        return {(int(a), int(b)) for a, b in zip(jj, kk)}

    M = _xyz_M_for(gamma, L, eta)
    if M == 0:
        M = 1
        while discovery_probability(gamma, 1, L) < eta:
            L += 1
    cfg = SearchConfig(
        M=M, L=L, gamma=float(gamma), mode=mode, transform=transform,
        search_negatives=True, seed=seed, max_candidates_per_rep=2 * p * p,
    )
    report = xyz_search(Xs, rs, cfg)
    V = set()
    for h in report.hits:
        score = float(r @ (X[:, h.j] * X[:, h.k])) / n
        if abs(score) > thr:
            V.add((h.j, h.k))
    if info is not None:
        info.update(M=M, L=L, gamma=float(gamma), candidates=report.candidates_checked,
                    hits=len(report.hits), verified=len(V))
    return V


def auto_lambda_grid(X, y, T: int = 10, eps: float = 0.05, *, penalty_multiplier: float = 1.0,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Log-spaced grid from the smallest lambda with an empty fit down to ``eps`` times it.

    The largest interaction score is computed exactly for ``p <= 2000`` and
    estimated from ``10 p`` sampled pairs (plus the diagonal) otherwise.
    """
    if T < 2:
        raise ValueError("grid needs at least two points")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    design = CenteredDesignView(X)
    y = np.asarray(y, dtype=float)
    yc = y - y.mean()
    if not np.any(np.abs(yc) > 1e-12 * max(1.0, np.abs(y).max())):
        raise ValueError("response has zero variance")
    n, p = design.n, design.p
    top = np.abs(design.Xc.T @ yc).max() / n
    offset = 1 if design.binary else 0
    if p <= EXACT_SCAN_MAX_P:
        S = np.abs(exact_interaction_scores(design.X, yc))
        inter = S[np.triu_indices(p, k=offset)].max() if p > offset else 0.0
    else:
        rng = rng or np.random.default_rng(0)
        js = rng.integers(0, p, size=10 * p)
        ks = rng.integers(0, p, size=10 * p)
        keep = js != ks
        js, ks = js[keep], ks[keep]
        inter = np.abs(yc @ (design.X[:, js] * design.X[:, ks])).max() / n
        if not design.binary:
            inter = max(inter, np.abs(yc @ design.X**2).max() / n)
    lam1 = max(top, inter / penalty_multiplier)
    return np.geomspace(lam1, eps * lam1, T)


@dataclass
class LassoPath:
    fits: list
    x_mean: np.ndarray
    y_mean: float
    design: CenteredDesignView

    def __len__(self):
        return len(self.fits)

    def __getitem__(self, i):
        return self.fits[i]

    def __iter__(self):
        return iter(self.fits)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([f.lam for f in self.fits])

    def predict(self, X_new, index: int) -> np.ndarray:
        fit = self.fits[index]
        X_new = np.asarray(X_new, dtype=float)
        out = np.full(X_new.shape[0], self.y_mean)
        for j, b in fit.beta.items():
            out += b * (X_new[:, j] - self.x_mean[j])
        if fit.theta:
            pairs = list(fit.theta)
            means = self.design.interaction_means(pairs)
            for (j, k), mu, t in zip(pairs, means, fit.theta.values()):
                out += t * (X_new[:, j] * X_new[:, k] - mu)
        return out


def lasso_path(X, y, config: LassoPathConfig = LassoPathConfig()) -> LassoPath:
    """Fit the interaction Lasso along a decreasing lambda grid with warm starts."""
    design = CenteredDesignView(X)
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise ValueError("y length must equal the number of rows of X")
    y_mean = float(y.mean())
    yc = y - y_mean
    n, p = design.n, design.p
    mult = config.penalty_multiplier
    if config.lambdas is None:
        lambdas = auto_lambda_grid(design.X, y, config.n_lambda, config.lambda_ratio,
                                   penalty_multiplier=mult)
    else:
        lambdas = np.asarray(config.lambdas, dtype=float)
    L = config.xyz_L if config.xyz_L is not None else math.ceil(math.sqrt(p))
    certify = config.certify if config.certify is not None else p <= 100
    diag_ok = not design.binary

    fits: list[SparseFit] = []
    prev: SparseFit | None = None
    for li, lam in enumerate(lambdas):
        mains = sorted(prev.beta) if prev else []
        pairs = sorted(prev.theta) if prev else []
        trace: list = []
        for outer in range(config.max_outer):
            fit = active_set_solve(
                design, mains, pairs, yc, lam, config.tol, config.max_cycles,
                penalty_multiplier=mult, warm=prev if outer == 0 else fit, trace=False,
            )
            trace.append(fit.objective)
            r = fit.residual
            main_scores = np.abs(design.Xc.T @ r) / n
            active_main = set(mains)
            U = [j for j in np.flatnonzero(main_scores > lam) if j not in active_main]
            active_pairs = set(pairs)
            if config.exact_kkt:
                S = np.abs(exact_interaction_scores(design.X, r))
                jj, kk = np.nonzero(np.triu(S > lam * mult, k=0 if diag_ok else 1))
                V = {(int(a), int(b)) for a, b in zip(jj, kk)}
            else:
                seed = int(np.random.SeedSequence([config.seed, li, outer]).generate_state(1)[0])
                V = kkt_check_interactions(r, design.X, lam, L=L, eta=config.eta, seed=seed,
                                           penalty_multiplier=mult)
                if diag_ok:
                    diag = np.abs(r @ design.X**2) / n
                    V |= {(int(j), int(j)) for j in np.flatnonzero(diag > lam * mult)}
            V = {pr for pr in V if pr not in active_pairs}
            if not U and not V:
                break
            mains = sorted(active_main | {int(j) for j in U})
            pairs = sorted(active_pairs | V)
        else:
            raise SolverError(f"active set did not stabilize in {config.max_outer} iterations at lambda index {li}")

        fit.outer_iterations = outer + 1
        fit.objective_trace = trace
        inactive_main = np.ones(p, dtype=bool)
        inactive_main[list(fit.beta)] = False
        kkt = float(main_scores[inactive_main].max()) if inactive_main.any() else 0.0
        if certify:
            S = np.abs(exact_interaction_scores(design.X, r)) / mult
            mask = np.triu(np.ones((p, p), dtype=bool), k=0 if diag_ok else 1)
            for j, k in fit.theta:
                mask[j, k] = False
            inter = float(S[mask].max()) if mask.any() else 0.0
            kkt = max(kkt, inter)
            fit.certified = bool(kkt <= lam * (1 + 1e-6))
        fit.kkt_residual_max = kkt
        del fit.residual
        fits.append(fit)
        prev = fit
    return LassoPath(fits, design.x_mean, y_mean, design)


def normalized_test_error(y_test, prediction) -> float:
    y_test = np.asarray(y_test, dtype=float)
    return float(np.sum((y_test - prediction) ** 2) / np.sum(y_test**2))
