"""Benchmark suites producing plottable rows (lists of dicts)."""

from __future__ import annotations

import gc
import math
import time

import numpy as np

from . import projection
from .bitmatrix import PackedMatrix, build_z
from .oracle import naive_sampling_search
from .pairs import close_pairs
from .search import SearchConfig, choose_L, runtime_exponent, xyz_search
from .synthetic import planted_binary


def M_for_gamma0(p: int, gamma0: float) -> int:
    """Integer M closest to giving ``p ** (-1/M) == gamma0``."""
    return max(1, int(round(math.log(p) / -math.log(gamma0))))


def loglog_slope(x, y) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)


def scaling_suite(ps=(1000, 2000, 4000, 8000, 16000), gamma: float = 0.9, gamma0: float = 0.55,
                  n: int = 1000, repeats: int = 5, eta: float = 0.99, seed: int = 0):
    """Time full xyz runs on planted data as p grows.

    Each run uses ``M`` with ``p^(-1/M)`` near ``gamma0`` and the smallest L
    reaching discovery probability ``eta``, so the measured time tracks the
    predicted ``n p^(1 + log(gamma)/log(gamma0))``. Returns ``(rows, summary)``.
    """
    rows = []
    medians = []
    for p in ps:
        M = M_for_gamma0(p, gamma0)
        L = choose_L(M, gamma, eta)
        times = []
        for rep in range(repeats):
            rng = np.random.default_rng([seed, p, rep])
            X, y = planted_binary(n, p, gamma, rng)
            Xp = PackedMatrix.from_signs(X)
            cfg = SearchConfig(M=M, L=L, gamma=gamma, search_negatives=False, seed=seed + rep,
                               max_candidates_per_rep=p * p)
            if rep == 0:
                xyz_search(Xp, y, cfg)  # warm-up, untimed
            # as in timeit: no collector pauses inside the timed region
            gc_was_on = gc.isenabled()
            gc.disable()
            try:
                t0 = time.perf_counter()
                report = xyz_search(Xp, y, cfg)
                elapsed = time.perf_counter() - t0
            finally:
                if gc_was_on:
                    gc.enable()
            times.append(elapsed)
            rows.append(dict(p=p, n=n, M=M, L=L, repeat=rep, seconds=elapsed,
                             found=(0, 1) in report.pairs(),
                             candidates=report.candidates_checked))
        medians.append(float(np.median(times)))
    slope = loglog_slope(ps, medians)
    M_mid = M_for_gamma0(int(np.sqrt(ps[0] * ps[-1])), gamma0)
    summary = dict(slope=slope, predicted=runtime_exponent(gamma, gamma0),
                   medians=dict(zip(ps, medians)), M_mid=M_mid)
    return rows, summary


def gauss_vs_minimal_analytic(ps=(100, 1000, 10000), gammas=(0.6, 0.7, 0.8, 0.9, 0.95), n: int = 1000):
    """Single-projection discovery probability of both schemes at matched expected |E_1| = p."""
    rows = []
    for p in ps:
        for g in gammas:
            rows.append(dict(
                p=p, n=n, gamma=g, M=projection.minimal_budget_M(p),
                tau=projection.gauss_tau_for_budget(p, n),
                eta_minimal=float(projection.minimal_discovery_probability(g, p)),
                eta_gauss=float(projection.dense_discovery_probability(g, n, p)),
            ))
    return rows


def _pair_with_strength(n: int, gamma: float, rng: np.random.Generator):
    """Two-column X and sign y such that pair (0, 1) has exactly strength gamma."""
    X, y = planted_binary(n, 2, gamma, rng)
    return PackedMatrix.from_signs(X), y


def gauss_vs_minimal_empirical(p: int = 1000, gammas=(0.6, 0.7, 0.8, 0.9, 0.95), n: int = 1000,
                               draws: int = 100_000, seed: int = 0, batch: int = 5000):
    """Monte-Carlo retention frequency of a planted pair under both projection schemes.

    Minimal subsampling: keys from :func:`project_keys`. Dense: Gaussian
    projections of +/-1 data, so the matched threshold is ``2 * tau``.
    """
    M = projection.minimal_budget_M(p)
    tau = 2.0 * projection.gauss_tau_for_budget(p, n)
    rows = []
    for g in gammas:
        rng = np.random.default_rng([seed, int(round(g * 1000))])
        X, y = _pair_with_strength(n, g, rng)
        Z = build_z(X, y)
        kept_min = 0
        for _ in range(draws):
            draw = projection.draw_subsample(n, M, rng)
            kx = projection.project_keys(X, draw)
            kz = projection.project_keys(Z, draw)
            kept_min += int(kx[0] == kz[1])
        kept_gauss = 0
        for start in range(0, draws, batch):
            proj = projection.project_dense(X, Z, rng, n_draws=min(batch, draws - start))
            for x, z in zip(proj.x, proj.z):
                E = close_pairs(x[:1], z[1:], tau)
                kept_gauss += int(E.total_pairs > 0)
        rows.append(dict(
            p=p, n=n, gamma=g, draws=draws,
            freq_minimal=kept_min / draws, freq_gauss=kept_gauss / draws,
            eta_minimal=float(projection.minimal_discovery_probability(g, p)),
            eta_gauss=float(projection.dense_discovery_probability(g, n, p)),
        ))
    return rows


def naive_baseline(n: int = 1000, p: int = 2000, strength: float = 0.8, M: int | None = None,
                   L: int = 50, seed: int = 0, gamma_report: float = 0.6):
    """Best strength found versus strength evaluations, for xyz and uniform pair sampling."""
    rng = np.random.default_rng(seed)
    X, y = planted_binary(n, p, strength, rng)
    if M is None:
        M = M_for_gamma0(p, 0.55)
    cfg = SearchConfig(M=M, L=L, gamma=gamma_report, search_negatives=False, seed=seed,
                       max_candidates_per_rep=p * p)
    report = xyz_search(X, y, cfg)
    rows = []
    best = 0.0
    evals = 0
    for rep in range(report.repetitions_run):
        evals += report.checked_per_rep[rep]
        found = [h.strength for h in report.hits if h.found_at_repetition == rep]
        if found:
            best = max(best, max(found))
        rows.append(dict(method="xyz", repetition=rep, evaluations=evals, best_strength=best))
    naive = naive_sampling_search(X, y, max(evals, 1), np.random.default_rng([seed, 1]))
    for rep_row in [r for r in rows]:
        e = max(1, rep_row["evaluations"])
        rows.append(dict(method="naive", repetition=rep_row["repetition"], evaluations=e,
                         best_strength=float(naive.best_trace[e - 1])))
    return rows
