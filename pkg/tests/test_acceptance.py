"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary.
"""

import time

import numpy as np
from scipy.stats import norm

from xyzsearch.bench import gauss_vs_minimal_analytic, gauss_vs_minimal_empirical, scaling_suite
from xyzsearch.lasso import LassoPathConfig, lasso_path, normalized_test_error
from xyzsearch.oracle import brute_force_search, predict_explicit, reference_lasso_path, two_stage_lasso
from xyzsearch.pairs import equal_pairs
from xyzsearch.search import (
    SearchConfig,
    StrengthSample,
    choose_L,
    choose_parameters,
    default_sample_size,
    discovery_probability,
    expected_complexity,
    match_frequency,
    optimal_M,
    runtime_exponent,
    sample_strengths,
    xyz_search,
)
from xyzsearch.synthetic import interaction_regression, noisy_interaction, planted_binary, uniform_interaction

THIRTEEN_EIGHTEENTHS = 13 / 18
# (1 + P(|eps| < 1)) / 2 with eps ~ N(0, 1) equals Phi(1); mpmath value
SIGN_AGREEMENT_SIGMA1 = 0.8413447460685429


def test_criterion_1_oracle_soundness_and_completeness(report_criterion):
    gamma, eta = 0.95, 0.99
    elapsed = 0.0
    found = unsound = 0
    for i in range(50):
        rng = np.random.default_rng([1, i])
        X, y = planted_binary(128, 64, gamma, rng, pair=(3, 40))
        t0 = time.perf_counter()
        sample = sample_strengths(X, y, default_sample_size(64), rng)
        choice = choose_parameters(gamma, eta, sample, 128, 64)
        report = xyz_search(X, y, SearchConfig(M=choice.M, L=choice.L, gamma=gamma, seed=i))
        elapsed += time.perf_counter() - t0
        truth = {
            s: {(j, k) for j, k, _ in brute_force_search(X, s * y, gamma=gamma).selected}
            for s in (1, -1)
        }
        unsound += sum((h.j, h.k) not in truth[h.sign] for h in report.hits)
        found += (3, 40) in report.pairs(sign=1)
    ok = unsound == 0 and found >= 48 and elapsed < 10
    assert report_criterion(1, "oracle soundness/completeness", ok,
                            f"unconfirmed hits={unsound}, planted found {found}/50, search time {elapsed:.1f}s")


def test_criterion_2_discovery_law(report_criterion):
    runs = 1000
    worst = 0.0
    cells = []
    for gamma in (0.8, 0.9, 1.0):
        for M, L in ((5, 10), (8, 20), (10, 1)):
            hits = 0
            for r in range(runs):
                rng = np.random.default_rng([2, int(gamma * 100), M, r])
                X, y = planted_binary(100, 16, gamma, rng)
                rep = xyz_search(X, y, SearchConfig(M=M, L=L, gamma=gamma, search_negatives=False, seed=r))
                hits += (0, 1) in rep.pairs()
            q = discovery_probability(gamma, M, L)
            sd = np.sqrt(q * (1 - q) / runs)
            dev = abs(hits / runs - q)
            z = dev / sd if sd > 0 else (0.0 if dev == 0 else np.inf)
            worst = max(worst, z)
            cells.append(f"({gamma},{M},{L}) {hits / runs:.3f} vs {q:.3f}")
    ok = worst <= 3
    assert report_criterion(2, "discovery law", ok, f"max |z|={worst:.2f}; " + "; ".join(cells))


def test_criterion_3_scaling_exponent(report_criterion):
    t0 = time.perf_counter()
    _, summary = scaling_suite(ps=(1000, 2000, 4000, 8000, 16000), gamma=0.9, gamma0=0.55,
                               n=1000, repeats=5, seed=0)
    elapsed = time.perf_counter() - t0
    target = runtime_exponent(0.9, 0.55)
    ok = abs(summary["slope"] - target) <= 0.15 and elapsed < 600
    assert report_criterion(3, "scaling exponent", ok,
                            f"slope={summary['slope']:.3f}, predicted={target:.3f}, {elapsed:.0f}s")


def test_criterion_4_minimal_beats_dense(report_criterion):
    gammas = (0.6, 0.7, 0.8, 0.9, 0.95)
    analytic = gauss_vs_minimal_analytic(ps=(100, 1000, 10000), gammas=gammas, n=1000)
    analytic_ok = all(r["eta_minimal"] > r["eta_gauss"] for r in analytic)
    draws = 20_000
    emp = gauss_vs_minimal_empirical(p=1000, gammas=gammas, n=1000, draws=draws, seed=4)
    within = ordered = True
    for r in emp:
        for key in ("minimal", "gauss"):
            q = r[f"eta_{key}"]
            within &= abs(r[f"freq_{key}"] - q) <= 3 * np.sqrt(q * (1 - q) / draws) + 1e-12
        ordered &= r["freq_minimal"] > r["freq_gauss"]
    ok = analytic_ok and within and ordered
    detail = ", ".join(f"g={r['gamma']}: {r['freq_minimal']:.4f}>{r['freq_gauss']:.4f}" for r in emp)
    assert report_criterion(4, "minimal vs dense", ok,
                            f"analytic ok={analytic_ok}, MC within 3sd={within}; {detail}")


def test_criterion_5_continuous_transforms(report_criterion):
    rng = np.random.default_rng(5)
    X, y = uniform_interaction(10_000, 2, rng)
    a = match_frequency(X, y, 0, 1, 200_000, rng, transform="unbiased")
    Xb, yb = noisy_interaction(10_000, 2, 1.0, rng)
    b = match_frequency(Xb.astype(float), yb, 0, 1, 200_000, rng, transform="sign", weighted=False)
    identity = (1 + (2 * norm.cdf(1.0) - 1)) / 2
    ok = (abs(a - THIRTEEN_EIGHTEENTHS) <= 0.02 and abs(b - 0.84) <= 0.01
          and abs(identity - SIGN_AGREEMENT_SIGMA1) < 1e-12 and abs(b - identity) <= 0.01)
    assert report_criterion(5, "continuous transforms", ok,
                            f"(a) {a:.4f} vs 13/18={THIRTEEN_EIGHTEENTHS:.4f}; "
                            f"(b) sign agreement {b:.4f} vs 0.84, identity {identity:.4f}")


def _max_diff(fit, ref) -> float:
    d = 0.0
    for k in set(fit.beta) | set(ref.beta):
        d = max(d, abs(fit.beta.get(k, 0.0) - ref.beta.get(k, 0.0)))
    for k in set(fit.theta) | set(ref.theta):
        d = max(d, abs(fit.theta.get(k, 0.0) - ref.theta.get(k, 0.0)))
    return d


def test_criterion_6_lasso_path_equivalence(report_criterion):
    points = certified = 0
    worst = 0.0
    err_xyz, err_two = [], []
    cfg_kw = dict(n_lambda=10, lambda_ratio=0.05, eta=0.99)
    for i in range(20):
        rng = np.random.default_rng([6, i])
        prob = interaction_regression(300, 100, rng, setting=2)
        path = lasso_path(prob.X, prob.y, LassoPathConfig(seed=i, **cfg_kw))
        ref = reference_lasso_path(prob.X, prob.y, path.lambdas)
        for fit, r in zip(path, ref):
            points += 1
            if fit.certified:
                certified += 1
                worst = max(worst, _max_diff(fit, r))
        # 80/20 split; each method scored by its best point on the same grid
        tr, te = np.arange(240), np.arange(240, 300)
        Xtr, ytr, Xte, yte = prob.X[tr], prob.y[tr], prob.X[te], prob.y[te]
        p2 = lasso_path(Xtr, ytr, LassoPathConfig(seed=i, **cfg_kw))
        err_xyz.append(min(normalized_test_error(yte, p2.predict(Xte, j)) for j in range(len(p2))))
        _, fits = two_stage_lasso(Xtr, ytr, p2.lambdas, stage1_lambda=p2.lambdas[-1])
        err_two.append(min(normalized_test_error(yte, predict_explicit(f, Xtr, ytr, Xte)) for f in fits))
    frac = certified / points
    higher = sum(b > a for a, b in zip(err_xyz, err_two))
    ok = worst <= 1e-4 and frac >= 0.9 and np.mean(err_two) > np.mean(err_xyz) and higher == 20
    assert report_criterion(6, "lasso path equivalence", ok,
                            f"max diff {worst:.2e} on certified points, certified {certified}/{points}; "
                            f"test error xyz {np.mean(err_xyz):.3f} vs two-stage {np.mean(err_two):.3f} "
                            f"(two-stage higher on {higher}/20)")


def _strength_distributions():
    rng = np.random.default_rng(7)
    return {
        "point-0.5": np.full(1000, 0.5),
        "normal(0.5,0.02)": rng.normal(0.5, 0.02, 5000),
        "normal(0.5,0.05)": rng.normal(0.5, 0.05, 5000),
        "beta(2,2)": rng.beta(2, 2, 5000),
        "beta(5,5)": rng.beta(5, 5, 5000),
        "uniform(0.3,0.7)": rng.uniform(0.3, 0.7, 5000),
        "binomial(100,0.5)/100": rng.binomial(100, 0.5, 5000) / 100,
        "bulk+strong tail": np.concatenate([rng.normal(0.5, 0.03, 4900), rng.uniform(0.6, 0.8, 100)]),
        "beta(20,18)": rng.beta(20, 18, 5000),
        "beta(11,9)": rng.beta(11, 9, 5000),
    }


def test_criterion_7_pareto_optimality(report_criterion):
    violations = []
    settings = [(500, 5000, 0.85, 0.95), (1000, 20_000, 0.9, 0.99), (200, 1000, 0.8, 0.9)]
    for name, values in _strength_distributions().items():
        s = StrengthSample(np.clip(values, 0.0, 1.0))
        for n, p, gamma, eta in settings:
            M_star = optimal_M(gamma, s, n, p, M_range=(1, 50))
            L = choose_L(M_star, gamma, eta)
            eta_star = discovery_probability(gamma, M_star, L)
            C_star = expected_complexity(M_star, L, s, n, p)
            for M in range(1, 51):
                L2 = choose_L(M, gamma, eta_star)
                assert discovery_probability(gamma, M, L2) >= eta_star
                if expected_complexity(M, L2, s, n, p) < C_star:
                    violations.append((name, n, p, M))
    ok = not violations
    assert report_criterion(7, "Pareto optimality", ok,
                            f"10 distributions x 3 settings x M' in 1..50, violations={violations[:3]}")


def test_criterion_8_equal_pairs_exactness(report_criterion):
    x = np.array([10, 11, 1, 12, 2, 13, 3, 14, 3], dtype=np.uint64)
    z = np.array([3, 2, 30, 1, 3, 1, 31, 32, 33], dtype=np.uint64)
    js, ks = equal_pairs(x, z).pairs()
    got = set(zip((js + 1).tolist(), (ks + 1).tolist()))
    expected = {(3, 4), (3, 6), (5, 2), (7, 1), (7, 5), (9, 1), (9, 5)}
    fixture_ok = got == expected and js.size == len(expected)
    rng = np.random.default_rng(8)
    mismatches = 0
    for _ in range(1000):
        p = int(rng.integers(1, 65))
        v = int(rng.integers(1, 9))
        xk = rng.integers(0, v, size=p).astype(np.uint64)
        zk = rng.integers(0, v, size=p).astype(np.uint64)
        js, ks = equal_pairs(xk, zk).pairs()
        fast = list(zip(js.tolist(), ks.tolist()))
        brute = {(j, k) for j in range(p) for k in range(p) if xk[j] == zk[k]}
        mismatches += set(fast) != brute or len(fast) != len(brute)
    ok = fixture_ok and mismatches == 0
    assert report_criterion(8, "equal-pairs exactness", ok,
                            f"fixture exact={fixture_ok}, random mismatches={mismatches}/1000")
