import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xyzsearch.lasso import (
    CenteredDesignView,
    LassoPathConfig,
    SolverError,
    active_set_solve,
    auto_lambda_grid,
    exact_interaction_scores,
    interaction_column,
    kkt_check_interactions,
    lasso_path,
    normalized_test_error,
)
from xyzsearch.oracle import reference_lasso_path
from xyzsearch.synthetic import interaction_regression, rademacher


def test_interaction_column_examples():
    X = np.array([[1.0, 3.0], [2.0, 4.0]])
    np.testing.assert_allclose(interaction_column(X, 0, 1), [-2.5, 2.5])
    B = rademacher(30, 3, np.random.default_rng(0))
    np.testing.assert_array_equal(interaction_column(B, 1, 1), np.zeros(30))
    with pytest.raises(ValueError):
        interaction_column(X, 1, 0)


@given(st.integers(2, 40), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_design_columns_are_centred(n, p, seed):
    X = np.random.default_rng(seed).normal(3.0, 2.0, size=(n, p))
    D = CenteredDesignView(X)
    pairs = [(j, k) for j in range(p) for k in range(j, p)]
    cols = D.columns(range(p), pairs)
    assert np.all(np.abs(cols.mean(axis=0)) <= 1e-10 * max(1.0, np.abs(cols).max()))


def test_active_set_solve_examples(rng):
    X = rng.normal(size=(50, 4))
    y = rng.normal(size=50)
    y -= y.mean()
    D = CenteredDesignView(X)
    empty = active_set_solve(D, [], [], y, 0.1)
    assert empty.beta == {} and empty.theta == {}
    np.testing.assert_array_equal(empty.residual, y)

    lam = 0.05
    fit = active_set_solve(D, [2], [], y, lam, tol=1e-12)
    x = D.Xc[:, 2]
    z = x @ y / 50
    expected = np.sign(z) * max(abs(z) - lam, 0) / (x @ x / 50)
    assert fit.beta.get(2, 0.0) == pytest.approx(expected, abs=1e-10)

    fit = active_set_solve(D, [0, 1, 2, 3], [(0, 1), (2, 3)], y, lam, trace=True)
    assert fit.objective <= y @ y / (2 * 50) + 1e-15
    tr = np.array(fit.objective_trace)
    assert np.all(np.diff(tr) <= 1e-12)


def test_active_set_solve_iteration_limit(rng):
    X = rng.normal(size=(40, 6))
    X[:, 1] = X[:, 0] + 1e-3 * rng.normal(size=40)
    y = X[:, 0] + rng.normal(size=40)
    y -= y.mean()
    with pytest.raises(SolverError, match="lambda"):
        active_set_solve(CenteredDesignView(X), range(6), [], y, 1e-4, tol=1e-15, max_iter=3)


def test_kkt_check_verification_gate(rng):
    X = rademacher(64, 8, rng).astype(float)
    r = np.zeros(64)
    assert kkt_check_interactions(r, X, 0.1) == set()
    r = rng.normal(size=64)
    S = np.abs(exact_interaction_scores(X, r))
    lam = S[np.triu_indices(8, 1)].max() * 1.01
    assert kkt_check_interactions(r, X, lam, L=50, seed=1) == set()
    # threshold above the largest possible score: no search at all
    assert kkt_check_interactions(r, X, np.abs(r).sum() / 64 * 1.01) == set()


def test_kkt_check_binary_threshold_and_soundness(rng):
    n, p = 200, 30
    X = rademacher(n, p, rng).astype(float)
    r = rademacher(n, 1, rng)[:, 0].astype(float)
    lam = 0.2
    info = {}
    V = kkt_check_interactions(r, X, lam, L=20, seed=3, info=info)
    assert info["gamma"] == pytest.approx(0.5 + lam / 2)
    S = exact_interaction_scores(X, r)
    for j, k in V:
        assert j < k and abs(S[j, k]) > lam


def test_kkt_check_finds_planted_violator_often():
    rng = np.random.default_rng(21)
    n, p = 400, 40
    X = rademacher(n, p, rng).astype(float)
    r = X[:, 1] * X[:, 2] + 0.5 * rng.normal(size=n)
    score = abs(r @ (X[:, 1] * X[:, 2])) / n
    lam = score / 2
    others = np.abs(exact_interaction_scores(X, r))
    others[1, 2] = others[2, 1] = 0
    assert others[np.triu_indices(p, 1)].max() < lam
    found = sum((1, 2) in kkt_check_interactions(r, X, lam, L=7, eta=0.99, seed=s) for s in range(100))
    assert found >= 95


def test_kkt_check_continuous(rng):
    X = rng.normal(size=(300, 15))
    r = 3 * X[:, 4] * X[:, 7] + rng.normal(size=300)
    S = np.abs(exact_interaction_scores(X, r))
    lam = 0.5 * S[4, 7]
    V = kkt_check_interactions(r, X, lam, L=10, seed=0)
    assert (4, 7) in V
    assert all(S[j, k] > lam for j, k in V)


def test_auto_lambda_grid_examples(rng):
    prob = interaction_regression(80, 12, rng, n_main=3, n_pairs=2)
    grid = auto_lambda_grid(prob.X, prob.y, 2, 0.1)
    assert grid.size == 2 and grid[1] == pytest.approx(0.1 * grid[0], rel=1e-12)
    grid = auto_lambda_grid(prob.X, prob.y, 7, 0.05)
    ratios = grid[1:] / grid[:-1]
    assert np.all(np.diff(grid) < 0)
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
    path = lasso_path(prob.X, prob.y, LassoPathConfig(lambdas=(grid[0],)))
    assert path[0].beta == {} and path[0].theta == {}
    with pytest.raises(ValueError):
        auto_lambda_grid(prob.X, np.ones(80), 5, 0.1)
    with pytest.raises(ValueError):
        auto_lambda_grid(prob.X, prob.y, 1, 0.1)


def test_path_empty_above_lambda_max(rng):
    prob = interaction_regression(60, 10, rng, n_main=2, n_pairs=2)
    lam = 10 * auto_lambda_grid(prob.X, prob.y, 2, 0.5)[0]
    fit = lasso_path(prob.X, prob.y, LassoPathConfig(lambdas=(lam,)))[0]
    assert fit.beta == {} and fit.theta == {}
    assert fit.certified


def test_pure_binary_interaction_is_dominant():
    rng = np.random.default_rng(4)
    X = rademacher(200, 15, rng).astype(float)
    y = X[:, 0] * X[:, 1]
    path = lasso_path(X, y, LassoPathConfig(n_lambda=5, lambda_ratio=0.1, seed=2))
    last = path[-1]
    coefs = {("pair", k): abs(v) for k, v in last.theta.items()}
    coefs.update({("main", k): abs(v) for k, v in last.beta.items()})
    assert max(coefs, key=coefs.get) == ("pair", (0, 1))
    assert all(j != k for j, k in last.theta)


def test_path_matches_reference_and_is_reproducible():
    rng = np.random.default_rng(7)
    prob = interaction_regression(120, 25, rng, n_main=4, n_pairs=3)
    cfg = LassoPathConfig(n_lambda=6, lambda_ratio=0.05, seed=9)
    path = lasso_path(prob.X, prob.y, cfg)
    ref = reference_lasso_path(prob.X, prob.y, path.lambdas)
    for fit, r in zip(path, ref):
        assert fit.certified
        keys = set(fit.beta) | set(r.beta)
        diff = max([abs(fit.beta.get(k, 0) - r.beta.get(k, 0)) for k in keys], default=0.0)
        keys = set(fit.theta) | set(r.theta)
        diff = max([diff] + [abs(fit.theta.get(k, 0) - r.theta.get(k, 0)) for k in keys])
        assert diff <= 1e-4
        assert all(np.all(np.diff(fit.objective_trace) <= 1e-12) for _ in [0])
    again = lasso_path(prob.X, prob.y, cfg)
    assert [(f.beta, f.theta) for f in again] == [(f.beta, f.theta) for f in path]


def test_penalty_multiplier_matches_reference():
    rng = np.random.default_rng(11)
    prob = interaction_regression(100, 12, rng, n_main=3, n_pairs=2)
    cfg = LassoPathConfig(n_lambda=4, lambda_ratio=0.1, penalty_multiplier=2.0, seed=1)
    path = lasso_path(prob.X, prob.y, cfg)
    ref = reference_lasso_path(prob.X, prob.y, path.lambdas, penalty_multiplier=2.0)
    for fit, r in zip(path, ref):
        for k in set(fit.theta) | set(r.theta):
            assert abs(fit.theta.get(k, 0) - r.theta.get(k, 0)) <= 1e-4


def test_exact_kkt_mode_and_prediction(rng):
    prob = interaction_regression(150, 10, rng, n_main=2, n_pairs=2)
    path = lasso_path(prob.X, prob.y, LassoPathConfig(n_lambda=5, lambda_ratio=0.02, exact_kkt=True))
    assert all(f.certified for f in path)
    err = normalized_test_error(prob.y, path.predict(prob.X, len(path) - 1))
    assert err < 0.05
    assert normalized_test_error(prob.y, prob.y) == 0.0
