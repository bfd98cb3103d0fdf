import numpy as np
import pytest

from xyzsearch.bench import (
    M_for_gamma0,
    gauss_vs_minimal_analytic,
    gauss_vs_minimal_empirical,
    loglog_slope,
    naive_baseline,
    scaling_suite,
)


def test_helpers():
    assert loglog_slope([1, 2, 4], [3, 12, 48]) == pytest.approx(2.0)
    assert M_for_gamma0(1000, 0.55) == 12
    assert 1000 ** (-1 / M_for_gamma0(1000, 0.55)) == pytest.approx(0.55, abs=0.02)


def test_scaling_suite_small():
    rows, summary = scaling_suite(ps=(200, 400), n=200, repeats=1)
    assert len(rows) == 2 and all(r["found"] for r in rows)
    assert summary["predicted"] == pytest.approx(1.1762361906751483)
    assert np.isfinite(summary["slope"])


def test_gauss_vs_minimal_small():
    rows = gauss_vs_minimal_analytic(ps=(100,), gammas=(0.7, 0.9), n=500)
    assert all(r["eta_minimal"] > r["eta_gauss"] for r in rows)
    emp = gauss_vs_minimal_empirical(p=100, gammas=(0.9,), n=200, draws=2000, seed=1)[0]
    for key in ("minimal", "gauss"):
        q = emp[f"eta_{key}"]
        assert abs(emp[f"freq_{key}"] - q) <= 4 * np.sqrt(q * (1 - q) / 2000)


def test_naive_baseline_small():
    rows = naive_baseline(n=300, p=200, L=40, seed=0)
    xyz = [r for r in rows if r["method"] == "xyz"]
    naive = [r for r in rows if r["method"] == "naive"]
    assert len(xyz) == len(naive) == 40
    assert [r["evaluations"] for r in xyz] == sorted(r["evaluations"] for r in xyz)
    assert xyz[-1]["best_strength"] == pytest.approx(0.8)
    assert xyz[-1]["best_strength"] >= naive[-1]["best_strength"]
