import json
import math
import os
import shutil

import numpy as np
import pytest

import causalcast as cc

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures", "toy")


def driven_panel(n=300, seed=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 3))
    y = np.zeros(n)
    y[1:] = 0.8 * x[:-1, 0] + 0.3 * rng.standard_normal(n - 1)
    dates = [f"{2000 + i // 12}-{i % 12 + 1:02d}" for i in range(n)]
    return cc.Panel(dates, y, x, ["X1", "X2", "X3"], "Y")


def test_panel_roundtrip():
    panel = driven_panel(24)
    assert len(panel) == 24
    assert panel.dates[0] == "2000-01"
    again = cc.Panel.from_csv(panel.to_csv())
    assert again.feature_names == ["X1", "X2", "X3"]
    np.testing.assert_allclose(again.features, panel.features, rtol=1e-12)


def test_design_shape():
    panel = driven_panel(40)
    y, X, labels = cc.build_design(panel, 2)
    assert X.shape == (38, 1 + 3 * 2)
    assert len(y) == 38
    assert labels[:3] == ["Y_lag1", "X1_lag1", "X1_lag2"]


def test_ols_matches_lstsq():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 3))
    y = 1.5 + X @ np.array([2.0, -1.0, 0.5]) + 0.1 * rng.standard_normal(50)
    fit = cc.ols_fit(X, y)
    A = np.column_stack([np.ones(50), X])
    ref, *_ = np.linalg.lstsq(A, y, rcond=None)
    np.testing.assert_allclose(fit.beta, ref, atol=1e-10)
    assert fit.rank == 4


def test_f_tail_and_acyclicity():
    assert cc.f_sf(0.0, 3, 20) == pytest.approx(1.0)
    stat, p = cc.f_test_nested(10.0, 5.0, 2, 30, 4)
    assert stat == pytest.approx((5.0 / 2) / (5.0 / 26))
    assert 0.0 < p < 0.01
    h, grad = cc.acyclicity(np.zeros((3, 3)))
    assert h == pytest.approx(0.0, abs=1e-12)
    assert grad.shape == (3, 3)


@pytest.mark.parametrize("selector", ["granger", "sfs", "pcmci"])
def test_selectors_find_driver(selector):
    fs = cc.select(driven_panel(), selector, p=1, seed=1)
    assert "X1" in fs.selected
    assert fs.candidates == ["X1", "X2", "X3"]


def test_selector_errors_carry_kind():
    with pytest.raises(cc.CausalcastError) as bad_id:
        cc.select(driven_panel(), "nope")
    assert cc.error_kind(bad_id.value) == "BadName"
    with pytest.raises(cc.CausalcastError) as bad_param:
        cc.select(driven_panel(), "granger", params={"alpha": "high"})
    assert cc.error_kind(bad_param.value) == "ConfigError"
    assert "nope" not in cc.known_selectors()


def test_backtest_and_metrics():
    panel = driven_panel(120)
    ledger = cc.run_backtest(panel, "granger", window=60, seed=5, calendar="2006-01..2006-06\n")
    assert len(ledger) == 60
    assert ledger.dates[0] == panel.dates[60]
    again = cc.run_backtest(panel, "granger", window=60, seed=5, calendar="2006-01..2006-06\n")
    assert ledger.to_csv() == again.to_csv()
    assert "crisis" in ledger.regimes

    errors = np.array(ledger.y_true) - np.array(ledger.y_pred)
    dates, rmse = cc.rolling_rmse(ledger, 12)
    assert len(rmse) == 49
    assert rmse[-1] == pytest.approx(math.sqrt(np.mean(errors[-12:] ** 2)))

    report = cc.regime_metrics(ledger, "2006-01..2006-06\n")
    assert report["crisis"]["count"] == 6
    _, returns, positions = cc.strategy_returns(ledger)
    assert set(positions) <= {-1, 0, 1}
    stats = cc.portfolio_stats(returns)
    assert stats["expected_return_annualized"] == pytest.approx(12 * np.mean(returns))
    json.dumps(cc.portfolio_metrics(ledger))


def test_synthetic_truth_recovered():
    panel, truth = cc.generate_svar({"d": 5, "n": 600, "seed": 11, "target_parents": 2})
    assert truth["variables"][0] == "Y"
    assert len(truth["target_parents"]) == 2
    fs = cc.select(panel, "granger")
    precision, recall, f1 = cc.score_sets(fs.selected, truth["target_parents"])
    assert recall == 1.0
    assert 0.0 <= f1 <= 1.0


def test_cli_in_process(tmp_path):
    for name in os.listdir(FIXTURES):
        shutil.copy(os.path.join(FIXTURES, name), tmp_path)
    cfg = str(tmp_path / "run.toml")
    assert cc.cli("ingest", "--config", cfg) == 0
    assert cc.cli("backtest", "--config", cfg) == 0
    assert cc.cli("report", "--config", cfg) == 0
    assert cc.cli("backtest", "--config", str(tmp_path / "missing.toml")) == 2
