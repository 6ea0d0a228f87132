"""Causal feature selection and expanding-window forecasting for monthly panels."""

import json as _json

from . import _core
from ._core import (
    CausalcastError,
    FeatureSet,
    Ledger,
    OlsFit,
    Panel,
    __version__,
    acyclicity,
    build_design,
    f_sf,
    f_test_nested,
    fastica,
    kmeans,
    known_selectors,
    load_panel,
    mae_increase_pct,
    ols_fit,
    partial_correlation,
    pearson,
    portfolio_stats,
    rolling_mae,
    rolling_rmse,
    score_sets,
    strategy_returns,
)

__all__ = [
    "CausalcastError",
    "FeatureSet",
    "Ledger",
    "OlsFit",
    "Panel",
    "acyclicity",
    "build_design",
    "cli",
    "error_kind",
    "f_sf",
    "f_test_nested",
    "fastica",
    "generate_svar",
    "kmeans",
    "known_selectors",
    "load_panel",
    "mae_increase_pct",
    "ols_fit",
    "partial_correlation",
    "pearson",
    "portfolio_metrics",
    "portfolio_stats",
    "regime_metrics",
    "rolling_mae",
    "rolling_rmse",
    "run_backtest",
    "score_sets",
    "select",
    "strategy_returns",
]


def _params(params):
    if params is None:
        return "{}"
    return params if isinstance(params, str) else _json.dumps(params)


def error_kind(exc):
    """Kind name of a CausalcastError, e.g. "ConfigError"."""
    return str(exc).split(":", 1)[0]


def select(panel, selector, p=1, params=None, seed=0):
    return _core.select(panel, selector, p, _params(params), seed)


def run_backtest(panel, selector="granger", params=None, window=60, p=1, reselect_every=1, seed=0, calendar=""):
    """`calendar` is crisis-calendar text (one "YYYY-MM..YYYY-MM" range per line)."""
    return _core.run_backtest(panel, selector, _params(params), window, p, reselect_every, seed, calendar)


def regime_metrics(ledger, calendar=""):
    return _json.loads(_core.regime_metrics_json(ledger, calendar))


def portfolio_metrics(ledger, calendar=""):
    return _json.loads(_core.portfolio_metrics_json(ledger, calendar))


def generate_svar(spec=None):
    """Returns (panel, truth); truth holds S, W, variables and target_parents."""
    return _core.generate_svar(_params(spec))


def cli(*args):
    """Runs the command-line tool in-process and returns its exit code."""
    return _core.cli([str(a) for a in args])
