"""Rolling sparse-regression factor engine.

Fits per-stock elastic-net models over rolling training windows of a factor
panel, scores factor importance / sensitivity / stability, backtests
factor+stock portfolios against an equal-weight benchmark, and serves the
whole pipeline over HTTP for interactive clients.
"""

from .backtest import (
    BacktestResult,
    PortfolioSpec,
    market_benchmark,
    outlook,
    run_backtest,
    strategy_returns,
)
from .data import (
    FactorPanel,
    MarketDataset,
    StockRecord,
    TradingCalendar,
    load_dataset,
    normalize_window,
    save_dataset,
)
from .errors import FactorLensError
from .metrics import (
    aggregate_importance,
    compute_importances,
    factor_contribution,
    factor_sensitivity,
    factor_stability,
    top_k_factors,
)
from .registry import DEFAULT_REGISTRY, FactorRegistry
from .rolling import (
    CyclePartition,
    StockModelSeries,
    partition_cycles,
    prediction_error,
    error_rate,
    rolling_fit,
)
from .solver import (
    ElasticNetConfig,
    FitResult,
    fit_elastic_net,
    fit_lasso,
    fit_lasso_cv,
    lambda_max,
    objective_value,
    predict,
)
from .synthetic import SyntheticConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "BacktestResult",
    "CyclePartition",
    "DEFAULT_REGISTRY",
    "ElasticNetConfig",
    "FactorLensError",
    "FactorPanel",
    "FactorRegistry",
    "FitResult",
    "MarketDataset",
    "PortfolioSpec",
    "StockModelSeries",
    "StockRecord",
    "SyntheticConfig",
    "TradingCalendar",
    "aggregate_importance",
    "compute_importances",
    "error_rate",
    "factor_contribution",
    "factor_sensitivity",
    "factor_stability",
    "fit_elastic_net",
    "fit_lasso",
    "fit_lasso_cv",
    "generate_synthetic",
    "lambda_max",
    "load_dataset",
    "market_benchmark",
    "normalize_window",
    "objective_value",
    "outlook",
    "partition_cycles",
    "predict",
    "prediction_error",
    "rolling_fit",
    "run_backtest",
    "save_dataset",
    "strategy_returns",
    "top_k_factors",
]
