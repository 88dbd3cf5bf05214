"""Strategy returns, benchmark, and portfolio backtesting over rolling fits.

The default trading rule is long-or-cash: hold a stock on the days its model
predicts a positive return, otherwise sit in cash. The rule is pluggable; the
benchmark is the equal-weight mean of actual returns over its scope. All
cumulative curves compound geometrically and start at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .data import MarketDataset, apply_matrix_stats
from .errors import EmptyScope, HorizonExceedsData, InvalidConfig, InvalidSpec
from .rolling import CyclePartition, StockModelSeries, rolling_fit
from .solver import ElasticNetConfig

DEFAULT_HORIZON = 63  # about three months of trading days

# A strategy maps a predicted daily return to a hold decision.
Strategy = Callable[[float], bool]


def long_or_cash(predicted: float) -> bool:
    return predicted > 0.0


def always_hold(predicted: float) -> bool:
    return True


def threshold_strategy(threshold: float) -> Strategy:
    def rule(predicted: float) -> bool:
        return predicted > threshold

    return rule


STRATEGIES: dict[str, Strategy] = {
    "long_or_cash": long_or_cash,
    "always_hold": always_hold,
}


def get_strategy(name: str) -> Strategy:
    """Look up a named rule; 'threshold:X' builds a threshold rule at X."""
    if name in STRATEGIES:
        return STRATEGIES[name]
    if name.startswith("threshold:"):
        try:
            return threshold_strategy(float(name.split(":", 1)[1]))
        except ValueError:
            pass
    raise InvalidConfig(f"unknown strategy {name!r}")


def strategy_returns(
    series: StockModelSeries, strategy: Strategy = long_or_cash
) -> np.ndarray:
    """Daily strategy returns over the whole analysis period of one stock."""
    out = []
    for res in series.cycles:
        held = np.fromiter(
            (strategy(float(p)) for p in res.predicted), dtype=bool,
            count=len(res.predicted),
        )
        out.append(np.where(held, res.actual, 0.0))
    return np.concatenate(out) if out else np.zeros(0)


def market_benchmark(
    dataset: MarketDataset, stock_ids, period: tuple[int, int]
) -> np.ndarray:
    """Equal-weight mean of actual daily returns over the scope."""
    ids = sorted(stock_ids)
    if not ids:
        raise EmptyScope("benchmark scope is empty")
    start, end = period
    rows = np.stack([dataset.return_window(sid, start, end) for sid in ids])
    return rows.mean(axis=0)


def cumulative_curve(daily: np.ndarray) -> np.ndarray:
    """cumulative[t] = prod_{k<=t}(1 + r_k) - 1."""
    return np.cumprod(1.0 + np.asarray(daily, dtype=np.float64)) - 1.0


def max_drawdown(daily: np.ndarray) -> float:
    """Largest peak-to-trough loss of the compounded equity curve."""
    equity = np.cumprod(1.0 + np.asarray(daily, dtype=np.float64))
    if equity.size == 0:
        return 0.0
    peaks = np.maximum.accumulate(equity)
    return float(np.max(1.0 - equity / peaks))


@dataclass(frozen=True)
class PortfolioSpec:
    name: str
    stock_ids: tuple[str, ...]
    factor_ids: tuple[str, ...]
    period: tuple[int, int]
    variant: str = "lasso"


@dataclass(frozen=True)
class OutlookResult:
    """Model-predicted forward curve; never mixed into realized curves."""

    days: tuple[int, ...]
    predicted: np.ndarray         # raw model outputs per future day
    strategy_daily: np.ndarray    # after the hold rule (cash days are 0)
    cumulative: np.ndarray


@dataclass(frozen=True)
class BacktestResult:
    spec: PortfolioSpec
    days: tuple[int, ...]
    stock_daily: dict[str, np.ndarray]
    stock_cumulative: dict[str, np.ndarray]
    portfolio_daily: np.ndarray
    portfolio_cumulative: np.ndarray
    benchmark_daily: np.ndarray
    benchmark_cumulative: np.ndarray
    outlook: OutlookResult
    summary: dict[str, float] = field(default_factory=dict)


def validate_spec(spec: PortfolioSpec, dataset: MarketDataset) -> None:
    if not spec.stock_ids:
        raise InvalidSpec(f"portfolio {spec.name!r}: no stocks selected")
    if not spec.factor_ids:
        raise InvalidSpec(f"portfolio {spec.name!r}: no factors selected")
    known = set(dataset.stock_ids())
    for sid in spec.stock_ids:
        if sid not in known:
            raise InvalidSpec(f"portfolio {spec.name!r}: unknown stock {sid!r}")
    panel = set(dataset.factors.factor_names)
    for f in spec.factor_ids:
        if f not in panel:
            raise InvalidSpec(f"portfolio {spec.name!r}: unknown factor {f!r}")


def outlook(
    dataset: MarketDataset,
    series_by_stock: dict[str, StockModelSeries],
    partition: CyclePartition,
    horizon: int = DEFAULT_HORIZON,
    strategy: Strategy = long_or_cash,
) -> OutlookResult:
    """Predict the H days after the period with each stock's final model.

    Day period_end + h is predicted from the factor row of the previous day,
    normalized with the final training window's statistics; the portfolio
    outlook is the equal-weight mean of the strategy-filtered predictions.
    """
    if horizon < 0:
        raise InvalidConfig("horizon must be >= 0")
    if horizon == 0:
        empty = np.zeros(0)
        return OutlookResult(days=tuple(), predicted=empty,
                             strategy_daily=empty, cumulative=empty)
    effective = min(horizon, dataset.n_days - partition.end_day)
    if effective <= 0:
        raise HorizonExceedsData(
            f"no factor rows beyond day {partition.end_day} for the outlook"
        )
    days = tuple(range(partition.end_day + 1, partition.end_day + effective + 1))
    per_stock_pred = []
    per_stock_filtered = []
    for sid in sorted(series_by_stock):
        series = series_by_stock[sid]
        final = series.cycles[-1].cycle_fit
        rows_raw = dataset.factor_window(
            sid, days[0] - 1, days[-1] - 1, final.factor_names
        )
        rows = apply_matrix_stats(rows_raw, list(final.column_stats))
        preds = rows @ final.fit.weights + final.fit.bias
        held = np.fromiter(
            (strategy(float(p)) for p in preds), dtype=bool, count=len(preds)
        )
        per_stock_pred.append(preds)
        per_stock_filtered.append(np.where(held, preds, 0.0))
    predicted = np.mean(per_stock_pred, axis=0)
    filtered = np.mean(per_stock_filtered, axis=0)
    return OutlookResult(
        days=days,
        predicted=predicted,
        strategy_daily=filtered,
        cumulative=cumulative_curve(filtered),
    )


def run_backtest(
    spec: PortfolioSpec,
    dataset: MarketDataset,
    partition: CyclePartition,
    config: Optional[ElasticNetConfig] = None,
    strategy: Strategy = long_or_cash,
    benchmark_ids=None,
    horizon: int = DEFAULT_HORIZON,
    jobs: int = 1,
) -> BacktestResult:
    """Refit models restricted to the spec's factors and compute all curves."""
    validate_spec(spec, dataset)
    if tuple(spec.period) != (partition.start_day, partition.end_day):
        raise InvalidSpec(
            f"portfolio {spec.name!r}: period {spec.period} does not match "
            f"partition [{partition.start_day}, {partition.end_day}]"
        )
    if config is None:
        config = ElasticNetConfig(variant=spec.variant)
    elif config.variant != spec.variant:
        config = ElasticNetConfig(
            variant=spec.variant,
            lambda_ratio=config.lambda_ratio,
            lambda_value=config.lambda_value if spec.variant != "lassocv" else None,
            max_sweeps=config.max_sweeps,
            tol=config.tol,
            cv_folds=config.cv_folds,
            cv_grid_size=config.cv_grid_size,
            cv_lambda_min_ratio=config.cv_lambda_min_ratio,
        )
    series = rolling_fit(
        dataset, spec.stock_ids, partition, config,
        factor_names=tuple(spec.factor_ids), jobs=jobs,
    )
    days = tuple(range(partition.start_day, partition.end_day + 1))
    stock_daily = {
        sid: strategy_returns(series[sid], strategy) for sid in sorted(series)
    }
    portfolio_daily = np.mean(list(stock_daily.values()), axis=0)
    scope = benchmark_ids if benchmark_ids is not None else dataset.stock_ids()
    benchmark_daily = market_benchmark(
        dataset, scope, (partition.start_day, partition.end_day)
    )
    portfolio_cum = cumulative_curve(portfolio_daily)
    benchmark_cum = cumulative_curve(benchmark_daily)
    try:
        fwd = outlook(dataset, series, partition, horizon=horizon, strategy=strategy)
    except HorizonExceedsData:
        empty = np.zeros(0)  # period ends at the last dated day: no outlook
        fwd = OutlookResult(days=tuple(), predicted=empty,
                            strategy_daily=empty, cumulative=empty)
    summary = {
        "period_return": float(portfolio_cum[-1]),
        "benchmark_return": float(benchmark_cum[-1]),
        "excess_return": float(portfolio_cum[-1] - benchmark_cum[-1]),
        "max_drawdown": max_drawdown(portfolio_daily),
    }
    return BacktestResult(
        spec=spec,
        days=days,
        stock_daily=stock_daily,
        stock_cumulative={s: cumulative_curve(r) for s, r in stock_daily.items()},
        portfolio_daily=portfolio_daily,
        portfolio_cumulative=portfolio_cum,
        benchmark_daily=benchmark_daily,
        benchmark_cumulative=benchmark_cum,
        outlook=fwd,
        summary=summary,
    )
