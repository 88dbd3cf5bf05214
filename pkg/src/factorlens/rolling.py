"""Trading-cycle partitioning and per-stock rolling fits.

The analysis period [start_day, end_day] splits into N cycles of D days.
Cycle i trades days [start+(i-1)D, start+iD-1]; its model trains on the T
factor rows immediately before the first trading day against the returns of
the following days (one-day lag), so the fit never sees data from its own
trading window. Predictions for day k+1 read only the day-k factor row,
normalized with training-window statistics.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import ColumnStats, MarketDataset, apply_matrix_stats, normalize_matrix
from .errors import IndivisiblePeriod, InsufficientHistory, UnknownCycle
from .solver import ElasticNetConfig, FitResult, fit_with_config


@dataclass(frozen=True)
class Cycle:
    index: int  # 1-based
    train_x_start: int
    train_x_end: int
    train_y_start: int
    train_y_end: int
    trade_start: int
    trade_end: int


@dataclass(frozen=True)
class CyclePartition:
    train_days: int  # T
    cycle_days: int  # D
    start_day: int
    end_day: int
    cycles: tuple[Cycle, ...]

    @property
    def n_cycles(self) -> int:
        return len(self.cycles)

    @property
    def length(self) -> int:
        return self.end_day - self.start_day + 1

    def cycle(self, index: int) -> Cycle:
        if not 1 <= index <= len(self.cycles):
            raise UnknownCycle(f"cycle {index} outside [1, {len(self.cycles)}]")
        return self.cycles[index - 1]


def partition_cycles(
    train_days: int, cycle_days: int, period: tuple[int, int]
) -> CyclePartition:
    """Split [start_day, end_day] into cycles with their training windows."""
    start_day, end_day = period
    if train_days < 2 or cycle_days < 1:
        raise InsufficientHistory("train_days >= 2 and cycle_days >= 1 required")
    length = end_day - start_day + 1
    if length <= 0 or length % cycle_days != 0:
        raise IndivisiblePeriod(
            f"period length {length} is not a positive multiple of D={cycle_days}"
        )
    if start_day <= train_days:
        raise InsufficientHistory(
            f"start_day {start_day} leaves fewer than T={train_days} history days"
        )
    cycles = []
    for i in range(1, length // cycle_days + 1):
        trade_start = start_day + (i - 1) * cycle_days
        cycles.append(
            Cycle(
                index=i,
                train_x_start=trade_start - train_days,
                train_x_end=trade_start - 1,
                train_y_start=trade_start - train_days + 1,
                train_y_end=trade_start,
                trade_start=trade_start,
                trade_end=trade_start + cycle_days - 1,
            )
        )
    return CyclePartition(
        train_days=train_days,
        cycle_days=cycle_days,
        start_day=start_day,
        end_day=end_day,
        cycles=tuple(cycles),
    )


@dataclass(frozen=True)
class CycleFit:
    """Fitted model for one stock-cycle plus its normalization statistics."""

    cycle: Cycle
    factor_names: tuple[str, ...]
    fit: FitResult
    column_stats: tuple[ColumnStats, ...]


@dataclass(frozen=True)
class CycleResult:
    cycle_fit: CycleFit
    predicted: np.ndarray       # model outputs for the cycle's trading days
    actual: np.ndarray          # realized returns on those days
    predictor_rows: np.ndarray  # normalized factor rows the predictions consumed
    xi: float                   # mean squared prediction error
    error_rate: float           # relative MAE clamped to [0, 1]
    price_change: float = 0.0   # close[trade_end]/close[trade_start-1] - 1

    @property
    def cycle(self) -> Cycle:
        return self.cycle_fit.cycle


@dataclass(frozen=True)
class StockModelSeries:
    stock_id: str
    partition: CyclePartition
    factor_names: tuple[str, ...]
    cycles: tuple[CycleResult, ...]

    def result(self, cycle_index: int) -> CycleResult:
        if not 1 <= cycle_index <= len(self.cycles):
            raise UnknownCycle(
                f"cycle {cycle_index} outside [1, {len(self.cycles)}]"
            )
        return self.cycles[cycle_index - 1]


def fit_cycle(
    dataset: MarketDataset,
    stock_id: str,
    cycle: Cycle,
    config: ElasticNetConfig,
    factor_names: Optional[tuple[str, ...]] = None,
) -> CycleFit:
    """Normalize one training window and fit the configured model on it."""
    names = (
        tuple(factor_names) if factor_names is not None else dataset.factors.factor_names
    )
    X_raw = dataset.factor_window(stock_id, cycle.train_x_start, cycle.train_x_end, names)
    y = dataset.return_window(stock_id, cycle.train_y_start, cycle.train_y_end)
    X_norm, stats = normalize_matrix(X_raw)
    fit = fit_with_config(X_norm, y, config)
    return CycleFit(
        cycle=cycle, factor_names=names, fit=fit, column_stats=tuple(stats)
    )


def predict_cycle(
    dataset: MarketDataset, stock_id: str, cycle_fit: CycleFit
) -> tuple[np.ndarray, np.ndarray]:
    """Predict each trading day's return from the previous day's factor row.

    Returns (predictions, normalized predictor rows); reads factor data only
    for days trade_start-1 .. trade_end-1.
    """
    cycle = cycle_fit.cycle
    rows_raw = dataset.factor_window(
        stock_id, cycle.trade_start - 1, cycle.trade_end - 1, cycle_fit.factor_names
    )
    rows = apply_matrix_stats(rows_raw, list(cycle_fit.column_stats))
    preds = rows @ cycle_fit.fit.weights + cycle_fit.fit.bias
    return preds, rows


def evaluate_cycle(
    dataset: MarketDataset,
    stock_id: str,
    cycle: Cycle,
    config: ElasticNetConfig,
    factor_names: Optional[tuple[str, ...]] = None,
) -> CycleResult:
    cycle_fit = fit_cycle(dataset, stock_id, cycle, config, factor_names)
    predicted, rows = predict_cycle(dataset, stock_id, cycle_fit)
    actual = dataset.return_window(stock_id, cycle.trade_start, cycle.trade_end)
    closes = dataset.close_window(stock_id, cycle.trade_start - 1, cycle.trade_end)
    return CycleResult(
        cycle_fit=cycle_fit,
        predicted=predicted,
        actual=np.array(actual),
        predictor_rows=rows,
        xi=mean_squared_error(predicted, actual),
        error_rate=relative_error_rate(predicted, actual),
        price_change=float(closes[-1] / closes[0] - 1.0),
    )


def mean_squared_error(predicted: np.ndarray, actual: np.ndarray) -> float:
    return float(np.mean((np.asarray(predicted) - np.asarray(actual)) ** 2))


def relative_error_rate(predicted: np.ndarray, actual: np.ndarray) -> float:
    """mean|pred - actual| / (mean|actual| + 1e-9), clamped to [0, 1]."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    ratio = float(np.mean(np.abs(predicted - actual))) / (
        float(np.mean(np.abs(actual))) + 1e-9
    )
    return min(max(ratio, 0.0), 1.0)


def rolling_fit(
    dataset: MarketDataset,
    stock_ids,
    partition: CyclePartition,
    config: ElasticNetConfig,
    factor_names: Optional[tuple[str, ...]] = None,
    jobs: int = 1,
) -> dict[str, StockModelSeries]:
    """Fit every stock x cycle; embarrassingly parallel and scheduling-free.

    Each task is a pure function of immutable inputs and results are
    assembled in (stock_id, cycle) order, so output is identical for any
    worker count.
    """
    stock_ids = sorted(stock_ids)
    for sid in stock_ids:
        dataset.stock(sid)  # raises UnknownStock early
    if partition.end_day > dataset.n_days:
        raise InsufficientHistory(
            f"period ends day {partition.end_day} but dataset has {dataset.n_days}"
        )
    tasks = [(sid, cyc) for sid in stock_ids for cyc in partition.cycles]
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(
                pool.map(
                    lambda t: evaluate_cycle(dataset, t[0], t[1], config, factor_names),
                    tasks,
                )
            )
    else:
        results = [
            evaluate_cycle(dataset, sid, cyc, config, factor_names)
            for sid, cyc in tasks
        ]
    out: dict[str, StockModelSeries] = {}
    per_stock = len(partition.cycles)
    for k, sid in enumerate(stock_ids):
        chunk = tuple(results[k * per_stock : (k + 1) * per_stock])
        out[sid] = StockModelSeries(
            stock_id=sid,
            partition=partition,
            factor_names=chunk[0].cycle_fit.factor_names if chunk else tuple(),
            cycles=chunk,
        )
    return out


def prediction_error(series: StockModelSeries, cycle_index: int) -> float:
    """Mean squared prediction error of one cycle."""
    return series.result(cycle_index).xi


def error_rate(series: StockModelSeries, cycle_index: int) -> float:
    """Normalized prediction error in [0, 1] (drives the UI bar width)."""
    return series.result(cycle_index).error_rate
