"""Canonical JSON payloads shared by the CLI artifacts and the HTTP API.

Payloads are plain dicts built in a fixed key order and serialized with
``canonical_json_bytes`` (compact, shortest round-trip floats, no NaN), so
equal inputs always produce byte-identical output regardless of caller.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable

import numpy as np

from .backtest import BacktestResult
from .data import TradingCalendar
from .metrics import AggregateImportance, FactorImportance, SensitivityScore, StabilityScore
from .rolling import CyclePartition, StockModelSeries
from .solver import FitResult


def to_jsonable(obj):
    """Recursively convert numpy containers/scalars to plain Python values."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json_bytes(payload) -> bytes:
    return json.dumps(
        to_jsonable(payload), ensure_ascii=False, allow_nan=False,
        separators=(",", ":"),
    ).encode("utf-8")


def partition_payload(partition: CyclePartition, calendar: TradingCalendar) -> dict:
    return {
        "train_days": partition.train_days,
        "cycle_days": partition.cycle_days,
        "start_day": partition.start_day,
        "end_day": partition.end_day,
        "start_date": calendar.date_of(partition.start_day).isoformat(),
        "end_date": calendar.date_of(partition.end_day).isoformat(),
        "n_cycles": partition.n_cycles,
        "cycles": [
            {
                "index": c.index,
                "train_x_start": c.train_x_start,
                "train_x_end": c.train_x_end,
                "train_y_start": c.train_y_start,
                "train_y_end": c.train_y_end,
                "trade_start": c.trade_start,
                "trade_end": c.trade_end,
                "trade_start_date": calendar.date_of(c.trade_start).isoformat(),
                "trade_end_date": calendar.date_of(c.trade_end).isoformat(),
            }
            for c in partition.cycles
        ],
    }


def solver_diagnostics(fit: FitResult) -> dict:
    """Convergence and selection diagnostics of one fit, JSON-ready."""
    out = {
        "lambda_used": float(fit.lambda_used),
        "alpha": float(fit.alpha),
        "sweeps": int(fit.sweeps),
        "converged": bool(fit.converged),
        "kkt_residual": float(fit.kkt_residual),
        "objective": float(fit.objective),
        "objective_history": [float(v) for v in fit.objective_history],
    }
    if fit.cv_lambdas is not None:
        out["cv_lambdas"] = [float(v) for v in fit.cv_lambdas]
        out["cv_errors"] = [float(v) for v in fit.cv_errors]
    return out


def models_payload(series_by_stock: dict[str, StockModelSeries]) -> dict:
    models = []
    for sid in sorted(series_by_stock):
        series = series_by_stock[sid]
        for res in series.cycles:
            fit = res.cycle_fit.fit
            weights = [
                [name, float(w)]
                for name, w in zip(series.factor_names, fit.weights)
                if w != 0.0
            ]
            models.append(
                {
                    "stock_id": sid,
                    "cycle": res.cycle.index,
                    "weights": weights,
                    "bias": float(fit.bias),
                    "lambda_used": float(fit.lambda_used),
                    "xi": float(res.xi),
                    "error_rate": float(res.error_rate),
                    "price_change": float(res.price_change),
                }
            )
    return {"models": models}


def metrics_payload(
    importances: Iterable[FactorImportance],
    sensitivities: Iterable[SensitivityScore] = (),
    stabilities: Iterable[StabilityScore] = (),
) -> dict:
    return {
        "importance": [
            {
                "stock_id": i.stock_id,
                "cycle": i.cycle,
                "factor": i.factor,
                "weight": float(i.weight),
                "mean_value": float(i.mean_value),
                "contribution": float(i.contribution),
            }
            for i in importances
        ],
        "sensitivity": [
            {
                "stock_id": s.stock_id,
                "cycle": s.cycle,
                "factor": s.factor,
                "sensitivity": float(s.sensitivity),
            }
            for s in sensitivities
        ],
        "stability": [
            {"stock_id": s.stock_id, "factor": s.factor, "flips": int(s.flips)}
            for s in stabilities
        ],
    }


def aggregates_payload(aggregates: Iterable[AggregateImportance]) -> list[dict]:
    return [
        {
            "cycle": a.cycle,
            "factor": a.factor,
            "metric_kind": a.metric_kind,
            "positive_mass": float(a.positive_mass),
            "negative_mass": float(a.negative_mass),
        }
        for a in aggregates
    ]


def _curve_payload(days, daily, cumulative, calendar: TradingCalendar) -> dict:
    return {
        "days": [int(d) for d in days],
        "dates": [calendar.date_of(int(d)).isoformat() for d in days],
        "daily": [float(v) for v in daily],
        "cumulative": [float(v) for v in cumulative],
    }


def backtest_payload(result: BacktestResult, calendar: TradingCalendar) -> dict:
    out = {
        "spec": {
            "name": result.spec.name,
            "stock_ids": list(result.spec.stock_ids),
            "factor_ids": list(result.spec.factor_ids),
            "period": list(result.spec.period),
            "variant": result.spec.variant,
        },
        "portfolio": _curve_payload(
            result.days, result.portfolio_daily, result.portfolio_cumulative, calendar
        ),
        "stocks": {
            sid: _curve_payload(
                result.days, result.stock_daily[sid], result.stock_cumulative[sid],
                calendar,
            )
            for sid in sorted(result.stock_daily)
        },
        "benchmark": _curve_payload(
            result.days, result.benchmark_daily, result.benchmark_cumulative, calendar
        ),
        "outlook": {
            "days": [int(d) for d in result.outlook.days],
            "dates": [
                calendar.date_of(int(d)).isoformat() for d in result.outlook.days
            ],
            "predicted": [float(v) for v in result.outlook.predicted],
            "daily": [float(v) for v in result.outlook.strategy_daily],
            "cumulative": [float(v) for v in result.outlook.cumulative],
        },
        "summary": {k: float(v) for k, v in result.summary.items()},
    }
    return out


def backtest_list_payload(results: list[BacktestResult], calendar) -> dict:
    return {"results": [backtest_payload(r, calendar) for r in results]}


def curves_csv_text(result: BacktestResult, calendar: TradingCalendar) -> str:
    """date,portfolio,benchmark,outlook rows; each column only where defined."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "portfolio", "benchmark", "outlook"])
    for i, day in enumerate(result.days):
        w.writerow(
            [
                calendar.date_of(int(day)).isoformat(),
                repr(float(result.portfolio_cumulative[i])),
                repr(float(result.benchmark_cumulative[i])),
                "",
            ]
        )
    for i, day in enumerate(result.outlook.days):
        w.writerow(
            [
                calendar.date_of(int(day)).isoformat(),
                "",
                "",
                repr(float(result.outlook.cumulative[i])),
            ]
        )
    return buf.getvalue()
