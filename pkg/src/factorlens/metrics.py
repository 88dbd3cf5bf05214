"""Per-factor diagnostics over fitted stock models.

Importance has three flavours per stock x cycle x factor: the fitted weight,
the mean normalized factor value over the cycle, and the contribution (weight
times the summed factor values the predictor consumed, so contributions plus
D * bias add up exactly to the cycle's summed predictions). Sensitivity
measures the prediction-error increase when a factor is removed and the model
refit; stability counts contribution sign flips across cycles.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .data import MarketDataset, normalize_matrix
from .errors import InvalidConfig, UnknownFactor
from .rolling import StockModelSeries, mean_squared_error
from .solver import ElasticNetConfig, fit_elastic_net

SIGN_EPS = 1e-12

METRIC_KINDS = ("weight", "value", "contribution")


@dataclass(frozen=True)
class FactorImportance:
    stock_id: str
    cycle: int
    factor: str
    weight: float
    mean_value: float
    contribution: float


@dataclass(frozen=True)
class SensitivityScore:
    stock_id: str
    cycle: int
    factor: str
    sensitivity: float  # (xi_without_factor - xi)+, never negative


@dataclass(frozen=True)
class StabilityScore:
    stock_id: str
    factor: str
    flips: int


@dataclass(frozen=True)
class AggregateImportance:
    cycle: int
    factor: str
    metric_kind: str
    positive_mass: float
    negative_mass: float


def factor_contribution(
    series: StockModelSeries, cycle_index: int, factor: str
) -> FactorImportance:
    """Importance triple for one stock x cycle x factor."""
    res = series.result(cycle_index)
    try:
        j = series.factor_names.index(factor)
    except ValueError:
        raise UnknownFactor(
            f"factor {factor!r} not in the fitted set for {series.stock_id}"
        ) from None
    w = float(res.cycle_fit.fit.weights[j])
    col = res.predictor_rows[:, j]
    return FactorImportance(
        stock_id=series.stock_id,
        cycle=cycle_index,
        factor=factor,
        weight=w,
        mean_value=float(col.mean()),
        contribution=w * float(col.sum()),
    )


def compute_importances(series: StockModelSeries) -> list[FactorImportance]:
    """All importance triples for one stock, cycle-major then factor order."""
    out = []
    for res in series.cycles:
        weights = res.cycle_fit.fit.weights
        sums = res.predictor_rows.sum(axis=0)
        means = res.predictor_rows.mean(axis=0)
        for j, name in enumerate(series.factor_names):
            out.append(
                FactorImportance(
                    stock_id=series.stock_id,
                    cycle=res.cycle.index,
                    factor=name,
                    weight=float(weights[j]),
                    mean_value=float(means[j]),
                    contribution=float(weights[j]) * float(sums[j]),
                )
            )
    return out


def factor_sensitivity(
    dataset: MarketDataset,
    series: StockModelSeries,
    config: ElasticNetConfig,
    cycle_index: int,
    factor: str,
) -> SensitivityScore:
    """Refit the cycle without one factor and score the error increase.

    The refit reuses the original fit's penalty (lambda is not re-selected)
    and warm-starts from the original weights, so removing an inactive factor
    reproduces the original optimum and scores ~0.
    """
    res = series.result(cycle_index)
    try:
        j = series.factor_names.index(factor)
    except ValueError:
        raise UnknownFactor(
            f"factor {factor!r} not in the fitted set for {series.stock_id}"
        ) from None
    kept = tuple(n for n in series.factor_names if n != factor)
    cycle = res.cycle
    X_raw = dataset.factor_window(
        series.stock_id, cycle.train_x_start, cycle.train_x_end, kept
    )
    y = dataset.return_window(
        series.stock_id, cycle.train_y_start, cycle.train_y_end
    )
    X_norm, _ = normalize_matrix(X_raw)
    w0 = np.delete(res.cycle_fit.fit.weights, j)
    refit = fit_elastic_net(
        X_norm, y,
        res.cycle_fit.fit.lambda_used,
        res.cycle_fit.fit.alpha,
        tol=config.tol,
        max_sweeps=config.max_sweeps,
        w0=w0,
    )
    rows = np.delete(res.predictor_rows, j, axis=1)
    preds = rows @ refit.weights + refit.bias
    xi_without = mean_squared_error(preds, res.actual)
    return SensitivityScore(
        stock_id=series.stock_id,
        cycle=cycle_index,
        factor=factor,
        sensitivity=max(xi_without - res.xi, 0.0),
    )


class SensitivityCache:
    """Idempotent concurrent cache keyed by (stock, cycle, factor, config)."""

    def __init__(self):
        self._store: dict[tuple, SensitivityScore] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(series: StockModelSeries, config: ElasticNetConfig, cycle: int, factor: str):
        cfg = (
            config.variant, config.lambda_ratio, config.lambda_value,
            config.max_sweeps, config.tol, config.cv_folds,
            config.cv_grid_size, config.cv_lambda_min_ratio,
        )
        return (series.stock_id, cycle, factor, series.factor_names, cfg)

    def get_or_compute(
        self,
        dataset: MarketDataset,
        series: StockModelSeries,
        config: ElasticNetConfig,
        cycle_index: int,
        factor: str,
    ) -> SensitivityScore:
        k = self.key(series, config, cycle_index, factor)
        with self._lock:
            hit = self._store.get(k)
        if hit is not None:
            return hit
        score = factor_sensitivity(dataset, series, config, cycle_index, factor)
        with self._lock:
            self._store.setdefault(k, score)
            return self._store[k]


def factor_stability(contributions: Iterable[float]) -> int:
    """Count sign flips, carrying the last nonzero sign across ~zero entries."""
    flips = 0
    last = 0
    for c in contributions:
        if abs(c) < SIGN_EPS:
            continue
        sign = 1 if c > 0 else -1
        if last != 0 and sign != last:
            flips += 1
        last = sign
    return flips


def stability_scores(
    importances: Iterable[FactorImportance],
) -> list[StabilityScore]:
    """Per (stock, factor) flip counts over the cycle-ordered contributions."""
    series: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for imp in importances:
        series.setdefault((imp.stock_id, imp.factor), []).append(
            (imp.cycle, imp.contribution)
        )
    out = []
    for (sid, factor), entries in sorted(series.items()):
        entries.sort()
        out.append(
            StabilityScore(
                stock_id=sid,
                factor=factor,
                flips=factor_stability(c for _, c in entries),
            )
        )
    return out


def _metric(imp: FactorImportance, metric_kind: str) -> float:
    if metric_kind == "weight":
        return imp.weight
    if metric_kind == "value":
        return imp.mean_value
    if metric_kind == "contribution":
        return imp.contribution
    raise InvalidConfig(f"metric_kind must be one of {METRIC_KINDS}")


def aggregate_importance(
    importances: Iterable[FactorImportance],
    cycle_index: int,
    metric_kind: str = "contribution",
    factor_order: Optional[tuple[str, ...]] = None,
) -> list[AggregateImportance]:
    """Positive/negative mass of the chosen metric per factor, across stocks."""
    pos: dict[str, float] = {}
    neg: dict[str, float] = {}
    seen: list[str] = []
    for imp in importances:
        if imp.cycle != cycle_index:
            continue
        if imp.factor not in pos:
            pos[imp.factor] = 0.0
            neg[imp.factor] = 0.0
            seen.append(imp.factor)
        v = _metric(imp, metric_kind)
        if v > 0:
            pos[imp.factor] += v
        else:
            neg[imp.factor] += v
    order = [n for n in factor_order if n in pos] if factor_order else seen
    return [
        AggregateImportance(
            cycle=cycle_index,
            factor=name,
            metric_kind=metric_kind,
            positive_mass=pos[name],
            negative_mass=neg[name],
        )
        for name in order
    ]


@dataclass(frozen=True)
class TopFactors:
    polarity: str
    factors: tuple[FactorImportance, ...]
    remainder: float  # summed |contribution| of same-polarity factors past top-k


def top_k_factors(
    importances: Iterable[FactorImportance],
    k: int = 5,
    polarity: str = "positive",
    factor_order: Optional[tuple[str, ...]] = None,
) -> TopFactors:
    """Strongest factors of one polarity for a stock x cycle glyph.

    Sorted by |contribution| descending; ties resolve to registry order. The
    remainder is the mass that lands in the glyph's grey center region.
    """
    if polarity not in ("positive", "negative"):
        raise InvalidConfig("polarity must be 'positive' or 'negative'")
    pool = [
        imp
        for imp in importances
        if (imp.contribution > 0) == (polarity == "positive")
        and abs(imp.contribution) >= SIGN_EPS
    ]
    rank = {n: i for i, n in enumerate(factor_order)} if factor_order else {}
    pool.sort(key=lambda imp: (-abs(imp.contribution), rank.get(imp.factor, 0), imp.factor))
    top = tuple(pool[:k])
    remainder = float(sum(abs(imp.contribution) for imp in pool[k:]))
    return TopFactors(polarity=polarity, factors=top, remainder=remainder)
