"""Deterministic synthetic market panels with planted sparse return structure.

Each stock gets a sparse weight vector over the factor columns (only
``sparsity`` entries are nonzero) and its day-(t+1) return is the weighted
sum of the day-t factor row plus Gaussian noise. Closes compound from 100.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .data import MarketDataset, TradingCalendar, build_dataset
from .errors import InvalidConfig
from .registry import DEFAULT_REGISTRY, FACTOR_TYPES


@dataclass(frozen=True)
class SyntheticConfig:
    n_stocks: int = 10
    n_sectors: int = 2
    n_days: int = 330
    n_factors: int = 20
    sparsity: int = 3
    noise_sigma: float = 0.01
    seed: int = 0
    # Magnitude of each planted weight (entries are +/- this value). Factor
    # values are unit-variance, so this is roughly the per-factor daily return
    # scale; large values make 1 + return go nonpositive and generation fail.
    weight_magnitude: float = 0.5
    # Per-block relative drift of planted weights: block c uses
    # base * (1 + drift_rate * c), blocks of cycle_days days.
    drift_rate: float = 0.0
    cycle_days: int = 21
    # One support set for every stock (signs stay per-stock) instead of an
    # independent draw per stock.
    shared_support: bool = False
    start: date = date(2015, 1, 5)


@dataclass(frozen=True)
class PlantedStock:
    support: tuple[str, ...]
    base_weights: dict[str, float]
    planted_returns: np.ndarray

    def weight_vector(self, factor_names: tuple[str, ...]) -> np.ndarray:
        return np.array([self.base_weights.get(n, 0.0) for n in factor_names])


@dataclass(frozen=True)
class PlantedWeights:
    config: SyntheticConfig
    factor_names: tuple[str, ...]
    stocks: dict[str, PlantedStock] = field(default_factory=dict)


def _business_days(start: date, n: int) -> tuple[date, ...]:
    out: list[date] = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return tuple(out)


def synthetic_factor_names(n_factors: int) -> tuple[str, ...]:
    """First n registry names, or generic typed names past the registry size."""
    if n_factors <= len(DEFAULT_REGISTRY):
        return DEFAULT_REGISTRY.names[:n_factors]
    extra = tuple(f"f{i:03d}" for i in range(len(DEFAULT_REGISTRY), n_factors))
    return DEFAULT_REGISTRY.names + extra


def synthetic_factor_types(names: tuple[str, ...]) -> dict[str, str]:
    types = {}
    for i, n in enumerate(names):
        if n in DEFAULT_REGISTRY:
            types[n] = DEFAULT_REGISTRY.type_of(n)
        else:
            types[n] = FACTOR_TYPES[i % len(FACTOR_TYPES)]
    return types


def generate_synthetic(config: SyntheticConfig) -> tuple[MarketDataset, PlantedWeights]:
    """Generate a dataset plus its planted ground truth; bit-stable per seed."""
    c = config
    if c.n_stocks < 1 or c.n_sectors < 1 or c.n_factors < 1:
        raise InvalidConfig("n_stocks, n_sectors, n_factors must be positive")
    if c.sparsity < 1 or c.sparsity > c.n_factors:
        raise InvalidConfig(f"sparsity {c.sparsity} must be in [1, {c.n_factors}]")
    if c.n_sectors > c.n_stocks:
        raise InvalidConfig("more sectors than stocks")
    if c.n_days < 2:
        raise InvalidConfig("need at least 2 days")
    if c.noise_sigma < 0 or c.weight_magnitude <= 0 or c.cycle_days < 1:
        raise InvalidConfig("noise_sigma >= 0, weight_magnitude > 0, cycle_days >= 1")

    rng = np.random.default_rng(c.seed)
    names = synthetic_factor_names(c.n_factors)
    types = synthetic_factor_types(names)
    calendar = TradingCalendar(dates=_business_days(c.start, c.n_days))

    stock_ids = [f"{i + 1:06d}.SY" for i in range(c.n_stocks)]
    sector_by_stock = {
        sid: f"SEC{(i % c.n_sectors) + 1:02d}" for i, sid in enumerate(stock_ids)
    }

    closes: dict[str, np.ndarray] = {}
    values: dict[str, np.ndarray] = {}
    planted: dict[str, PlantedStock] = {}
    common_support = (
        np.sort(rng.choice(c.n_factors, size=c.sparsity, replace=False))
        if c.shared_support
        else None
    )
    for sid in stock_ids:
        X = rng.standard_normal((c.n_days, c.n_factors))
        if common_support is not None:
            support = common_support
        else:
            support = np.sort(rng.choice(c.n_factors, size=c.sparsity, replace=False))
        signs = rng.choice((-1.0, 1.0), size=c.sparsity)
        base = np.zeros(c.n_factors)
        base[support] = signs * c.weight_magnitude
        noise = rng.standard_normal(c.n_days) * c.noise_sigma

        y = np.zeros(c.n_days)
        for t in range(1, c.n_days):  # return of day t+1 (0-based t) uses row t-1
            block = (t - 1) // c.cycle_days
            w_t = base * (1.0 + c.drift_rate * block)
            y[t] = float(w_t @ X[t - 1]) + noise[t]

        growth = 1.0 + y
        if np.min(growth) <= 1e-9:
            raise InvalidConfig(
                f"stock {sid}: planted return <= -100% on some day; lower "
                "weight_magnitude, sparsity, or noise_sigma"
            )
        closes[sid] = 100.0 * np.cumprod(growth)
        values[sid] = X
        planted[sid] = PlantedStock(
            support=tuple(names[j] for j in support),
            base_weights={names[j]: float(base[j]) for j in support},
            planted_returns=y,
        )

    dataset = build_dataset(calendar, sector_by_stock, closes, names, types, values)
    return dataset, PlantedWeights(config=c, factor_names=names, stocks=planted)
