"""Aligned price/factor panels: loading, validation, serialization, normalization.

Day indices are 1-based everywhere; the calendar maps them to dates. Datasets
are immutable after construction (arrays are marked read-only) so they can be
shared across parallel workers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedRow,
    MissingDay,
    MissingFile,
    UnknownFactor,
    UnknownStock,
)
from .registry import DEFAULT_REGISTRY, FactorRegistry

DEGENERATE_STD = 1e-12


@dataclass(frozen=True)
class TradingCalendar:
    """Ordered trading dates; the k-th date has 1-based day index k."""

    dates: tuple[date, ...]
    _index: dict[date, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise MalformedRow(f"calendar dates not strictly increasing at {b}")
        object.__setattr__(self, "_index", {d: i + 1 for i, d in enumerate(self.dates)})

    def __len__(self) -> int:
        return len(self.dates)

    def day_of(self, d: date) -> int:
        """1-based index of a date; raises MissingDay if not a trading day."""
        try:
            return self._index[d]
        except KeyError:
            raise MissingDay(f"{d.isoformat()} is not in the trading calendar") from None

    def date_of(self, day: int) -> date:
        if not 1 <= day <= len(self.dates):
            raise MissingDay(f"day index {day} outside calendar [1, {len(self.dates)}]")
        return self.dates[day - 1]


@dataclass(frozen=True)
class StockRecord:
    """Per-stock close prices and fractional daily returns over the calendar.

    daily_return[0] (day 1) has no prior close and is fixed at 0.0; for day
    t >= 2, daily_return equals close[t]/close[t-1] - 1.
    """

    stock_id: str
    sector: str
    close: np.ndarray
    daily_return: np.ndarray


@dataclass(frozen=True)
class FactorPanel:
    """Per-stock matrices of raw factor values, one row per calendar day."""

    factor_names: tuple[str, ...]
    factor_types: dict[str, str]
    values: dict[str, np.ndarray]

    def column_index(self, name: str) -> int:
        try:
            return self.factor_names.index(name)
        except ValueError:
            raise UnknownFactor(f"unknown factor {name!r}") from None


@dataclass(frozen=True)
class MarketDataset:
    calendar: TradingCalendar
    stocks: tuple[StockRecord, ...]
    factors: FactorPanel
    sectors: dict[str, tuple[str, ...]]
    _by_id: dict[str, StockRecord] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {s.stock_id: s for s in self.stocks})

    @property
    def n_days(self) -> int:
        return len(self.calendar)

    def stock_ids(self) -> tuple[str, ...]:
        return tuple(s.stock_id for s in self.stocks)

    def stock(self, stock_id: str) -> StockRecord:
        try:
            return self._by_id[stock_id]
        except KeyError:
            raise UnknownStock(f"unknown stock {stock_id!r}") from None

    def return_window(self, stock_id: str, start_day: int, end_day: int) -> np.ndarray:
        """Daily returns for days start_day..end_day inclusive (1-based)."""
        self._check_days(start_day, end_day)
        return self.stock(stock_id).daily_return[start_day - 1 : end_day]

    def close_window(self, stock_id: str, start_day: int, end_day: int) -> np.ndarray:
        self._check_days(start_day, end_day)
        return self.stock(stock_id).close[start_day - 1 : end_day]

    def factor_window(
        self,
        stock_id: str,
        start_day: int,
        end_day: int,
        factor_names: tuple[str, ...] | None = None,
    ) -> np.ndarray:
        """Raw factor rows for days start_day..end_day, optionally column-restricted."""
        self._check_days(start_day, end_day)
        if stock_id not in self._by_id:
            raise UnknownStock(f"unknown stock {stock_id!r}")
        block = self.factors.values[stock_id][start_day - 1 : end_day]
        if factor_names is None:
            return block
        cols = [self.factors.column_index(n) for n in factor_names]
        return block[:, cols]

    def _check_days(self, start_day: int, end_day: int) -> None:
        if not (1 <= start_day <= end_day <= self.n_days):
            raise MissingDay(
                f"day range [{start_day}, {end_day}] outside calendar [1, {self.n_days}]"
            )

    def sector_of(self, stock_id: str) -> str:
        return self.stock(stock_id).sector

    def equals(self, other: "MarketDataset") -> bool:
        if self.calendar.dates != other.calendar.dates:
            return False
        if self.stock_ids() != other.stock_ids():
            return False
        if self.sectors != other.sectors:
            return False
        if self.factors.factor_names != other.factors.factor_names:
            return False
        if self.factors.factor_types != other.factors.factor_types:
            return False
        for sid in self.stock_ids():
            a, b = self.stock(sid), other.stock(sid)
            if a.sector != b.sector:
                return False
            if not np.array_equal(a.close, b.close):
                return False
            if not np.array_equal(a.daily_return, b.daily_return):
                return False
            if not np.array_equal(self.factors.values[sid], other.factors.values[sid]):
                return False
        return True


def returns_from_closes(close: np.ndarray) -> np.ndarray:
    """Fractional daily returns; day 1 is 0.0 by convention."""
    out = np.zeros_like(close)
    out[1:] = close[1:] / close[:-1] - 1.0
    return out


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def build_dataset(
    calendar: TradingCalendar,
    sector_by_stock: dict[str, str],
    closes: dict[str, np.ndarray],
    factor_names: tuple[str, ...],
    factor_types: dict[str, str],
    factor_values: dict[str, np.ndarray],
) -> MarketDataset:
    """Assemble and validate a MarketDataset from already-aligned arrays."""
    n_days = len(calendar)
    stock_ids = sorted(sector_by_stock)
    if set(closes) != set(stock_ids) or set(factor_values) != set(stock_ids):
        missing = set(stock_ids) ^ (set(closes) & set(factor_values))
        raise MissingDay(f"stocks without complete data: {sorted(missing)}")
    stocks = []
    for sid in stock_ids:
        close = np.asarray(closes[sid], dtype=np.float64)
        if close.shape != (n_days,):
            raise MissingDay(f"stock {sid}: {close.shape[0]} closes for {n_days} days")
        if not np.all(np.isfinite(close)) or np.any(close <= 0):
            raise MalformedRow(f"stock {sid}: closes must be finite and positive")
        vals = np.asarray(factor_values[sid], dtype=np.float64)
        if vals.shape != (n_days, len(factor_names)):
            raise MissingDay(
                f"stock {sid}: factor matrix {vals.shape} != ({n_days}, {len(factor_names)})"
            )
        if not np.all(np.isfinite(vals)):
            raise MalformedRow(f"stock {sid}: non-finite factor values")
        stocks.append(
            StockRecord(
                stock_id=sid,
                sector=sector_by_stock[sid],
                close=_freeze(close),
                daily_return=_freeze(returns_from_closes(close)),
            )
        )
    sectors: dict[str, list[str]] = {}
    for sid in stock_ids:
        sectors.setdefault(sector_by_stock[sid], []).append(sid)
    panel = FactorPanel(
        factor_names=tuple(factor_names),
        factor_types=dict(factor_types),
        values={sid: _freeze(factor_values[sid]) for sid in stock_ids},
    )
    return MarketDataset(
        calendar=calendar,
        stocks=tuple(stocks),
        factors=panel,
        sectors={k: tuple(v) for k, v in sorted(sectors.items())},
    )


# ---------------------------------------------------------------------------
# CSV ingestion (formats: prices.csv, factors.csv wide, sectors.csv)
# ---------------------------------------------------------------------------


def _read_csv(path: str | Path) -> list[list[str]]:
    p = Path(path)
    if not p.exists():
        raise MissingFile(f"no such file: {p}")
    with p.open(newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def _parse_date(text: str, where: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise MalformedRow(f"{where}: bad ISO date {text!r}") from None


def _parse_float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise MalformedRow(f"{where}: bad number {text!r}") from None
    if not np.isfinite(v):
        raise MalformedRow(f"{where}: non-finite value {text!r}")
    return v


def load_dataset(
    prices_path: str | Path,
    factors_path: str | Path,
    sectors_path: str | Path,
    registry: FactorRegistry | None = None,
    strict_factors: bool = True,
) -> MarketDataset:
    """Load and validate the three-file CSV panel into a MarketDataset.

    Every stock must have a price row and a factor row for every calendar
    date (union of all dates seen); a gap is a MissingDay error, never NaN.
    With strict_factors, factor columns must exist in the registry.
    """
    registry = registry or DEFAULT_REGISTRY

    sector_rows = _read_csv(sectors_path)
    if not sector_rows or [c.strip() for c in sector_rows[0]] != ["stock_id", "sector"]:
        raise MalformedRow(f"{sectors_path}: expected header 'stock_id,sector'")
    sector_by_stock: dict[str, str] = {}
    for i, row in enumerate(sector_rows[1:], start=2):
        if len(row) != 2 or not row[0] or not row[1]:
            raise MalformedRow(f"{sectors_path} row {i}: expected 'stock_id,sector'")
        sid, sec = row
        if sid in sector_by_stock and sector_by_stock[sid] != sec:
            raise MalformedRow(f"{sectors_path} row {i}: stock {sid} in two sectors")
        sector_by_stock[sid] = sec
    if not sector_by_stock:
        raise MalformedRow(f"{sectors_path}: no stocks listed")

    price_rows = _read_csv(prices_path)
    if not price_rows or [c.strip() for c in price_rows[0]] != ["date", "stock_id", "close"]:
        raise MalformedRow(f"{prices_path}: expected header 'date,stock_id,close'")
    close_by_stock: dict[str, dict[date, float]] = {sid: {} for sid in sector_by_stock}
    all_dates: set[date] = set()
    for i, row in enumerate(price_rows[1:], start=2):
        where = f"{prices_path} row {i}"
        if len(row) != 3:
            raise MalformedRow(f"{where}: expected 3 columns")
        d = _parse_date(row[0], where)
        sid = row[1]
        if sid not in sector_by_stock:
            raise MalformedRow(f"{where}: stock {sid!r} not in sectors file")
        close = _parse_float(row[2], where)
        if close <= 0:
            raise MalformedRow(f"{where}: close must be positive, got {close}")
        if d in close_by_stock[sid]:
            raise MalformedRow(f"{where}: duplicate price for {sid} on {d}")
        close_by_stock[sid][d] = close
        all_dates.add(d)

    calendar = TradingCalendar(dates=tuple(sorted(all_dates)))
    if len(calendar) == 0:
        raise MalformedRow(f"{prices_path}: no price rows")
    for sid in sector_by_stock:
        for d in calendar.dates:
            if d not in close_by_stock[sid]:
                raise MissingDay(f"stock {sid} has no price on {d.isoformat()}")

    factor_rows = _read_csv(factors_path)
    if not factor_rows or len(factor_rows[0]) < 3 or factor_rows[0][:2] != ["date", "stock_id"]:
        raise MalformedRow(f"{factors_path}: expected header 'date,stock_id,<factors...>'")
    names = tuple(c.strip() for c in factor_rows[0][2:])
    if len(set(names)) != len(names):
        raise MalformedRow(f"{factors_path}: duplicate factor columns")
    types: dict[str, str] = {}
    for n in names:
        if n in registry:
            types[n] = registry.type_of(n)
        elif strict_factors:
            raise UnknownFactor(f"{factors_path}: column {n!r} not in factor registry")
        else:
            types[n] = "TransactionFriction"  # non-strict fallback typing
    n_days = len(calendar)
    values = {sid: np.full((n_days, len(names)), np.nan) for sid in sector_by_stock}
    seen = {sid: np.zeros(n_days, dtype=bool) for sid in sector_by_stock}
    for i, row in enumerate(factor_rows[1:], start=2):
        where = f"{factors_path} row {i}"
        if len(row) != 2 + len(names):
            raise MalformedRow(f"{where}: expected {2 + len(names)} columns")
        d = _parse_date(row[0], where)
        sid = row[1]
        if sid not in sector_by_stock:
            raise MalformedRow(f"{where}: stock {sid!r} not in sectors file")
        try:
            day = calendar.day_of(d)
        except MissingDay:
            raise MalformedRow(f"{where}: {d} is not a price calendar date") from None
        if seen[sid][day - 1]:
            raise MalformedRow(f"{where}: duplicate factor row for {sid} on {d}")
        values[sid][day - 1] = [_parse_float(v, where) for v in row[2:]]
        seen[sid][day - 1] = True
    for sid in sector_by_stock:
        if not seen[sid].all():
            missing = calendar.date_of(int(np.argmin(seen[sid])) + 1)
            raise MissingDay(f"stock {sid} has no factor row on {missing.isoformat()}")

    closes = {
        sid: np.array([close_by_stock[sid][d] for d in calendar.dates])
        for sid in sector_by_stock
    }
    return build_dataset(calendar, sector_by_stock, closes, names, types, values)


def save_dataset(dataset: MarketDataset, out_dir: str | Path) -> dict[str, Path]:
    """Write prices.csv / factors.csv / sectors.csv; floats as shortest repr."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "prices": out / "prices.csv",
        "factors": out / "factors.csv",
        "sectors": out / "sectors.csv",
    }

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "stock_id", "close"])
    for day, d in enumerate(dataset.calendar.dates):
        for sid in dataset.stock_ids():
            w.writerow([d.isoformat(), sid, repr(float(dataset.stock(sid).close[day]))])
    paths["prices"].write_text(buf.getvalue(), encoding="utf-8")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "stock_id", *dataset.factors.factor_names])
    for day, d in enumerate(dataset.calendar.dates):
        for sid in dataset.stock_ids():
            row = dataset.factors.values[sid][day]
            w.writerow([d.isoformat(), sid, *[repr(float(v)) for v in row]])
    paths["factors"].write_text(buf.getvalue(), encoding="utf-8")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stock_id", "sector"])
    for sid in dataset.stock_ids():
        w.writerow([sid, dataset.sector_of(sid)])
    paths["sectors"].write_text(buf.getvalue(), encoding="utf-8")
    return paths


# ---------------------------------------------------------------------------
# Training-window normalization (z-score, population std, no lookahead)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColumnStats:
    """Training-window mean/std for one factor column; degenerate = ~zero std."""

    mean: float
    std: float
    degenerate: bool


@dataclass(frozen=True)
class NormalizedColumn:
    values: np.ndarray
    stats: ColumnStats

    @property
    def degenerate(self) -> bool:
        return self.stats.degenerate


def window_stats(values: np.ndarray) -> ColumnStats:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise DimensionMismatch("normalization window must be 1-D with length >= 2")
    mean = float(v.mean())
    std = float(v.std())  # population std
    return ColumnStats(mean=mean, std=std, degenerate=std < DEGENERATE_STD)


def apply_stats(values: np.ndarray, stats: ColumnStats) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if stats.degenerate:
        return np.zeros_like(v)
    return (v - stats.mean) / stats.std


def normalize_window(values: np.ndarray) -> NormalizedColumn:
    """Z-score a factor column with its own (training-window) statistics.

    A column with population std below 1e-12 is flagged degenerate and maps
    to all zeros rather than raising.
    """
    stats = window_stats(values)
    return NormalizedColumn(values=apply_stats(values, stats), stats=stats)


def normalize_matrix(X: np.ndarray) -> tuple[np.ndarray, list[ColumnStats]]:
    """Column-wise normalize a training matrix; returns the per-column stats."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("training matrix must be 2-D")
    cols = []
    out = np.empty_like(X)
    for j in range(X.shape[1]):
        norm = normalize_window(X[:, j])
        out[:, j] = norm.values
        cols.append(norm.stats)
    return out, cols


def apply_matrix_stats(X: np.ndarray, stats: list[ColumnStats]) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(stats):
        raise DimensionMismatch(
            f"row width {X.shape} does not match {len(stats)} column stats"
        )
    out = np.empty_like(X)
    for j, st in enumerate(stats):
        out[:, j] = apply_stats(X[:, j], st)
    return out
