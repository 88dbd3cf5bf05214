"""HTTP API over the engine: dataset registry, analyses, backtests.

Responses are serialized with the canonical JSON writer so identical requests
against identical dataset content produce byte-identical bodies; repeated
analysis requests are served from an LRU cache and flagged with an
``X-Cache: hit`` header (the body never changes between fresh and cached).
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import artifacts
from .backtest import DEFAULT_HORIZON, PortfolioSpec, get_strategy, run_backtest
from .data import MarketDataset, load_dataset
from .errors import (
    EmptyScope,
    UnknownDataset,
    HorizonExceedsData,
    IndivisiblePeriod,
    InsufficientHistory,
    InvalidConfig,
    InvalidSpec,
    MalformedRow,
    MissingDay,
    MissingFile,
    NonFiniteInput,
    TooFewSamples,
    UnknownFactor,
    UnknownStock,
)
from .metrics import (
    METRIC_KINDS,
    SensitivityCache,
    aggregate_importance,
    compute_importances,
    stability_scores,
)
from .registry import DEFAULT_REGISTRY
from .rolling import partition_cycles, rolling_fit
from .solver import VARIANTS, ElasticNetConfig

_LOAD_ERRORS = (MissingFile, MalformedRow, MissingDay, UnknownFactor)
_REQUEST_ERRORS = (
    IndivisiblePeriod,
    InsufficientHistory,
    InvalidConfig,
    InvalidSpec,
    EmptyScope,
    TooFewSamples,
    UnknownStock,
    HorizonExceedsData,
    NonFiniteInput,
)


@dataclass(frozen=True)
class ServiceConfig:
    train_days: int = 200
    cycle_days: int = 21
    horizon: int = DEFAULT_HORIZON
    lambda_ratio: float = 0.1
    jobs: int = 1
    cache_size: int = 128
    strict_factors: bool = True


class DatasetRegistry:
    """In-memory dataset store with content-hash ids; writes serialized."""

    def __init__(self, strict_factors: bool = True):
        self._lock = threading.Lock()
        self._by_id: dict[str, MarketDataset] = {}
        self._strict = strict_factors

    @staticmethod
    def content_id(prices: str, factors: str, sectors: str) -> str:
        h = hashlib.sha256()
        for tag, text in (("prices", prices), ("factors", factors), ("sectors", sectors)):
            h.update(tag.encode())
            h.update(b"\x00")
            h.update(text.encode("utf-8"))
            h.update(b"\x00")
        return "ds-" + h.hexdigest()[:16]

    def put_csv(self, prices: str, factors: str, sectors: str, tmp_dir: Path) -> tuple[str, MarketDataset]:
        dataset_id = self.content_id(prices, factors, sectors)
        with self._lock:
            hit = self._by_id.get(dataset_id)
        if hit is not None:
            return dataset_id, hit
        tmp_dir.mkdir(parents=True, exist_ok=True)
        paths = {}
        for name, text in (("prices", prices), ("factors", factors), ("sectors", sectors)):
            p = tmp_dir / f"{dataset_id}-{name}.csv"
            p.write_text(text, encoding="utf-8")
            paths[name] = p
        try:
            dataset = load_dataset(
                paths["prices"], paths["factors"], paths["sectors"],
                strict_factors=self._strict,
            )
        finally:
            for p in paths.values():
                p.unlink(missing_ok=True)
        with self._lock:
            self._by_id.setdefault(dataset_id, dataset)
            return dataset_id, self._by_id[dataset_id]

    def get(self, dataset_id: str) -> MarketDataset | None:
        with self._lock:
            return self._by_id.get(dataset_id)


def _json_response(payload, status_code: int = 200, headers: dict | None = None) -> Response:
    return Response(
        content=artifacts.canonical_json_bytes(payload),
        media_type="application/json",
        status_code=status_code,
        headers=headers,
    )


def _error_response(exc: Exception, status_code: int, extra: dict | None = None) -> Response:
    payload = {"error": type(exc).__name__, "detail": str(exc)}
    if extra:
        payload.update(extra)
    return _json_response(payload, status_code=status_code)


def _dataset_summary(dataset_id: str, dataset: MarketDataset) -> dict:
    return {
        "dataset_id": dataset_id,
        "stocks": list(dataset.stock_ids()),
        "sectors": {k: list(v) for k, v in dataset.sectors.items()},
        "factors": list(dataset.factors.factor_names),
        "calendar": {
            "start": dataset.calendar.dates[0].isoformat(),
            "end": dataset.calendar.dates[-1].isoformat(),
            "days": len(dataset.calendar),
        },
    }


def _parse_iso_date(text, field_name: str) -> date:
    if not isinstance(text, str):
        raise InvalidSpec(f"{field_name} must be an ISO date string")
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise InvalidSpec(f"{field_name}: bad ISO date {text!r}") from None


def _resolve_period(dataset: MarketDataset, period, cycle_days: int) -> tuple[int, int, dict]:
    """Map a date period to day indices, shrinking to a cycle multiple."""
    if not isinstance(period, dict) or "start_date" not in period or "end_date" not in period:
        raise InvalidSpec("period must be {start_date, end_date}")
    start_d = _parse_iso_date(period["start_date"], "start_date")
    end_d = _parse_iso_date(period["end_date"], "end_date")
    try:
        start = dataset.calendar.day_of(start_d)
        end = dataset.calendar.day_of(end_d)
    except MissingDay as exc:
        raise InvalidSpec(str(exc)) from None
    if end < start:
        raise InvalidSpec("end_date before start_date")
    length = end - start + 1
    effective_len = (length // cycle_days) * cycle_days
    if effective_len == 0:
        raise InvalidSpec(
            f"period holds {length} trading days, shorter than one {cycle_days}-day cycle"
        )
    effective_end = start + effective_len - 1
    adjustment = {
        "requested_end_date": end_d.isoformat(),
        "effective_end_date": dataset.calendar.date_of(effective_end).isoformat(),
        "days_dropped": length - effective_len,
    }
    return start, effective_end, adjustment


def _resolve_stocks(dataset: MarketDataset, body: dict) -> list[str]:
    chosen: set[str] = set()
    stock_ids = body.get("stock_ids") or []
    sectors = body.get("sectors") or []
    if not isinstance(stock_ids, list) or not isinstance(sectors, list):
        raise InvalidSpec("stock_ids and sectors must be lists")
    known = set(dataset.stock_ids())
    for sid in stock_ids:
        if sid not in known:
            raise UnknownStock(f"unknown stock {sid!r}")
        chosen.add(sid)
    for sec in sectors:
        if sec not in dataset.sectors:
            raise InvalidSpec(f"unknown sector {sec!r}")
        chosen.update(dataset.sectors[sec])
    if not chosen:
        raise InvalidSpec("no stocks selected: provide stock_ids and/or sectors")
    return sorted(chosen)


def _resolve_factors(dataset: MarketDataset, factors) -> tuple[str, ...] | None:
    if factors is None:
        return None
    if not isinstance(factors, list) or not factors:
        raise InvalidSpec("factors must be a nonempty list when present")
    panel = set(dataset.factors.factor_names)
    for f in factors:
        if f not in panel:
            raise UnknownFactor(f"factor {f!r} not in this dataset")
    return tuple(n for n in dataset.factors.factor_names if n in set(factors))


def create_app(config: ServiceConfig | None = None, tmp_dir: str | Path = "/tmp/factorlens") -> FastAPI:
    cfg = config or ServiceConfig()
    app = FastAPI(title="factorlens", docs_url=None, redoc_url=None)
    app.add_middleware(  # the web client may be served from another port
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    registry = DatasetRegistry(strict_factors=cfg.strict_factors)
    cache: OrderedDict[str, bytes] = OrderedDict()
    cache_lock = threading.Lock()
    sensitivity_cache = SensitivityCache()
    tmp_path = Path(tmp_dir)

    app.state.config = cfg
    app.state.registry = registry

    @app.get("/healthz")
    def healthz() -> Response:
        return _json_response({"status": "ok"})

    @app.get("/api/factors")
    def factors_registry() -> Response:
        return _json_response(
            {
                "factors": [
                    {"name": n, "type": DEFAULT_REGISTRY.type_of(n)}
                    for n in DEFAULT_REGISTRY.names
                ],
                "type_counts": DEFAULT_REGISTRY.type_counts(),
            }
        )

    @app.post("/api/datasets")
    async def post_dataset(request: Request) -> Response:
        body = await request.json()
        if not isinstance(body, dict):
            return _error_response(MalformedRow("body must be a JSON object"), 400)
        inline_keys = ("prices_csv", "factors_csv", "sectors_csv")
        path_keys = ("prices_path", "factors_path", "sectors_path")
        try:
            if any(k in body for k in inline_keys):
                missing = [k for k in inline_keys if k not in body]
                if missing:
                    raise MissingFile(f"missing inline CSV fields: {missing}")
                texts = [body[k] for k in inline_keys]
            else:
                missing = [k for k in path_keys if k not in body]
                if missing:
                    raise MissingFile(f"missing file path fields: {missing}")
                texts = []
                for k in path_keys:
                    p = Path(body[k])
                    if not p.exists():
                        raise MissingFile(f"no such file: {p}")
                    texts.append(p.read_text(encoding="utf-8"))
            dataset_id, dataset = registry.put_csv(*texts, tmp_dir=tmp_path)
        except _LOAD_ERRORS as exc:
            return _error_response(exc, 400)
        return _json_response(_dataset_summary(dataset_id, dataset), status_code=201)

    @app.get("/api/datasets/{dataset_id}")
    def get_dataset(dataset_id: str) -> Response:
        dataset = registry.get(dataset_id)
        if dataset is None:
            return _error_response(UnknownDataset(f"unknown dataset {dataset_id!r}"), 404)
        return _json_response(_dataset_summary(dataset_id, dataset))

    @app.get("/api/datasets/{dataset_id}/sectors")
    def get_sectors(dataset_id: str) -> Response:
        dataset = registry.get(dataset_id)
        if dataset is None:
            return _error_response(UnknownDataset(f"unknown dataset {dataset_id!r}"), 404)
        return _json_response(
            {"sectors": {k: list(v) for k, v in dataset.sectors.items()}}
        )

    @app.post("/api/analysis")
    async def post_analysis(request: Request) -> Response:
        body = await request.json()
        if not isinstance(body, dict):
            return _error_response(InvalidSpec("body must be a JSON object"), 422)
        dataset_id = body.get("dataset_id")
        dataset = registry.get(dataset_id) if isinstance(dataset_id, str) else None
        if dataset is None:
            return _error_response(
                UnknownDataset(f"unknown dataset {dataset_id!r}"), 404
            )
        try:
            stocks = _resolve_stocks(dataset, body)
            start, end, adjustment = _resolve_period(
                dataset, body.get("period"), cfg.cycle_days
            )
            factor_subset = _resolve_factors(dataset, body.get("factors"))
            variant = body.get("variant", "lasso")
            if variant not in VARIANTS:
                raise InvalidSpec(f"variant must be one of {VARIANTS}")
            metric_kind = body.get("metric_kind", "contribution")
            if metric_kind not in METRIC_KINDS:
                raise InvalidSpec(f"metric_kind must be one of {METRIC_KINDS}")
            with_sensitivity = bool(body.get("with_sensitivity", False))

            normalized = {
                "dataset_id": dataset_id,
                "stock_ids": stocks,
                "period": [start, end],
                "variant": variant,
                "factors": list(factor_subset) if factor_subset else None,
                "metric_kind": metric_kind,
                "with_sensitivity": with_sensitivity,
                "train_days": cfg.train_days,
                "cycle_days": cfg.cycle_days,
                "lambda_ratio": cfg.lambda_ratio,
            }
            cache_key = hashlib.sha256(
                artifacts.canonical_json_bytes(normalized)
            ).hexdigest()
            with cache_lock:
                hit = cache.get(cache_key)
                if hit is not None:
                    cache.move_to_end(cache_key)
            if hit is not None:
                return Response(
                    content=hit, media_type="application/json",
                    headers={"X-Cache": "hit"},
                )

            partition = partition_cycles(cfg.train_days, cfg.cycle_days, (start, end))
            solver_cfg = ElasticNetConfig(variant=variant, lambda_ratio=cfg.lambda_ratio)
            series = rolling_fit(
                dataset, stocks, partition, solver_cfg,
                factor_names=factor_subset, jobs=cfg.jobs,
            )
            importances = []
            for sid in sorted(series):
                importances.extend(compute_importances(series[sid]))
            sensitivities = []
            if with_sensitivity:
                for sid in sorted(series):
                    s = series[sid]
                    for res in s.cycles:
                        for name in s.factor_names:
                            sensitivities.append(
                                sensitivity_cache.get_or_compute(
                                    dataset, s, solver_cfg, res.cycle.index, name
                                )
                            )
            aggregates = []
            for cyc in partition.cycles:
                aggregates.extend(
                    aggregate_importance(
                        importances, cyc.index, metric_kind,
                        factor_order=factor_subset or dataset.factors.factor_names,
                    )
                )
            payload = {
                "dataset_id": dataset_id,
                "request": normalized,
                "adjustment": adjustment,
                "partition": artifacts.partition_payload(partition, dataset.calendar),
                "models": artifacts.models_payload(series),
                "metrics": artifacts.metrics_payload(
                    importances, sensitivities, stability_scores(importances)
                ),
                "aggregates": artifacts.aggregates_payload(aggregates),
            }
        except _REQUEST_ERRORS as exc:
            return _error_response(exc, 422)
        except UnknownFactor as exc:
            return _error_response(exc, 422)
        body_bytes = artifacts.canonical_json_bytes(payload)
        with cache_lock:
            cache[cache_key] = body_bytes
            while len(cache) > cfg.cache_size:
                cache.popitem(last=False)
        return Response(
            content=body_bytes, media_type="application/json",
            headers={"X-Cache": "miss"},
        )

    @app.post("/api/backtest")
    async def post_backtest(request: Request) -> Response:
        body = await request.json()
        if not isinstance(body, dict):
            return _error_response(InvalidSpec("body must be a JSON object"), 422)
        dataset_id = body.get("dataset_id")
        dataset = registry.get(dataset_id) if isinstance(dataset_id, str) else None
        if dataset is None:
            return _error_response(
                UnknownDataset(f"unknown dataset {dataset_id!r}"), 404
            )
        specs = body.get("specs")
        if not isinstance(specs, list) or not specs:
            return _error_response(InvalidSpec("specs must be a nonempty list"), 422)
        results = []
        for i, raw in enumerate(specs):
            try:
                if not isinstance(raw, dict):
                    raise InvalidSpec("spec must be a JSON object")
                stock_ids = raw.get("stock_ids") or []
                factor_ids = raw.get("factor_ids") or []
                if not isinstance(stock_ids, list) or not stock_ids:
                    raise InvalidSpec("stock_ids must be a nonempty list")
                if not isinstance(factor_ids, list) or not factor_ids:
                    raise InvalidSpec("factor_ids must be a nonempty list")
                start, end, _ = _resolve_period(
                    dataset, raw.get("period"), cfg.cycle_days
                )
                variant = raw.get("variant", "lasso")
                if variant not in VARIANTS:
                    raise InvalidSpec(f"variant must be one of {VARIANTS}")
                strategy = get_strategy(raw.get("strategy", "long_or_cash"))
                horizon = raw.get("horizon", cfg.horizon)
                if not isinstance(horizon, int) or horizon < 0:
                    raise InvalidSpec("horizon must be a nonnegative integer")
                spec = PortfolioSpec(
                    name=str(raw.get("name", f"portfolio-{i + 1}")),
                    stock_ids=tuple(sorted(set(stock_ids))),
                    factor_ids=tuple(
                        n for n in dataset.factors.factor_names
                        if n in set(factor_ids)
                    ) or tuple(factor_ids),
                    period=(start, end),
                    variant=variant,
                )
                partition = partition_cycles(cfg.train_days, cfg.cycle_days, (start, end))
                solver_cfg = ElasticNetConfig(variant=variant, lambda_ratio=cfg.lambda_ratio)
                result = run_backtest(
                    spec, dataset, partition, config=solver_cfg,
                    strategy=strategy, horizon=horizon, jobs=cfg.jobs,
                )
            except (*_REQUEST_ERRORS, UnknownFactor) as exc:
                return _error_response(exc, 422, extra={"index": i})
            results.append(result)
        return _json_response(
            artifacts.backtest_list_payload(results, dataset.calendar)
        )

    return app
